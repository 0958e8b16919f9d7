#include "hjn/skorokhod.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "hjn/parallel.hpp"

namespace hjn {

namespace {

double face_bound(const Domain& d, Face f) {
  const int axis = Domain::normal_axis(f);
  return (f == Face::Left || f == Face::Bottom) ? d.lower(axis) : d.upper(axis);
}

// Positive when x lies beyond the face's supporting line.
double excess(const Domain& d, Face f, Vec x) {
  const double s = (f == Face::Left || f == Face::Bottom) ? -1.0 : 1.0;
  return s * (x[Domain::normal_axis(f)] - face_bound(d, f));
}

struct Landing {
  Vec end;
  std::array<double, 4> face_l{};
};

// Lands free = eta + dt v back on the active faces. gamma is evaluated at the
// landing point, so the tangential coordinate is found by fixed point.
std::optional<Landing> project(Vec free, double dt, const Domain& d, const BoundaryData& b,
                               const std::vector<Face>& active) {
  Landing out;
  Vec end = d.clamp(free);
  for (int it = 0; it < 50; ++it) {
    std::array<Vec, 2> g{};
    for (std::size_t i = 0; i < active.size(); ++i) {
      g[i] = b.gamma(active[i], end);
      const double inner = dot(d.face_normal(active[i]), g[i]);
      if (!(inner > 0.0)) {
        throw Error(ErrorCode::ObliquenessViolated,
                    fmt::format("nu.gamma = {} on face {} at ({}, {})", inner, to_string(active[i]), end.x, end.y));
      }
    }
    std::array<double, 2> l{};
    if (active.size() == 1) {
      const int n = Domain::normal_axis(active[0]);
      l[0] = (free[n] - face_bound(d, active[0])) / (dt * g[0][n]);
    } else {
      // Corner: both normal coordinates pinned, 2x2 solve for the multipliers.
      const int n0 = Domain::normal_axis(active[0]);
      const int n1 = Domain::normal_axis(active[1]);
      const double r0 = (free[n0] - face_bound(d, active[0])) / dt;
      const double r1 = (free[n1] - face_bound(d, active[1])) / dt;
      const double det = g[0][n0] * g[1][n1] - g[1][n0] * g[0][n1];
      if (std::abs(det) < 1e-14) return std::nullopt;
      l[0] = (r0 * g[1][n1] - g[1][n0] * r1) / det;
      l[1] = (g[0][n0] * r1 - r0 * g[0][n1]) / det;
    }
    Vec next = free;
    for (std::size_t i = 0; i < active.size(); ++i) {
      if (l[i] < 0.0) return std::nullopt;
      next -= dt * l[i] * g[i];
      out.face_l[static_cast<int>(active[i])] = l[i];
    }
    for (Face f : active) next[Domain::normal_axis(f)] = face_bound(d, f);
    const bool settled = norm(next - end) <= 1e-15 * (1.0 + norm(end));
    end = next;
    if (settled) break;
  }
  out.end = end;
  return out;
}

bool inside(const Domain& d, Vec x) {
  for (Face f : d.faces()) {
    if (excess(d, f, x) > 0.0) return false;
  }
  return true;
}

// Discrete Skorokhod step as a small complementarity problem: find the active
// face set whose multipliers are nonnegative and whose landing point lies in
// the closed domain. Growing the active set greedily can get stuck at corners
// with tilted gammas, so every single face and every corner is tried.
std::optional<Landing> reflect_step(Vec eta, Vec v, double dt, const Domain& d, const BoundaryData& b) {
  const Vec free = eta + dt * v;
  if (inside(d, free)) return Landing{free, {}};
  const auto faces = d.faces();
  std::vector<std::vector<Face>> candidates;
  for (Face f : faces) candidates.push_back({f});
  for (Face f : faces) {
    for (Face g : faces) {
      if (Domain::normal_axis(f) == 0 && Domain::normal_axis(g) == 1) candidates.push_back({f, g});
    }
  }
  for (const auto& active : candidates) {
    bool needed = false;
    for (Face f : active) needed = needed || excess(d, f, free) > 0.0;
    if (!needed) continue;
    auto landing = project(free, dt, d, b, active);
    if (landing && inside(d, landing->end)) return landing;
  }
  return std::nullopt;
}

void advance(Trajectory& tr, Vec v, double dt, const Domain& d, const BoundaryData& b,
             const SkorokhodParams& p, int depth) {
  const Vec eta = tr.eta.back();
  if (auto landing = reflect_step(eta, v, dt, d, b)) {
    double l = 0.0;
    Vec lg;
    for (Face f : d.faces()) {
      const double lf = landing->face_l[static_cast<int>(f)];
      l += lf;
      if (lf > 0.0) lg += lf * b.gamma(f, landing->end);
    }
    tr.t.push_back(tr.t.back() + dt);
    tr.eta.push_back(landing->end);
    tr.v.push_back(v);
    tr.l.push_back(l);
    tr.face_l.push_back(landing->face_l);
    tr.gamma_eff.push_back(l > 0.0 ? (1.0 / l) * lg : Vec{});
    return;
  }
  if (depth >= p.max_depth) {
    throw Error(ErrorCode::StepTooLarge,
                fmt::format("cannot reflect step dt = {} from ({}, {})", dt, eta.x, eta.y));
  }
  for (int s = 0; s < p.substeps; ++s) advance(tr, v, dt / p.substeps, d, b, p, depth + 1);
}

}  // namespace

Trajectory solve_skorokhod(Vec x, const std::vector<Vec>& v, double dt, const Domain& d,
                           const BoundaryData& b, const SkorokhodParams& params) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "time step must be positive");
  if (d.contains(x, 1e-12) == Location::Outside) {
    throw Error(ErrorCode::OutsideDomain, fmt::format("start ({}, {}) outside the domain", x.x, x.y));
  }
  Trajectory tr;
  tr.t.push_back(0.0);
  tr.eta.push_back(d.clamp(x));
  for (Vec vk : v) {
    if (d.dimension() == 1) vk.y = 0.0;
    advance(tr, vk, dt, d, b, params, 0);
  }
  return tr;
}

TrajectoryReport check_trajectory(const Trajectory& tr, const Domain& d, const BoundaryData& b, double node_tol,
                                  double dynamics_tol) {
  TrajectoryReport r;
  r.min_l = tr.l.empty() ? 0.0 : *std::min_element(tr.l.begin(), tr.l.end());
  double max_dt = 0.0;
  for (const Vec& e : tr.eta) r.max_outside = std::max(r.max_outside, norm(e - d.clamp(e)));
  for (std::size_t k = 0; k < tr.steps(); ++k) {
    const double dt = tr.dt(k);
    max_dt = std::max(max_dt, dt);
    const Vec end = tr.eta[k + 1];
    Vec reflection;
    for (Face f : d.faces()) {
      const double lf = tr.face_l[k][static_cast<int>(f)];
      if (lf == 0.0) continue;
      const auto on = d.faces_at(end, node_tol);
      if (lf < 0.0 || std::find(on.begin(), on.end(), f) == on.end()) ++r.complementarity_violations;
      reflection += lf * b.gamma(f, end);
    }
    if (tr.l[k] > 0.0 && d.faces_at(end, node_tol).empty()) ++r.complementarity_violations;
    const Vec resid = (1.0 / dt) * (end - tr.eta[k]) + reflection - tr.v[k];
    r.max_dynamics_residual = std::max(r.max_dynamics_residual, norm(resid));
  }
  const double tol = dynamics_tol > 0.0 ? dynamics_tol : 2.0 * max_dt;
  r.pass = r.max_outside <= node_tol && r.min_l >= 0.0 && r.complementarity_violations == 0 &&
           r.max_dynamics_residual <= tol;
  return r;
}

void Trajectory::write_csv(std::ostream& out, int dimension) const {
  out << (dimension == 2 ? "s,eta_x,eta_y,v_x,v_y,l\n" : "s,eta,v,l\n");
  for (std::size_t k = 0; k < eta.size(); ++k) {
    const bool last = k == v.size();
    if (dimension == 2) {
      out << fmt::format("{:.17g},{:.17g},{:.17g}", t[k], eta[k].x, eta[k].y);
      out << (last ? std::string(",,,") : fmt::format(",{:.17g},{:.17g},{:.17g}", v[k].x, v[k].y, l[k]));
    } else {
      out << fmt::format("{:.17g},{:.17g}", t[k], eta[k].x);
      out << (last ? std::string(",,") : fmt::format(",{:.17g},{:.17g}", v[k].x, l[k]));
    }
    out << '\n';
  }
}

ActionValue action(const Trajectory& tr, const LagrangianSpec& l, const BoundaryData& b,
                   const GridFunction* u_terminal) {
  const Domain& d = l.ham.domain();
  auto lag = [&](Vec x, Vec xi) {
    const ConjugatePoint cp = legendre_transform(l, x, xi);
    if (cp.infinite || cp.value >= l.value_cap) {
      throw Error(ErrorCode::InfiniteAction, fmt::format("L(({}, {}), ({}, {})) is infinite", x.x, x.y, xi.x, xi.y));
    }
    return cp.value;
  };
  ActionValue a;
  double carry = 0.0;
  bool have_carry = false;
  for (std::size_t k = 0; k < tr.steps(); ++k) {
    const Vec xi = -tr.v[k];
    // Consecutive steps under the same control share an endpoint sample.
    const double l0 = (have_carry && k > 0 && tr.v[k] == tr.v[k - 1]) ? carry : lag(tr.eta[k], xi);
    const double l1 = lag(tr.eta[k + 1], xi);
    carry = l1;
    have_carry = true;
    double boundary = 0.0;
    for (Face f : d.faces()) {
      const double lf = tr.face_l[k][static_cast<int>(f)];
      if (lf > 0.0) boundary += b.g(f, tr.eta[k + 1]) * lf;
    }
    a.integral += tr.dt(k) * (0.5 * (l0 + l1) + boundary);
  }
  if (u_terminal) a.terminal = u_terminal->interpolate(tr.eta.back());
  a.total = a.integral + a.terminal;
  return a;
}

namespace {

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t i) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (i + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct Candidate {
  double value = std::numeric_limits<double>::infinity();
  std::vector<double> z;
};

}  // namespace

VariationalResult minimize_action(Vec x, double t, const GridFunction& terminal, const LagrangianSpec& l,
                                  const BoundaryData& b, const SearchParams& search) {
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  if (search.segments < 1 || search.substeps < 1 || search.starts < 1) {
    throw Error(ErrorCode::InvalidArgument, "search needs at least one segment, substep and start");
  }
  const Domain& d = l.ham.domain();
  const int dim = d.dimension();
  const int K = search.segments;
  const double dt = t / (K * search.substeps);
  const double bound = l.xi_bound;
  const std::size_t n = static_cast<std::size_t>(K * dim);

  auto controls_of = [&](const std::vector<double>& z) {
    std::vector<Vec> pieces(K);
    for (int k = 0; k < K; ++k) pieces[k] = dim == 2 ? Vec{z[2 * k], z[2 * k + 1]} : Vec{z[k]};
    return pieces;
  };
  auto expand = [&](const std::vector<Vec>& pieces) {
    std::vector<Vec> v;
    v.reserve(static_cast<std::size_t>(K * search.substeps));
    for (const Vec& p : pieces) v.insert(v.end(), search.substeps, p);
    return v;
  };
  auto objective = [&](const std::vector<double>& z) {
    try {
      const Trajectory tr = solve_skorokhod(x, expand(controls_of(z)), dt, d, b);
      return action(tr, l, b, &terminal).total;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InfiniteAction || e.code() == ErrorCode::StepTooLarge) {
        return std::numeric_limits<double>::infinity();
      }
      throw;
    }
  };

  VariationalResult result;
  for (int s = 0; s < search.starts; ++s) result.start_seeds.push_back(split_seed(search.seed, s));

  std::vector<Candidate> runs(search.starts);
  parallel_for(runs.size(), search.jobs, [&](std::size_t s) {
    std::mt19937_64 rng(result.start_seeds[s]);
    std::vector<double> z(n, 0.0);
    if (s > 0) {
      // Each random start leans towards its own heading. Independent signs per
      // segment cancel on average and leave every start near x, which traps
      // all of them in the same local minimum.
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const double heading = 2.0 * M_PI * (static_cast<double>(s - 1) + unit(rng)) / (search.starts - 1);
      const double sign = s % 2 == 1 ? 1.0 : -1.0;
      for (int k = 0; k < K; ++k) {
        const double r = bound * unit(rng);
        if (dim == 2) {
          const double a = heading + 0.5 * (unit(rng) - 0.5);
          z[2 * k] = r * std::cos(a);
          z[2 * k + 1] = r * std::sin(a);
        } else {
          z[k] = unit(rng) < 0.8 ? sign * r : -sign * r;
        }
      }
    }
    double best = objective(z);
    std::size_t evals = 1;
    double step = search.initial_step > 0.0 ? search.initial_step : 0.5 * bound;
    while (step >= search.min_step && evals < search.max_evaluations) {
      bool improved = false;
      for (std::size_t i = 0; i < n && evals < search.max_evaluations; ++i) {
        for (double dir : {1.0, -1.0}) {
          std::vector<double> trial = z;
          trial[i] = std::clamp(trial[i] + dir * step, -bound, bound);
          if (trial[i] == z[i]) continue;
          const double val = objective(trial);
          ++evals;
          if (val < best) {
            best = val;
            z = std::move(trial);
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    runs[s] = {best, z};
  });

  // Ties go to the lowest start index, so the answer does not depend on jobs.
  const auto winner = std::min_element(runs.begin(), runs.end(),
                                       [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
  if (!std::isfinite(winner->value)) {
    throw Error(ErrorCode::InfiniteAction, "no start produced a finite action");
  }
  result.controls = controls_of(winner->z);
  result.trajectory = solve_skorokhod(x, expand(result.controls), dt, d, b);
  result.action = action(result.trajectory, l, b, &terminal);
  result.value = result.action.total;
  return result;
}

VariationalResult variational_value(Vec x, double t, const GridFunction& u0, const LagrangianSpec& l,
                                    const BoundaryData& b, const SearchParams& search) {
  return minimize_action(x, t, u0, l, b, search);
}

DppResult dpp_check(Vec x, double t, double tau, const EvolutionRun& run, const LagrangianSpec& l,
                    const BoundaryData& b, const SearchParams& search) {
  if (!(tau > 0.0 && tau <= t)) throw Error(ErrorCode::InvalidArgument, "need 0 < tau <= t");
  const Snapshot* early = run.find(t - tau);
  const Snapshot* late = run.find(t);
  if (!early || !late) {
    throw Error(ErrorCode::MissingSnapshot, fmt::format("run lacks snapshots at t = {} and {}", t - tau, t));
  }
  DppResult r;
  r.value = minimize_action(x, tau, early->u, l, b, search).value;
  r.grid_value = late->u.interpolate(x);
  r.discrepancy = std::abs(r.value - r.grid_value);
  return r;
}

std::vector<std::optional<Vec>> extremal_momenta(const Trajectory& tr, const LagrangianSpec& l) {
  std::vector<std::optional<Vec>> q;
  q.reserve(tr.steps());
  for (std::size_t k = 0; k < tr.steps(); ++k) q.push_back(fenchel_momentum(l, tr.eta[k + 1], -tr.v[k]));
  return q;
}

ExtremalReport extremal_identity_check(const Trajectory& tr, const std::vector<std::optional<Vec>>& q,
                                       const LagrangianSpec& l, const BoundaryData& b, double c,
                                       const ExtremalThresholds& thresholds) {
  if (q.size() != tr.steps()) throw Error(ErrorCode::InvalidArgument, "one momentum per step expected");
  const Domain& d = l.ham.domain();
  ExtremalReport r;
  for (std::size_t k = 0; k < tr.steps(); ++k) {
    if (!q[k]) continue;
    ++r.checked_steps;
    const Vec x = tr.eta[k + 1];
    const Vec p = *q[k];
    const double h = l.ham(x, p);
    r.max_hamiltonian_residual = std::max(r.max_hamiltonian_residual, std::abs(h - c));
    const double lag = legendre_transform(l, x, -tr.v[k]).value;
    r.max_fenchel_gap = std::max(r.max_fenchel_gap, std::abs(-dot(p, tr.v[k]) - h - lag));
    if (tr.l[k] > 0.0) {
      ++r.contact_steps;
      for (Face f : d.faces()) {
        if (tr.face_l[k][static_cast<int>(f)] <= 0.0) continue;
        r.max_boundary_residual = std::max(r.max_boundary_residual, std::abs(dot(b.gamma(f, x), p) - b.g(f, x)));
      }
    }
  }
  r.hamiltonian_pass = r.max_hamiltonian_residual <= thresholds.hamiltonian;
  r.boundary_pass = r.max_boundary_residual <= thresholds.boundary;
  r.fenchel_pass = r.max_fenchel_gap <= thresholds.fenchel;
  return r;
}

}  // namespace hjn
