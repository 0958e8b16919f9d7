#include "hjn/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "hjn/parallel.hpp"

namespace hjn {

const char* to_string(CriticalMethod m) {
  return m == CriticalMethod::LongTimeAverage ? "LongTimeAverage" : "SmallDiscount";
}

namespace {

std::size_t centre_node(const Grid& grid) {
  const Domain& d = grid.domain();
  Vec mid{0.5 * (d.lower(0) + d.upper(0))};
  if (d.dimension() == 2) mid.y = 0.5 * (d.lower(1) + d.upper(1));
  return grid.nearest(mid);
}

double oscillation(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

CriticalValue long_time_average(const Scheme& scheme, const CriticalValueParams& p, std::size_t ref) {
  if (!(p.t1 > 0.0 && p.t2 > p.t1)) throw Error(ErrorCode::InvalidArgument, "need 0 < t1 < t2");
  const double dt = scheme.dt();
  const long n1 = std::max(1L, std::lround(p.t1 / dt));
  const long n2 = std::max(n1 + 1, std::lround(p.t2 / dt));
  GridFunction u(scheme.grid(), 0.0);
  for (long n = 0; n < n1; ++n) u = scheme.step(u);
  const GridFunction u1 = u;
  for (long n = n1; n < n2; ++n) u = scheme.step(u);
  if (!u.all_finite()) throw Error(ErrorCode::NonConvergence, "long-time run produced non-finite values");

  const double span = (n2 - n1) * dt;
  std::vector<double> est(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) est[k] = -(u[k] - u1[k]) / span;

  CriticalValue out;
  out.method = CriticalMethod::LongTimeAverage;
  out.c = est[ref];
  for (double e : est) out.uncertainty = std::max(out.uncertainty, std::abs(e - out.c));
  out.raw = {{n1 * dt, -u1[ref] / (n1 * dt)}, {n2 * dt, -u[ref] / (n2 * dt)}};
  if (out.uncertainty > p.bound) {
    throw Error(ErrorCode::NonConvergence,
                fmt::format("long-time slopes disagree across nodes by {} (bound {})", out.uncertainty, p.bound));
  }
  return out;
}

// lambda v + H(x,Dv) = 0 by semi-implicit marching. Once the profile has
// settled, v = v_inf + k(t) with k decaying geometrically, and the scheme
// flux is blind to k, so -lambda v_inf(ref) is read off the flux directly.
double discounted_estimate(const Scheme& scheme, double lambda, const CriticalValueParams& p,
                           std::size_t ref) {
  const double dt = scheme.dt();
  const long max_steps = std::lround(p.max_time / dt);
  GridFunction v(scheme.grid(), 0.0);
  std::vector<double> rate(v.size());
  for (long n = 0; n < max_steps; ++n) {
    const auto fl = scheme.flux(v);
    for (std::size_t k = 0; k < v.size(); ++k) {
      const double next = (v[k] - dt * fl[k]) / (1.0 + lambda * dt);
      rate[k] = (next - v[k]) / dt;
      v[k] = next;
    }
    if (oscillation(rate) <= p.steady_tolerance) return scheme.flux(v)[ref];
  }
  throw Error(ErrorCode::NonConvergence,
              fmt::format("discounted problem (lambda = {}) not steady after t = {}", lambda, p.max_time));
}

CriticalValue small_discount(const Scheme& scheme, const CriticalValueParams& p, std::size_t ref) {
  if (p.lambdas.size() < 2) throw Error(ErrorCode::InvalidArgument, "need two discount factors");
  const double l1 = p.lambdas[0];
  const double l2 = p.lambdas[1];
  if (!(l1 > 0.0 && l2 > 0.0 && l1 != l2)) throw Error(ErrorCode::InvalidArgument, "bad discount factors");
  const double c1 = discounted_estimate(scheme, l1, p, ref);
  const double c2 = discounted_estimate(scheme, l2, p, ref);

  CriticalValue out;
  out.method = CriticalMethod::SmallDiscount;
  out.c = (l1 * c2 - l2 * c1) / (l1 - l2);
  out.uncertainty = std::abs(c1 - c2);
  out.raw = {{l1, c1}, {l2, c2}};
  if (out.uncertainty > p.bound) {
    throw Error(ErrorCode::NonConvergence,
                fmt::format("discount estimates {} and {} differ by more than {}", c1, c2, p.bound));
  }
  return out;
}

double default_depth(const Scheme& scheme, const StationaryParams& p) {
  if (p.divergence_depth > 0.0) return p.divergence_depth;
  return 10.0 * scheme.grid().domain().diameter() * std::max(scheme.momentum_radius(), 1.0);
}

}  // namespace

CriticalValue critical_value(const Scheme& scheme, CriticalMethod method, const CriticalValueParams& params) {
  const std::size_t ref = params.ref_node.value_or(centre_node(scheme.grid()));
  if (ref >= scheme.grid().size()) throw Error(ErrorCode::InvalidArgument, "reference node out of range");
  return method == CriticalMethod::LongTimeAverage ? long_time_average(scheme, params, ref)
                                                   : small_discount(scheme, params, ref);
}

std::vector<double> stationary_residual(const Scheme& scheme, double c, const GridFunction& w) {
  return scheme.shifted(c).flux(w);
}

StationaryResult solve_stationary(const Scheme& scheme, double c, const GridFunction& seed,
                                  StationaryDirection direction, const StationaryParams& params) {
  const Scheme s = scheme.shifted(c);
  const double dt = s.dt();
  const long max_steps = std::lround(params.max_time / dt);
  const double depth = default_depth(scheme, params);
  const double floor = seed.min() - depth;
  const double ceiling = seed.max() + depth;
  const bool decrease = direction == StationaryDirection::DecreaseToMaxSubsolution;

  GridFunction v = seed;
  for (long n = 1; n <= max_steps; ++n) {
    GridFunction next = s.step(v);
    double delta = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (decrease) next[k] = std::min(next[k], seed[k]);
      delta = std::max(delta, std::abs(next[k] - v[k]));
    }
    v = std::move(next);
    if (!v.all_finite() || v.min() < floor || v.max() > ceiling) {
      throw Error(ErrorCode::NonConvergence,
                  fmt::format("stationary iteration for c = {} left the band [{}, {}] after {} steps", c,
                              floor, ceiling, n));
    }
    if (delta / dt <= params.tolerance) {
      StationaryResult out{v, 0.0, static_cast<std::size_t>(n)};
      for (double r : s.flux(v)) {
        out.residual = std::max(out.residual, decrease ? std::max(r, 0.0) : std::abs(r));
      }
      return out;
    }
  }
  throw Error(ErrorCode::NonConvergence,
              fmt::format("stationary iteration for c = {} not converged by t = {}", c, params.max_time));
}

DistanceField distance_field(const Scheme& scheme, double c, std::size_t y, const StationaryParams& params) {
  const Grid& grid = scheme.grid();
  if (y >= grid.size()) throw Error(ErrorCode::InvalidArgument, "source node out of range");
  const Scheme s = scheme.shifted(c);
  const double slope = scheme.hamiltonian().momentum_radius(c);
  const double cap = 10.0 * grid.domain().diameter() * std::max(slope, 1.0);
  const double dt = s.dt();
  const long max_steps = std::lround(params.max_time / dt);
  const double floor = -default_depth(scheme, params);
  const Vec xy = grid.node(y);

  // Starting from the cone min(M, L|x-y|) rather than the flat cap keeps the
  // first differences inside the ball the dissipation was sized for.
  GridFunction v = GridFunction::sample(grid, [&](Vec x) { return std::min(cap, slope * norm(x - xy)); });
  v[y] = 0.0;
  for (long n = 1; n <= max_steps; ++n) {
    GridFunction next = s.step(v);
    double delta = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      next[k] = k == y ? 0.0 : std::min(next[k], cap);
      delta = std::max(delta, std::abs(next[k] - v[k]));
    }
    v = std::move(next);
    if (!v.all_finite() || v.min() < floor) {
      throw Error(ErrorCode::NonConvergence,
                  fmt::format("distance iteration for c = {} diverges downward (step {})", c, n));
    }
    if (delta / dt <= params.tolerance) {
      DistanceField out{y, v, 0.0, static_cast<std::size_t>(n)};
      const auto fl = s.flux(v);
      for (std::size_t k = 0; k < fl.size(); ++k) {
        if (k != y) out.residual = std::max(out.residual, fl[k]);
      }
      return out;
    }
  }
  throw Error(ErrorCode::NonConvergence,
              fmt::format("distance iteration from node {} not converged by t = {}", y, params.max_time));
}

std::vector<DistanceField> distance_fields(const Scheme& scheme, double c,
                                           const std::vector<std::size_t>& sources, unsigned jobs,
                                           const StationaryParams& params) {
  std::vector<std::optional<DistanceField>> slots(sources.size());
  parallel_for(sources.size(), jobs, [&](std::size_t i) { slots[i] = distance_field(scheme, c, sources[i], params); });
  std::vector<DistanceField> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

double source_residual(const Scheme& scheme, double c, const GridFunction& d, std::size_t k) {
  const GhostLayer ghosts = apply_neumann_bc(d, scheme.boundary());
  const auto [pm, pp] = scheme.one_sided(d, ghosts, k);
  const int dim = scheme.grid().dimension();
  for (int a = 0; a < dim; ++a) {
    if (pm[a] > pp[a] + 1e-12) return std::numeric_limits<double>::infinity();
  }
  const HamiltonianSpec& h = scheme.hamiltonian();
  auto clamp_axis = [&](double v, int a) { return std::clamp(v, std::min(pm[a], pp[a]), std::max(pm[a], pp[a])); };

  // The kinetic part is minimized over the box; for isotropic families this is
  // the projection of the origin, otherwise exact coordinate minimization.
  Vec p{clamp_axis(0.0, 0), dim == 2 ? clamp_axis(0.0, 1) : 0.0};
  if (h.family() == Family::QuadraticAnisotropic && dim == 2) {
    const SymMatrix2& m = h.matrix();
    for (int sweep = 0; sweep < 200; ++sweep) {
      const Vec prev = p;
      p.x = clamp_axis(-m.a12 * p.y / m.a11, 0);
      p.y = clamp_axis(-m.a12 * p.x / m.a22, 1);
      if (norm(p - prev) < 1e-15) break;
    }
  }
  return h(scheme.grid().node(k), p) - c;
}

AubrySet aubry_set(const Scheme& scheme, double c, const std::vector<DistanceField>& fields, double tol) {
  AubrySet out;
  for (const auto& f : fields) {
    const double r = source_residual(scheme, c, f.values, f.source);
    out.sources.push_back(f.source);
    out.residual_at_source.push_back(r);
    if (r >= -tol) out.nodes.push_back(f.source);
  }
  return out;
}

void AubrySet::write_csv(std::ostream& out, const Grid& grid) const {
  const bool two_d = grid.dimension() == 2;
  out << (two_d ? "node,x,y,residual,flag\n" : "node,x,residual,flag\n");
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const Vec x = grid.node(sources[i]);
    const bool flagged = std::find(nodes.begin(), nodes.end(), sources[i]) != nodes.end();
    if (two_d) {
      out << fmt::format("{},{:.17g},{:.17g},{:.17g},{}\n", sources[i], x.x, x.y, residual_at_source[i], flagged ? 1 : 0);
    } else {
      out << fmt::format("{},{:.17g},{:.17g},{}\n", sources[i], x.x, residual_at_source[i], flagged ? 1 : 0);
    }
  }
}

}  // namespace hjn
