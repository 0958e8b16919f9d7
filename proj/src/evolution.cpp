#include "hjn/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace hjn {

double numerical_hamiltonian(const HamiltonianSpec& h, Vec x, Vec p_minus, Vec p_plus, Vec alpha) {
  const Vec mid = 0.5 * (p_minus + p_plus);
  const Vec jump = p_plus - p_minus;
  return h(x, mid) - 0.5 * (alpha.x * jump.x + alpha.y * jump.y);
}

Vec local_alpha(const HamiltonianSpec& h, Vec pm, Vec pp, Vec bound) {
  Vec a = bound;
  switch (h.family()) {
    case Family::Eikonal: break;
    case Family::Quadratic:
      a = {std::max(std::abs(pm.x), std::abs(pp.x)), std::max(std::abs(pm.y), std::abs(pp.y))};
      break;
    case Family::QuadraticAnisotropic:
      // Off-diagonal coupling makes a box-dependent alpha_x vary with p_y,
      // which breaks monotonicity in p_y; keep the global bound.
      break;
  }
  return {std::min(a.x, bound.x), std::min(a.y, bound.y)};
}

const std::vector<double>& GhostLayer::face(Face f) const {
  switch (f) {
    case Face::Left: return left;
    case Face::Right: return right;
    case Face::Bottom: return bottom;
    case Face::Top: return top;
  }
  return left;
}

std::vector<double>& GhostLayer::face(Face f) {
  return const_cast<std::vector<double>&>(std::as_const(*this).face(f));
}

GhostLayer apply_neumann_bc(const GridFunction& u, const BoundaryData& b) {
  const Grid& grid = u.grid();
  const Domain& dom = grid.domain();
  const Vec h = grid.spacing();
  GhostLayer ghosts;

  for (Face face : dom.faces()) {
    const int n_axis = Domain::normal_axis(face);
    const int t_axis = 1 - n_axis;
    const Vec nu = dom.face_normal(face);
    const int count = dom.dimension() == 1 ? 1 : (t_axis == 0 ? grid.nx() : grid.ny()) + 1;
    const int fixed = (face == Face::Right) ? grid.nx() : (face == Face::Top ? grid.ny() : 0);
    auto& out = ghosts.face(face);
    out.resize(count);

    for (int t = 0; t < count; ++t) {
      const int i = n_axis == 0 ? fixed : t;
      const int j = n_axis == 0 ? t : fixed;
      const Vec x = grid.node(i, j);
      const Vec gamma = b.gamma(face, x);
      const double inner = dot(nu, gamma);
      if (!(inner > 0.0)) {
        throw Error(ErrorCode::ObliquenessViolated,
                    fmt::format("nu.gamma = {} on face {} at ({}, {})", inner, to_string(face), x.x, x.y));
      }
      const double ub = u.at(i, j);
      double tangential = 0.0;
      if (dom.dimension() == 2) {
        const double gt = gamma[t_axis];
        const int last = t_axis == 0 ? grid.nx() : grid.ny();
        const double ht = h[t_axis];
        auto val = [&](int tt) { return n_axis == 0 ? u.at(i, tt) : u.at(tt, j); };
        // Upwind along the face keeps the ghost value monotone in its neighbours.
        if (gt > 0.0 && t > 0 && t < last) {
          tangential = (ub - val(t - 1)) / ht;
        } else if (gt < 0.0 && t > 0 && t < last) {
          tangential = (val(t + 1) - ub) / ht;
        }
        tangential *= gt;
      }
      out[t] = ub + h[n_axis] * (b.g(face, x) - tangential) / inner;
    }
  }
  return ghosts;
}

double cfl_limit(const Grid& grid, Vec alpha) {
  const double s = alpha.x + (grid.dimension() == 2 ? alpha.y : 0.0);
  if (s <= 0.0) return std::numeric_limits<double>::infinity();
  return grid.h() / (2.0 * s);
}

Scheme::Scheme(HamiltonianSpec h, BoundaryData b, Grid grid, double momentum_radius,
               std::optional<double> dt, Dissipation dissipation)
    : ham_(std::move(h)),
      bc_(std::move(b)),
      grid_(std::move(grid)),
      radius_(momentum_radius),
      dissipation_(dissipation) {
  alpha_ = ham_.max_slopes(std::max(radius_, 1e-3));
  cfl_limit_ = hjn::cfl_limit(grid_, alpha_);
  const double fallback = std::isfinite(cfl_limit_) ? cfl_limit_ : grid_.h();
  dt_ = dt.value_or(fallback);
  if (!(dt_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "time step must be positive");
  if (dt_ > cfl_limit_ * (1.0 + 1e-12)) {
    throw Error(ErrorCode::CflViolation,
                fmt::format("dt = {} exceeds the CFL limit {} (alpha = {}, {})", dt_, cfl_limit_,
                            alpha_.x, alpha_.y));
  }
  // Validates obliqueness once; the ghost solve would divide by nu.gamma.
  const auto report = check_obliqueness(grid_.domain(), bc_, std::max(grid_.nx(), grid_.ny()));
  if (!report.pass) {
    throw Error(ErrorCode::ObliquenessViolated,
                fmt::format("min nu.gamma = {} on face {}", report.min_inner, to_string(report.worst_face)));
  }
}

Scheme Scheme::shifted(double c) const {
  Scheme out = *this;
  out.ham_ = ham_.shifted(c);
  return out;
}

Scheme Scheme::with_dt(double dt) const {
  if (dt > cfl_limit_ * (1.0 + 1e-12)) {
    throw Error(ErrorCode::CflViolation, fmt::format("dt = {} exceeds the CFL limit {}", dt, cfl_limit_));
  }
  Scheme out = *this;
  out.dt_ = dt;
  return out;
}

std::pair<Vec, Vec> Scheme::one_sided(const GridFunction& u, const GhostLayer& ghosts,
                                      std::size_t k) const {
  const auto [i, j] = grid_.coords(k);
  const Vec h = grid_.spacing();
  const double c = u[k];
  Vec pm, pp;
  const double west = i > 0 ? u.at(i - 1, j) : ghosts.left[j];
  const double east = i < grid_.nx() ? u.at(i + 1, j) : ghosts.right[j];
  pm.x = (c - west) / h.x;
  pp.x = (east - c) / h.x;
  if (grid_.dimension() == 2) {
    const double south = j > 0 ? u.at(i, j - 1) : ghosts.bottom[i];
    const double north = j < grid_.ny() ? u.at(i, j + 1) : ghosts.top[i];
    pm.y = (c - south) / h.y;
    pp.y = (north - c) / h.y;
  }
  return {pm, pp};
}

std::vector<double> Scheme::flux(const GridFunction& u) const {
  const GhostLayer ghosts = apply_neumann_bc(u, bc_);
  std::vector<double> out(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    const auto [pm, pp] = one_sided(u, ghosts, k);
    const Vec a = dissipation_ == Dissipation::Local ? local_alpha(ham_, pm, pp, alpha_) : alpha_;
    out[k] = numerical_hamiltonian(ham_, grid_.node(k), pm, pp, a);
  }
  return out;
}

GridFunction Scheme::step(const GridFunction& u) const {
  const auto fl = flux(u);
  GridFunction next(grid_, u.values());
  for (std::size_t k = 0; k < u.size(); ++k) next[k] = u[k] - dt_ * fl[k];
  return next;
}

double scheme_radius(const HamiltonianSpec& h, const BoundaryData& b, const GridFunction& u0) {
  const Grid& grid = u0.grid();
  const GhostLayer ghosts = apply_neumann_bc(u0, b);
  const Vec hs = grid.spacing();
  double k_u0 = 0.0;
  double h0 = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid.nx(); ++i) {
    for (int j = 0; j <= grid.ny(); ++j) {
      const Vec x = grid.node(i, j);
      const double c = u0.at(i, j);
      const double west = i > 0 ? u0.at(i - 1, j) : ghosts.left[j];
      const double east = i < grid.nx() ? u0.at(i + 1, j) : ghosts.right[j];
      double south = c, north = c;
      if (grid.dimension() == 2) {
        south = j > 0 ? u0.at(i, j - 1) : ghosts.bottom[i];
        north = j < grid.ny() ? u0.at(i, j + 1) : ghosts.top[i];
      }
      const double sy = grid.dimension() == 2 ? hs.y : 1.0;
      for (double px : {(c - west) / hs.x, (east - c) / hs.x}) {
        for (double py : {(c - south) / sy, (north - c) / sy}) {
          k_u0 = std::max(k_u0, std::abs(h(x, {px, py})));
        }
      }
      h0 = std::max(h0, h(x, {}));
    }
  }
  return std::max({h.momentum_radius(k_u0), h.momentum_radius(h0), 1e-3});
}

GridFunction step(const GridFunction& u, const HamiltonianSpec& h, const BoundaryData& b, double dt,
                  Vec alpha) {
  const double limit = cfl_limit(u.grid(), alpha);
  if (dt > limit * (1.0 + 1e-12)) {
    throw Error(ErrorCode::CflViolation, fmt::format("dt = {} exceeds the CFL limit {}", dt, limit));
  }
  const GhostLayer ghosts = apply_neumann_bc(u, b);
  const Grid& grid = u.grid();
  const Vec hs = grid.spacing();
  GridFunction next(grid, u.values());
  for (int i = 0; i <= grid.nx(); ++i) {
    for (int j = 0; j <= grid.ny(); ++j) {
      const double c = u.at(i, j);
      Vec pm{(c - (i > 0 ? u.at(i - 1, j) : ghosts.left[j])) / hs.x};
      Vec pp{((i < grid.nx() ? u.at(i + 1, j) : ghosts.right[j]) - c) / hs.x};
      if (grid.dimension() == 2) {
        pm.y = (c - (j > 0 ? u.at(i, j - 1) : ghosts.bottom[i])) / hs.y;
        pp.y = ((j < grid.ny() ? u.at(i, j + 1) : ghosts.top[i]) - c) / hs.y;
      }
      next[grid.index(i, j)] = c - dt * numerical_hamiltonian(h, grid.node(i, j), pm, pp, alpha);
    }
  }
  return next;
}

const Snapshot* EvolutionRun::find(double t) const {
  for (const auto& s : snapshots) {
    if (std::abs(s.t - t) <= 0.5 * dt + 1e-12) return &s;
  }
  return nullptr;
}

EvolutionRun solve(const Scheme& scheme, const GridFunction& u0, double t_final,
                   const std::vector<double>& output_times, std::optional<std::size_t> ref_node) {
  if (t_final < 0.0) throw Error(ErrorCode::InvalidArgument, "negative horizon");
  const double dt = scheme.dt();
  const auto n_final = static_cast<long>(std::llround(t_final / dt));

  // Requested times -> step indices, deduplicated so snapshot times increase strictly.
  std::vector<long> marks;
  for (double t : output_times) {
    if (t < 0.0 || t > t_final + 0.5 * dt) {
      throw Error(ErrorCode::InvalidArgument, fmt::format("output time {} outside [0, {}]", t, t_final));
    }
    marks.push_back(std::min(static_cast<long>(std::llround(t / dt)), n_final));
  }
  marks.push_back(n_final);
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

  EvolutionRun run;
  run.dt = dt;
  run.ref_node = ref_node.value_or(0);
  run.snapshots.push_back({0.0, u0});

  GridFunction u = u0;
  std::size_t next_mark = 0;
  while (next_mark < marks.size() && marks[next_mark] == 0) ++next_mark;
  for (long n = 1; n <= n_final; ++n) {
    u = scheme.step(u);
    if (!u.all_finite()) {
      throw Error(ErrorCode::NonConvergence, fmt::format("non-finite values at step {}", n));
    }
    if (next_mark < marks.size() && marks[next_mark] == n) {
      const double t = n * dt;
      run.snapshots.push_back({t, u});
      run.c_estimate_series.emplace_back(t, -u[run.ref_node] / t);
      ++next_mark;
    }
  }
  return run;
}

std::vector<double> uniform_times(double t_final, std::size_t count) {
  std::vector<double> out;
  for (std::size_t k = 1; k <= count; ++k) out.push_back(t_final * static_cast<double>(k) / count);
  return out;
}

}  // namespace hjn
