#include "hjn/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace hjn {

const char* to_string(Family family) {
  switch (family) {
    case Family::Eikonal: return "eikonal";
    case Family::Quadratic: return "quadratic";
    case Family::QuadraticAnisotropic: return "quadratic-anisotropic";
  }
  return "?";
}

Family parse_family(const std::string& name) {
  if (name == "eikonal") return Family::Eikonal;
  if (name == "quadratic") return Family::Quadratic;
  if (name == "quadratic-anisotropic") return Family::QuadraticAnisotropic;
  throw Error(ErrorCode::ConfigError, "unknown Hamiltonian family '" + name + "'");
}

const char* to_string(ModulusSign sign) { return sign == ModulusSign::Plus ? "plus" : "minus"; }

Vec SymMatrix2::solve(Vec xi) const {
  const double det = a11 * a22 - a12 * a12;
  return {(a22 * xi.x - a12 * xi.y) / det, (a11 * xi.y - a12 * xi.x) / det};
}

double SymMatrix2::min_eigenvalue() const {
  const double m = 0.5 * (a11 + a22);
  const double r = std::hypot(0.5 * (a11 - a22), a12);
  return m - r;
}

double SymMatrix2::max_eigenvalue() const {
  const double m = 0.5 * (a11 + a22);
  const double r = std::hypot(0.5 * (a11 - a22), a12);
  return m + r;
}

HamiltonianSpec::HamiltonianSpec(Family family, ScalarField potential, Domain domain,
                                 SymMatrix2 matrix)
    : family_(family), potential_(std::move(potential)), domain_(domain), matrix_(matrix) {
  if (dimension() == 1) {
    matrix_.a12 = 0.0;
    matrix_.a22 = matrix_.a11;
  }
  if (family_ == Family::QuadraticAnisotropic && !(matrix_.min_eigenvalue() > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "anisotropic matrix must be positive definite");
  }
  // Potential extrema on a fine lattice; they only feed momentum bounds.
  f_min_ = std::numeric_limits<double>::infinity();
  f_max_ = -std::numeric_limits<double>::infinity();
  const int n = dimension() == 1 ? 2000 : 200;
  const int ny = dimension() == 1 ? 0 : n;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= ny; ++j) {
      Vec x{domain_.lower(0) + (domain_.upper(0) - domain_.lower(0)) * i / n, 0.0};
      if (dimension() == 2) x.y = domain_.lower(1) + (domain_.upper(1) - domain_.lower(1)) * j / n;
      const double f = potential_(x);
      f_min_ = std::min(f_min_, f);
      f_max_ = std::max(f_max_, f);
    }
  }
}

HamiltonianSpec HamiltonianSpec::shifted(double c) const {
  HamiltonianSpec out = *this;
  out.level_ += c;
  return out;
}

double HamiltonianSpec::kinetic(Vec p) const {
  if (dimension() == 1) p.y = 0.0;
  switch (family_) {
    case Family::Eikonal: return norm(p);
    case Family::Quadratic: return 0.5 * dot(p, p);
    case Family::QuadraticAnisotropic: return 0.5 * dot(p, matrix_.apply(p));
  }
  return 0.0;
}

std::optional<Vec> HamiltonianSpec::gradient(Vec p) const {
  if (dimension() == 1) p.y = 0.0;
  switch (family_) {
    case Family::Eikonal: {
      const double n = norm(p);
      if (n == 0.0) return std::nullopt;
      return (1.0 / n) * p;
    }
    case Family::Quadratic: return p;
    case Family::QuadraticAnisotropic: {
      Vec g = matrix_.apply(p);
      if (dimension() == 1) g.y = 0.0;
      return g;
    }
  }
  return std::nullopt;
}

double HamiltonianSpec::momentum_radius(double lvl) const {
  const double s = lvl + level_ + f_max_;
  if (s <= 0.0) return 0.0;
  switch (family_) {
    case Family::Eikonal: return s;
    case Family::Quadratic: return std::sqrt(2.0 * s);
    case Family::QuadraticAnisotropic: return std::sqrt(2.0 * s / matrix_.min_eigenvalue());
  }
  return 0.0;
}

Vec HamiltonianSpec::max_slopes(double radius) const {
  Vec out;
  switch (family_) {
    case Family::Eikonal: out = {1.0, 1.0}; break;
    case Family::Quadratic: out = {radius, radius}; break;
    case Family::QuadraticAnisotropic:
      out = {radius * std::hypot(matrix_.a11, matrix_.a12),
             radius * std::hypot(matrix_.a12, matrix_.a22)};
      break;
  }
  if (dimension() == 1) out.y = 0.0;
  return out;
}

std::string HamiltonianSpec::describe() const {
  std::ostringstream out;
  out.precision(17);
  out << to_string(family_) << " f=[" << potential_.describe() << "]";
  if (family_ == Family::QuadraticAnisotropic) {
    out << " A=[" << matrix_.a11 << ' ' << matrix_.a12 << ' ' << matrix_.a22 << ']';
  }
  if (level_ != 0.0) out << " level=" << level_;
  return out.str();
}

double eval_H(const HamiltonianSpec& h, Vec x, Vec p) {
  if (h.domain().contains(x, 1e-12) == Location::Outside) {
    throw Error(ErrorCode::OutsideDomain, "H evaluated outside the closed domain");
  }
  return h(x, p);
}

std::vector<Vec> supergradient_H(const HamiltonianSpec& h, Vec, Vec p) {
  if (auto g = h.gradient(p)) return {*g};
  return {};
}

// Lagrangian -------------------------------------------------------------------

LagrangianSpec::LagrangianSpec(HamiltonianSpec h) : ham(std::move(h)) {
  if (ham.family() == Family::Eikonal) {
    xi_bound = 1.0;
  } else {
    const double r = std::max(1.0, ham.momentum_radius(ham.potential_max() - ham.potential_min()));
    xi_bound = norm(ham.max_slopes(r));
  }
}

namespace {

struct Maximum {
  double value;
  Vec arg;
};

constexpr double kInvPhi = 0.6180339887498949;

Maximum golden_max(const auto& fn, double lo, double hi) {
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  double fc = fn(c), fd = fn(d);
  const double tol = 1e-14 * std::max(1.0, std::abs(hi - lo));
  for (int it = 0; it < 200 && b - a > tol; ++it) {
    if (fc >= fd) {
      b = d; d = c; fd = fc;
      c = b - kInvPhi * (b - a);
      fc = fn(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + kInvPhi * (b - a);
      fd = fn(d);
    }
  }
  const double m = 0.5 * (a + b);
  return {fn(m), Vec{m}};
}

// Maximizes the concave function xi.p - H(x,p) over the box |p_i| <= radius.
Maximum maximize_box(const LagrangianSpec& l, Vec x, Vec xi, double radius) {
  const int n = std::max(l.transform_grid | 1, 5);  // odd, so p = 0 is a lattice point
  const double step = 2.0 * radius / (n - 1);
  auto phi = [&](Vec p) { return dot(xi, p) - l.ham(x, p); };

  if (l.ham.dimension() == 1) {
    int best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      const double v = phi(Vec{-radius + i * step});
      if (v > best_v) { best_v = v; best = i; }
    }
    const double lo = -radius + std::max(best - 1, 0) * step;
    const double hi = -radius + std::min(best + 1, n - 1) * step;
    Maximum m = golden_max([&](double p) { return phi(Vec{p}); }, lo, hi);
    const Vec grid_pt{-radius + best * step};
    if (best_v >= m.value) m = {best_v, grid_pt};
    return m;
  }

  Vec best_p;
  double best_v = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Vec p{-radius + i * step, -radius + j * step};
      const double v = phi(p);
      if (v > best_v) { best_v = v; best_p = p; }
    }
  }
  // Pattern search with axis and diagonal directions; concavity makes the
  // lattice maximizer's neighbourhood the only region worth refining.
  static constexpr Vec dirs[] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1},
                                 {0.7071067811865476, 0.7071067811865476},
                                 {-0.7071067811865476, 0.7071067811865476},
                                 {0.7071067811865476, -0.7071067811865476},
                                 {-0.7071067811865476, -0.7071067811865476}};
  double s = step;
  const double s_min = 1e-13 * std::max(radius, 1.0);
  while (s > s_min) {
    bool moved = false;
    for (const Vec& d : dirs) {
      Vec cand = best_p + s * d;
      cand.x = std::clamp(cand.x, -radius, radius);
      cand.y = std::clamp(cand.y, -radius, radius);
      const double v = phi(cand);
      if (v > best_v) {
        best_v = v;
        best_p = cand;
        moved = true;
        break;
      }
    }
    if (!moved) s *= 0.5;
  }
  return {best_v, best_p};
}

bool on_box_boundary(Vec p, double radius, int dim) {
  const double tol = 1e-9 * radius;
  for (int a = 0; a < dim; ++a) {
    if (std::abs(std::abs(p[a]) - radius) <= tol) return true;
  }
  return false;
}

}  // namespace

ConjugatePoint legendre_transform(const LagrangianSpec& l, Vec x, Vec xi) {
  if (l.ham.dimension() == 1) xi.y = 0.0;
  double radius = std::max({l.ham.p_bound(), l.slope_margin * norm(xi), 1.0});
  Maximum m = maximize_box(l, x, xi, radius);
  for (int doubling = 0; doubling < 8; ++doubling) {
    if (!on_box_boundary(m.arg, radius, l.ham.dimension())) {
      return {m.value, m.arg, false};
    }
    const Maximum wider = maximize_box(l, x, xi, 2.0 * radius);
    if (wider.value <= m.value + 1e-12 * (1.0 + std::abs(m.value))) {
      // Flat along the escaping ray: finite supremum.
      return {m.value, m.arg, false};
    }
    radius *= 2.0;
    m = wider;
  }
  return {l.value_cap, m.arg, true};
}

double eval_L(const LagrangianSpec& l, Vec x, Vec xi) {
  if (l.ham.domain().contains(x, 1e-12) == Location::Outside) {
    throw Error(ErrorCode::OutsideDomain, "L evaluated outside the closed domain");
  }
  return legendre_transform(l, x, xi).value;
}

double closed_form_L(const HamiltonianSpec& h, Vec x, Vec xi, double value_cap) {
  if (h.dimension() == 1) xi.y = 0.0;
  const double shift = h.potential()(x) + h.level();
  switch (h.family()) {
    case Family::Eikonal:
      return norm(xi) <= 1.0 ? shift : value_cap;
    case Family::Quadratic:
      return 0.5 * dot(xi, xi) + shift;
    case Family::QuadraticAnisotropic: {
      Vec q = h.matrix().solve(xi);
      if (h.dimension() == 1) q = Vec{xi.x / h.matrix().a11};
      return 0.5 * dot(xi, q) + shift;
    }
  }
  return value_cap;
}

double fenchel_gap(const LagrangianSpec& l, Vec x, Vec xi, Vec p) {
  return legendre_transform(l, x, xi).value + l.ham(x, p) - dot(xi, p);
}

std::optional<Vec> fenchel_momentum(const LagrangianSpec& l, Vec x, Vec xi) {
  const ConjugatePoint cp = legendre_transform(l, x, xi);
  if (cp.infinite) return std::nullopt;
  return cp.argmax;
}

// Checkers ---------------------------------------------------------------------

namespace {

Vec random_point(const Domain& d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(d.lower(0), d.upper(0));
  Vec x{ux(rng)};
  if (d.dimension() == 2) {
    std::uniform_real_distribution<double> uy(d.lower(1), d.upper(1));
    x.y = uy(rng);
  }
  return x;
}

Vec random_unit(int dim, std::mt19937_64& rng) {
  if (dim == 1) return Vec{std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0};
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
  const double a = ang(rng);
  return {std::cos(a), std::sin(a)};
}

Vec random_in_ball(int dim, double radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = radius * (dim == 1 ? u(rng) : std::sqrt(u(rng)));
  return r * random_unit(dim, rng);
}

// Radius along unit e at which H(x, r e) equals the target level, if any.
std::optional<double> level_radius(const HamiltonianSpec& h, Vec x, Vec e, double c) {
  const double s = c + h.potential()(x) + h.level();
  if (s < 0.0) return std::nullopt;
  switch (h.family()) {
    case Family::Eikonal: return s;
    case Family::Quadratic: return std::sqrt(2.0 * s);
    case Family::QuadraticAnisotropic: {
      const double q = dot(e, h.matrix().apply(e));
      return std::sqrt(2.0 * s / q);
    }
  }
  return std::nullopt;
}

}  // namespace

ConvexityReport check_convexity(const HamiltonianSpec& h, std::size_t n_samples, double p_radius,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ConvexityReport r;
  r.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n_samples; ++k) {
    const Vec x = random_point(h.domain(), rng);
    const Vec p = random_in_ball(h.dimension(), p_radius, rng);
    const Vec q = random_in_ball(h.dimension(), p_radius, rng);
    const double v = h(x, 0.5 * (p + q)) - 0.5 * (h(x, p) + h(x, q));
    r.max_violation = std::max(r.max_violation, v);
  }
  r.samples = n_samples;
  r.pass = r.max_violation <= 1e-12;
  return r;
}

CoercivityReport check_coercivity(const HamiltonianSpec& h, double radius, int n_directions) {
  CoercivityReport r;
  r.radius = radius;
  r.min_value = std::numeric_limits<double>::infinity();
  const Domain& d = h.domain();
  const int n = d.dimension() == 1 ? 200 : 40;
  const int ny = d.dimension() == 1 ? 0 : n;
  const int ndir = d.dimension() == 1 ? 2 : n_directions;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= ny; ++j) {
      Vec x{d.lower(0) + (d.upper(0) - d.lower(0)) * i / n};
      if (d.dimension() == 2) x.y = d.lower(1) + (d.upper(1) - d.lower(1)) * j / n;
      for (int k = 0; k < ndir; ++k) {
        const double a = 2.0 * std::numbers::pi * k / ndir;
        Vec e = d.dimension() == 1 ? Vec{k == 0 ? 1.0 : -1.0} : Vec{std::cos(a), std::sin(a)};
        r.min_value = std::min(r.min_value, h(x, radius * e));
      }
    }
  }
  r.pass = r.min_value > 0.0;
  return r;
}

std::vector<CriticalSample> sample_critical_set(const HamiltonianSpec& h, double c, std::size_t n,
                                                std::uint64_t seed, double q_tolerance,
                                                std::size_t* skipped) {
  std::mt19937_64 rng(seed);
  std::vector<CriticalSample> out;
  std::size_t kinks = 0;
  // Bounded number of draws: Q can be empty over parts of the domain.
  for (std::size_t attempt = 0; attempt < 20 * n && out.size() < n; ++attempt) {
    const Vec x = random_point(h.domain(), rng);
    const Vec e = random_unit(h.dimension(), rng);
    const auto r = level_radius(h, x, e, c);
    if (!r) continue;
    const Vec p = *r * e;
    if (std::abs(h(x, p) - c) > q_tolerance) continue;
    const auto sg = supergradient_H(h, x, p);
    if (sg.empty()) {
      ++kinks;
      continue;
    }
    out.push_back({x, p, sg.front()});
  }
  if (skipped) *skipped = kinks;
  if (out.empty() && kinks == 0) {
    throw Error(ErrorCode::EmptyCriticalSet, "no points of the critical level set were found");
  }
  return out;
}

ModulusEstimate check_modulus_condition(const HamiltonianSpec& h, ModulusSign sign, double c,
                                        const ModulusCheckParams& params) {
  ModulusEstimate est;
  est.sign = sign;
  std::size_t kinks = 0;
  const auto samples = sample_critical_set(h, c, params.n_points, params.seed, params.q_tolerance, &kinks);
  est.skipped_kinks = kinks;
  est.critical_samples = samples.size();
  if (samples.empty()) {
    // Every critical momentum sits on a kink: S is empty and the condition is vacuous.
    est.vacuous = true;
    est.pass = true;
    est.bins.push_back({0.0, 0.0, 0.0, 0});
    return est;
  }

  struct Draw {
    double r;
    double slack;
  };
  std::vector<Draw> draws;
  std::mt19937_64 rng(params.seed ^ 0x9e3779b97f4a7c15ULL);
  for (const auto& s : samples) {
    for (std::size_t k = 0; k <= params.perturbations; ++k) {
      const Vec pp = k == 0 ? Vec{} : random_in_ball(h.dimension(), params.pprime_radius, rng);
      const double t = dot(s.xi, pp);
      const double r = sign == ModulusSign::Plus ? std::max(t, 0.0) : -std::min(t, 0.0);
      const double slack = h(s.x, s.p + pp) - c - t;
      draws.push_back({r, slack});
    }
  }
  double r_max = 0.0;
  est.min_slack = std::numeric_limits<double>::infinity();
  for (const auto& d : draws) {
    r_max = std::max(r_max, d.r);
    est.min_slack = std::min(est.min_slack, d.slack);
  }

  // bins[0] holds the exact r = 0 draws; the rest split (0, r_max].
  const int nb = std::max(params.n_bins, 1);
  est.bins.resize(nb + 1);
  est.bins[0].r = 0.0;
  for (int b = 1; b <= nb; ++b) est.bins[b].r = r_max * (b - 1) / nb;
  for (auto& b : est.bins) b.raw_min = std::numeric_limits<double>::infinity();
  for (const auto& d : draws) {
    int b = 0;
    if (d.r > 0.0) b = 1 + std::min(nb - 1, static_cast<int>(d.r / r_max * nb));
    auto& bin = est.bins[b];
    bin.raw_min = std::min(bin.raw_min, d.slack);
    ++bin.samples;
  }
  // Lower envelope of a nondecreasing modulus: suffix minimum.
  double running = std::numeric_limits<double>::infinity();
  for (int b = nb; b >= 0; --b) {
    auto& bin = est.bins[b];
    if (bin.samples > 0) running = std::min(running, bin.raw_min);
    bin.envelope = running;
  }
  est.bins[0].envelope = std::min(est.bins[0].envelope, 0.0);

  bool ok = est.min_slack >= -1e-12;
  for (int b = 1; b <= nb; ++b) {
    const auto& bin = est.bins[b];
    if (bin.samples == 0) continue;
    if (bin.r >= params.positivity_threshold && !(bin.envelope > 0.0)) ok = false;
  }
  est.pass = ok;
  return est;
}

ScalingReport scaling_excess(const LagrangianSpec& l, double c, ModulusSign sign,
                             std::vector<double> deltas, std::vector<CriticalSample> samples) {
  LagrangianSpec lc = l;
  lc.ham = l.ham.shifted(c);
  std::sort(deltas.begin(), deltas.end(), std::greater<>());

  ScalingReport rep;
  rep.sign = sign;
  const double s = sign == ModulusSign::Plus ? 1.0 : -1.0;
  for (double delta : deltas) {
    ScalingReport::Row row;
    row.delta = delta;
    row.worst_excess = -std::numeric_limits<double>::infinity();
    for (const auto& smp : samples) {
      const double base = legendre_transform(lc, smp.x, smp.xi).value;
      const double moved = legendre_transform(lc, smp.x, (1.0 + s * delta) * smp.xi).value;
      row.worst_excess = std::max(row.worst_excess, moved - (1.0 + s * delta) * base);
    }
    row.samples = samples.size();
    row.omega1 = delta > 0.0 ? row.worst_excess / delta : 0.0;
    rep.rows.push_back(row);
  }
  rep.samples = std::move(samples);

  // omega1 must shrink as delta -> 0: nonincreasing along decreasing delta and
  // strictly smaller at the finest delta than at the coarsest.
  bool ok = !rep.rows.empty() && !rep.samples.empty();
  for (std::size_t k = 1; ok && k < rep.rows.size(); ++k) {
    if (rep.rows[k].omega1 > rep.rows[k - 1].omega1 + 1e-12) ok = false;
  }
  if (ok && rep.rows.size() > 1) {
    const double first = rep.rows.front().omega1;
    const double last = rep.rows.back().omega1;
    ok = last < first || std::abs(first) <= 1e-12;
  }
  rep.pass = ok;
  return rep;
}

ScalingReport check_scaling_bound(const LagrangianSpec& l, double c, ModulusSign sign,
                                  std::vector<double> deltas, std::size_t n_samples,
                                  std::uint64_t seed) {
  auto samples = sample_critical_set(l.ham, c, n_samples, seed);
  if (samples.empty()) {
    throw Error(ErrorCode::EmptyCriticalSet, "the critical set S has no differentiable points");
  }
  return scaling_excess(l, c, sign, std::move(deltas), std::move(samples));
}

}  // namespace hjn
