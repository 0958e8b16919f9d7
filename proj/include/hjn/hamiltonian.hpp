#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hjn/core.hpp"
#include "hjn/fields.hpp"
#include "hjn/geometry.hpp"

namespace hjn {

enum class Family { Eikonal, Quadratic, QuadraticAnisotropic };

const char* to_string(Family family);
Family parse_family(const std::string& name);

/// Constant symmetric positive-definite 2x2 matrix.
struct SymMatrix2 {
  double a11 = 1.0;
  double a12 = 0.0;
  double a22 = 1.0;

  Vec apply(Vec p) const { return {a11 * p.x + a12 * p.y, a12 * p.x + a22 * p.y}; }
  Vec solve(Vec xi) const;
  double min_eigenvalue() const;
  double max_eigenvalue() const;
};

/// H(x,p) = phi(p) - f(x) - level, with phi one of |p|, |p|^2/2, p.Ap/2.
///
/// `level` is the normalization constant: `shifted(c)` returns H - c, which is
/// how the ergodic and asymptotic modules hand the critical value around.
class HamiltonianSpec {
 public:
  HamiltonianSpec(Family family, ScalarField potential, Domain domain, SymMatrix2 matrix = {});

  Family family() const { return family_; }
  const ScalarField& potential() const { return potential_; }
  const Domain& domain() const { return domain_; }
  const SymMatrix2& matrix() const { return matrix_; }
  double level() const { return level_; }
  int dimension() const { return domain_.dimension(); }

  HamiltonianSpec shifted(double c) const;

  /// Evaluates without a domain check; hot loops call this.
  double operator()(Vec x, Vec p) const { return kinetic(p) - potential_(x) - level_; }
  double kinetic(Vec p) const;

  /// Gradient in p where differentiable (nullopt at the Eikonal kink).
  std::optional<Vec> gradient(Vec p) const;

  /// Sampled extrema of f over the closed domain.
  double potential_min() const { return f_min_; }
  double potential_max() const { return f_max_; }

  /// Radius R with {p : H(x,p) <= lvl} inside the closed R-ball for all x.
  double momentum_radius(double lvl) const;
  /// R for lvl = 0.
  double p_bound() const { return momentum_radius(0.0); }
  /// Per-axis sup of |dH/dp_i| over the R-ball.
  Vec max_slopes(double radius) const;

  std::string describe() const;

 private:
  Family family_;
  ScalarField potential_;
  Domain domain_;
  SymMatrix2 matrix_;
  double level_ = 0.0;
  double f_min_ = 0.0;
  double f_max_ = 0.0;
};

/// H(x,p) with an OutsideDomain check on x.
double eval_H(const HamiltonianSpec& h, Vec x, Vec p);

/// Superdifferential of the convex map p -> H(x,p): {grad} where smooth,
/// empty at kinks.
std::vector<Vec> supergradient_H(const HamiltonianSpec& h, Vec x, Vec p);

/// Numerical convex conjugate L(x,xi) = sup_p { xi.p - H(x,p) }.
struct LagrangianSpec {
  HamiltonianSpec ham;
  double xi_bound = 1.0;      ///< radius of velocities worth searching over
  int transform_grid = 41;    ///< coarse lattice points per axis before refinement
  double slope_margin = 4.0;  ///< p-search radius >= slope_margin * |xi|
  double value_cap = 1e9;     ///< stands in for +infinity

  explicit LagrangianSpec(HamiltonianSpec h);
};

struct ConjugatePoint {
  double value = 0.0;  ///< value_cap when infinite
  Vec argmax;          ///< maximizing momentum (meaningless when infinite)
  bool infinite = false;
};

ConjugatePoint legendre_transform(const LagrangianSpec& l, Vec x, Vec xi);
double eval_L(const LagrangianSpec& l, Vec x, Vec xi);

/// Closed-form conjugate for the built-in families, used as the independent
/// cross-check of the numerical transform.
double closed_form_L(const HamiltonianSpec& h, Vec x, Vec xi, double value_cap);

/// L(x,xi) + H(x,p) - xi.p, nonnegative up to the cap (Young).
double fenchel_gap(const LagrangianSpec& l, Vec x, Vec xi, Vec p);

/// Momentum q realizing the Fenchel equality at velocity xi: the maximizer in
/// the conjugate, i.e. q in the subdifferential of L(x,.) at xi.
std::optional<Vec> fenchel_momentum(const LagrangianSpec& l, Vec x, Vec xi);

// Assumption checkers ---------------------------------------------------------

struct ConvexityReport {
  double max_violation = 0.0;  ///< max of H(mid) - (H(p)+H(q))/2
  std::size_t samples = 0;
  bool pass = false;
};

ConvexityReport check_convexity(const HamiltonianSpec& h, std::size_t n_samples, double p_radius,
                                std::uint64_t seed);

struct CoercivityReport {
  double min_value = 0.0;  ///< min of H(x, R e) over sampled x and unit e
  double radius = 0.0;
  bool pass = false;
};

CoercivityReport check_coercivity(const HamiltonianSpec& h, double radius, int n_directions);

enum class ModulusSign { Plus, Minus };

const char* to_string(ModulusSign sign);

/// Empirical lower envelope of the modulus omega in the critical-slack
/// condition H(x,p+p') - c >= xi.p' + omega(r), r = (xi.p')_+ or |(xi.p')_-|.
struct ModulusEstimate {
  struct Bin {
    double r = 0.0;             ///< lower edge of the bin
    double raw_min = 0.0;       ///< min slack among samples in the bin
    double envelope = 0.0;      ///< nondecreasing lower envelope
    std::size_t samples = 0;
  };
  ModulusSign sign = ModulusSign::Plus;
  std::vector<Bin> bins;           ///< bins[0] is the r = 0 entry
  std::size_t critical_samples = 0;
  std::size_t skipped_kinks = 0;   ///< Q points without a supergradient
  double min_slack = 0.0;
  bool vacuous = false;            ///< S empty: the condition holds trivially
  bool pass = false;
};

struct ModulusCheckParams {
  std::size_t n_points = 400;       ///< Q samples
  std::size_t perturbations = 50;   ///< p' draws per Q sample
  double pprime_radius = 2.0;
  int n_bins = 20;
  double positivity_threshold = 0.05;  ///< bins with r >= this must be > 0
  double q_tolerance = 1e-6;
  std::uint64_t seed = 1;
};

/// Samples (x,p) in Q and xi in the superdifferential, perturbs by random p',
/// and bins the slack by r. Throws EmptyCriticalSet when Q has no samples.
ModulusEstimate check_modulus_condition(const HamiltonianSpec& h, ModulusSign sign, double c,
                                        const ModulusCheckParams& params);

/// A point (x,p) of the critical level set with a supergradient xi (a point of S).
struct CriticalSample {
  Vec x;
  Vec p;
  Vec xi;
};

/// Draws points of S for the shifted Hamiltonian; kinks are skipped.
std::vector<CriticalSample> sample_critical_set(const HamiltonianSpec& h, double c, std::size_t n,
                                                std::uint64_t seed, double q_tolerance = 1e-6,
                                                std::size_t* skipped = nullptr);

struct ScalingReport {
  struct Row {
    double delta = 0.0;
    double worst_excess = 0.0;  ///< max over samples of L(x,(1+-d)xi) - (1+-d)L(x,xi)
    double omega1 = 0.0;        ///< worst_excess / delta
    std::size_t samples = 0;
  };
  ModulusSign sign = ModulusSign::Plus;
  std::vector<Row> rows;               ///< ordered by decreasing delta
  std::vector<CriticalSample> samples;
  bool pass = false;
};

/// Excess of the Lagrangian along the rays (1 +- delta) xi over points of S,
/// for the Lagrangian of H - c. Passes when omega1 decreases as delta -> 0.
ScalingReport check_scaling_bound(const LagrangianSpec& l, double c, ModulusSign sign,
                                  std::vector<double> deltas, std::size_t n_samples,
                                  std::uint64_t seed);

/// Same computation over explicitly supplied (x, xi) pairs.
ScalingReport scaling_excess(const LagrangianSpec& l, double c, ModulusSign sign,
                             std::vector<double> deltas, std::vector<CriticalSample> samples);

}  // namespace hjn
