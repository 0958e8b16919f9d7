#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "hjn/evolution.hpp"
#include "hjn/geometry.hpp"
#include "hjn/hamiltonian.hpp"

namespace hjn {

/// Discrete reflected path. Interval k runs from t[k] to t[k+1] with control
/// v[k] and multiplier l[k]; the reflection acts at the landing point, so
///   (eta[k+1] - eta[k]) / dt_k + l[k] * gamma_eff[k] = v[k]
/// holds exactly, with l[k] > 0 only if eta[k+1] lies on the boundary.
struct Trajectory {
  std::vector<double> t;
  std::vector<Vec> eta;    ///< size n + 1
  std::vector<Vec> v;      ///< size n
  std::vector<double> l;   ///< size n, nonnegative
  std::vector<std::array<double, 4>> face_l;  ///< split of l[k] by face
  std::vector<Vec> gamma_eff;                 ///< l-weighted mean of gamma over active faces

  std::size_t steps() const { return v.size(); }
  double dt(std::size_t k) const { return t[k + 1] - t[k]; }
  double horizon() const { return t.back(); }

  void write_csv(std::ostream& out, int dimension) const;
};

struct SkorokhodParams {
  int substeps = 4;   ///< splitting factor when a step cannot be reflected directly
  int max_depth = 4;  ///< nested splits before StepTooLarge
};

/// Integrates eta' + l gamma(eta) = v from x with the piecewise-constant
/// controls v over steps of length dt, reflecting back onto the face each
/// time the free step leaves the closed domain.
Trajectory solve_skorokhod(Vec x, const std::vector<Vec>& v, double dt, const Domain& d,
                           const BoundaryData& b, const SkorokhodParams& params = {});

struct TrajectoryReport {
  double max_outside = 0.0;        ///< largest distance outside the closed domain
  double min_l = 0.0;
  std::size_t complementarity_violations = 0;  ///< l > 0 while strictly interior
  double max_dynamics_residual = 0.0;          ///< with gamma taken from the field
  bool pass = false;
};

/// Checks containment, l >= 0, complementarity and the discrete dynamics,
/// evaluating gamma from the boundary data at the landing point.
TrajectoryReport check_trajectory(const Trajectory& tr, const Domain& d, const BoundaryData& b,
                                  double node_tol = 1e-12, double dynamics_tol = 0.0);

struct ActionValue {
  double integral = 0.0;
  double terminal = 0.0;
  double total = 0.0;
};

/// Trapezoidal action of L(eta,-v) + g(eta) l, plus the terminal value
/// interpolated at eta(T) when given. Throws InfiniteAction at the value cap.
ActionValue action(const Trajectory& tr, const LagrangianSpec& l, const BoundaryData& b,
                   const GridFunction* u_terminal = nullptr);

struct SearchParams {
  int segments = 8;        ///< K piecewise-constant control pieces
  int substeps = 16;       ///< integrator steps per piece
  int starts = 6;          ///< multi-start count (the first start is the zero control)
  double initial_step = 0.0;  ///< 0 picks xi_bound / 2
  double min_step = 1e-3;
  std::size_t max_evaluations = 4000;  ///< per start
  std::uint64_t seed = 1;
  unsigned jobs = 1;
};

struct VariationalResult {
  double value = 0.0;
  std::vector<Vec> controls;  ///< K pieces of the best start
  Trajectory trajectory;
  ActionValue action;
  std::vector<std::uint64_t> start_seeds;
};

/// Minimizes the action over K-piece controls with terminal data `terminal`
/// on [0, t]. The result bounds the true infimum from above.
VariationalResult minimize_action(Vec x, double t, const GridFunction& terminal, const LagrangianSpec& l,
                                  const BoundaryData& b, const SearchParams& search);

/// Value of the variational formula for u(x,t) with initial data u0.
VariationalResult variational_value(Vec x, double t, const GridFunction& u0, const LagrangianSpec& l,
                                    const BoundaryData& b, const SearchParams& search);

struct DppResult {
  double value = 0.0;      ///< optimized short-horizon action plus u(., t - tau)
  double grid_value = 0.0; ///< u(x, t) from the run
  double discrepancy = 0.0;
};

/// Dynamic programming consistency between snapshots t - tau and t.
/// Throws MissingSnapshot when either time is not recorded.
DppResult dpp_check(Vec x, double t, double tau, const EvolutionRun& run, const LagrangianSpec& l,
                    const BoundaryData& b, const SearchParams& search);

/// Momenta along a trajectory from the Fenchel equality: q[k] maximizes
/// -v[k].p - H(eta[k+1], p). Empty entries where L is infinite.
std::vector<std::optional<Vec>> extremal_momenta(const Trajectory& tr, const LagrangianSpec& l);

struct ExtremalThresholds {
  double hamiltonian = 0.05;
  double boundary = 0.05;
  double fenchel = 1e-6;
};

struct ExtremalReport {
  double max_hamiltonian_residual = 0.0;  ///< |H(eta,q) - c|
  double max_boundary_residual = 0.0;     ///< |gamma.q - g| on contact steps
  double max_fenchel_gap = 0.0;           ///< |-q.v - (H(eta,q) - c) - L(eta,-v)|
  std::size_t contact_steps = 0;
  std::size_t checked_steps = 0;
  bool hamiltonian_pass = false;
  bool boundary_pass = false;
  bool fenchel_pass = false;
};

/// Residuals of the calibrated-curve identities. `l` must be built from the
/// unshifted Hamiltonian; c normalizes it.
ExtremalReport extremal_identity_check(const Trajectory& tr, const std::vector<std::optional<Vec>>& q,
                                       const LagrangianSpec& l, const BoundaryData& b, double c,
                                       const ExtremalThresholds& thresholds = {});

}  // namespace hjn
