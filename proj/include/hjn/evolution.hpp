#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hjn/geometry.hpp"
#include "hjn/grid.hpp"
#include "hjn/hamiltonian.hpp"

namespace hjn {

/// Lax-Friedrichs flux: H(x, (p- + p+)/2) - sum_i alpha_i (p+_i - p-_i) / 2.
/// Nonincreasing in each p+_i and nondecreasing in each p-_i whenever alpha_i
/// bounds |dH/dp_i| on the momenta involved.
double numerical_hamiltonian(const HamiltonianSpec& h, Vec x, Vec p_minus, Vec p_plus, Vec alpha);

/// Per-axis sup of |dH/dp_i| over the box spanned by p_minus and p_plus,
/// capped by `bound`. Eikonal and the anisotropic family keep the bound.
Vec local_alpha(const HamiltonianSpec& h, Vec p_minus, Vec p_plus, Vec bound);

enum class Dissipation { Global, Local };

/// Values on the ghost layer just outside each face, indexed by the
/// tangential node index (a single entry per face in 1D).
struct GhostLayer {
  std::vector<double> left, right, bottom, top;

  const std::vector<double>& face(Face f) const;
  std::vector<double>& face(Face f);
};

/// Completes u across every face from the discrete oblique condition
/// gamma . Du = g: the normal component uses the ghost unknown, the tangential
/// one an upwinded difference along the face (zero at corners).
/// Throws ObliquenessViolated when nu . gamma <= 0 at a boundary node.
GhostLayer apply_neumann_bc(const GridFunction& u, const BoundaryData& b);

/// Explicit monotone scheme for u_t + H(x,Du) = 0 with the oblique Neumann
/// condition. Dissipation and time step are frozen at construction.
class Scheme {
 public:
  /// `momentum_radius` bounds the gradients the scheme will meet; it fixes
  /// the dissipation. `dt` defaults to the CFL limit and is validated against it.
  Scheme(HamiltonianSpec h, BoundaryData b, Grid grid, double momentum_radius,
         std::optional<double> dt = std::nullopt, Dissipation dissipation = Dissipation::Local);

  const HamiltonianSpec& hamiltonian() const { return ham_; }
  const BoundaryData& boundary() const { return bc_; }
  const Grid& grid() const { return grid_; }
  Vec alpha() const { return alpha_; }
  double momentum_radius() const { return radius_; }
  double dt() const { return dt_; }
  double cfl_limit() const { return cfl_limit_; }
  Dissipation dissipation() const { return dissipation_; }

  /// Same discretization for H - c.
  Scheme shifted(double c) const;
  /// Same discretization with a different time step (validated).
  Scheme with_dt(double dt) const;

  /// Numerical Hamiltonian at every node.
  std::vector<double> flux(const GridFunction& u) const;
  /// One explicit Euler step.
  GridFunction step(const GridFunction& u) const;

  /// One-sided difference quotients at node k, ghost-completed on faces.
  std::pair<Vec, Vec> one_sided(const GridFunction& u, const GhostLayer& ghosts, std::size_t k) const;

 private:
  HamiltonianSpec ham_;
  BoundaryData bc_;
  Grid grid_;
  double radius_;
  Vec alpha_;
  double cfl_limit_;
  double dt_;
  Dissipation dissipation_;
};

/// CFL bound h / (2 sum_i alpha_i).
double cfl_limit(const Grid& grid, Vec alpha);

/// Momentum radius that covers evolution from u0 and the stationary problems
/// built on the same discretization: the larger of R(sup |H(x,Du0)|) and
/// R(max_x H(x,0)), the latter bounding the critical value from above.
double scheme_radius(const HamiltonianSpec& h, const BoundaryData& b, const GridFunction& u0);

/// Free-function step matching the scheme contract. Throws CflViolation.
GridFunction step(const GridFunction& u, const HamiltonianSpec& h, const BoundaryData& b, double dt,
                  Vec alpha);

struct Snapshot {
  double t;
  GridFunction u;
};

struct EvolutionRun {
  std::vector<Snapshot> snapshots;                       ///< strictly increasing t
  std::vector<std::pair<double, double>> c_estimate_series;  ///< (t, -u(x_ref,t)/t)
  std::size_t ref_node = 0;
  double dt = 0.0;

  /// Snapshot whose time is within dt/2 of t, if any.
  const Snapshot* find(double t) const;
  const Snapshot& final() const { return snapshots.back(); }
};

/// Marches from u0 to t_final, recording the nearest completed step to each
/// requested output time (t = 0 is always recorded).
EvolutionRun solve(const Scheme& scheme, const GridFunction& u0, double t_final,
                   const std::vector<double>& output_times, std::optional<std::size_t> ref_node = {});

/// Evenly spaced output times in (0, t_final].
std::vector<double> uniform_times(double t_final, std::size_t count);

}  // namespace hjn
