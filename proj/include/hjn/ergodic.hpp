#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "hjn/evolution.hpp"

namespace hjn {

enum class CriticalMethod { LongTimeAverage, SmallDiscount };
const char* to_string(CriticalMethod m);

struct CriticalValue {
  double c = 0.0;
  CriticalMethod method = CriticalMethod::LongTimeAverage;
  double uncertainty = 0.0;
  /// Raw estimates before extrapolation: (T or lambda, estimate).
  std::vector<std::pair<double, double>> raw;
};

struct CriticalValueParams {
  double t1 = 20.0;  ///< LongTimeAverage horizons, extrapolated as c = -(u(T2)-u(T1))/(T2-T1)
  double t2 = 40.0;
  std::vector<double> lambdas{1e-2, 5e-3};
  double steady_tolerance = 1e-9;  ///< SmallDiscount: oscillation of v_t at steady state
  double max_time = 20000.0;
  double bound = 0.05;  ///< NonConvergence threshold on the spread of estimates
  std::optional<std::size_t> ref_node;
};

/// Critical value of the discretized problem. The scheme's time step and
/// dissipation are reused; its level must be 0.
CriticalValue critical_value(const Scheme& scheme, CriticalMethod method,
                             const CriticalValueParams& params = {});

enum class StationaryDirection { DecreaseToMaxSubsolution, EvolveToSolution };

struct StationaryParams {
  double tolerance = 1e-5;  ///< sup-norm of the increment per unit time
  double max_time = 2000.0;
  /// Downward travel (below the seed minimum) treated as divergence; 0 picks
  /// 10 * diameter * max(R, 1).
  double divergence_depth = 0.0;
};

struct StationaryResult {
  GridFunction w;
  double residual = 0.0;  ///< subsolution residual (Decrease) or sup |scheme residual| (Evolve)
  std::size_t iterations = 0;
};

/// Stationary problem for H - c. Decrease: v <- min(S(v), seed) to a fixed
/// point, the maximal subsolution below seed. Evolve: time-march seed until
/// the increment per unit time drops below tolerance.
StationaryResult solve_stationary(const Scheme& scheme, double c, const GridFunction& seed,
                                  StationaryDirection direction, const StationaryParams& params = {});

/// Pointwise scheme residual of H - c: the numerical Hamiltonian at each node.
std::vector<double> stationary_residual(const Scheme& scheme, double c, const GridFunction& w);

struct DistanceField {
  std::size_t source = 0;
  GridFunction values;
  double residual = 0.0;  ///< max subsolution residual away from the source
  std::size_t iterations = 0;
};

/// Maximal subsolution of H = c vanishing at node y.
DistanceField distance_field(const Scheme& scheme, double c, std::size_t y,
                             const StationaryParams& params = {});

/// Distance fields for several sources, computed independently.
std::vector<DistanceField> distance_fields(const Scheme& scheme, double c,
                                           const std::vector<std::size_t>& sources, unsigned jobs,
                                           const StationaryParams& params = {});

/// min over the discrete subdifferential at node k of H(x_k, p) - c, where the
/// subdifferential is the box spanned by the one-sided differences (empty when
/// some backward difference exceeds the forward one, giving +infinity).
double source_residual(const Scheme& scheme, double c, const GridFunction& d, std::size_t k);

struct AubrySet {
  std::vector<std::size_t> nodes;
  std::vector<double> residual_at_source;  ///< one per distance field passed in
  std::vector<std::size_t> sources;
  bool empty() const { return nodes.empty(); }

  void write_csv(std::ostream& out, const Grid& grid) const;
};

/// Flags each source y whose distance field fails strict subsolution at y:
/// source_residual >= -tol.
AubrySet aubry_set(const Scheme& scheme, double c, const std::vector<DistanceField>& fields, double tol);

}  // namespace hjn
