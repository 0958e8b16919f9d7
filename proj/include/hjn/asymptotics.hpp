#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hjn/ergodic.hpp"
#include "hjn/evolution.hpp"
#include "hjn/hamiltonian.hpp"

namespace hjn {

/// inf over the sources y of d(x,y) + u0(y).
GridFunction compute_ud_minus(const std::vector<DistanceField>& fields, const GridFunction& u0);

/// Maximal subsolution below u0 (decreasing stationary iteration).
GridFunction compute_u0_minus(const Scheme& scheme, double c, const GridFunction& u0,
                              const StationaryParams& params = {});

struct HorizonParams {
  double stabilization = 1e-2;  ///< allowed drop of the infimum over the last quarter of the window
};

/// Running infimum of u(x,s) + c s over recorded snapshots with s >= t.
/// Throws InsufficientHorizon when the infimum is still moving at the end of the run.
GridFunction compute_u_minus(const EvolutionRun& run, double c, double t, const HorizonParams& params = {});

/// inf over y in A of d(x,y) + ud_minus(y). Throws EmptyAubrySet.
GridFunction compute_ud_inf(const std::vector<DistanceField>& fields, const AubrySet& aubry,
                            const GridFunction& ud_minus);

/// Stationary solution reached by evolving from u0_minus.
GridFunction compute_u0_inf(const Scheme& scheme, double c, const GridFunction& u0_minus,
                            const StationaryParams& params = {});

struct AsymptoticBundle {
  GridFunction u0_minus, ud_minus, u_minus_at0;
  GridFunction u0_inf, ud_inf, u_inf;
  CriticalValue c;

  /// Pairwise sup-gaps {u0_minus vs ud_minus, ud_minus vs u_minus_at0, u0_minus vs u_minus_at0}.
  std::vector<double> group_minus_gaps() const;
  /// Same for {u0_inf, ud_inf, u_inf}.
  std::vector<double> group_inf_gaps() const;
};

enum class ConvergenceVerdict { Pass, ObservedHypothesisUnverified, Fail };
const char* to_string(ConvergenceVerdict v);

struct ConvergenceParams {
  double threshold = 0.05;     ///< acceptance bound on the gap at `check_time`
  std::optional<double> check_time;  ///< defaults to the final snapshot
  double noise = 1e-9;
};

struct ConvergenceReport {
  std::vector<std::pair<double, double>> gap_series;  ///< (t, sup |u + c t - u_inf|)
  std::vector<std::pair<double, bool>> monotone_check;  ///< (t, u^- nondecreasing up to t)
  double checked_gap = 0.0;
  bool threshold_pass = false;
  bool tail_decay = false;   ///< last-quarter max <= previous-quarter max
  bool u_minus_monotone = false;
  bool hypothesis = false;   ///< a modulus check passed
  ConvergenceVerdict verdict = ConvergenceVerdict::Fail;

  void write_csv(std::ostream& out) const;
};

/// Convergence of u(x,t) + c t to u_inf. A theorem-level pass additionally
/// needs one of the supplied modulus checks to have passed.
ConvergenceReport check_convergence(const EvolutionRun& run, const GridFunction& u_inf, double c,
                                    const std::vector<ModulusEstimate>& modulus_checks,
                                    const ConvergenceParams& params = {});

}  // namespace hjn
