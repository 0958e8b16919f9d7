#include "hjn/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include <fmt/format.h>

namespace hjn {

GridFunction compute_ud_minus(const std::vector<DistanceField>& fields, const GridFunction& u0) {
  if (fields.empty()) throw Error(ErrorCode::InvalidArgument, "no distance fields");
  GridFunction out(u0.grid(), std::numeric_limits<double>::infinity());
  for (const auto& f : fields) {
    const double base = u0[f.source];
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::min(out[k], f.values[k] + base);
  }
  return out;
}

GridFunction compute_u0_minus(const Scheme& scheme, double c, const GridFunction& u0,
                              const StationaryParams& params) {
  return solve_stationary(scheme, c, u0, StationaryDirection::DecreaseToMaxSubsolution, params).w;
}

GridFunction compute_u_minus(const EvolutionRun& run, double c, double t, const HorizonParams& params) {
  std::vector<const Snapshot*> window;
  for (const auto& s : run.snapshots) {
    if (s.t >= t - 0.5 * run.dt) window.push_back(&s);
  }
  if (window.size() < 2) {
    throw Error(ErrorCode::InsufficientHorizon, fmt::format("fewer than two snapshots at or after t = {}", t));
  }
  const double t0 = window.front()->t;
  const double cut = t0 + 0.75 * (window.back()->t - t0);

  const std::size_t n = window.front()->u.size();
  GridFunction early(window.front()->u.grid(), std::numeric_limits<double>::infinity());
  GridFunction all = early;
  bool late_seen = false;
  for (const Snapshot* s : window) {
    const bool late = s->t > cut;
    late_seen = late_seen || late;
    for (std::size_t k = 0; k < n; ++k) {
      const double v = s->u[k] + c * s->t;
      all[k] = std::min(all[k], v);
      if (!late) early[k] = std::min(early[k], v);
    }
  }
  if (!late_seen) throw Error(ErrorCode::InsufficientHorizon, "no snapshot in the last quarter of the window");
  double drop = 0.0;
  for (std::size_t k = 0; k < n; ++k) drop = std::max(drop, early[k] - all[k]);
  if (drop > params.stabilization) {
    throw Error(ErrorCode::InsufficientHorizon,
                fmt::format("running infimum still dropped by {} in the last quarter of [{}, {}]", drop, t0,
                            window.back()->t));
  }
  return all;
}

GridFunction compute_ud_inf(const std::vector<DistanceField>& fields, const AubrySet& aubry,
                            const GridFunction& ud_minus) {
  if (aubry.empty()) throw Error(ErrorCode::EmptyAubrySet, "no node passed the Aubry residual test");
  std::map<std::size_t, const DistanceField*> by_source;
  for (const auto& f : fields) by_source[f.source] = &f;
  GridFunction out(ud_minus.grid(), std::numeric_limits<double>::infinity());
  for (std::size_t y : aubry.nodes) {
    const auto it = by_source.find(y);
    if (it == by_source.end()) {
      throw Error(ErrorCode::InvalidArgument, fmt::format("no distance field for Aubry node {}", y));
    }
    const double base = ud_minus[y];
    const GridFunction& d = it->second->values;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::min(out[k], d[k] + base);
  }
  return out;
}

GridFunction compute_u0_inf(const Scheme& scheme, double c, const GridFunction& u0_minus,
                            const StationaryParams& params) {
  return solve_stationary(scheme, c, u0_minus, StationaryDirection::EvolveToSolution, params).w;
}

std::vector<double> AsymptoticBundle::group_minus_gaps() const {
  return {sup_distance(u0_minus, ud_minus), sup_distance(ud_minus, u_minus_at0),
          sup_distance(u0_minus, u_minus_at0)};
}

std::vector<double> AsymptoticBundle::group_inf_gaps() const {
  return {sup_distance(u0_inf, ud_inf), sup_distance(ud_inf, u_inf), sup_distance(u0_inf, u_inf)};
}

const char* to_string(ConvergenceVerdict v) {
  switch (v) {
    case ConvergenceVerdict::Pass: return "pass";
    case ConvergenceVerdict::ObservedHypothesisUnverified: return "convergence observed, hypothesis unverified";
    case ConvergenceVerdict::Fail: return "fail";
  }
  return "?";
}

ConvergenceReport check_convergence(const EvolutionRun& run, const GridFunction& u_inf, double c,
                                    const std::vector<ModulusEstimate>& modulus_checks,
                                    const ConvergenceParams& params) {
  ConvergenceReport r;
  const auto& snaps = run.snapshots;
  if (snaps.empty()) throw Error(ErrorCode::InvalidArgument, "empty run");
  for (const auto& s : snaps) {
    double gap = 0.0;
    for (std::size_t k = 0; k < u_inf.size(); ++k) gap = std::max(gap, std::abs(s.u[k] + c * s.t - u_inf[k]));
    r.gap_series.emplace_back(s.t, gap);
  }

  const double t_check = params.check_time.value_or(snaps.back().t);
  const auto at = std::find_if(r.gap_series.begin(), r.gap_series.end(),
                               [&](const auto& p) { return p.first >= t_check - 0.5 * run.dt; });
  if (at == r.gap_series.end()) {
    throw Error(ErrorCode::InsufficientHorizon, fmt::format("run ends before t = {}", t_check));
  }
  r.checked_gap = at->second;
  r.threshold_pass = r.checked_gap <= params.threshold;

  const double horizon = snaps.back().t;
  double late = -1.0, middle = -1.0;
  for (const auto& [t, g] : r.gap_series) {
    if (t > 0.75 * horizon) late = std::max(late, g);
    else if (t > 0.5 * horizon) middle = std::max(middle, g);
  }
  r.tail_decay = late >= 0.0 && middle >= 0.0 && late <= middle + params.noise;

  // u^-(., t_i) by a backward running minimum, then checked for monotonicity
  // in t exactly as stored.
  std::vector<GridFunction> u_minus;
  GridFunction running(u_inf.grid(), std::numeric_limits<double>::infinity());
  for (auto it = snaps.rbegin(); it != snaps.rend(); ++it) {
    for (std::size_t k = 0; k < running.size(); ++k) running[k] = std::min(running[k], it->u[k] + c * it->t);
    u_minus.push_back(running);
  }
  std::reverse(u_minus.begin(), u_minus.end());
  bool ok = true;
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    if (i > 0) ok = ok && dominated_by(u_minus[i - 1], u_minus[i]);
    r.monotone_check.emplace_back(snaps[i].t, ok);
  }
  r.u_minus_monotone = ok;

  r.hypothesis = std::any_of(modulus_checks.begin(), modulus_checks.end(),
                             [](const ModulusEstimate& m) { return m.pass; });
  if (r.threshold_pass && r.tail_decay && r.u_minus_monotone) {
    r.verdict = r.hypothesis ? ConvergenceVerdict::Pass : ConvergenceVerdict::ObservedHypothesisUnverified;
  }
  return r;
}

void ConvergenceReport::write_csv(std::ostream& out) const {
  out << "t,gap,u_minus_monotone\n";
  for (std::size_t i = 0; i < gap_series.size(); ++i) {
    out << fmt::format("{:.17g},{:.17g},{}\n", gap_series[i].first, gap_series[i].second,
                       monotone_check[i].second ? 1 : 0);
  }
}

}  // namespace hjn
