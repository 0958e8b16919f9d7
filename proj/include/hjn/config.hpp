#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hjn/geometry.hpp"
#include "hjn/hamiltonian.hpp"

namespace hjn {

/// Everything one pipeline run needs. Parsed from flat `section.key = value`
/// text; see docs/config.md for the key list.
struct ScenarioConfig {
  std::string name = "unnamed";
  std::string description;

  std::string domain_kind = "interval";
  std::vector<double> bounds{0.0, 1.0};

  std::string family = "eikonal";
  std::string potential = "zero";
  std::vector<double> matrix{1.0, 0.0, 1.0};

  /// Per face (Left, Right, Bottom, Top): gamma spec and datum spec.
  std::array<std::string, 4> gamma{"normal", "normal", "normal", "normal"};
  std::array<std::string, 4> datum{"zero", "zero", "zero", "zero"};

  std::string u0 = "zero";

  double h = 0.005;
  std::optional<double> dt;

  double horizon = 5.0;
  int outputs = 50;
  std::vector<double> extra_times;

  double critical_t1 = 20.0;
  double critical_t2 = 40.0;
  std::vector<double> lambdas{1e-2, 5e-3};
  double critical_bound = 0.05;
  double critical_agreement = 0.02;

  int distance_skip = 0;  ///< 0: every node in 1D, every 4th in 2D
  double stationary_tolerance = 1e-5;
  std::string aubry_tol = "5h";

  double tol_scheme = 0.02;
  double tol_equality_cap = 0.08;
  double tol_gap = 0.05;
  std::optional<double> tol_gap_time;
  double tol_variational = 0.08;
  double tol_continuity = 0.1;

  std::vector<Vec> spot_points{Vec{0.1}, Vec{0.3}, Vec{0.5}, Vec{0.7}, Vec{0.9}};
  double spot_time = 1.5;
  double dpp_tau = 0.5;
  int segments = 8;
  int substeps = 16;
  int starts = 6;
  int evaluations = 4000;
  bool cross_check = false;

  int modulus_points = 400;
  int modulus_perturbations = 50;
  std::string modulus_require = "none";

  std::optional<double> expect_c;
  double expect_c_tolerance = 0.02;
  std::optional<std::string> expect_u_inf;
  double expect_u_inf_tolerance = 0.05;
  std::optional<double> expect_distance_source_x;
  std::optional<double> expect_distance_source_y;
  std::optional<double> expect_distance_level;  ///< level the distance oracle refers to; defaults to c
  std::optional<std::string> expect_distance;
  double expect_distance_tolerance = 0.05;
  std::optional<std::string> expect_aubry;  ///< "all" or a point list
  int expect_aubry_slack = 1;               ///< neighbours allowed around each expected point

  std::uint64_t seed = 1;

  /// Parses the whole text; throws ConfigError naming the line and key.
  static ScenarioConfig parse(const std::string& text, const std::string& origin = "<config>");
  static ScenarioConfig load(const std::string& path);

  /// Canonical text form; parse(to_text()) reproduces the config.
  std::string to_text() const;

  Domain make_domain() const;
  HamiltonianSpec make_hamiltonian() const;
  BoundaryData make_boundary() const;
  double aubry_tolerance(double grid_h) const;
};

/// "x1 x2 ..." in 1D or "x y; x y; ..." in 2D.
std::vector<Vec> parse_points(const std::string& text);

/// Builds gamma from "normal", "constant gx [gy]" or "tilted a" (nu plus a
/// times the counterclockwise tangent) for a face.
BoundaryData::GammaFn parse_gamma(const std::string& spec, Vec normal);

}  // namespace hjn
