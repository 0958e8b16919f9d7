#pragma once

#include <string>
#include <vector>

#include "hjn/core.hpp"

namespace hjn {

/// Named built-in scalar functions used for potentials f, initial data u_0
/// and Neumann data g. Parameters are positional; see `describe()`.
///
///   zero                       0
///   constant  k                k
///   well      cx [cy] [s]      s * |x - c|^2            (s defaults to 1)
///   sine      k [a]            a * sin(2 pi k x)          (x only)
///   cosine    k [a]            a * cos(2 pi k x) cos(2 pi k y)
///   abs       cx [cy]          |x - c|
///   linear    a [b] [k]        a x + b y + k
///   tent      cx cy h s        max(h - s |x - c|, 0)
class ScalarField {
 public:
  enum class Kind { Zero, Constant, Well, Sine, Cosine, Abs, Linear, Tent };

  ScalarField() = default;
  ScalarField(Kind kind, std::vector<double> params);

  static ScalarField zero() { return {}; }
  static ScalarField constant(double k) { return {Kind::Constant, {k}}; }
  static ScalarField well(Vec center, double scale = 1.0) {
    return {Kind::Well, {center.x, center.y, scale}};
  }

  /// Parses "name p1 p2 ..." into a field; throws ConfigError on unknown names
  /// or wrong arity.
  static ScalarField parse(const std::string& text);

  double operator()(Vec x) const;
  Kind kind() const { return kind_; }
  const std::vector<double>& params() const { return params_; }
  std::string describe() const;

 private:
  Kind kind_ = Kind::Zero;
  std::vector<double> params_;
};

}  // namespace hjn
