#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace hjn {

/// Point or vector in R^1 / R^2. One-dimensional problems keep y == 0.
struct Vec {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec() = default;
  constexpr Vec(double x_, double y_ = 0.0) : x(x_), y(y_) {}

  constexpr double operator[](int axis) const { return axis == 0 ? x : y; }
  constexpr double& operator[](int axis) { return axis == 0 ? x : y; }

  constexpr Vec& operator+=(Vec o) { x += o.x; y += o.y; return *this; }
  constexpr Vec& operator-=(Vec o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec& operator*=(double s) { x *= s; y *= s; return *this; }

  friend constexpr Vec operator+(Vec a, Vec b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec operator-(Vec a, Vec b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec operator-(Vec a) { return {-a.x, -a.y}; }
  friend constexpr Vec operator*(double s, Vec a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec operator*(Vec a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec a, Vec b) = default;
};

constexpr double dot(Vec a, Vec b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec a) { return std::hypot(a.x, a.y); }

enum class ErrorCode {
  CornerPoint,
  NotOnBoundary,
  OutsideDomain,
  ObliquenessViolated,
  EmptyCriticalSet,
  CflViolation,
  NonConvergence,
  InfiniteAction,
  StepTooLarge,
  MissingSnapshot,
  InsufficientHorizon,
  EmptyAubrySet,
  InvalidArgument,
  ConfigError,
};

const char* to_string(ErrorCode code);

/// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hjn
