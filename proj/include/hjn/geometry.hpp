#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hjn/core.hpp"

namespace hjn {

enum class DomainKind { Interval1D, Rectangle2D };

/// Faces of the supported domains. An interval only has Left and Right.
enum class Face { Left = 0, Right = 1, Bottom = 2, Top = 3 };

const char* to_string(Face face);

enum class Location { Interior, Boundary, Outside };

/// Closed interval [a,b] or axis-aligned rectangle [ax,bx] x [ay,by].
class Domain {
 public:
  static Domain interval(double a, double b);
  static Domain rectangle(double ax, double bx, double ay, double by);

  DomainKind kind() const { return kind_; }
  int dimension() const { return kind_ == DomainKind::Interval1D ? 1 : 2; }
  double lower(int axis) const { return lo_[axis]; }
  double upper(int axis) const { return hi_[axis]; }
  double diameter() const;

  std::vector<Face> faces() const;
  /// Outward unit normal of a face; constant along the face.
  Vec face_normal(Face face) const;
  /// Axis (0 or 1) orthogonal to the face.
  static int normal_axis(Face face) { return face == Face::Left || face == Face::Right ? 0 : 1; }

  /// Classifies x against the closed domain with tolerance `tol`.
  Location contains(Vec x, double tol = 0.0) const;

  /// Faces on which x lies (within tol). Two faces means a rectangle corner.
  std::vector<Face> faces_at(Vec x, double tol = 0.0) const;

  /// Outward unit normal at a boundary point. Throws CornerPoint at a
  /// rectangle corner and NotOnBoundary off the boundary.
  Vec outward_normal(Vec x, double tol = 0.0) const;

  /// Closest point of the closed domain.
  Vec clamp(Vec x) const;

  std::string describe() const;

 private:
  DomainKind kind_ = DomainKind::Interval1D;
  std::array<double, 2> lo_{0.0, 0.0};
  std::array<double, 2> hi_{1.0, 0.0};
};

/// Oblique field gamma and Neumann datum g, one evaluable pair per face.
class BoundaryData {
 public:
  using GammaFn = std::function<Vec(Vec)>;
  using DatumFn = std::function<double(Vec)>;

  BoundaryData() = default;

  /// gamma = outward normal, g = 0 on every face.
  static BoundaryData normal_reflection(const Domain& domain);

  void set(Face face, GammaFn gamma, DatumFn g);
  void set_gamma(Face face, GammaFn gamma);
  void set_datum(Face face, DatumFn g);

  Vec gamma(Face face, Vec x) const;
  double g(Face face, Vec x) const;

 private:
  std::array<GammaFn, 4> gamma_;
  std::array<DatumFn, 4> datum_;
};

/// Evenly spaced non-corner boundary sample points, `per_axis` intervals per
/// side, each tagged with its face.
std::vector<std::pair<Face, Vec>> boundary_samples(const Domain& domain, int per_axis);

struct ObliquenessReport {
  double min_inner = 0.0;  ///< min over boundary nodes of nu . gamma
  Vec worst_point;
  Face worst_face = Face::Left;
  bool pass = false;
};

ObliquenessReport check_obliqueness(const Domain& domain, const BoundaryData& data, int per_axis);

struct ContinuityReport {
  double max_gamma_jump = 0.0;
  double max_g_jump = 0.0;
  bool pass = false;
};

/// Adjacent-sample differences of gamma and g along each face, compared with
/// `modulus`.
ContinuityReport check_continuity(const Domain& domain, const BoundaryData& data, int per_axis,
                                  double modulus);

}  // namespace hjn
