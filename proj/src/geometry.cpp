#include "hjn/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hjn {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CornerPoint: return "CornerPoint";
    case ErrorCode::NotOnBoundary: return "NotOnBoundary";
    case ErrorCode::OutsideDomain: return "OutsideDomain";
    case ErrorCode::ObliquenessViolated: return "ObliquenessViolated";
    case ErrorCode::EmptyCriticalSet: return "EmptyCriticalSet";
    case ErrorCode::CflViolation: return "CflViolation";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::InfiniteAction: return "InfiniteAction";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::MissingSnapshot: return "MissingSnapshot";
    case ErrorCode::InsufficientHorizon: return "InsufficientHorizon";
    case ErrorCode::EmptyAubrySet: return "EmptyAubrySet";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

const char* to_string(Face face) {
  switch (face) {
    case Face::Left: return "left";
    case Face::Right: return "right";
    case Face::Bottom: return "bottom";
    case Face::Top: return "top";
  }
  return "?";
}

Domain Domain::interval(double a, double b) {
  if (!(a < b)) throw Error(ErrorCode::InvalidArgument, "interval requires a < b");
  Domain d;
  d.kind_ = DomainKind::Interval1D;
  d.lo_ = {a, 0.0};
  d.hi_ = {b, 0.0};
  return d;
}

Domain Domain::rectangle(double ax, double bx, double ay, double by) {
  if (!(ax < bx) || !(ay < by)) {
    throw Error(ErrorCode::InvalidArgument, "rectangle requires ax < bx and ay < by");
  }
  Domain d;
  d.kind_ = DomainKind::Rectangle2D;
  d.lo_ = {ax, ay};
  d.hi_ = {bx, by};
  return d;
}

double Domain::diameter() const { return std::hypot(hi_[0] - lo_[0], hi_[1] - lo_[1]); }

std::vector<Face> Domain::faces() const {
  if (dimension() == 1) return {Face::Left, Face::Right};
  return {Face::Left, Face::Right, Face::Bottom, Face::Top};
}

Vec Domain::face_normal(Face face) const {
  switch (face) {
    case Face::Left: return {-1.0, 0.0};
    case Face::Right: return {1.0, 0.0};
    case Face::Bottom: return {0.0, -1.0};
    case Face::Top: return {0.0, 1.0};
  }
  return {};
}

Location Domain::contains(Vec x, double tol) const {
  bool on_boundary = false;
  for (int axis = 0; axis < dimension(); ++axis) {
    const double v = x[axis];
    if (v < lo_[axis] - tol || v > hi_[axis] + tol) return Location::Outside;
    if (std::abs(v - lo_[axis]) <= tol || std::abs(v - hi_[axis]) <= tol) on_boundary = true;
  }
  if (dimension() == 1 && std::abs(x.y) > tol) return Location::Outside;
  return on_boundary ? Location::Boundary : Location::Interior;
}

std::vector<Face> Domain::faces_at(Vec x, double tol) const {
  std::vector<Face> out;
  if (contains(x, tol) != Location::Boundary) return out;
  if (std::abs(x.x - lo_[0]) <= tol) out.push_back(Face::Left);
  if (std::abs(x.x - hi_[0]) <= tol) out.push_back(Face::Right);
  if (dimension() == 2) {
    if (std::abs(x.y - lo_[1]) <= tol) out.push_back(Face::Bottom);
    if (std::abs(x.y - hi_[1]) <= tol) out.push_back(Face::Top);
  }
  return out;
}

Vec Domain::outward_normal(Vec x, double tol) const {
  const auto fs = faces_at(x, tol);
  if (fs.empty()) {
    std::ostringstream msg;
    msg << "point (" << x.x << ", " << x.y << ") is not on the boundary";
    throw Error(ErrorCode::NotOnBoundary, msg.str());
  }
  if (fs.size() > 1) {
    std::ostringstream msg;
    msg << "point (" << x.x << ", " << x.y << ") is a corner";
    throw Error(ErrorCode::CornerPoint, msg.str());
  }
  return face_normal(fs.front());
}

Vec Domain::clamp(Vec x) const {
  Vec out = x;
  for (int axis = 0; axis < dimension(); ++axis) out[axis] = std::clamp(x[axis], lo_[axis], hi_[axis]);
  if (dimension() == 1) out.y = 0.0;
  return out;
}

std::string Domain::describe() const {
  std::ostringstream out;
  out.precision(17);
  if (dimension() == 1) {
    out << "interval " << lo_[0] << ' ' << hi_[0];
  } else {
    out << "rectangle " << lo_[0] << ' ' << hi_[0] << ' ' << lo_[1] << ' ' << hi_[1];
  }
  return out.str();
}

BoundaryData BoundaryData::normal_reflection(const Domain& domain) {
  BoundaryData b;
  for (Face f : domain.faces()) {
    const Vec n = domain.face_normal(f);
    b.set(f, [n](Vec) { return n; }, [](Vec) { return 0.0; });
  }
  return b;
}

void BoundaryData::set(Face face, GammaFn gamma, DatumFn g) {
  set_gamma(face, std::move(gamma));
  set_datum(face, std::move(g));
}

void BoundaryData::set_gamma(Face face, GammaFn gamma) { gamma_[static_cast<int>(face)] = std::move(gamma); }

void BoundaryData::set_datum(Face face, DatumFn g) { datum_[static_cast<int>(face)] = std::move(g); }

Vec BoundaryData::gamma(Face face, Vec x) const {
  const auto& fn = gamma_[static_cast<int>(face)];
  if (!fn) throw Error(ErrorCode::InvalidArgument, std::string("no gamma on face ") + to_string(face));
  return fn(x);
}

double BoundaryData::g(Face face, Vec x) const {
  const auto& fn = datum_[static_cast<int>(face)];
  return fn ? fn(x) : 0.0;
}

std::vector<std::pair<Face, Vec>> boundary_samples(const Domain& domain, int per_axis) {
  std::vector<std::pair<Face, Vec>> out;
  if (domain.dimension() == 1) {
    out.emplace_back(Face::Left, Vec{domain.lower(0)});
    out.emplace_back(Face::Right, Vec{domain.upper(0)});
    return out;
  }
  const double ax = domain.lower(0), bx = domain.upper(0);
  const double ay = domain.lower(1), by = domain.upper(1);
  for (int k = 1; k < per_axis; ++k) {
    const double s = static_cast<double>(k) / per_axis;
    const double y = ay + s * (by - ay);
    const double x = ax + s * (bx - ax);
    out.emplace_back(Face::Left, Vec{ax, y});
    out.emplace_back(Face::Right, Vec{bx, y});
    out.emplace_back(Face::Bottom, Vec{x, ay});
    out.emplace_back(Face::Top, Vec{x, by});
  }
  return out;
}

ObliquenessReport check_obliqueness(const Domain& domain, const BoundaryData& data, int per_axis) {
  ObliquenessReport r;
  r.min_inner = INFINITY;
  for (const auto& [face, x] : boundary_samples(domain, per_axis)) {
    const double inner = dot(domain.face_normal(face), data.gamma(face, x));
    if (inner < r.min_inner) {
      r.min_inner = inner;
      r.worst_point = x;
      r.worst_face = face;
    }
  }
  r.pass = r.min_inner > 0.0;
  return r;
}

ContinuityReport check_continuity(const Domain& domain, const BoundaryData& data, int per_axis,
                                  double modulus) {
  ContinuityReport r;
  if (domain.dimension() == 2) {
    for (Face face : domain.faces()) {
      const int t = 1 - Domain::normal_axis(face);
      const double lo = domain.lower(t), hi = domain.upper(t);
      Vec base{face == Face::Right ? domain.upper(0) : domain.lower(0),
               face == Face::Top ? domain.upper(1) : domain.lower(1)};
      Vec prev_pt = base;
      prev_pt[t] = lo + (hi - lo) / per_axis;
      for (int k = 2; k < per_axis; ++k) {
        Vec pt = base;
        pt[t] = lo + k * (hi - lo) / per_axis;
        r.max_gamma_jump =
            std::max(r.max_gamma_jump, norm(data.gamma(face, pt) - data.gamma(face, prev_pt)));
        r.max_g_jump = std::max(r.max_g_jump, std::abs(data.g(face, pt) - data.g(face, prev_pt)));
        prev_pt = pt;
      }
    }
  }
  r.pass = r.max_gamma_jump <= modulus && r.max_g_jump <= modulus;
  return r;
}

}  // namespace hjn
