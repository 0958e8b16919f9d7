#include "hjn/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

namespace hjn {

Grid::Grid(Domain domain, int nx, int ny) : domain_(domain), nx_(nx), ny_(ny) {
  if (nx_ < 2) throw Error(ErrorCode::InvalidArgument, "grid needs at least two intervals");
  if (domain_.dimension() == 1) {
    ny_ = 0;
  } else if (ny_ < 2) {
    throw Error(ErrorCode::InvalidArgument, "2D grid needs at least two intervals per axis");
  }
  spacing_.x = (domain_.upper(0) - domain_.lower(0)) / nx_;
  spacing_.y = ny_ > 0 ? (domain_.upper(1) - domain_.lower(1)) / ny_ : 0.0;
}

Grid Grid::with_spacing(Domain domain, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid spacing must be positive");
  const int nx = static_cast<int>(std::lround((domain.upper(0) - domain.lower(0)) / h));
  const int ny = domain.dimension() == 2
                     ? static_cast<int>(std::lround((domain.upper(1) - domain.lower(1)) / h))
                     : 0;
  return Grid(domain, nx, ny);
}

double Grid::h() const { return dimension() == 1 ? spacing_.x : std::min(spacing_.x, spacing_.y); }

Vec Grid::node(int i, int j) const {
  // End nodes are pinned to the exact face coordinates.
  const double x = i == nx_ ? domain_.upper(0) : domain_.lower(0) + i * spacing_.x;
  if (dimension() == 1) return Vec{x};
  const double y = j == ny_ ? domain_.upper(1) : domain_.lower(1) + j * spacing_.y;
  return {x, y};
}

bool Grid::on_boundary(std::size_t k) const {
  auto [i, j] = coords(k);
  if (i == 0 || i == nx_) return true;
  return dimension() == 2 && (j == 0 || j == ny_);
}

std::size_t Grid::nearest(Vec x) const {
  const Vec c = domain_.clamp(x);
  const int i = std::clamp(static_cast<int>(std::lround((c.x - domain_.lower(0)) / spacing_.x)), 0, nx_);
  int j = 0;
  if (dimension() == 2) {
    j = std::clamp(static_cast<int>(std::lround((c.y - domain_.lower(1)) / spacing_.y)), 0, ny_);
  }
  return index(i, j);
}

GridFunction::GridFunction(Grid grid, double fill) : grid_(std::move(grid)), values_(grid_.size(), fill) {}

GridFunction::GridFunction(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw Error(ErrorCode::InvalidArgument, "value count does not match the grid");
  }
}

GridFunction GridFunction::sample(const Grid& grid, const std::function<double(Vec)>& fn) {
  GridFunction out(grid);
  for (std::size_t k = 0; k < grid.size(); ++k) out.values_[k] = fn(grid.node(k));
  return out;
}

double GridFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }
double GridFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }

bool GridFunction::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double GridFunction::lipschitz_bound() const {
  const Vec h = grid_.spacing();
  double best = 0.0;
  for (int i = 0; i <= grid_.nx(); ++i) {
    for (int j = 0; j <= grid_.ny(); ++j) {
      const double u = at(i, j);
      const double px = i < grid_.nx() ? (at(i + 1, j) - u) / h.x : (u - at(i - 1, j)) / h.x;
      double py = 0.0;
      if (grid_.dimension() == 2) {
        py = j < grid_.ny() ? (at(i, j + 1) - u) / h.y : (u - at(i, j - 1)) / h.y;
      }
      best = std::max(best, std::hypot(px, py));
    }
  }
  return best;
}

double GridFunction::interpolate(Vec x) const {
  const Domain& d = grid_.domain();
  const Vec c = d.clamp(x);
  const Vec h = grid_.spacing();
  const double sx = (c.x - d.lower(0)) / h.x;
  const int i = std::clamp(static_cast<int>(std::floor(sx)), 0, grid_.nx() - 1);
  const double tx = std::clamp(sx - i, 0.0, 1.0);
  if (grid_.dimension() == 1) return (1.0 - tx) * at(i) + tx * at(i + 1);
  const double sy = (c.y - d.lower(1)) / h.y;
  const int j = std::clamp(static_cast<int>(std::floor(sy)), 0, grid_.ny() - 1);
  const double ty = std::clamp(sy - j, 0.0, 1.0);
  return (1.0 - tx) * (1.0 - ty) * at(i, j) + tx * (1.0 - ty) * at(i + 1, j) +
         (1.0 - tx) * ty * at(i, j + 1) + tx * ty * at(i + 1, j + 1);
}

GridFunction& GridFunction::operator+=(double k) {
  for (double& v : values_) v += k;
  return *this;
}

void GridFunction::write_csv(std::ostream& out, const char* value_name) const {
  const bool two_d = grid_.dimension() == 2;
  out << (two_d ? "x,y," : "x,") << value_name << '\n';
  for (std::size_t k = 0; k < size(); ++k) {
    const Vec p = grid_.node(k);
    if (two_d) {
      out << fmt::format("{:.17g},{:.17g},{:.17g}\n", p.x, p.y, values_[k]);
    } else {
      out << fmt::format("{:.17g},{:.17g}\n", p.x, values_[k]);
    }
  }
}

double sup_distance(const GridFunction& a, const GridFunction& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "grid functions on different grids");
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

bool dominated_by(const GridFunction& a, const GridFunction& b, double tol) {
  if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "grid functions on different grids");
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!(a[k] <= b[k] + tol)) return false;
  }
  return true;
}

}  // namespace hjn
