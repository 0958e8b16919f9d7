#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "hjn/core.hpp"
#include "hjn/geometry.hpp"

namespace hjn {

/// Uniform lattice covering the closed domain, boundary nodes included.
/// Nodes are stored lexicographically by (i, j): k = i * (ny + 1) + j.
class Grid {
 public:
  Grid(Domain domain, int nx, int ny = 0);
  /// Intervals per axis chosen as round(length / h).
  static Grid with_spacing(Domain domain, double h);

  const Domain& domain() const { return domain_; }
  int dimension() const { return domain_.dimension(); }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  Vec spacing() const { return spacing_; }
  /// Smallest spacing over the active axes.
  double h() const;
  std::size_t size() const { return static_cast<std::size_t>(nx_ + 1) * (ny_ + 1); }

  std::size_t index(int i, int j = 0) const { return static_cast<std::size_t>(i) * (ny_ + 1) + j; }
  std::pair<int, int> coords(std::size_t k) const {
    return {static_cast<int>(k / (ny_ + 1)), static_cast<int>(k % (ny_ + 1))};
  }
  Vec node(int i, int j = 0) const;
  Vec node(std::size_t k) const {
    auto [i, j] = coords(k);
    return node(i, j);
  }
  bool on_boundary(std::size_t k) const;
  std::size_t nearest(Vec x) const;

 private:
  Domain domain_;
  int nx_;
  int ny_;
  Vec spacing_;
};

/// Scalar values on the nodes of a grid.
class GridFunction {
 public:
  explicit GridFunction(Grid grid, double fill = 0.0);
  GridFunction(Grid grid, std::vector<double> values);

  static GridFunction sample(const Grid& grid, const std::function<double(Vec)>& fn);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }
  double at(int i, int j = 0) const { return values_[grid_.index(i, j)]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  double min() const;
  double max() const;
  bool all_finite() const;

  /// Largest forward-difference gradient norm over the lattice.
  double lipschitz_bound() const;

  /// Linear (1D) or bilinear (2D) interpolation; x is clamped into the domain.
  double interpolate(Vec x) const;

  GridFunction& operator+=(double k);
  friend GridFunction operator+(GridFunction a, double k) { return a += k; }

  /// Comma-separated table: x[,y],value in storage order.
  void write_csv(std::ostream& out, const char* value_name = "value") const;

 private:
  Grid grid_;
  std::vector<double> values_;
};

double sup_distance(const GridFunction& a, const GridFunction& b);
/// Pointwise a <= b + tol everywhere.
bool dominated_by(const GridFunction& a, const GridFunction& b, double tol = 0.0);

}  // namespace hjn
