#pragma once

// Small seeded generators for property tests.

#include <cmath>
#include <cstdint>
#include <vector>

#include <doctest.h>

#include "hjn/grid.hpp"

namespace hjn::test {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform(double a = 0.0, double b = 1.0) { return a + (b - a) * ((next() >> 11) * 0x1.0p-53); }
  int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
  /// Multiple of 2^-bits in [a, b]; sums and differences of such values stay exact.
  double dyadic(double a, double b, int bits = 10) {
    const double scale = std::ldexp(1.0, bits);
    return std::floor(uniform(a, b) * scale) / scale;
  }
  Vec point(const Domain& d) {
    Vec x{uniform(d.lower(0), d.upper(0))};
    if (d.dimension() == 2) x.y = uniform(d.lower(1), d.upper(1));
    return x;
  }
  Vec vec(int dim, double r) { return dim == 2 ? Vec{uniform(-r, r), uniform(-r, r)} : Vec{uniform(-r, r)}; }

 private:
  std::uint64_t state_;
};

/// Independent uniform node values in [lo, hi].
inline GridFunction random_field(const Grid& grid, Rng& rng, double lo, double hi, bool dyadic = false) {
  GridFunction u(grid);
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = dyadic ? rng.dyadic(lo, hi) : rng.uniform(lo, hi);
  return u;
}

/// Rounds every value to a multiple of 2^-bits so scheme arithmetic stays exact.
inline GridFunction dyadic_round(GridFunction u, int bits = 10) {
  const double scale = std::ldexp(1.0, bits);
  for (auto& v : u.values()) v = std::round(v * scale) / scale;
  return u;
}

/// Error code thrown by fn; FAILs the test when nothing is thrown.
template <class F>
ErrorCode code_of(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an hjn::Error");
  return ErrorCode::InvalidArgument;
}

/// Smooth random field: a few random cosines, Lipschitz constant <= amp * modes * 2 pi.
inline GridFunction smooth_field(const Grid& grid, Rng& rng, double amp, int modes = 3) {
  std::vector<double> a(modes), kx(modes), ky(modes), ph(modes);
  for (int m = 0; m < modes; ++m) {
    a[m] = rng.uniform(-amp, amp) / modes;
    kx[m] = rng.integer(0, 2);
    ky[m] = grid.dimension() == 2 ? rng.integer(0, 2) : 0;
    ph[m] = rng.uniform(0.0, 6.283185307179586);
  }
  return GridFunction::sample(grid, [&](Vec x) {
    double s = 0.0;
    for (int m = 0; m < modes; ++m) s += a[m] * std::cos(6.283185307179586 * (kx[m] * x.x + ky[m] * x.y) + ph[m]);
    return s;
  });
}

}  // namespace hjn::test
