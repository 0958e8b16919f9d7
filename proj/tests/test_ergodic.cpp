#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "hjn/ergodic.hpp"
#include "support/gen.hpp"

using namespace hjn;
using test::code_of;

namespace {

const Domain kUnit = Domain::interval(0.0, 1.0);

struct Setup {
  Grid grid;
  Scheme scheme;
};

Setup make(Family family, const char* potential, double h) {
  const HamiltonianSpec ham(family, ScalarField::parse(potential), kUnit);
  const auto bc = BoundaryData::normal_reflection(kUnit);
  const Grid grid = Grid::with_spacing(kUnit, h);
  return {grid, Scheme(ham, bc, grid, scheme_radius(ham, bc, GridFunction(grid)))};
}

double well(double x) { return (x - 0.5) * (x - 0.5); }

}  // namespace

TEST_CASE("critical values of the one-dimensional scenarios") {
  struct Case {
    Family family;
    const char* potential;
    double tol;
  };
  // c = -min f = 0 in every case: a subsolution of |w'| <= a + f or
  // |w'|^2/2 <= a + f exists iff a + min f >= 0.
  for (const auto& [family, potential, tol] : {Case{Family::Eikonal, "zero", 0.01}, Case{Family::Eikonal, "well 0.5", 0.02},
                                               Case{Family::Quadratic, "well 0.5", 0.02}}) {
    CAPTURE(potential);
    const auto s = make(family, potential, 1.0 / 200).scheme;
    const auto lta = critical_value(s, CriticalMethod::LongTimeAverage);
    const auto sd = critical_value(s, CriticalMethod::SmallDiscount);
    CHECK(std::abs(lta.c) <= tol);
    CHECK(std::abs(sd.c) <= tol);
    CHECK(std::abs(lta.c - sd.c) <= 0.02);
    CHECK(lta.method == CriticalMethod::LongTimeAverage);
    CHECK(sd.raw.size() == 2);
  }
}

TEST_CASE("critical value of a constant potential") {
  // H = p^2/2 - 0.3: constants solve H = -0.3 and nothing lower has a subsolution
  const auto s = make(Family::Quadratic, "constant 0.3", 1.0 / 100).scheme;
  CHECK(critical_value(s, CriticalMethod::SmallDiscount).c == doctest::Approx(-0.3).epsilon(1e-6));
  CHECK(critical_value(s, CriticalMethod::LongTimeAverage).c == doctest::Approx(-0.3).epsilon(1e-6));
}

TEST_CASE("critical value parameter validation") {
  const auto s = make(Family::Eikonal, "zero", 0.1).scheme;
  CriticalValueParams p;
  p.t1 = 5.0;
  p.t2 = 5.0;
  CHECK(code_of([&] { critical_value(s, CriticalMethod::LongTimeAverage, p); }) == ErrorCode::InvalidArgument);
  p = {};
  p.lambdas = {0.01};
  CHECK(code_of([&] { critical_value(s, CriticalMethod::SmallDiscount, p); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("stationary solutions") {
  SUBCASE("a constant seed is already a solution") {
    const auto s = make(Family::Eikonal, "zero", 1.0 / 50).scheme;
    const GridFunction seed(s.grid(), 0.75);
    for (auto dir : {StationaryDirection::DecreaseToMaxSubsolution, StationaryDirection::EvolveToSolution}) {
      const auto r = solve_stationary(s, 0.0, seed, dir);
      CHECK(r.w.values() == seed.values());
    }
  }
  SUBCASE("evolving a solution again changes nothing beyond tolerance") {
    const auto s = make(Family::Quadratic, "well 0.5", 1.0 / 100).scheme;
    const auto seed = GridFunction::sample(s.grid(), [](Vec x) { return 0.2 * std::cos(3.0 * x.x); });
    // the discrete critical value sits slightly off 0; at c = 0 the run would drift forever
    const double c = critical_value(s, CriticalMethod::SmallDiscount).c;
    StationaryParams p;
    const auto once = solve_stationary(s, c, seed, StationaryDirection::EvolveToSolution, p);
    const auto twice = solve_stationary(s, c, once.w, StationaryDirection::EvolveToSolution, p);
    CHECK(sup_distance(once.w, twice.w) <= p.tolerance);
    for (double r : stationary_residual(s, c, twice.w)) CHECK(std::abs(r) <= 10.0 * p.tolerance);
  }
  SUBCASE("below the critical value there is no fixed point") {
    // minimality: H = c - 0.05 has no subsolution, so the iteration runs away
    const auto s = make(Family::Quadratic, "well 0.5", 1.0 / 50).scheme;
    const GridFunction seed(s.grid(), 1.0);
    StationaryParams p;
    p.max_time = 500.0;
    CHECK(code_of([&] {
            solve_stationary(s, -0.05, seed, StationaryDirection::DecreaseToMaxSubsolution, p);
          }) == ErrorCode::NonConvergence);
  }
}

TEST_CASE("distance function oracles") {
  SUBCASE("eikonal with g = 0: d(x, y) = |x - y| at level 1") {
    // At c = 0 the sublevel set {|p| <= 0} forces d = 0; level 1 gives the
    // Euclidean distance.
    const auto s = make(Family::Eikonal, "zero", 1.0 / 200).scheme;
    for (std::size_t y : {0u, 60u, 100u, 173u}) {
      const auto d = distance_field(s, 1.0, y);
      CHECK(d.values[y] == 0.0);
      double err = 0.0;
      for (std::size_t k = 0; k < d.values.size(); ++k) {
        err = std::max(err, std::abs(d.values[k] - std::abs(s.grid().node(k).x - s.grid().node(y).x)));
      }
      CHECK(err <= 0.03);
      const auto zero = distance_field(s, 0.0, y);
      CHECK(zero.values.max() <= 1e-3);
    }
  }
  SUBCASE("quadratic well: d(x, 1/2) = (x - 1/2)^2 / sqrt 2") {
    const auto s = make(Family::Quadratic, "well 0.5", 1.0 / 200).scheme;
    const auto d = distance_field(s, 0.0, 100);
    double err = 0.0;
    for (std::size_t k = 0; k < d.values.size(); ++k) {
      err = std::max(err, std::abs(d.values[k] - well(s.grid().node(k).x) / std::sqrt(2.0)));
    }
    CHECK(err <= 0.05);
  }
}

TEST_CASE("distance function properties") {
  const auto setup = make(Family::Quadratic, "well 0.3", 1.0 / 50);
  const auto& s = setup.scheme;
  StationaryParams p;
  std::vector<std::size_t> all(s.grid().size());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
  const auto fields = distance_fields(s, 0.0, all, 1, p);
  REQUIRE(fields.size() == all.size());

  for (const auto& f : fields) {
    CHECK(f.values[f.source] == 0.0);
    // subsolution away from the source
    const auto res = stationary_residual(s, 0.0, f.values);
    for (std::size_t k = 0; k < res.size(); ++k) {
      if (k != f.source) CHECK(res[k] <= 10.0 * p.tolerance);
    }
  }

  test::Rng rng(71);
  double worst = -1e300;
  for (int n = 0; n < 100; ++n) {
    const auto x = static_cast<std::size_t>(rng.integer(0, 50));
    const auto y = static_cast<std::size_t>(rng.integer(0, 50));
    const auto z = static_cast<std::size_t>(rng.integer(0, 50));
    // d(x, z) is fields[z].values[x]
    worst = std::max(worst, fields[z].values[x] - fields[y].values[x] - fields[z].values[y]);
  }
  CHECK(worst <= 2.0 * 1e-3);

  SUBCASE("jobs do not change the result") {
    const auto par = distance_fields(s, 0.0, {3, 17, 40}, 3, p);
    for (const auto& f : par) CHECK(f.values.values() == fields[f.source].values.values());
  }
}

TEST_CASE("distance is the maximal subsolution pinned at the source") {
  // |psi'| <= sqrt(2 f) with psi(y) = 0 makes psi a subsolution, so psi <= d(., y).
  const auto s = make(Family::Quadratic, "well 0.5", 1.0 / 100).scheme;
  const double r2 = std::sqrt(2.0);
  for (std::size_t y : {20u, 50u, 90u}) {
    const double yv = s.grid().node(y).x;
    const auto d = distance_field(s, 0.0, y);
    const std::vector<std::function<double(double)>> tents{
        [&](double x) { return (well(yv) - well(x)) / r2; },
        [&](double x) { return 0.5 * std::abs(well(x) - well(yv)) / r2; },
        [&](double x) { return std::min(0.0, (well(x) - well(yv)) / r2); },
        [&](double x) { return 0.0 * x; },
    };
    for (const auto& psi : tents) {
      for (std::size_t k = 0; k < d.values.size(); ++k) {
        CHECK(psi(s.grid().node(k).x) <= d.values[k] + 0.01);
      }
    }
  }
}

TEST_CASE("Aubry set by the source-residual test") {
  SUBCASE("eikonal with f = 0: every node") {
    const auto s = make(Family::Eikonal, "zero", 1.0 / 100).scheme;
    std::vector<std::size_t> all(s.grid().size());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
    const auto a = aubry_set(s, 0.0, distance_fields(s, 0.0, all, 1), 5.0 / 100);
    CHECK(a.nodes.size() == all.size());
  }
  SUBCASE("quadratic well: residual at the source is -f(y)") {
    // At the kink of d(., y) the subdifferential contains p = 0, where
    // H - c = -f(y). Membership at tolerance tol is therefore f(y) <= tol.
    const double h = 1.0 / 100;
    const auto s = make(Family::Quadratic, "well 0.5", h).scheme;
    std::vector<std::size_t> all(s.grid().size());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
    const auto fields = distance_fields(s, 0.0, all, 1);
    const auto a = aubry_set(s, 0.0, fields, 5.0 * h);
    REQUIRE(a.residual_at_source.size() == all.size());
    for (std::size_t k = 0; k < all.size(); ++k) {
      CHECK(a.residual_at_source[k] == doctest::Approx(-well(s.grid().node(k).x)).epsilon(1e-3).scale(1.0));
    }
    // the center is always flagged
    CHECK(std::find(a.nodes.begin(), a.nodes.end(), 50u) != a.nodes.end());
    for (std::size_t k : a.nodes) CHECK(well(s.grid().node(k).x) <= 5.0 * h + 1e-3);

    // a tolerance below f at the neighbours leaves the minimum and at most one neighbour
    const auto tight = aubry_set(s, 0.0, fields, 0.5 * h * h);
    REQUIRE(!tight.empty());
    for (std::size_t k : tight.nodes) CHECK((k >= 49 && k <= 51));

    const auto everything = aubry_set(s, 0.0, fields, std::numeric_limits<double>::infinity());
    CHECK(everything.nodes.size() == all.size());
  }
}
