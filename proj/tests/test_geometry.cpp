#include <doctest.h>

#include <sstream>

#include "hjn/fields.hpp"
#include "hjn/geometry.hpp"
#include "hjn/grid.hpp"
#include "support/gen.hpp"

using namespace hjn;

using test::code_of;

TEST_CASE("outward normals of the supported domains") {
  const Domain unit = Domain::interval(0.0, 1.0);
  CHECK(unit.outward_normal(Vec{0.0}) == Vec{-1.0});
  CHECK(unit.outward_normal(Vec{1.0}) == Vec{1.0});

  const Domain sq = Domain::rectangle(0.0, 1.0, 0.0, 1.0);
  CHECK(sq.outward_normal({0.5, 0.0}) == Vec{0.0, -1.0});
  CHECK(sq.outward_normal({0.5, 1.0}) == Vec{0.0, 1.0});
  CHECK(sq.outward_normal({0.0, 0.3}) == Vec{-1.0, 0.0});
  CHECK(sq.outward_normal({1.0, 0.3}) == Vec{1.0, 0.0});

  CHECK(code_of([&] { sq.outward_normal({0.0, 0.0}); }) == ErrorCode::CornerPoint);
  CHECK(code_of([&] { sq.outward_normal({0.5, 0.5}); }) == ErrorCode::NotOnBoundary);
  CHECK(code_of([&] { unit.outward_normal(Vec{0.5}); }) == ErrorCode::NotOnBoundary);
}

TEST_CASE("normals are unit, outward and constant per face") {
  test::Rng rng(7);
  const Domain sq = Domain::rectangle(-1.0, 2.0, 0.5, 1.5);
  for (int k = 0; k < 200; ++k) {
    const Face f = static_cast<Face>(rng.integer(0, 3));
    const double s = rng.uniform(0.01, 0.99);
    Vec x;
    switch (f) {
      case Face::Left: x = {-1.0, 0.5 + s}; break;
      case Face::Right: x = {2.0, 0.5 + s}; break;
      case Face::Bottom: x = {-1.0 + 3.0 * s, 0.5}; break;
      case Face::Top: x = {-1.0 + 3.0 * s, 1.5}; break;
    }
    const Vec n = sq.outward_normal(x);
    CHECK(norm(n) == doctest::Approx(1.0));
    CHECK(n == sq.face_normal(f));
    CHECK(sq.contains(x + 1e-3 * n) == Location::Outside);
    CHECK(sq.contains(x - 1e-3 * n) == Location::Interior);
  }
}

TEST_CASE("contains classifies points of the closed interval") {
  const Domain unit = Domain::interval(0.0, 1.0);
  CHECK(unit.contains(Vec{0.5}) == Location::Interior);
  CHECK(unit.contains(Vec{1.0}) == Location::Boundary);
  CHECK(unit.contains(Vec{1.2}) == Location::Outside);
}

TEST_CASE("shrinking the tolerance never turns an interior point outside") {
  test::Rng rng(11);
  const Domain sq = Domain::rectangle(0.0, 1.0, 0.0, 2.0);
  for (int k = 0; k < 500; ++k) {
    const Vec x{rng.uniform(-0.2, 1.2), rng.uniform(-0.2, 2.2)};
    const double tol = rng.uniform(0.0, 0.1);
    if (sq.contains(x, tol) == Location::Interior) {
      CHECK(sq.contains(x, 0.5 * tol) != Location::Outside);
      CHECK(sq.contains(x, 0.0) != Location::Outside);
    }
  }
}

TEST_CASE("invalid domains are rejected") {
  CHECK(code_of([] { Domain::interval(1.0, 1.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { Domain::rectangle(0.0, 1.0, 2.0, 1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("obliqueness report") {
  const Domain unit = Domain::interval(0.0, 1.0);
  SUBCASE("normal reflection") {
    const auto r = check_obliqueness(unit, BoundaryData::normal_reflection(unit), 8);
    CHECK(r.min_inner == 1.0);
    CHECK(r.pass);
  }
  SUBCASE("explicit outward gammas") {
    BoundaryData b;
    b.set(Face::Left, [](Vec) { return Vec{-1.0}; }, [](Vec) { return 0.0; });
    b.set(Face::Right, [](Vec) { return Vec{1.0}; }, [](Vec) { return 0.0; });
    const auto r = check_obliqueness(unit, b, 8);
    CHECK(r.min_inner == 1.0);
    CHECK(r.pass);
  }
  SUBCASE("inward gamma at the left end") {
    BoundaryData b = BoundaryData::normal_reflection(unit);
    b.set_gamma(Face::Left, [](Vec) { return Vec{1.0}; });
    const auto r = check_obliqueness(unit, b, 8);
    CHECK(r.min_inner == -1.0);
    CHECK_FALSE(r.pass);
    CHECK(r.worst_face == Face::Left);
  }
  SUBCASE("tilted gammas on a square keep nu.gamma = 1") {
    const Domain sq = Domain::rectangle(0.0, 1.0, 0.0, 1.0);
    BoundaryData b;
    for (Face f : sq.faces()) {
      const Vec n = sq.face_normal(f);
      const Vec g = n + 0.7 * Vec{-n.y, n.x};
      b.set(f, [g](Vec) { return g; }, [](Vec) { return 0.0; });
    }
    const auto r = check_obliqueness(sq, b, 16);
    CHECK(r.min_inner == doctest::Approx(1.0));
    CHECK(r.pass);
  }
}

TEST_CASE("continuity of boundary data is checked by sampling") {
  const Domain sq = Domain::rectangle(0.0, 1.0, 0.0, 1.0);
  BoundaryData smooth = BoundaryData::normal_reflection(sq);
  smooth.set_datum(Face::Bottom, [](Vec x) { return 0.1 * x.x; });
  CHECK(check_continuity(sq, smooth, 32, 0.05).pass);

  BoundaryData jumpy = smooth;
  jumpy.set_datum(Face::Bottom, [](Vec x) { return x.x < 0.5 ? 0.0 : 1.0; });
  const auto r = check_continuity(sq, jumpy, 32, 0.05);
  CHECK_FALSE(r.pass);
  CHECK(r.max_g_jump == doctest::Approx(1.0));
}

TEST_CASE("scalar fields parse and evaluate") {
  CHECK(ScalarField::parse("zero")(Vec{0.3}) == 0.0);
  CHECK(ScalarField::parse("constant -1")(Vec{0.3}) == -1.0);
  CHECK(ScalarField::parse("well 0.5")(Vec{0.0}) == 0.25);
  CHECK(ScalarField::parse("well 0.5 0.5 2")(Vec{0.0, 0.0}) == 1.0);
  CHECK(ScalarField::parse("sine 1")(Vec{0.25}) == doctest::Approx(1.0));
  CHECK(ScalarField::parse("abs 0.5")(Vec{0.1}) == doctest::Approx(0.4));
  CHECK(ScalarField::parse("linear 2 0 1")(Vec{0.5}) == 2.0);
  CHECK(ScalarField::parse("tent 0.5 0 1 2")(Vec{0.75}) == 0.5);
  CHECK(code_of([] { ScalarField::parse("bogus 1"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { ScalarField::parse("well"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { ScalarField::parse("constant x"); }) == ErrorCode::ConfigError);
}

TEST_CASE("grid layout and interpolation") {
  const Grid g1 = Grid::with_spacing(Domain::interval(0.0, 1.0), 0.005);
  CHECK(g1.nx() == 200);
  CHECK(g1.size() == 201);
  CHECK(g1.node(0) == Vec{0.0});
  CHECK(g1.node(200) == Vec{1.0});
  CHECK(g1.on_boundary(0));
  CHECK_FALSE(g1.on_boundary(100));
  CHECK(g1.nearest(Vec{0.5012}) == 100);

  const Grid g2 = Grid::with_spacing(Domain::rectangle(0.0, 1.0, 0.0, 2.0), 0.25);
  CHECK(g2.nx() == 4);
  CHECK(g2.ny() == 8);
  const std::size_t k = g2.index(1, 3);
  CHECK(g2.coords(k) == std::pair<int, int>{1, 3});
  CHECK(g2.node(k) == Vec{0.25, 0.75});

  const auto f = GridFunction::sample(g2, [](Vec x) { return 2.0 * x.x - x.y + 1.0; });
  test::Rng rng(3);
  for (int n = 0; n < 50; ++n) {
    const Vec x = rng.point(g2.domain());
    CHECK(f.interpolate(x) == doctest::Approx(2.0 * x.x - x.y + 1.0));
  }
  CHECK(f.lipschitz_bound() == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("grid function tables use storage order") {
  const Grid g = Grid::with_spacing(Domain::interval(0.0, 1.0), 0.5);
  const GridFunction f(g, std::vector<double>{1.0, 2.0, 3.0});
  std::ostringstream out;
  f.write_csv(out, "u");
  CHECK(out.str() == "x,u\n0,1\n0.5,2\n1,3\n");
}
