#include "porosity/convex_domain.hpp"

#include <doctest.h>

#include <cmath>

using namespace porosity;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

ConvexBody unit_ball(const NormSpec& space) { return ConvexBody::ball(space, Vector::Zero(space.dim()), 1.0); }

ConvexBody triangle(const NormSpec& space) {
  return ConvexBody::hull(space, {vec({0, 0}), vec({1, 0}), vec({0, 1})});
}

// brute-force barycentric feasibility: is x within tol (l∞) of some grid
// combination of the triangle's vertices?
bool triangle_oracle(const Vector& x, double tol) {
  constexpr int n = 400;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; i + j <= n; ++j) {
      const double u = static_cast<double>(i) / n;
      const double v = static_cast<double>(j) / n;
      if (std::abs(u - x[0]) <= tol && std::abs(v - x[1]) <= tol) return true;
    }
  }
  return false;
}

}  // namespace

TEST_CASE("contains") {
  CHECK(contains(unit_ball(NormSpec::l2(2)), vec({0.6, 0.8}), 0.0));
  CHECK_FALSE(contains(ConvexBody::box(NormSpec::l2(2), vec({0, 0}), vec({1, 1})), vec({1.5, 0.5})));
  CHECK(contains(triangle(NormSpec::l2(2)), vec({0.25, 0.25}), 1e-9));
  CHECK_FALSE(contains(triangle(NormSpec::l2(2)), vec({0.6, 0.6}), 1e-9));
  CHECK_FALSE(contains(unit_ball(NormSpec::l1(2)), vec({0.6, 0.6})));
  CHECK(contains(unit_ball(NormSpec::linf(2)), vec({1.0, -1.0})));
}

TEST_CASE("hull membership matches the barycentric grid oracle") {
  const ConvexBody t = triangle(NormSpec::l2(2));
  for (std::uint64_t i = 0; i < 300; ++i) {
    Rng rng = Rng::for_index(3, i);
    const Vector x = vec({rng.uniform(-0.2, 1.2), rng.uniform(-0.2, 1.2)});
    // skip points within grid resolution of the boundary
    const double slack = std::min({x[0], x[1], 1.0 - x[0] - x[1]});
    if (std::abs(slack) < 0.01) continue;
    CAPTURE(x.transpose());
    CHECK(contains(t, x, 1e-9) == triangle_oracle(x, 0.0025));
  }
  CHECK(hull_residual({vec({0, 0}), vec({1, 0}), vec({0, 1})}, vec({1, 1})) == doctest::Approx(0.5));
}

TEST_CASE("diameter") {
  CHECK(diameter(unit_ball(NormSpec::l2(2))) == 2.0);
  CHECK(diameter(ConvexBody::box(NormSpec::linf(2), vec({0, 0}), vec({1, 1}))) == 1.0);
  // max pairwise l1 distance over the vertices: |(1,0) - (0,1)| = 2
  CHECK(diameter(triangle(NormSpec::l1(2))) == 2.0);
  CHECK(diameter(ConvexBody::box(NormSpec::l2(3), vec({0, 0, 0}), vec({1, 2, 2}))) == doctest::Approx(3.0));
}

TEST_CASE("construction invariants") {
  const NormSpec s = NormSpec::l2(2);
  CHECK_THROWS_AS(ConvexBody::ball(s, vec({0, 0}), 0.0), Error);
  CHECK_THROWS_AS(ConvexBody::box(s, vec({0, 0}), vec({1, 0})), Error);
  CHECK_THROWS_AS(ConvexBody::hull(s, {vec({0, 0}), vec({0, 0})}), Error);
  CHECK_THROWS_AS(ConvexBody::simplex(s, {vec({0, 0}), vec({1, 1}), vec({2, 2})}), Error);
  CHECK_THROWS_AS(OpenSubset(vec({5, 5}), 0.5, unit_ball(s)), Error);
}

TEST_CASE("sample") {
  SUBCASE("grid on the unit interval") {
    const auto pts = sample(ConvexBody::box(NormSpec::l2(1), vec({0}), vec({1})), GridStrategy{3});
    REQUIRE(pts.size() == 3);
    CHECK(pts[0][0] == 0.0);
    CHECK(pts[1][0] == 0.5);
    CHECK(pts[2][0] == 1.0);
  }
  SUBCASE("random draws stay inside") {
    for (double p : {1.0, 2.0, kInfinity}) {
      const ConvexBody b = unit_ball(NormSpec(3, p));
      const auto pts = sample(b, RandomStrategy{100, 42});
      CHECK(pts.size() == 100);
      for (const auto& x : pts) CHECK(contains(b, x));
    }
  }
  SUBCASE("simplex draws are convex combinations") {
    const ConvexBody t = ConvexBody::simplex(NormSpec::l2(2), {vec({0, 0}), vec({1, 0}), vec({0, 1})});
    const auto pts = sample(t, RandomStrategy{1, 7});
    REQUIRE(pts.size() == 1);
    const Vector& x = pts[0];
    CHECK(x[0] >= 0.0);
    CHECK(x[1] >= 0.0);
    CHECK(x[0] + x[1] <= 1.0 + 1e-15);
  }
  SUBCASE("bit-for-bit reproducible") {
    const ConvexBody b = unit_ball(NormSpec::l2(2));
    CHECK(sample(b, RandomStrategy{50, 9}) == sample(b, RandomStrategy{50, 9}));
    CHECK(sample(b, RandomStrategy{50, 9}) != sample(b, RandomStrategy{50, 10}));
  }
}

TEST_CASE("diameter dominates sampled distances") {
  for (double p : {1.0, 2.0, kInfinity}) {
    const NormSpec space(2, p);
    for (const ConvexBody& b : {unit_ball(space), ConvexBody::box(space, vec({0, 0}), vec({1, 2})), triangle(space)}) {
      const double d = diameter(b);
      const auto pts = sample(b, RandomStrategy{2000, 11});
      for (std::size_t i = 0; i + 1 < pts.size(); i += 2) CHECK(distance(space, pts[i], pts[i + 1]) <= d);
    }
    // attained: antipodal points of the ball, opposite corners of the box
    CHECK(distance(space, vec({1, 0}), vec({-1, 0})) == diameter(unit_ball(space)));
  }
}

TEST_CASE("subset margin") {
  const ConvexBody b = unit_ball(NormSpec::l2(2));
  CHECK(subset_margin(OpenSubset(vec({0, 0}), 0.5, b), vec({0, 0}), 0.25) == 0.25);
  CHECK(subset_margin(OpenSubset(vec({0, 0}), 0.5, b), vec({0, 0}), 0.5) == 0.0);
  CHECK(subset_margin(OpenSubset(vec({0, 0}), 0.3, b), vec({0.2, 0}), 0.2) == doctest::Approx(-0.1));
}

TEST_CASE("nonnegative margin certifies inclusion") {
  for (double p : {1.0, 2.0, kInfinity}) {
    const NormSpec space(2, p);
    const ConvexBody box = ConvexBody::box(space, vec({-1, -1}), vec({1, 1}));
    const OpenSubset U(vec({0.5, 0.5}), 0.6, box);
    const Vector x0 = vec({0.6, 0.4});
    const double r = 0.6 - distance(space, x0, U.center()) - 1e-3;
    REQUIRE(subset_margin(U, x0, r) >= 0.0);
    const Region ball(box, x0, r);
    for (std::uint64_t i = 0; i < 1000; ++i) {
      Rng rng = Rng::for_index(21, i);
      const auto x = ball.draw(rng);
      REQUIRE(x);
      CHECK(U.contains(*x));
    }
  }
}

TEST_CASE("open subset and regions") {
  const ConvexBody b = ConvexBody::box(NormSpec::l2(2), vec({0, 0}), vec({1, 1}));
  // center outside C, but the ball still meets it
  const OpenSubset U(vec({1.2, 0.5}), 0.5, b);
  CHECK(U.contains(vec({0.9, 0.5})));
  CHECK_FALSE(U.contains(vec({0.6, 0.5})));  // distance 0.6 from the center
  CHECK_FALSE(U.contains(vec({0.7, 0.5})));  // on the sphere: U is open
  const Region r(U);
  for (std::uint64_t i = 0; i < 200; ++i) {
    Rng rng = Rng::for_index(4, i);
    const auto x = r.draw(rng);
    REQUIRE(x);
    CHECK(U.contains(*x));
  }
  const Region nested = r.restricted(vec({1.0, 0.5}), 0.1);
  for (std::uint64_t i = 0; i < 200; ++i) {
    Rng rng = Rng::for_index(5, i);
    const auto x = nested.draw(rng);
    REQUIRE(x);
    CHECK(U.contains(*x));
    CHECK(distance(b.space(), *x, vec({1.0, 0.5})) < 0.1);
  }
}
