#include "porosity/normed_space.hpp"
#include "porosity/random.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace porosity;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Vector random_vector(Rng& rng, int dim) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.uniform(-3.0, 3.0);
  return v;
}

const std::vector<double> kExponents{1.0, 1.5, 2.0, 3.0, kInfinity};

}  // namespace

TEST_CASE("norm on small vectors") {
  CHECK(norm(NormSpec::l2(2), vec({3, 4})) == 5.0);
  CHECK(norm(NormSpec::linf(2), vec({3, -4})) == 4.0);
  CHECK(norm(NormSpec::l1(3), vec({1, 2, 3})) == 6.0);
  CHECK(norm(NormSpec::lp(2, 3.0), vec({1, 1})) == doctest::Approx(std::cbrt(2.0)).epsilon(1e-15));
}

TEST_CASE("tiny and huge vectors keep their norm") {
  for (double p : kExponents) {
    const NormSpec space(2, p);
    CAPTURE(p);
    CHECK(norm(space, vec({1e-300, 1e-300})) > 0.0);
    CHECK(std::isfinite(norm(space, vec({1e300, 1e300}))));
  }
}

TEST_CASE("distance") {
  CHECK(distance(NormSpec::l2(2), vec({0, 0}), vec({3, 4})) == 5.0);
  CHECK(distance(NormSpec::l1(2), vec({1, 1}), vec({1, 1})) == 0.0);
  CHECK(distance(NormSpec::linf(2), vec({0, 2}), vec({1, 0})) == 2.0);
}

TEST_CASE("bad inputs throw") {
  CHECK_THROWS_AS(NormSpec(2, 0.5), Error);
  CHECK_THROWS_AS(NormSpec(0, 2.0), Error);
  CHECK_THROWS_AS(norm(NormSpec::l2(3), vec({1, 2})), Error);
  CHECK_THROWS_AS(norm(NormSpec::l2(2), vec({1, NAN})), Error);
  CHECK_THROWS_AS(norming_functional(NormSpec::l2(2), vec({1, 1})), Error);
}

TEST_CASE("dual exponent") {
  CHECK(NormSpec::l1(2).dual_exponent() == kInfinity);
  CHECK(NormSpec::linf(2).dual_exponent() == 1.0);
  CHECK(NormSpec::l2(2).dual_exponent() == 2.0);
  CHECK(NormSpec::lp(2, 3.0).dual_exponent() == doctest::Approx(1.5));
}

TEST_CASE("norming functional examples") {
  SUBCASE("l2 is self-dual") {
    const Covector f = norming_functional(NormSpec::l2(2), vec({0.6, 0.8}));
    CHECK(f.coeffs[0] == doctest::Approx(0.6));
    CHECK(f.coeffs[1] == doctest::Approx(0.8));
  }
  SUBCASE("l1 uses signs") {
    const Vector e = vec({0.5, -0.5});
    const Covector f = norming_functional(NormSpec::l1(2), e);
    CHECK(f.coeffs == vec({1, -1}));
    CHECK(f(e) == 1.0);
    CHECK(f.coeffs.cwiseAbs().maxCoeff() == 1.0);
  }
  SUBCASE("linf picks the largest coordinate") {
    const Vector e = vec({1, 0.3});
    const Covector f = norming_functional(NormSpec::linf(2), e);
    CHECK(f.coeffs == vec({1, 0}));
    CHECK(f(e) == 1.0);
    CHECK(f.coeffs.cwiseAbs().sum() == 1.0);
  }
  SUBCASE("linf ties go to the lowest index") {
    const Covector f = norming_functional(NormSpec::linf(3), vec({0.2, -1, 1}));
    CHECK(f.coeffs == vec({0, -1, 0}));
  }
}

TEST_CASE("norm axioms on seeded samples") {
  for (double p : kExponents) {
    for (int dim : {1, 2, 4}) {
      const NormSpec space(dim, p);
      CAPTURE(p);
      CAPTURE(dim);
      CHECK(norm(space, Vector::Zero(dim)) == 0.0);
      for (std::uint64_t i = 0; i < 1000; ++i) {
        Rng rng = Rng::for_index(17, i);
        const Vector u = random_vector(rng, dim);
        const Vector v = random_vector(rng, dim);
        const double s = rng.uniform(-4.0, 4.0);
        const double nu = norm(space, u);
        const double nv = norm(space, v);
        CHECK(norm(space, u + v) <= (nu + nv) * (1.0 + 1e-12));
        CHECK(std::abs(norm(space, s * u) - std::abs(s) * nu) <= 1e-12 * std::abs(s) * nu);
        CHECK(nu > 0.0);
      }
    }
  }
}

TEST_CASE("closed forms agree on representable inputs") {
  for (std::uint64_t i = 0; i < 200; ++i) {
    Rng rng = Rng::for_index(5, i);
    Vector v(3);
    // multiples of 1/8 keep sums exact
    for (int k = 0; k < 3; ++k) v[k] = std::floor(rng.uniform(-64.0, 64.0)) / 8.0;
    CHECK(norm(NormSpec::l1(3), v) == std::abs(v[0]) + std::abs(v[1]) + std::abs(v[2]));
    CHECK(norm(NormSpec::linf(3), v) == std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])}));
    CHECK(norm(NormSpec::l2(3), v) == doctest::Approx(std::sqrt(v.dot(v))).epsilon(1e-15));
  }
}

TEST_CASE("norming functional is norming") {
  for (double p : kExponents) {
    const int dim = 3;
    const NormSpec space(dim, p);
    CAPTURE(p);
    for (std::uint64_t i = 0; i < 50; ++i) {
      Rng rng = Rng::for_index(99, i);
      Vector e = random_vector(rng, dim);
      e /= norm(space, e);
      const Covector f = norming_functional(space, e);
      CHECK(std::abs(f(e) - 1.0) <= 1e-12);
      CHECK(std::abs(dual_norm(space, f) - 1.0) <= 1e-9);
      for (std::uint64_t k = 0; k < 1000 / 50; ++k) {
        const Vector v = random_vector(rng, dim);
        CHECK(std::abs(f(v)) <= norm(space, v) * (1.0 + 1e-12));
      }
    }
  }
}
