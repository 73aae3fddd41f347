#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "cuspeig/errors.hpp"
#include "cuspeig/geometry.hpp"

using namespace cuspeig;

namespace {

Point pt(std::initializer_list<double> v) {
  Point x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double c : v) x(i++) = c;
  return x;
}

}  // namespace

TEST_CASE("gamma aggregates the lateral exponents") {
  const std::vector<double> lipschitz{1.0, 1.0};
  CHECK(gamma_of(lipschitz) == doctest::Approx(3.0));
  const std::vector<double> mixed{2.0, 1.5};
  CHECK(gamma_of(mixed) == doctest::Approx(4.5));
  const std::vector<double> bad{0.5};
  CHECK_THROWS_AS(gamma_of(bad), DomainError);
  CHECK_THROWS_AS(CuspDomain({0.9, 1.0}), DomainError);
}

TEST_CASE("membership is strict") {
  const CuspDomain d({2.0});
  CHECK(d.contains(pt({0.04, 0.5})));
  CHECK_FALSE(d.contains(pt({0.26, 0.5})));
  CHECK_FALSE(d.contains(pt({0.0, 0.5})));
  CHECK_FALSE(d.contains(pt({0.01, 0.0})));
  CHECK_FALSE(d.contains(pt({0.01, 1.0})));
  CHECK(d.volume() == doctest::Approx(1.0 / 3.0));
  CHECK(d.lateral_clearance(pt({0.04, 0.5})) == doctest::Approx(0.04));
}

TEST_CASE("phi_a on sample points") {
  const MappingPhiA m1(1.0, CuspDomain({2.0}));
  const Point y1 = m1(pt({0.25, 0.5}));
  CHECK(y1(0) == doctest::Approx(0.125));
  CHECK(y1(1) == doctest::Approx(0.5));

  const MappingPhiA m2(2.0, CuspDomain({1.0}));
  const Point y2 = m2(pt({0.25, 0.5}));
  CHECK(y2(0) == doctest::Approx(0.125));
  CHECK(y2(1) == doctest::Approx(0.25));

  CHECK_THROWS_AS(m1(pt({0.0, 0.0})), DomainError);
  CHECK_THROWS_AS(MappingPhiA(0.0, CuspDomain({1.0})), DomainError);
}

TEST_CASE("Jacobian of the identity map and the closed form determinant") {
  const MappingPhiA id(1.0, CuspDomain::reference(3));
  const Jacobian j = id.jacobian(pt({0.1, 0.2, 0.4}));
  CHECK((j.differential - Eigen::Matrix3d::Identity()).norm() < 1e-14);
  CHECK(j.determinant == doctest::Approx(1.0));

  const MappingPhiA m(2.0, CuspDomain({1.0}));
  CHECK(m.jacobian_determinant(0.5) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("Jacobian determinant matches central differences") {
  const std::vector<std::pair<std::vector<double>, double>> cases = {
      {{1.0}, 2.0}, {{2.0}, 1.2}, {{1.5, 2.5}, 0.8}, {{1.0, 3.0}, 1.1}};
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double h = 1e-6;
  for (const auto& [exps, a] : cases) {
    const MappingPhiA map(a, CuspDomain(exps));
    const int n = static_cast<int>(exps.size()) + 1;
    for (int k = 0; k < 50; ++k) {
      Point x(n);
      x(n - 1) = 0.05 + 0.9 * unit(rng);
      for (int i = 0; i < n - 1; ++i) x(i) = x(n - 1) * (0.05 + 0.9 * unit(rng));
      Eigen::MatrixXd fd(n, n);
      for (int j = 0; j < n; ++j) {
        Point xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        fd.col(j) = (map(xp) - map(xm)) / (2.0 * h);
      }
      const Jacobian jac = map.jacobian(x);
      CHECK((fd - jac.differential).norm() <= 1e-6 * jac.differential.norm());
      CHECK(std::abs(fd.determinant() - jac.determinant) <= 1e-6 * std::abs(jac.determinant));
      CHECK(jac.determinant == doctest::Approx(map.jacobian_determinant(x(n - 1))));
    }
  }
}

TEST_CASE("phi_a maps the reference cone into the cusp") {
  const CuspDomain target({2.0, 1.5});
  const MappingPhiA map(1.3, target);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    Point x(3);
    x(2) = 1e-3 + 0.998 * unit(rng);
    x(0) = x(2) * (1e-3 + 0.998 * unit(rng));
    x(1) = x(2) * (1e-3 + 0.998 * unit(rng));
    REQUIRE(CuspDomain::reference(3).contains(x));
    CHECK(target.contains(map(x)));
  }
}

TEST_CASE("box domain") {
  const BoxDomain b({2.0, 1.0});
  CHECK(b.volume() == doctest::Approx(2.0));
  CHECK(BoxDomain::unit(3).volume() == doctest::Approx(1.0));
  CHECK_THROWS_AS(BoxDomain({1.0, -1.0}), DomainError);
}
