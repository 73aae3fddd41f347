#include "doctest.h"

#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

#include "cuspeig/discretization.hpp"
#include "cuspeig/errors.hpp"

using namespace cuspeig;

namespace {

FunctionSpace box_space(int n, int res) {
  return FunctionSpace(std::make_shared<const Mesh>(mesh_box(BoxDomain::unit(n), res)));
}

FunctionSpace cusp_space(std::vector<double> exps, int res) {
  return FunctionSpace(std::make_shared<const Mesh>(mesh_cusp(CuspDomain(std::move(exps)), 1.0, res)));
}

Vector coordinate(const FunctionSpace& s, int axis) { return s.mesh().nodes().col(axis); }

Vector random_field(const FunctionSpace& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(s.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = u(rng);
  return v;
}

}  // namespace

TEST_CASE("stiffness annihilates constants and mass integrates to the volume") {
  const FunctionSpace s = cusp_space({2.0}, 8);
  const Vector ones = Vector::Ones(s.size());
  CHECK((s.stiffness() * ones).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(ones.dot(s.mass() * ones) == doctest::Approx(s.volume()).epsilon(1e-13));
  CHECK(s.node_measure().sum() == doctest::Approx(s.volume()).epsilon(1e-13));
}

TEST_CASE("p-energy of simple fields") {
  const FunctionSpace s = box_space(2, 8);
  CHECK(grad_norm_p(s, Vector::Constant(s.size(), 3.7), 2.0) == 0.0);
  CHECK(grad_norm_p(s, coordinate(s, 0), 3.0) == doctest::Approx(1.0).epsilon(1e-13));

  const FunctionSpace ref(std::make_shared<const Mesh>(mesh_reference(3, 4)));
  CHECK(grad_norm_p(ref, coordinate(ref, 2), 2.0) == doctest::Approx(ref.volume()).epsilon(1e-13));
}

TEST_CASE("L^q norms") {
  const FunctionSpace s = cusp_space({2.0}, 32);
  const Vector ones = Vector::Ones(s.size());
  for (double q : {1.5, 2.0, 3.0}) {
    CHECK(lq_norm(s, ones, q) == doctest::Approx(std::pow(s.volume(), 1.0 / q)).epsilon(1e-13));
    CHECK(lq_norm(s, ones, q) == doctest::Approx(std::pow(1.0 / 3.0, 1.0 / q)).epsilon(2e-3));
  }
  CHECK(lq_norm(s, Vector::Zero(s.size()), 2.5) == 0.0);

  // Order-2 quadrature matches the consistent mass matrix for q = 2.
  const Vector u = random_field(s, 3);
  double by_rule = 0.0;
  const Eigen::MatrixXd vals = s.quadrature_values(u);
  for (Eigen::Index c = 0; c < vals.rows(); ++c) {
    double cell = 0.0;
    for (Eigen::Index k = 0; k < vals.cols(); ++k) cell += s.rule().weights(k) * vals(c, k) * vals(c, k);
    by_rule += s.mesh().cell_volume(c) * cell;
  }
  CHECK(lq_integral(s, u, 2.0) == doctest::Approx(by_rule).epsilon(1e-12));
}

TEST_CASE("constraint value") {
  const FunctionSpace s = box_space(2, 10);
  const Vector odd = coordinate(s, 0).array() - 0.5;
  CHECK(std::abs(constraint_value(s, odd, 2.0)) < 1e-14);
  CHECK(std::abs(constraint_value(s, odd, 3.0)) < 1e-14);

  const Vector c = Vector::Constant(s.size(), 1.7);
  for (double q : {1.5, 2.0, 2.5, 4.0}) {
    CHECK(constraint_value(s, c, q) == doctest::Approx(std::pow(1.7, q - 1.0)).epsilon(1e-13));
  }
  const Vector u = random_field(s, 5);
  CHECK(constraint_value(s, -u, 2.0) == doctest::Approx(-constraint_value(s, u, 2.0)));
  CHECK(constraint_value(s, u, 2.0) == doctest::Approx(s.node_measure().dot(u)));
}

TEST_CASE("projection to the admissible class") {
  const FunctionSpace s = box_space(2, 10);
  // +-1 on the two halves of a symmetric mesh, with the midline at 0.
  Vector split(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double x = s.mesh().nodes()(i, 0);
    split(i) = x < 0.5 - 1e-12 ? -1.0 : (x > 0.5 + 1e-12 ? 1.0 : 0.0);
  }
  const Vector p3 = project_zero_mean(s, split, 3.0);
  CHECK((p3 - split).cwiseAbs().maxCoeff() < 1e-10);

  // Independent bisection oracle on c -> constraint(u - c).
  const FunctionSpace cs = cusp_space({2.0}, 12);
  const Vector u = random_field(cs, 11);
  const double q = 2.5;
  double lo = u.minCoeff(), hi = u.maxCoeff();
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (constraint_value(cs, (u.array() - mid).matrix(), q) > 0.0 ? lo : hi) = mid;
  }
  const Vector projected = project_zero_mean(cs, u, q);
  CHECK(std::abs((u - projected)(0) - 0.5 * (lo + hi)) < 1e-10);
  CHECK(std::abs(constraint_value(cs, projected, q)) <
        1e-10 * std::pow(lq_norm(cs, u, q), q - 1.0));

  CHECK_THROWS_AS(project_zero_mean(cs, Vector::Ones(cs.size()), q), DomainError);
}

TEST_CASE("Rayleigh quotient of the first Neumann mode of the square") {
  const FunctionSpace s = box_space(2, 64);
  const Vector x = coordinate(s, 0);
  const Vector u = (std::numbers::pi * x.array()).cos();
  const double pi2 = std::numbers::pi * std::numbers::pi;
  CHECK(std::abs(rayleigh_quotient(s, u, 2.0, 2.0) - pi2) < 0.01 * pi2);
  CHECK(rayleigh_quotient(s, Vector::Ones(s.size()), 2.0, 2.0) == 0.0);
  CHECK_THROWS_AS(rayleigh_quotient(s, Vector::Zero(s.size()), 2.0, 2.0), DomainError);
}

TEST_CASE("homogeneity") {
  const FunctionSpace s = cusp_space({1.5}, 10);
  const Vector u = random_field(s, 9);
  for (double p : {1.5, 2.0, 3.0}) {
    for (double t : {-2.0, 0.3, 5.0}) {
      const Vector tu = t * u;
      CHECK(grad_norm_p(s, tu, p) ==
            doctest::Approx(std::pow(std::abs(t), p) * grad_norm_p(s, u, p)).epsilon(1e-12));
      const Vector a_tu = p_laplace_operator(s, tu, p);
      const Vector a_u = p_laplace_operator(s, u, p);
      CHECK((a_tu - signed_power(t, p - 1.0) * a_u).norm() <= 1e-12 * a_tu.norm());
      CHECK(rayleigh_quotient(s, tu, p, 2.0) ==
            doctest::Approx(rayleigh_quotient(s, u, p, 2.0)).epsilon(1e-12));
    }
  }
}

TEST_CASE("p-Laplacian is the gradient of the energy over p") {
  const FunctionSpace s = cusp_space({2.0}, 6);
  const Vector u = random_field(s, 21);
  const Vector dir = random_field(s, 22);
  for (double p : {1.5, 2.0, 3.0}) {
    const double h = 1e-6;
    const double fd = (grad_norm_p(s, u + h * dir, p) - grad_norm_p(s, u - h * dir, p)) / (2.0 * h * p);
    CHECK(fd == doctest::Approx(p_laplace_operator(s, u, p).dot(dir)).epsilon(1e-6));
  }
  // p = 2: A(u) = K u.
  CHECK((p_laplace_operator(s, u, 2.0) - s.stiffness() * u).norm() < 1e-10 * (s.stiffness() * u).norm());
}

TEST_CASE("duality map") {
  const FunctionSpace s = cusp_space({2.0}, 6);
  const Vector u = random_field(s, 31);
  CHECK((lq_duality_map(s, u, 2.0) - s.mass() * u).norm() < 1e-14);
  for (double q : {1.5, 3.0}) {
    CHECK(lq_duality_map(s, u, q).dot(u) == doctest::Approx(lq_integral(s, u, q)).epsilon(1e-12));
    CHECK(lq_duality_map(s, u, q).sum() == doctest::Approx(constraint_value(s, u, q)).epsilon(1e-12));
  }
}

TEST_CASE("field text format") {
  const FunctionSpace s = box_space(2, 3);
  const Vector u = random_field(s, 4);
  std::stringstream io;
  write_field(io, u);
  CHECK(read_field(io) == u);
  std::stringstream bad("2\n0 1.0\n5 2.0\n");
  CHECK_THROWS_AS(read_field(bad), DomainError);
  CHECK_THROWS_AS(s.field(Vector::Zero(3)), DomainError);
}
