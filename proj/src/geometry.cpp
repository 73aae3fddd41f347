#include "cuspeig/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cuspeig/errors.hpp"

namespace cuspeig {

double gamma_of(std::span<const double> exponents) {
  double sum = 1.0;
  for (double g : exponents) {
    if (!(g >= 1.0)) {
      throw DomainError("cusp exponent " + std::to_string(g) + " violates gamma_i >= 1");
    }
    sum += g;
  }
  return sum;
}

CuspDomain::CuspDomain(std::vector<double> gamma_exponents)
    : exponents_(std::move(gamma_exponents)), gamma_(gamma_of(exponents_)) {
  if (exponents_.empty() || exponents_.size() > 2) {
    throw DomainError("cusp domains are supported in dimension 2 or 3");
  }
}

CuspDomain CuspDomain::reference(int n) {
  if (n < 2 || n > 3) throw DomainError("reference cone requires n = 2 or 3");
  return CuspDomain(std::vector<double>(static_cast<std::size_t>(n - 1), 1.0));
}

double CuspDomain::max_exponent() const {
  return *std::max_element(exponents_.begin(), exponents_.end());
}

bool CuspDomain::is_reference() const {
  return std::all_of(exponents_.begin(), exponents_.end(), [](double g) { return g == 1.0; });
}

bool CuspDomain::contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const int n = dimension();
  if (x.size() != n) return false;
  const double t = x(n - 1);
  if (!(t > 0.0 && t < 1.0)) return false;
  for (int i = 0; i < n - 1; ++i) {
    if (!(x(i) > 0.0 && x(i) < std::pow(t, exponents_[static_cast<std::size_t>(i)]))) {
      return false;
    }
  }
  return true;
}

double CuspDomain::lateral_clearance(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const int n = dimension();
  const double t = x(n - 1);
  double clearance = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n - 1; ++i) {
    const double width = t > 0.0 ? std::pow(t, exponents_[static_cast<std::size_t>(i)]) : 0.0;
    clearance = std::min({clearance, x(i), width - x(i)});
  }
  return clearance;
}

BoxDomain::BoxDomain(std::vector<double> side_lengths) : sides(std::move(side_lengths)) {
  if (sides.size() < 2 || sides.size() > 3) {
    throw DomainError("box domains are supported in dimension 2 or 3");
  }
  for (double l : sides) {
    if (!(l > 0.0) || !std::isfinite(l)) throw DomainError("box side lengths must be positive");
  }
}

BoxDomain BoxDomain::unit(int n) {
  return BoxDomain(std::vector<double>(static_cast<std::size_t>(n), 1.0));
}

double BoxDomain::volume() const {
  return std::accumulate(sides.begin(), sides.end(), 1.0, std::multiplies<>());
}

MappingPhiA::MappingPhiA(double a, CuspDomain target) : a_(a), target_(std::move(target)) {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("mapping exponent a must be positive");
}

Point MappingPhiA::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const int n = target_.dimension();
  if (x.size() != n) throw DomainError("point dimension does not match the domain");
  const double t = x(n - 1);
  if (!(t > 0.0)) throw DomainError("phi_a is singular at x_n <= 0");
  Point y(n);
  for (int i = 0; i < n - 1; ++i) {
    const double g = target_.exponents()[static_cast<std::size_t>(i)];
    y(i) = x(i) * std::pow(t, a_ * g - 1.0);
  }
  y(n - 1) = std::pow(t, a_);
  return y;
}

Jacobian MappingPhiA::jacobian(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const int n = target_.dimension();
  if (x.size() != n) throw DomainError("point dimension does not match the domain");
  const double t = x(n - 1);
  if (!(t > 0.0)) throw DomainError("phi_a is singular at x_n <= 0");
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n - 1; ++i) {
    const double e = a_ * target_.exponents()[static_cast<std::size_t>(i)];
    d(i, i) = std::pow(t, e - 1.0);
    d(i, n - 1) = (e - 1.0) * x(i) * std::pow(t, e - 2.0);
  }
  d(n - 1, n - 1) = a_ * std::pow(t, a_ - 1.0);
  return {std::move(d), jacobian_determinant(t)};
}

double MappingPhiA::jacobian_determinant(double x_n) const {
  if (!(x_n > 0.0)) throw DomainError("phi_a is singular at x_n <= 0");
  return a_ * std::pow(x_n, a_ * target_.gamma() - target_.dimension());
}

}  // namespace cuspeig
