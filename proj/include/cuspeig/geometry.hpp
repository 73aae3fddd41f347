#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cuspeig {

using Point = Eigen::VectorXd;

/// Aggregate cusp exponent: 1 + sum of the lateral exponents.
/// Throws DomainError if any exponent is below 1.
double gamma_of(std::span<const double> exponents);

/// Anisotropic Hölder cusp
///   { 0 < x_n < 1, 0 < x_i < x_n^{gamma_i}, i = 1..n-1 }.
/// All gamma_i equal to one gives the reference cone Omega_1.
class CuspDomain {
 public:
  explicit CuspDomain(std::vector<double> gamma_exponents);

  /// The Lipschitz cone Omega_1 in dimension n.
  static CuspDomain reference(int n);

  int dimension() const { return static_cast<int>(exponents_.size()) + 1; }
  const std::vector<double>& exponents() const { return exponents_; }
  double gamma() const { return gamma_; }
  double max_exponent() const;
  bool is_reference() const;

  /// Exact volume, the integral of t^{gamma-1} over (0, 1).
  double volume() const { return 1.0 / gamma_; }

  /// Strict membership; boundary points are outside.
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Distance from x to the lateral faces in the cross-section at height x_n
  /// (min over i of x_i and x_n^{gamma_i} - x_i). Negative outside.
  double lateral_clearance(const Eigen::Ref<const Eigen::VectorXd>& x) const;

 private:
  std::vector<double> exponents_;
  double gamma_;
};

/// Axis-aligned box [0, L_1] x ... x [0, L_n]; oracle geometry only.
struct BoxDomain {
  std::vector<double> sides;

  explicit BoxDomain(std::vector<double> side_lengths);
  static BoxDomain unit(int n);

  int dimension() const { return static_cast<int>(sides.size()); }
  double volume() const;
};

struct Jacobian {
  Eigen::MatrixXd differential;
  double determinant;
};

/// phi_a : Omega_1 -> Omega_gamma,
///   x -> (x_1 x_n^{a gamma_1 - 1}, ..., x_{n-1} x_n^{a gamma_{n-1} - 1}, x_n^a).
class MappingPhiA {
 public:
  MappingPhiA(double a, CuspDomain target);

  double exponent() const { return a_; }
  const CuspDomain& target() const { return target_; }

  /// Throws DomainError when x_n <= 0 (the map is singular at the tip).
  Point operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Analytic differential and closed-form determinant a x_n^{a gamma - n}.
  Jacobian jacobian(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Closed-form determinant only.
  double jacobian_determinant(double x_n) const;

 private:
  double a_;
  CuspDomain target_;
};

}  // namespace cuspeig
