#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cuspeig/geometry.hpp"

namespace cuspeig::bounds {

/// Exponent tuple (p, q, s, r) for the Sobolev-Poincaré route to a lower
/// bound on the first nontrivial Neumann (p, q)-eigenvalue of a cusp.
struct ExponentConfig {
  double p = 0.0;
  double q = 0.0;
  double s = 0.0;
  double r = 0.0;
  int n = 0;
  double gamma = 0.0;

  /// gamma p / (gamma - p); +inf when p >= gamma.
  double p_star_gamma() const;
  /// ns / (n - s), the Sobolev exponent of s.
  double sobolev_exponent() const;
  double delta() const { return 1.0 / s - 1.0 / r; }

  /// Conditions the formulas need to be finite and meaningful:
  /// 1 < s < p, s < n, 1 < q < r, 0 <= delta < 1/n.
  std::vector<std::string> structural_violations() const;
  /// Hypotheses of the eigenvalue bound itself: p < gamma, q < p*_gamma,
  /// p*_gamma < ns / (n - s).
  std::vector<std::string> hypothesis_violations() const;

  /// Throws DomainError naming the first structural violation.
  void require_structural() const;

  /// Fills s and r when only (p, q) are given: s clears the Sobolev condition
  /// with 5% slack (kept below p), r sits halfway between q and the smaller
  /// of p*_gamma and ns / (n - s).
  static ExponentConfig with_default_sr(double p, double q, const CuspDomain& domain);
};

struct BoundReport {
  double a_star = 0.0;
  double k_ps = 0.0;
  double m_rq = 0.0;
  double b_rs = 0.0;
  double upper_on_inverse_lambda = 0.0;
  double lambda_lower = 0.0;
  std::pair<double, double> interval{0.0, 0.0};
  std::vector<std::pair<double, double>> evaluations;
  bool pinned = false;
  /// Lipschitz limit gamma <= p: the a-window is empty and a = 1 is used.
  bool degenerate = false;
  std::vector<std::string> hypothesis_violations;
};

struct BoundOptions {
  /// Evaluate at this a instead of minimizing over the admissible interval.
  std::optional<double> pinned_a;
  /// Replace the Sobolev-Poincaré estimate (e.g. by the rounded 12 pi).
  std::optional<double> b_override;
  int grid_points = 512;
  double a_tolerance = 1e-10;
  double endpoint_shrink = 1e-9;
};

/// Volume of the unit ball in R^n.
double unit_ball_volume(int n);

/// a^{-1/p} sqrt(sum_i (a gamma_i - 1)^2 + n - 1 + a^2), no window check.
double k_ps_formula(double a, double p, const CuspDomain& domain);

/// Same value; throws DomainError unless (n-p)/(gamma-p) < a < p(n-s)/(s(gamma-p)).
double k_ps_bound(double a, const ExponentConfig& cfg, const CuspDomain& domain);

/// a^{1/q}; throws DomainError unless a > n / gamma.
double m_rq_bound(double a, double q, const ExponentConfig& cfg);

/// Closed form of (int_{Omega_1} |J(x, phi_a)|^{r/(r-q)} dx)^{(r-q)/(rq)}.
/// Throws DomainError when the integral diverges.
double m_rq_exact(double a, const ExponentConfig& cfg, const CuspDomain& domain);

/// Upper estimate of the (r, s)-Sobolev-Poincaré constant of Omega_1.
/// Throws DomainError unless 0 <= 1/s - 1/r < 1/n.
double b_rs_estimate(int n, double r, double s);

/// (n / gamma, p (n - s) / (s (gamma - p))). Throws DomainError when empty.
std::pair<double, double> admissible_interval(const ExponentConfig& cfg);

/// a^{p/q - 1} (sum_i (a gamma_i - 1)^2 + n - 1 + a^2)^{p/2} b^p.
double inverse_lambda_objective(double a, const ExponentConfig& cfg, const CuspDomain& domain,
                                double b_rs);

/// Minimizes the objective over the admissible interval (coarse grid, then
/// golden section) and reports the resulting lower bound on lambda_{p,q}.
BoundReport lambda_lower_bound(const ExponentConfig& cfg, const CuspDomain& domain,
                               const BoundOptions& options = {});

/// Closed-form lower bound on lambda_{3,2} in a 3D cusp with exponents
/// (gamma_1, gamma_2), taking a = 1, r = 5/2, s = 3/2 and B rounded to 12 pi.
/// Requires 3 <= 1 + gamma_1 + gamma_2 < 6.
double corollary_32(double gamma_1, double gamma_2);

}  // namespace cuspeig::bounds
