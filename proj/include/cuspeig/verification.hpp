#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "cuspeig/bounds.hpp"
#include "cuspeig/eigensolver.hpp"

namespace cuspeig::verification {

struct OracleResult {
  double lambda_oracle = 0.0;
  /// "dense" or "subspace" (block shift-invert iteration with Rayleigh-Ritz).
  std::string method;
  std::string mesh_descriptor;
  /// |lambda_solver - lambda_oracle| / lambda_oracle, once compared.
  double discrepancy = 0.0;

  double compare(double lambda_solver);
};

enum class OracleMethod { automatic, dense, subspace };

/// Smallest eigenvalue of K x = lambda M x on the zero-mean subspace, i.e. the
/// first nontrivial P1 Neumann Laplacian eigenvalue of the mesh.
OracleResult oracle_linear_eigen(const FunctionSpace& space,
                                 OracleMethod method = OracleMethod::automatic);

struct MrqCheck {
  double quadrature = 0.0;
  double exact = 0.0;
  double bound = 0.0;
  double relative_discrepancy = 0.0;
  bool within_bound = false;
};

/// Mesh quadrature of (int |J(x, phi_a)|^{r/(r-q)})^{(r-q)/(rq)} over a mesh of
/// Omega_1, compared with the closed form and with a^{1/q} (1% slack).
MrqCheck check_m_rq(double a, const bounds::ExponentConfig& cfg, const CuspDomain& domain,
                    const Mesh& reference_mesh);

struct PoincareSweep {
  double max_ratio = 0.0;
  double mean_ratio = 0.0;
  int samples = 0;
  bool all_finite = true;
};

/// Random nodal fields in [-1, 1], projected to zero (q-1)-mean; records
/// ||u||_p / ||grad u||_p.
PoincareSweep poincare_sweep(const FunctionSpace& space, double p, double q, int samples,
                             std::uint64_t seed);

struct AlgebraicSweep {
  double p = 0.0;
  double min_pairing = 0.0;
  /// Sample minimum of the pairing over (|a| + |b|)^{p-2} |a - b|^2.
  double min_ratio = 0.0;
  int samples = 0;
};

/// (|a|^{p-2} a - |b|^{p-2} b) . (a - b) over random pairs in R^3.
AlgebraicSweep algebraic_inequality_sweep(double p, int samples, std::uint64_t seed);

struct MonotonicitySweep {
  double min_pairing = 0.0;
  /// Minimum pairing over pairs whose difference is not constant.
  double min_strict_pairing = 0.0;
  int pairs = 0;
};

/// <A v - A w, v - w> over random nodal field pairs.
MonotonicitySweep operator_monotonicity_sweep(const FunctionSpace& space, double p, int pairs,
                                              std::uint64_t seed);

struct JacobianCheck {
  double max_relative_error = 0.0;
  int points = 0;
};

/// Closed-form Jacobian determinant versus the determinant of a central
/// finite-difference differential of phi_a at random points of Omega_1.
JacobianCheck jacobian_finite_difference_check(const MappingPhiA& map, int points,
                                               std::uint64_t seed, double h = 1e-6);

/// Fraction of random points of Omega_1 whose image fails contains().
double mapping_containment_failures(const MappingPhiA& map, int points, std::uint64_t seed);

struct ConsistencyReport {
  double lambda_lower = 0.0;
  double lambda_numeric = 0.0;
  double gap_factor = 0.0;
  double slack = 0.05;
  /// "corollary", "theorem" or "unavailable".
  std::string bound_source;
  bool passed = false;
  std::string note;
};

/// Compares a computed eigenvalue with the closed-form lower bound for the
/// domain: the 3D (3,2) closed form when it applies, the optimized general
/// bound otherwise.
ConsistencyReport consistency_report(const CuspDomain& domain, double p, double q,
                                     double lambda_numeric, double slack = 0.05);

/// Builds the cusp mesh, minimizes the Rayleigh quotient, then reports.
ConsistencyReport consistency_report(const CuspDomain& domain, double p, double q, int resolution,
                                     double slack = 0.05);

struct PositivityCheck {
  /// The field is nonnegative (up to round-off) on the whole mesh.
  bool nonnegative = false;
  double min_on_subdomain = 0.0;
  int subdomain_nodes = 0;
};

/// Interior subdomain {x_n in (0.25, 0.75), lateral clearance > 0.05 x_n^{gamma_max}}.
bool in_interior_subdomain(const CuspDomain& domain, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Minimum of u over the interior subdomain, restricted to nodes further
/// than `nodal_margin` (in x_n) from any node where u <= 0.
PositivityCheck interior_positivity(const FunctionSpace& space, const CuspDomain& domain,
                                    const VectorRef& u, double nodal_margin = 0.0);

struct CheckResult {
  std::string name;
  bool passed = false;
  nlohmann::json details;
};

/// The verification suite run by `cuspeig verify`.
std::vector<CheckResult> run_suite(bool quick = false);

}  // namespace cuspeig::verification
