#pragma once

#include <cmath>
#include <iosfwd>
#include <memory>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cuspeig/mesh.hpp"

namespace cuspeig {

using Vector = Eigen::VectorXd;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Nodal values of a continuous P1 function on a mesh.
struct ScalarField {
  std::shared_ptr<const Mesh> mesh;
  Vector values;

  /// Throws DomainError on a size mismatch or a non-finite value.
  void validate() const;
};

/// Continuous P1 space on a simplicial mesh: per-cell constant gradient
/// operators, the exact stiffness and mass matrices, and a quadrature rule
/// for the nonlinear L^q integrals.
class FunctionSpace {
 public:
  explicit FunctionSpace(std::shared_ptr<const Mesh> mesh, int quadrature_order = 2);

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  Eigen::Index size() const { return mesh_->node_count(); }
  int dimension() const { return mesh_->dimension(); }
  double volume() const { return mesh_->total_volume(); }
  const QuadratureRule& rule() const { return *rule_; }

  /// dim x (dim + 1) matrix whose columns are the barycentric gradients of cell c.
  Eigen::Ref<const Eigen::MatrixXd> gradient_operator(Eigen::Index c) const {
    const int d = dimension();
    return gradients_.middleCols(c * (d + 1), d + 1);
  }

  Eigen::VectorXd cell_gradient(Eigen::Index c, const VectorRef& u) const;
  /// All cell gradients as columns of a dim x cells matrix.
  Eigen::MatrixXd cell_gradients(const VectorRef& u) const;

  const SparseMatrix& stiffness() const { return stiffness_; }
  const SparseMatrix& mass() const { return mass_; }
  /// Integrals of the nodal basis functions; m.dot(u) is the integral of u.
  const Vector& node_measure() const { return node_measure_; }

  /// Values of u at the quadrature points of every cell, cells x points.
  Eigen::MatrixXd quadrature_values(const VectorRef& u) const;

  ScalarField field(Vector values) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  const QuadratureRule* rule_;
  Eigen::MatrixXd gradients_;
  SparseMatrix stiffness_;
  SparseMatrix mass_;
  Vector node_measure_;
};

/// p-energy sum over cells of vol |grad u|^p. With eps > 0 the integrand is
/// (|grad u|^2 + eps^2)^{p/2} - eps^p, which is smooth at zero gradient.
double grad_norm_p(const FunctionSpace& space, const VectorRef& u, double p, double eps = 0.0);

/// Discrete p-Laplacian A(u)_i = int |grad u|^{p-2} grad u . grad phi_i
/// (the gradient of grad_norm_p / p), with the same optional regularization.
Vector p_laplace_operator(const FunctionSpace& space, const VectorRef& u, double p,
                          double eps = 0.0);

/// <A v - A w, v - w>; nonnegative for every p > 1.
double monotonicity_pairing(const FunctionSpace& space, const VectorRef& v, const VectorRef& w,
                            double p);

/// Integral of |u|^q.
double lq_integral(const FunctionSpace& space, const VectorRef& u, double q);
double lq_norm(const FunctionSpace& space, const VectorRef& u, double q);

/// Integral of |u|^{q-2} u; the admissible class is its zero set.
double constraint_value(const FunctionSpace& space, const VectorRef& u, double q);

/// Vector of int |u|^{q-2} u phi_i. Equals M u for q = 2.
Vector lq_duality_map(const FunctionSpace& space, const VectorRef& u, double q);

/// u - c with c the unique root of constraint_value(u - c, q) = 0.
/// Throws DomainError on a constant field.
Vector project_zero_mean(const FunctionSpace& space, const VectorRef& u, double q);

/// ||grad u||_p^p / ||u||_q^p. Throws DomainError when ||u||_q = 0.
double rayleigh_quotient(const FunctionSpace& space, const VectorRef& u, double p, double q);

/// sign(x) |x|^e for e > 0, well defined at x = 0.
inline double signed_power(double x, double e) {
  return x == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(x), e), x);
}

/// Plain-text nodal field: node count, then one "index value" pair per line.
void write_field(std::ostream& out, const VectorRef& values);
Vector read_field(std::istream& in);

}  // namespace cuspeig
