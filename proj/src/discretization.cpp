#include "cuspeig/discretization.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <vector>

#include "cuspeig/errors.hpp"

namespace cuspeig {
namespace {

using Triplet = Eigen::Triplet<double>;

// Per-cell factor |g|^{p-2} (or its regularized form) given |g|^2.
double flux_weight(double g2, double p, double eps) {
  if (eps > 0.0) return std::pow(g2 + eps * eps, 0.5 * (p - 2.0));
  if (g2 == 0.0) return 0.0;  // multiplies a zero gradient
  return std::pow(g2, 0.5 * (p - 2.0));
}

double energy_density(double g2, double p, double eps) {
  if (eps > 0.0) return std::pow(g2 + eps * eps, 0.5 * p) - std::pow(eps, p);
  return std::pow(g2, 0.5 * p);
}

}  // namespace

void ScalarField::validate() const {
  if (!mesh) throw DomainError("scalar field has no mesh");
  if (values.size() != mesh->node_count()) {
    throw DomainError("scalar field size does not match the mesh node count");
  }
  if (!values.allFinite()) throw DomainError("scalar field has non-finite values");
}

FunctionSpace::FunctionSpace(std::shared_ptr<const Mesh> mesh, int quadrature_order)
    : mesh_(std::move(mesh)) {
  if (!mesh_) throw DomainError("function space needs a mesh");
  const int d = dimension();
  rule_ = &simplex_quadrature(d, quadrature_order);
  const auto& nodes = mesh_->nodes();
  const auto& cells = mesh_->cells();
  const Eigen::Index nc = mesh_->cell_count();
  gradients_.resize(d, nc * (d + 1));

  std::vector<Triplet> k_entries;
  std::vector<Triplet> m_entries;
  k_entries.reserve(static_cast<std::size_t>(nc * (d + 1) * (d + 1)));
  m_entries.reserve(k_entries.capacity());
  node_measure_ = Vector::Zero(size());

  // Exact P1 mass: vol / ((d+1)(d+2)) * (1 + delta_ij).
  const double mass_scale = 1.0 / ((d + 1.0) * (d + 2.0));
  Eigen::MatrixXd edges(d, d);
  for (Eigen::Index c = 0; c < nc; ++c) {
    const auto x0 = nodes.row(cells(c, 0));
    for (int k = 0; k < d; ++k) edges.row(k) = nodes.row(cells(c, k + 1)) - x0;
    // Rows of edges are x_k - x_0, so column k of edges^{-1} is grad lambda_k.
    const Eigen::MatrixXd inv = edges.inverse();
    auto g = gradients_.middleCols(c * (d + 1), d + 1);
    g.rightCols(d) = inv;
    g.col(0) = -inv.rowwise().sum();

    const double vol = mesh_->cell_volume(c);
    const Eigen::MatrixXd local = vol * (g.transpose() * g);
    for (int i = 0; i <= d; ++i) {
      node_measure_(cells(c, i)) += vol / (d + 1);
      for (int j = 0; j <= d; ++j) {
        k_entries.emplace_back(cells(c, i), cells(c, j), local(i, j));
        m_entries.emplace_back(cells(c, i), cells(c, j), vol * mass_scale * (i == j ? 2.0 : 1.0));
      }
    }
  }
  stiffness_.resize(size(), size());
  stiffness_.setFromTriplets(k_entries.begin(), k_entries.end());
  mass_.resize(size(), size());
  mass_.setFromTriplets(m_entries.begin(), m_entries.end());
}

// Gradients are formed from differences against the first vertex: the
// barycentric gradients sum to zero, and this keeps round-off proportional to
// the local variation of u rather than to |u|.
Eigen::VectorXd FunctionSpace::cell_gradient(Eigen::Index c, const VectorRef& u) const {
  const int d = dimension();
  const auto& cells = mesh_->cells();
  const double u0 = u(cells(c, 0));
  Eigen::VectorXd g = Eigen::VectorXd::Zero(d);
  for (int k = 1; k <= d; ++k) g += (u(cells(c, k)) - u0) * gradients_.col(c * (d + 1) + k);
  return g;
}

Eigen::MatrixXd FunctionSpace::cell_gradients(const VectorRef& u) const {
  const int d = dimension();
  const auto& cells = mesh_->cells();
  Eigen::MatrixXd grads(d, mesh_->cell_count());
  for (Eigen::Index c = 0; c < mesh_->cell_count(); ++c) {
    const double u0 = u(cells(c, 0));
    grads.col(c).setZero();
    for (int k = 1; k <= d; ++k) {
      grads.col(c) += (u(cells(c, k)) - u0) * gradients_.col(c * (d + 1) + k);
    }
  }
  return grads;
}

Eigen::MatrixXd FunctionSpace::quadrature_values(const VectorRef& u) const {
  const int d = dimension();
  const auto& cells = mesh_->cells();
  Eigen::MatrixXd local(mesh_->cell_count(), d + 1);
  for (Eigen::Index c = 0; c < mesh_->cell_count(); ++c) {
    for (int k = 0; k <= d; ++k) local(c, k) = u(cells(c, k));
  }
  return local * rule_->barycentric.transpose();
}

ScalarField FunctionSpace::field(Vector values) const {
  ScalarField f{mesh_, std::move(values)};
  f.validate();
  return f;
}

double grad_norm_p(const FunctionSpace& space, const VectorRef& u, double p, double eps) {
  if (!(p > 1.0)) throw DomainError("p-energy requires p > 1");
  const Eigen::MatrixXd grads = space.cell_gradients(u);
  const auto& vol = space.mesh().cell_volumes();
  double sum = 0.0;
  for (Eigen::Index c = 0; c < grads.cols(); ++c) {
    sum += vol(c) * energy_density(grads.col(c).squaredNorm(), p, eps);
  }
  return sum;
}

Vector p_laplace_operator(const FunctionSpace& space, const VectorRef& u, double p, double eps) {
  if (!(p > 1.0)) throw DomainError("p-Laplacian requires p > 1");
  const int d = space.dimension();
  const auto& cells = space.mesh().cells();
  const auto& vol = space.mesh().cell_volumes();
  const Eigen::MatrixXd grads = space.cell_gradients(u);
  Vector out = Vector::Zero(space.size());
  for (Eigen::Index c = 0; c < grads.cols(); ++c) {
    const double w = vol(c) * flux_weight(grads.col(c).squaredNorm(), p, eps);
    if (w == 0.0) continue;
    const Eigen::VectorXd local = w * (space.gradient_operator(c).transpose() * grads.col(c));
    for (int k = 0; k <= d; ++k) out(cells(c, k)) += local(k);
  }
  return out;
}

double monotonicity_pairing(const FunctionSpace& space, const VectorRef& v, const VectorRef& w,
                            double p) {
  const Vector diff = v - w;
  return (p_laplace_operator(space, v, p) - p_laplace_operator(space, w, p)).dot(diff);
}

double lq_integral(const FunctionSpace& space, const VectorRef& u, double q) {
  if (!(q >= 1.0)) throw DomainError("L^q norm requires q >= 1");
  if (q == 2.0) return u.dot(space.mass() * u);
  const Eigen::MatrixXd vals = space.quadrature_values(u);
  const auto& w = space.rule().weights;
  const auto& vol = space.mesh().cell_volumes();
  double sum = 0.0;
  for (Eigen::Index c = 0; c < vals.rows(); ++c) {
    double cell = 0.0;
    for (Eigen::Index k = 0; k < vals.cols(); ++k) cell += w(k) * std::pow(std::abs(vals(c, k)), q);
    sum += vol(c) * cell;
  }
  return sum;
}

double lq_norm(const FunctionSpace& space, const VectorRef& u, double q) {
  return std::pow(lq_integral(space, u, q), 1.0 / q);
}

double constraint_value(const FunctionSpace& space, const VectorRef& u, double q) {
  if (!(q > 1.0)) throw DomainError("constraint requires q > 1");
  if (q == 2.0) return space.node_measure().dot(u);
  const Eigen::MatrixXd vals = space.quadrature_values(u);
  const auto& w = space.rule().weights;
  const auto& vol = space.mesh().cell_volumes();
  double sum = 0.0;
  for (Eigen::Index c = 0; c < vals.rows(); ++c) {
    double cell = 0.0;
    for (Eigen::Index k = 0; k < vals.cols(); ++k) cell += w(k) * signed_power(vals(c, k), q - 1.0);
    sum += vol(c) * cell;
  }
  return sum;
}

Vector lq_duality_map(const FunctionSpace& space, const VectorRef& u, double q) {
  if (!(q > 1.0)) throw DomainError("duality map requires q > 1");
  if (q == 2.0) return space.mass() * u;
  const int d = space.dimension();
  const auto& rule = space.rule();
  const auto& cells = space.mesh().cells();
  const auto& vol = space.mesh().cell_volumes();
  const Eigen::MatrixXd vals = space.quadrature_values(u);
  Vector out = Vector::Zero(space.size());
  for (Eigen::Index c = 0; c < vals.rows(); ++c) {
    for (Eigen::Index k = 0; k < vals.cols(); ++k) {
      const double s = vol(c) * rule.weights(k) * signed_power(vals(c, k), q - 1.0);
      for (int j = 0; j <= d; ++j) out(cells(c, j)) += s * rule.barycentric(k, j);
    }
  }
  return out;
}

Vector project_zero_mean(const FunctionSpace& space, const VectorRef& u, double q) {
  const double lo0 = u.minCoeff();
  const double hi0 = u.maxCoeff();
  if (!(hi0 > lo0)) throw DomainError("cannot project a constant field to the admissible class");
  if (q == 2.0) {
    return u.array() - space.node_measure().dot(u) / space.volume();
  }
  // c -> constraint_value(u - c) is continuous and strictly decreasing on [min u, max u].
  const double tol = 1e-12 * (hi0 - lo0);
  double lo = lo0;
  double hi = hi0;
  for (int iter = 0; iter < 200 && hi - lo > tol; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const Vector shifted = u.array() - mid;
    if (constraint_value(space, shifted, q) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return u.array() - 0.5 * (lo + hi);
}

double rayleigh_quotient(const FunctionSpace& space, const VectorRef& u, double p, double q) {
  const double norm = lq_norm(space, u, q);
  if (!(norm > 0.0)) throw DomainError("Rayleigh quotient of a field with zero L^q norm");
  return grad_norm_p(space, u, p) / std::pow(norm, p);
}

void write_field(std::ostream& out, const VectorRef& values) {
  const auto old_precision = out.precision(17);
  out << values.size() << '\n';
  for (Eigen::Index i = 0; i < values.size(); ++i) out << i << ' ' << values(i) << '\n';
  out.precision(old_precision);
}

Vector read_field(std::istream& in) {
  Eigen::Index count = 0;
  if (!(in >> count) || count <= 0) throw DomainError("field file: bad node count");
  Vector values(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    Eigen::Index index = 0;
    if (!(in >> index >> values(i)) || index != i) throw DomainError("field file: bad entry");
  }
  return values;
}

}  // namespace cuspeig
