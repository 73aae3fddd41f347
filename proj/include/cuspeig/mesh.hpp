#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "cuspeig/geometry.hpp"

namespace cuspeig {

/// Symmetric simplex rule in barycentric coordinates; weights sum to one.
struct QuadratureRule {
  Eigen::MatrixXd barycentric;  // points x (dim + 1)
  Eigen::VectorXd weights;
  int order;
};

/// Order 1 is the barycenter rule, order 2 the (dim + 1)-point rule that is
/// exact for quadratics (so it reproduces the consistent P1 mass matrix).
const QuadratureRule& simplex_quadrature(int dim, int order);

/// Conforming simplicial mesh (triangles in 2D, tetrahedra in 3D). Cells are
/// stored positively oriented; construction rejects degenerate or inverted cells.
class Mesh {
 public:
  Mesh(Eigen::MatrixXd nodes, Eigen::MatrixXi cells, std::vector<std::uint8_t> boundary);

  int dimension() const { return static_cast<int>(nodes_.cols()); }
  Eigen::Index node_count() const { return nodes_.rows(); }
  Eigen::Index cell_count() const { return cells_.rows(); }

  const Eigen::MatrixXd& nodes() const { return nodes_; }
  const Eigen::MatrixXi& cells() const { return cells_; }
  Eigen::VectorXd node(Eigen::Index i) const { return nodes_.row(i).transpose(); }
  bool on_boundary(Eigen::Index i) const { return boundary_[static_cast<std::size_t>(i)] != 0; }

  double cell_volume(Eigen::Index c) const { return volumes_(c); }
  const Eigen::VectorXd& cell_volumes() const { return volumes_; }
  double total_volume() const { return volumes_.sum(); }

  /// Largest coordinate extent; sets the scale of regularization parameters.
  double extent() const;

  /// Physical quadrature points of one cell (rows) for the given rule.
  Eigen::MatrixXd quadrature_points(Eigen::Index c, const QuadratureRule& rule) const;

 private:
  Eigen::MatrixXd nodes_;
  Eigen::MatrixXi cells_;
  std::vector<std::uint8_t> boundary_;
  Eigen::VectorXd volumes_;
};

struct MeshOptions {
  /// Ratio between consecutive layer heights in the graded zone near x_n = 0.
  double grading = 1.2;
  /// Layers stop at x_n = tip_radius; the excluded volume is O(tip_radius^gamma).
  double tip_radius = 1e-6;
};

/// Layer heights in (0, 1] for the graded structured cone mesh, ascending.
std::vector<double> layer_heights(int resolution, const MeshOptions& options = {});

/// Structured simplicial mesh of the reference cone Omega_1, graded toward the tip.
Mesh mesh_reference(int n, int resolution, const MeshOptions& options = {});

/// Reference mesh pushed through phi_a onto the cusp domain. Throws
/// NumericalError if an element inverts under the map.
Mesh mesh_cusp(const CuspDomain& domain, double a, int resolution,
               const MeshOptions& options = {});

/// Kuhn-split structured mesh of a box; `resolution` divisions on the shortest side.
Mesh mesh_box(const BoxDomain& box, int resolution);

/// Plain-text format: node count, one node per line, cell count, one cell per line.
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);

}  // namespace cuspeig
