#include "cuspeig/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "cuspeig/errors.hpp"

namespace cuspeig {
namespace {

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

double signed_volume(const Eigen::MatrixXd& nodes, const Eigen::MatrixXi& cells, Eigen::Index c) {
  const int dim = static_cast<int>(nodes.cols());
  Eigen::MatrixXd edges(dim, dim);
  const auto x0 = nodes.row(cells(c, 0));
  for (int k = 0; k < dim; ++k) edges.col(k) = (nodes.row(cells(c, k + 1)) - x0).transpose();
  return edges.determinant() / factorial(dim);
}

QuadratureRule make_rule(int dim, int order) {
  QuadratureRule rule;
  rule.order = order;
  if (order <= 1) {
    rule.barycentric = Eigen::MatrixXd::Constant(1, dim + 1, 1.0 / (dim + 1));
    rule.weights = Eigen::VectorXd::Ones(1);
    return rule;
  }
  // dim + 1 points on the vertex-barycenter segments.
  const double b = dim == 2 ? 1.0 / 6.0 : (5.0 - std::sqrt(5.0)) / 20.0;
  const double a = 1.0 - dim * b;
  rule.barycentric = Eigen::MatrixXd::Constant(dim + 1, dim + 1, b);
  rule.barycentric.diagonal().setConstant(a);
  rule.weights = Eigen::VectorXd::Constant(dim + 1, 1.0 / (dim + 1));
  return rule;
}

// Index grid of (res_0 + 1) x ... nodes, Kuhn-split into dim! simplices per cube.
struct StructuredGrid {
  std::vector<int> divisions;

  int dim() const { return static_cast<int>(divisions.size()); }

  Eigen::Index node_count() const {
    Eigen::Index count = 1;
    for (int d : divisions) count *= d + 1;
    return count;
  }

  Eigen::Index node_index(const std::vector<int>& ijk) const {
    Eigen::Index idx = 0;
    for (int k = dim() - 1; k >= 0; --k) idx = idx * (divisions[k] + 1) + ijk[k];
    return idx;
  }

  std::vector<int> multi_index(Eigen::Index idx) const {
    std::vector<int> ijk(static_cast<std::size_t>(dim()));
    for (int k = 0; k < dim(); ++k) {
      ijk[k] = static_cast<int>(idx % (divisions[k] + 1));
      idx /= divisions[k] + 1;
    }
    return ijk;
  }

  bool on_boundary(const std::vector<int>& ijk) const {
    for (int k = 0; k < dim(); ++k) {
      if (ijk[k] == 0 || ijk[k] == divisions[k]) return true;
    }
    return false;
  }

  // Cells oriented positively in index space; a positive affine image keeps that.
  Eigen::MatrixXi cells() const {
    const int n = dim();
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::vector<int>> perms;
    do {
      perms.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));

    Eigen::Index cube_count = 1;
    for (int d : divisions) cube_count *= d;
    Eigen::MatrixXi cells(cube_count * static_cast<Eigen::Index>(perms.size()), n + 1);
    Eigen::Index row = 0;
    std::vector<int> corner(static_cast<std::size_t>(n), 0);
    for (Eigen::Index cube = 0; cube < cube_count; ++cube) {
      Eigen::Index rest = cube;
      for (int k = 0; k < n; ++k) {
        corner[k] = static_cast<int>(rest % divisions[k]);
        rest /= divisions[k];
      }
      for (const auto& p : perms) {
        std::vector<int> v = corner;
        cells(row, 0) = static_cast<int>(node_index(v));
        for (int k = 0; k < n; ++k) {
          ++v[p[k]];
          cells(row, k + 1) = static_cast<int>(node_index(v));
        }
        // Kuhn simplex orientation equals the permutation parity.
        int inversions = 0;
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j) inversions += p[i] > p[j] ? 1 : 0;
        if (inversions % 2 == 1) std::swap(cells(row, 1), cells(row, 2));
        ++row;
      }
    }
    return cells;
  }
};

// Reference cone chart: (xi, t) -> (xi * t, t) with xi in [0,1]^{n-1}.
Eigen::MatrixXd cone_nodes(const StructuredGrid& grid, const std::vector<double>& layers,
                           int resolution) {
  const int n = grid.dim();
  Eigen::MatrixXd nodes(grid.node_count(), n);
  for (Eigen::Index i = 0; i < nodes.rows(); ++i) {
    const auto ijk = grid.multi_index(i);
    const double t = layers[static_cast<std::size_t>(ijk[n - 1])];
    for (int k = 0; k < n - 1; ++k) nodes(i, k) = t * ijk[k] / static_cast<double>(resolution);
    nodes(i, n - 1) = t;
  }
  return nodes;
}

std::vector<std::uint8_t> grid_boundary(const StructuredGrid& grid) {
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(grid.node_count()));
  for (Eigen::Index i = 0; i < grid.node_count(); ++i) {
    flags[static_cast<std::size_t>(i)] = grid.on_boundary(grid.multi_index(i)) ? 1 : 0;
  }
  return flags;
}

StructuredGrid cone_grid(int n, int resolution, std::size_t layer_count) {
  if (n < 2 || n > 3) throw DomainError("meshes are supported in dimension 2 or 3");
  if (resolution < 2) throw DomainError("mesh resolution must be at least 2");
  StructuredGrid grid;
  grid.divisions.assign(static_cast<std::size_t>(n - 1), resolution);
  grid.divisions.push_back(static_cast<int>(layer_count) - 1);
  return grid;
}

// Boundary nodes of an unstructured mesh: vertices of facets owned by one cell.
std::vector<std::uint8_t> boundary_from_topology(const Eigen::MatrixXi& cells, Eigen::Index nodes) {
  std::map<std::vector<int>, int> facet_count;
  const int verts = static_cast<int>(cells.cols());
  for (Eigen::Index c = 0; c < cells.rows(); ++c) {
    for (int skip = 0; skip < verts; ++skip) {
      std::vector<int> facet;
      for (int k = 0; k < verts; ++k)
        if (k != skip) facet.push_back(cells(c, k));
      std::sort(facet.begin(), facet.end());
      ++facet_count[facet];
    }
  }
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(nodes), 0);
  for (const auto& [facet, count] : facet_count) {
    if (count == 1)
      for (int v : facet) flags[static_cast<std::size_t>(v)] = 1;
  }
  return flags;
}

}  // namespace

const QuadratureRule& simplex_quadrature(int dim, int order) {
  static const std::array<QuadratureRule, 4> rules = {make_rule(2, 1), make_rule(2, 2),
                                                      make_rule(3, 1), make_rule(3, 2)};
  if ((dim != 2 && dim != 3) || (order != 1 && order != 2)) {
    throw DomainError("quadrature available for dim 2/3 and order 1/2 only");
  }
  return rules[static_cast<std::size_t>((dim - 2) * 2 + (order - 1))];
}

Mesh::Mesh(Eigen::MatrixXd nodes, Eigen::MatrixXi cells, std::vector<std::uint8_t> boundary)
    : nodes_(std::move(nodes)), cells_(std::move(cells)), boundary_(std::move(boundary)) {
  const int dim = dimension();
  if (dim < 2 || dim > 3) throw DomainError("meshes are supported in dimension 2 or 3");
  if (cells_.cols() != dim + 1) throw DomainError("cells must have dim + 1 vertices");
  if (boundary_.size() != static_cast<std::size_t>(nodes_.rows())) {
    throw DomainError("boundary flag count must equal node count");
  }
  if (cells_.size() > 0 && (cells_.minCoeff() < 0 || cells_.maxCoeff() >= nodes_.rows())) {
    throw DomainError("cell references a node index out of range");
  }
  volumes_.resize(cells_.rows());
  for (Eigen::Index c = 0; c < cells_.rows(); ++c) {
    const double v = signed_volume(nodes_, cells_, c);
    if (!(v > 0.0)) {
      throw NumericalError("inverted or degenerate element " + std::to_string(c) +
                           " (signed volume " + std::to_string(v) + ")");
    }
    volumes_(c) = v;
  }
}

double Mesh::extent() const {
  return (nodes_.colwise().maxCoeff() - nodes_.colwise().minCoeff()).maxCoeff();
}

Eigen::MatrixXd Mesh::quadrature_points(Eigen::Index c, const QuadratureRule& rule) const {
  Eigen::MatrixXd vertices(cells_.cols(), dimension());
  for (Eigen::Index k = 0; k < cells_.cols(); ++k) vertices.row(k) = nodes_.row(cells_(c, k));
  return rule.barycentric * vertices;
}

std::vector<double> layer_heights(int resolution, const MeshOptions& options) {
  if (resolution < 2) throw DomainError("mesh resolution must be at least 2");
  if (!(options.grading > 1.0)) throw DomainError("grading factor must exceed 1");
  if (!(options.tip_radius > 0.0 && options.tip_radius < 0.5)) {
    throw DomainError("tip radius must lie in (0, 0.5)");
  }
  const double h = 1.0 / resolution;
  const double shrink = 1.0 - 1.0 / options.grading;
  std::vector<double> heights{1.0};
  double t = 1.0;
  while (true) {
    const double next = t - std::min(h, t * shrink);
    if (next <= options.tip_radius * (1.0 + 1e-12)) break;
    heights.push_back(next);
    t = next;
  }
  heights.push_back(options.tip_radius);
  std::reverse(heights.begin(), heights.end());
  return heights;
}

Mesh mesh_reference(int n, int resolution, const MeshOptions& options) {
  const auto layers = layer_heights(resolution, options);
  const StructuredGrid grid = cone_grid(n, resolution, layers.size());
  return Mesh(cone_nodes(grid, layers, resolution), grid.cells(), grid_boundary(grid));
}

Mesh mesh_cusp(const CuspDomain& domain, double a, int resolution, const MeshOptions& options) {
  const int n = domain.dimension();
  const auto layers = layer_heights(resolution, options);
  const StructuredGrid grid = cone_grid(n, resolution, layers.size());
  Eigen::MatrixXd nodes = cone_nodes(grid, layers, resolution);
  const MappingPhiA phi(a, domain);
  for (Eigen::Index i = 0; i < nodes.rows(); ++i) {
    nodes.row(i) = phi(nodes.row(i).transpose()).transpose();
  }
  return Mesh(std::move(nodes), grid.cells(), grid_boundary(grid));
}

Mesh mesh_box(const BoxDomain& box, int resolution) {
  if (resolution < 1) throw DomainError("mesh resolution must be positive");
  const double shortest = *std::min_element(box.sides.begin(), box.sides.end());
  StructuredGrid grid;
  for (double l : box.sides) {
    grid.divisions.push_back(std::max(1, static_cast<int>(std::lround(resolution * l / shortest))));
  }
  const int n = grid.dim();
  Eigen::MatrixXd nodes(grid.node_count(), n);
  for (Eigen::Index i = 0; i < nodes.rows(); ++i) {
    const auto ijk = grid.multi_index(i);
    for (int k = 0; k < n; ++k) {
      nodes(i, k) = box.sides[static_cast<std::size_t>(k)] * ijk[k] / grid.divisions[k];
    }
  }
  return Mesh(std::move(nodes), grid.cells(), grid_boundary(grid));
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  const auto old_precision = out.precision(17);
  out << mesh.node_count() << '\n';
  for (Eigen::Index i = 0; i < mesh.node_count(); ++i) {
    for (int k = 0; k < mesh.dimension(); ++k) out << (k ? " " : "") << mesh.nodes()(i, k);
    out << '\n';
  }
  out << mesh.cell_count() << '\n';
  for (Eigen::Index c = 0; c < mesh.cell_count(); ++c) {
    for (Eigen::Index k = 0; k < mesh.cells().cols(); ++k) out << (k ? " " : "") << mesh.cells()(c, k);
    out << '\n';
  }
  out.precision(old_precision);
}

Mesh read_mesh(std::istream& in) {
  Eigen::Index node_count = 0;
  if (!(in >> node_count) || node_count <= 0) throw DomainError("mesh file: bad node count");
  in >> std::ws;
  std::string line;
  std::getline(in, line);
  // Dimension is the number of coordinates on the first node line.
  std::vector<double> first;
  {
    std::istringstream row(line);
    for (double v; row >> v;) first.push_back(v);
  }
  const int dim = static_cast<int>(first.size());
  if (dim < 2 || dim > 3) throw DomainError("mesh file: nodes must have 2 or 3 coordinates");
  Eigen::MatrixXd nodes(node_count, dim);
  for (int k = 0; k < dim; ++k) nodes(0, k) = first[static_cast<std::size_t>(k)];
  for (Eigen::Index i = 1; i < node_count; ++i) {
    for (int k = 0; k < dim; ++k) {
      if (!(in >> nodes(i, k))) throw DomainError("mesh file: truncated node list");
    }
  }
  Eigen::Index cell_count = 0;
  if (!(in >> cell_count) || cell_count <= 0) throw DomainError("mesh file: bad cell count");
  Eigen::MatrixXi cells(cell_count, dim + 1);
  for (Eigen::Index c = 0; c < cell_count; ++c) {
    for (int k = 0; k <= dim; ++k) {
      if (!(in >> cells(c, k))) throw DomainError("mesh file: truncated cell list");
    }
  }
  auto boundary = boundary_from_topology(cells, node_count);
  return Mesh(std::move(nodes), std::move(cells), std::move(boundary));
}

}  // namespace cuspeig
