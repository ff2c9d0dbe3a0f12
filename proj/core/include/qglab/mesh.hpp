#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "qglab/geometry.hpp"
#include "qglab/graph.hpp"

namespace qglab {

/// Per-edge 1D grids glued at vertices.
///
/// DOF ordering: vertices first (by id), then edge-interior nodes by
/// (edge id, offset). Every edge endpoint node at a vertex shares that
/// vertex's DOF, which is what makes interpolants continuous.
class Mesh {
 public:
  /// `nodes[e]` lists increasing offsets on edge e, starting at 0 and
  /// ending at l(e), with at least two entries.
  Mesh(MetricGraph graph, std::vector<std::vector<double>> nodes);

  const MetricGraph& graph() const noexcept { return graph_; }
  std::size_t dof_count() const noexcept { return dof_count_; }
  std::size_t element_count() const noexcept { return element_count_; }

  std::span<const double> nodes(EdgeId e) const { return nodes_.at(index(e)); }
  std::size_t elements_on(EdgeId e) const { return nodes_.at(index(e)).size() - 1; }
  std::size_t node_dof(EdgeId e, std::size_t k) const;

  /// Location of a DOF as a canonical point.
  Point dof_point(std::size_t dof) const;
  /// DOF sitting exactly at p, if p is a node.
  std::optional<std::size_t> dof_at(const Point& p) const;

  /// Element k on edge e with nodes[k] <= s <= nodes[k+1].
  std::size_t locate(EdgeId e, double s) const;
  /// Piecewise-linear interpolant evaluated at a point.
  double evaluate(const Eigen::VectorXd& u, EdgeId e, double s) const;
  double evaluate(const Eigen::VectorXd& u, const Point& p) const;

 private:
  MetricGraph graph_;
  std::vector<std::vector<double>> nodes_;
  std::vector<std::size_t> interior_base_;  // first interior DOF of each edge
  std::vector<std::pair<EdgeId, std::size_t>> interior_location_;
  std::size_t dof_count_ = 0;
  std::size_t element_count_ = 0;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Uniform mesh: n_e = max(1, ceil(l(e)/h)) elements per edge.
MeshPtr build_mesh(const MetricGraph& g, double h);

/// Coefficient vector over a mesh; the piecewise-linear interpolant.
struct DiscreteFunction {
  MeshPtr mesh;
  Eigen::VectorXd values;

  double operator()(const Point& p) const { return mesh->evaluate(values, p); }
};

DiscreteFunction constant_function(MeshPtr mesh, double value);
/// Nodal interpolation of f(edge, offset). Vertex DOFs are sampled through
/// their first incident edge, so f must be continuous across vertices.
template <typename F>
DiscreteFunction interpolate(MeshPtr mesh, F&& f) {
  DiscreteFunction u{mesh, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh->dof_count()))};
  const MetricGraph& g = mesh->graph();
  for (std::size_t k = 0; k < g.edge_count(); ++k) {
    const EdgeId e = edge_at(k);
    const auto nodes = mesh->nodes(e);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      u.values[static_cast<Eigen::Index>(mesh->node_dof(e, j))] = f(e, nodes[j]);
    }
  }
  return u;
}

/// Mesh of a ball B_r(x): elements exactly tile the covered intervals, with
/// nodes inserted at the cut offsets. Cut points become degree-1 vertices of
/// the ball subgraph (natural boundary unless a Dirichlet solve pins them).
struct BallMesh {
  MeshPtr mesh;
  BallGeometry ball;                // on the parent graph
  std::vector<EdgeId> parent_edge;  // per sub-edge
  std::vector<double> parent_start; // per sub-edge: parent offset of its start
  std::vector<std::size_t> cut_dofs;  ///< nodes on the sphere d = r: cut points, then parent vertices

  /// Position of a sub-mesh DOF on the parent graph.
  Point parent_point(std::size_t sub_dof) const;
  /// Values of a parent-mesh function at the sub-mesh nodes.
  DiscreteFunction restrict(const DiscreteFunction& parent) const;
};

/// Throws GraphError if the ball is empty.
BallMesh restrict_to_ball(const Mesh& parent, const BallGeometry& ball);

}  // namespace qglab
