#include "qglab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace qglab {

Mesh::Mesh(MetricGraph graph, std::vector<std::vector<double>> nodes)
    : graph_(std::move(graph)), nodes_(std::move(nodes)) {
  if (nodes_.size() != graph_.edge_count()) throw GraphError("mesh needs one node list per edge");
  dof_count_ = graph_.vertex_count();
  interior_base_.resize(nodes_.size());
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    auto& xs = nodes_[k];
    const double l = graph_.edges()[k].length;
    if (xs.size() < 2 || xs.front() != 0.0 || std::abs(xs.back() - l) > 1e-12 * std::max(1.0, l) ||
        !std::is_sorted(xs.begin(), xs.end(), std::less_equal<>{})) {
      throw GraphError("mesh nodes must increase from 0 to l(e)");
    }
    xs.back() = l;
    interior_base_[k] = dof_count_;
    for (std::size_t j = 1; j + 1 < xs.size(); ++j) interior_location_.emplace_back(edge_at(k), j);
    dof_count_ += xs.size() - 2;
    element_count_ += xs.size() - 1;
  }
}

std::size_t Mesh::node_dof(EdgeId e, std::size_t k) const {
  const auto& xs = nodes_.at(index(e));
  if (k == 0) return index(graph_.edge(e).from);
  if (k + 1 == xs.size()) return index(graph_.edge(e).to);
  return interior_base_[index(e)] + k - 1;
}

Point Mesh::dof_point(std::size_t dof) const {
  if (dof < graph_.vertex_count()) return Point::at_vertex(vertex_at(dof));
  const auto [e, k] = interior_location_.at(dof - graph_.vertex_count());
  return Point::on_edge(e, nodes_[index(e)][k]);
}

std::optional<std::size_t> Mesh::dof_at(const Point& p) const {
  const Point q = canonical(graph_, p);
  if (q.is_vertex()) return index(q.vertex());
  const auto& xs = nodes_[index(q.edge())];
  const auto it = std::lower_bound(xs.begin(), xs.end(), q.offset());
  if (it == xs.end() || *it != q.offset()) return std::nullopt;
  return node_dof(q.edge(), static_cast<std::size_t>(it - xs.begin()));
}

std::size_t Mesh::locate(EdgeId e, double s) const {
  const auto& xs = nodes_.at(index(e));
  const auto it = std::upper_bound(xs.begin() + 1, xs.end() - 1, s);
  return static_cast<std::size_t>(it - xs.begin()) - 1;
}

double Mesh::evaluate(const Eigen::VectorXd& u, EdgeId e, double s) const {
  const auto& xs = nodes_.at(index(e));
  const std::size_t k = locate(e, s);
  const double a = xs[k];
  const double b = xs[k + 1];
  const double ua = u[static_cast<Eigen::Index>(node_dof(e, k))];
  const double ub = u[static_cast<Eigen::Index>(node_dof(e, k + 1))];
  const double t = (s - a) / (b - a);
  return ua + t * (ub - ua);
}

double Mesh::evaluate(const Eigen::VectorXd& u, const Point& p) const {
  const Point q = canonical(graph_, p);
  if (q.is_vertex()) return u[static_cast<Eigen::Index>(index(q.vertex()))];
  return evaluate(u, q.edge(), q.offset());
}

MeshPtr build_mesh(const MetricGraph& g, double h) {
  if (!(h > 0.0)) throw GraphError("mesh size h must be positive");
  std::vector<std::vector<double>> nodes(g.edge_count());
  for (std::size_t k = 0; k < g.edge_count(); ++k) {
    const double l = g.edges()[k].length;
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(l / h - 1e-12)));
    nodes[k].resize(n + 1);
    for (std::size_t j = 0; j <= n; ++j) nodes[k][j] = l * static_cast<double>(j) / static_cast<double>(n);
  }
  return std::make_shared<const Mesh>(g, std::move(nodes));
}

DiscreteFunction constant_function(MeshPtr mesh, double value) {
  const auto n = static_cast<Eigen::Index>(mesh->dof_count());
  return DiscreteFunction{std::move(mesh), Eigen::VectorXd::Constant(n, value)};
}

Point BallMesh::parent_point(std::size_t sub_dof) const {
  const Point p = mesh->dof_point(sub_dof);
  const MetricGraph& sub = mesh->graph();
  if (p.is_vertex()) {
    // Any incident sub-edge locates it on the parent.
    const auto inc = sub.incident(p.vertex());
    if (inc.empty()) throw GraphError("isolated vertex in ball mesh");
    const EdgeId se = inc.front();
    const double local = sub.edge(se).from == p.vertex() ? 0.0 : sub.edge(se).length;
    return Point::on_edge(parent_edge[index(se)], parent_start[index(se)] + local);
  }
  return Point::on_edge(parent_edge[index(p.edge())], parent_start[index(p.edge())] + p.offset());
}

BallMesh restrict_to_ball(const Mesh& parent, const BallGeometry& ball) {
  if (!(ball.volume > 0.0)) throw GraphError("cannot restrict to an empty ball");
  const MetricGraph& g = parent.graph();

  struct Piece {
    EdgeId edge;
    double lo;
    double hi;
  };
  std::vector<Piece> pieces;
  std::vector<bool> touched(g.vertex_count(), false);
  for (std::size_t k = 0; k < g.edge_count(); ++k) {
    const double l = g.edges()[k].length;
    for (const Interval& iv : ball.covered.at(k)) {
      if (!(iv.hi > iv.lo)) continue;
      pieces.push_back({edge_at(k), iv.lo, iv.hi});
      if (iv.lo == 0.0) touched[index(g.edges()[k].from)] = true;
      if (iv.hi == l) touched[index(g.edges()[k].to)] = true;
    }
  }

  // Sub-vertex ids: touched parent vertices by id, then cut points in order.
  std::map<std::size_t, std::size_t> from_parent;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    if (touched[v]) from_parent.emplace(v, from_parent.size());
  }
  std::size_t next = from_parent.size();
  std::vector<std::size_t> cut_vertices;

  BallMesh out;
  out.ball = ball;
  std::vector<Edge> edges;
  std::vector<std::vector<double>> nodes;
  for (const Piece& p : pieces) {
    const Edge& pe = g.edge(p.edge);
    const double l = pe.length;
    auto endpoint = [&](bool at_start) {
      if (at_start && p.lo == 0.0) return vertex_at(from_parent.at(index(pe.from)));
      if (!at_start && p.hi == l) return vertex_at(from_parent.at(index(pe.to)));
      cut_vertices.push_back(next);
      return vertex_at(next++);
    };
    const VertexId a = endpoint(true);
    const VertexId b = endpoint(false);
    std::optional<WeightProfile> w;
    if (pe.weight) w = pe.weight->slice(p.lo, p.hi);
    edges.push_back(Edge{a, b, p.hi - p.lo, std::move(w)});
    out.parent_edge.push_back(p.edge);
    out.parent_start.push_back(p.lo);

    const auto xs = parent.nodes(p.edge);
    const double tol = 1e-12 * std::max(1.0, l);
    std::vector<double> local{0.0};
    for (double x : xs) {
      if (x > p.lo + tol && x < p.hi - tol) local.push_back(x - p.lo);
    }
    local.push_back(p.hi - p.lo);
    nodes.push_back(std::move(local));
  }

  MetricGraph sub(next, std::move(edges), g.weight_bound());
  out.mesh = std::make_shared<const Mesh>(std::move(sub), std::move(nodes));
  // Parent vertices lying exactly on the sphere d = r close the ball too.
  if (std::isfinite(ball.radius)) {
    const DistanceField field(g, ball.center);
    for (const auto& [v, sub_id] : from_parent) {
      if (field.to_vertex(vertex_at(v)) >= ball.radius * (1.0 - 1e-12)) cut_vertices.push_back(sub_id);
    }
  }
  out.cut_dofs = std::move(cut_vertices);  // vertex DOF index == vertex id
  return out;
}

DiscreteFunction BallMesh::restrict(const DiscreteFunction& parent) const {
  DiscreteFunction u{mesh, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh->dof_count()))};
  for (std::size_t d = 0; d < mesh->dof_count(); ++d) {
    const Point p = parent_point(d);
    u.values[static_cast<Eigen::Index>(d)] = parent.mesh->evaluate(parent.values, p.edge(), p.offset());
  }
  return u;
}

}  // namespace qglab
