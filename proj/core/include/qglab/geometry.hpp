#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qglab/graph.hpp"

namespace qglab {

class DisconnectedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Graph split at one or more points, with the map from old points to new.
///
/// Splitting edge e at offset s keeps id e for [0, s] and appends a new
/// edge for [s, l(e)]; the split point becomes a new degree-2 vertex.
struct SplitGraph {
  MetricGraph graph;
  std::vector<VertexId> split_vertices;  // one per requested point, in order

  /// Maps a point of the original graph onto `graph`.
  Point map(const Point& original) const;
  /// Inverse of map: a point of `graph` on the original graph.
  Point unmap(const MetricGraph& original, const Point& split) const;

  // Per original edge: ordered cut offsets and the pieces between them.
  std::vector<std::vector<double>> cuts;
  std::vector<std::vector<EdgeId>> pieces;
};

/// Splits at x. A vertex point returns the graph unchanged.
SplitGraph split_at_point(const MetricGraph& g, const Point& x);
/// Splits at all given points (duplicates collapse onto one vertex).
SplitGraph split_at_points(const MetricGraph& g, std::span<const Point> xs);

enum class MetricKind {
  kPath,      ///< d: shortest polygon length
  kWeighted,  ///< ρ̃: line element c_e(s)^{-1/2} ds
};

/// Exact distances from one source point to every point of the graph.
/// Holds a reference to the graph, which must outlive the field.
class DistanceField {
 public:
  DistanceField(const MetricGraph& g, const Point& source, MetricKind kind = MetricKind::kPath);

  const Point& source() const noexcept { return source_; }
  double to_vertex(VertexId v) const { return dist_.at(index(v)); }
  /// Distance to the point at offset s on edge e (infinite if unreachable).
  double at(EdgeId e, double s) const;
  double at(const Point& p) const;

 private:
  double along(EdgeId e, double a, double b) const;

  const MetricGraph* graph_;
  Point source_;
  MetricKind kind_;
  std::vector<double> dist_;
};

/// Shortest-path distance; throws DisconnectedError if y is unreachable.
double distance(const MetricGraph& g, const Point& x, const Point& y);
/// Intrinsic distance of the weighted form; throws GraphError without weights.
double weighted_distance(const MetricGraph& g, const Point& x, const Point& y);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const noexcept { return hi - lo; }
};

/// Exact geometry of the open ball B_r(x).
struct BallGeometry {
  Point center;
  double radius = 0.0;
  /// Per edge (indexed by edge id): sorted disjoint covered sub-intervals.
  std::vector<std::vector<Interval>> covered;
  double volume = 0.0;

  std::span<const Interval> on_edge(EdgeId e) const { return covered.at(index(e)); }
};

/// Exact covered intervals via the clamp rule on each edge; throws
/// GraphError for negative r.
BallGeometry ball_geometry(const MetricGraph& g, const Point& x, double r);
BallGeometry ball_geometry(const DistanceField& field, const MetricGraph& g, double r);

/// A ball covering the whole graph (every edge fully covered).
BallGeometry whole_graph_ball(const MetricGraph& g);

enum class DoublingBound {
  kLocalLemma,    ///< single branch vertex in B_2r, star-like B_r: bound d_v/2 + 1
  kUniformLocal,  ///< r < ℓ/4: bound c_D
  kCovering,      ///< covering chain: bound c_D^{8r/ℓ'}
};

struct DoublingRow {
  Point center;
  double radius = 0.0;
  double volume_r = 0.0;
  double volume_2r = 0.0;
  double ratio = 0.0;
  double bound = 0.0;
  DoublingBound bound_kind = DoublingBound::kCovering;
  std::size_t branch_vertices = 0;  // vertices of degree > 2 in the closed ball of radius 2r
  bool star_like = false;           // m(B_r) equals the infinite-star value
  bool pass = false;
};

struct DoublingScan {
  std::vector<DoublingRow> rows;
  double max_ratio = 0.0;
  std::size_t violations = 0;

  void write_csv(std::ostream& out, const MetricGraph& g) const;
};

/// m(B_2r)/m(B_r) for every (center, radius) pair, with the strongest bound
/// whose hypothesis holds for that row.
DoublingScan doubling_scan(const MetricGraph& g, std::span<const Point> centers, std::span<const double> radii);

struct Diameter {
  double value = 0.0;
  bool truncated = false;  ///< graph stands in for an infinite one
};

/// Exact sup of d(x, y) over all points, from all-pairs vertex distances and
/// a closed-form maximization over each pair of edges.
Diameter diameter(const MetricGraph& g);

}  // namespace qglab
