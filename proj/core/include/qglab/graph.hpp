#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace qglab {

/// Opaque vertex handle. Values are dense indices into the owning graph.
enum class VertexId : std::uint32_t {};
/// Opaque edge handle. Values are dense indices into the owning graph.
enum class EdgeId : std::uint32_t {};

constexpr std::size_t index(VertexId v) noexcept { return static_cast<std::size_t>(v); }
constexpr std::size_t index(EdgeId e) noexcept { return static_cast<std::size_t>(e); }
constexpr VertexId vertex_at(std::size_t i) noexcept { return static_cast<VertexId>(i); }
constexpr EdgeId edge_at(std::size_t i) noexcept { return static_cast<EdgeId>(i); }

/// Thrown for malformed inputs that cannot be represented at all
/// (out-of-range ids, offsets outside an edge, negative radii, ...).
class GraphError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Piecewise-constant coefficient c_e on one edge.
///
/// `breaks` has one more entry than `values`; piece k covers
/// [breaks[k], breaks[k+1]] and carries values[k].
struct WeightProfile {
  std::vector<double> breaks;
  std::vector<double> values;

  static WeightProfile constant(double length, double value);

  /// Exact integral of c over [a, b].
  double integral(double a, double b) const;
  /// Exact integral of c^{-1/2} over [a, b]; the weighted line element.
  double inverse_sqrt_integral(double a, double b) const;
  /// Restriction to [a, b], re-based so the result starts at 0.
  WeightProfile slice(double a, double b) const;
  double min_value() const;
  double max_value() const;
};

struct Edge {
  VertexId from;
  VertexId to;
  double length = 0.0;
  std::optional<WeightProfile> weight;

  VertexId other(VertexId v) const { return v == from ? to : from; }
};

/// Combinatorial graph with edge lengths: the geometry substrate.
///
/// A MetricGraph may be structurally invalid (self-loops, disconnected,
/// non-positive lengths); `validate` reports every violation. Algorithms
/// that need a metric assume a valid graph.
class MetricGraph {
 public:
  MetricGraph() = default;
  /// Throws GraphError if an edge references a vertex >= vertex_count.
  MetricGraph(std::size_t vertex_count, std::vector<Edge> edges, double weight_bound = 1.0);

  std::size_t vertex_count() const noexcept { return incident_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  const Edge& edge(EdgeId e) const { return edges_.at(index(e)); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const EdgeId> incident(VertexId v) const { return incident_.at(index(v)); }
  std::size_t degree(VertexId v) const { return incident_.at(index(v)).size(); }

  double length(EdgeId e) const { return edge(e).length; }
  double total_length() const noexcept;
  bool has_weights() const noexcept;
  /// The graph-level Λ >= 1 bounding every weight into [Λ^{-1}, Λ].
  double weight_bound() const noexcept { return weight_bound_; }

  /// External labels (JSON ids). Defaults to the dense index.
  std::int64_t vertex_label(VertexId v) const { return vertex_labels_.at(index(v)); }
  std::int64_t edge_label(EdgeId e) const { return edge_labels_.at(index(e)); }
  std::optional<VertexId> find_vertex(std::int64_t label) const;
  std::optional<EdgeId> find_edge(std::int64_t label) const;
  void set_labels(std::vector<std::int64_t> vertex_labels, std::vector<std::int64_t> edge_labels);

  /// Generator annotations (lattice coordinates, tree depth, truncation flag).
  /// Never consulted by the core algorithms except for the `truncated` flag.
  const nlohmann::json& meta() const noexcept { return meta_; }
  void set_meta(nlohmann::json meta) { meta_ = std::move(meta); }
  bool truncated() const;

 private:
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeId>> incident_;
  std::vector<std::int64_t> vertex_labels_;
  std::vector<std::int64_t> edge_labels_;
  double weight_bound_ = 1.0;
  nlohmann::json meta_ = nlohmann::json::object();
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const noexcept { return violations.empty(); }
};

/// Reports every violated standing assumption: self-loops, parallel edges,
/// non-positive or non-finite lengths, malformed or out-of-Λ weights,
/// disconnectedness.
ValidationReport validate(const MetricGraph& g);

/// Bounded-geometry parameters.
struct GeometryParams {
  std::size_t max_degree = 0;  // D
  double min_length = 0.0;     // ℓ
  double quarter_length = 0.0; // ℓ' = ℓ/4
  double doubling_constant = 0.0;  // c_D = 1 + D/2
  double local_dimension = 0.0;    // ν = log2(D+2) - 1
};

GeometryParams geometry_params(const MetricGraph& g);

/// A location on the graph: a vertex, or an interior point of an edge.
class Point {
 public:
  Point() = default;
  static Point at_vertex(VertexId v) { return Point(true, v, EdgeId{}, 0.0); }
  /// Not canonicalized; use `canonical` to map offsets 0 and l(e) to vertices.
  static Point on_edge(EdgeId e, double offset) { return Point(false, VertexId{}, e, offset); }

  bool is_vertex() const noexcept { return is_vertex_; }
  VertexId vertex() const noexcept { return vertex_; }
  EdgeId edge() const noexcept { return edge_; }
  double offset() const noexcept { return offset_; }

  friend bool operator==(const Point&, const Point&) = default;

 private:
  Point(bool is_vertex, VertexId v, EdgeId e, double s)
      : is_vertex_(is_vertex), vertex_(v), edge_(e), offset_(s) {}

  bool is_vertex_ = true;
  VertexId vertex_{};
  EdgeId edge_{};
  double offset_ = 0.0;
};

/// Canonical form: offsets 0 and l(e) become Vertex(i(e)) / Vertex(j(e)).
/// Throws GraphError for unknown ids or offsets outside [0, l(e)].
Point canonical(const MetricGraph& g, const Point& p);

/// Position of p seen from edge e: the offset along e, if p lies on the
/// closure of e.
std::optional<double> offset_on_edge(const MetricGraph& g, const Point& p, EdgeId e);

/// `v:<label>` or `e:<label>:<offset>`, using the graph's external labels.
Point parse_point(const MetricGraph& g, const std::string& literal);
std::string format_point(const MetricGraph& g, const Point& p);

}  // namespace qglab
