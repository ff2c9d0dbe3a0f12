#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qglab/graph.hpp"

namespace qglab {

/// Finite core E_f of a generalized star: `vertex_count` vertices joined by
/// `edges`. Rays are attached round-robin to core vertices 0, 1, ...
struct StarCore {
  std::size_t vertex_count = 1;
  std::vector<Edge> edges;
};

/// Generalized star: `ray_count` pendant paths of length `ray_length`
/// attached to a single center (or to the given core). Rays stand in for
/// half-lines and the result is flagged as truncated.
MetricGraph gen_star(int ray_count, double ray_length, const std::optional<StarCore>& core = std::nullopt);

/// Edge lengths for lattice boxes: constant, or i.i.d. uniform in [lo, hi].
struct LatticeLengths {
  double lo = 1.0;
  double hi = 1.0;
  std::uint64_t seed = 0;

  static LatticeLengths unit() { return {}; }
  static LatticeLengths uniform(double lo, double hi, std::uint64_t seed) { return {lo, hi, seed}; }
};

/// Box [0, side]^dimension of Z^d, d in {1, 2}. Vertex (x, y) has id
/// y * (side + 1) + x; coordinates are stored in meta["coords"].
MetricGraph gen_lattice(int dimension, int side, const LatticeLengths& lengths = LatticeLengths::unit());

/// Rooted b-ary tree of the given depth; root is vertex 0, ids in BFS order.
MetricGraph gen_tree(int branching, int depth, double edge_length);

/// Result of subdividing: the new graph plus, for each original edge, its
/// pieces in order from i(e) to j(e). Original vertex ids are preserved.
struct Subdivision {
  MetricGraph graph;
  std::vector<std::vector<EdgeId>> pieces;
  std::vector<double> piece_length;

  /// Maps a point of the original graph onto the subdivided graph.
  Point map(const MetricGraph& original, const Point& p) const;
};

/// Splits every edge longer than `cap` into ceil(l/cap) equal pieces joined
/// by new degree-2 vertices. Distances between original points are preserved.
Subdivision subdivide_long_edges(const MetricGraph& g, double cap);

}  // namespace qglab
