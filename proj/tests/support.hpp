#pragma once

#include <cmath>
#include <random>

#include "qglab/graph.hpp"

namespace support {

/// Edge joining a and b (either orientation).
inline qglab::EdgeId edge_between(const qglab::MetricGraph& g, qglab::VertexId a, qglab::VertexId b) {
  for (qglab::EdgeId e : g.incident(a)) {
    if (g.edge(e).other(a) == b) return e;
  }
  throw qglab::GraphError("vertices are not adjacent");
}

/// Lattice box of side n: the point at distance a from (x, y) along +x
/// (axis 0) or +y (axis 1), unit edge lengths assumed.
inline qglab::Point lattice_walk(const qglab::MetricGraph& g, int n, int x, int y, int axis, double a) {
  const auto id = [n](int i, int j) { return qglab::vertex_at(static_cast<std::size_t>(j * (n + 1) + i)); };
  const int k = static_cast<int>(std::floor(a));
  const double frac = a - k;
  const int x0 = axis == 0 ? x + k : x;
  const int y0 = axis == 0 ? y : y + k;
  if (frac == 0.0) return qglab::Point::at_vertex(id(x0, y0));
  const qglab::VertexId from = id(x0, y0);
  const qglab::VertexId to = axis == 0 ? id(x0 + 1, y0) : id(x0, y0 + 1);
  const qglab::EdgeId e = edge_between(g, from, to);
  return qglab::Point::on_edge(e, g.edge(e).from == from ? frac : 1.0 - frac);
}

/// Point on a path graph 0 - 1 - ... - n at coordinate s (unit edges).
inline qglab::Point path_point(const qglab::MetricGraph& g, double s) {
  const int k = static_cast<int>(std::floor(s));
  const double frac = s - k;
  if (frac == 0.0) return qglab::Point::at_vertex(qglab::vertex_at(static_cast<std::size_t>(k)));
  return qglab::Point::on_edge(edge_between(g, qglab::vertex_at(static_cast<std::size_t>(k)),
                                            qglab::vertex_at(static_cast<std::size_t>(k + 1))),
                               frac);
}

/// Uniform random point whose offset is a multiple of `grid`; vertices with
/// probability 1/5.
inline qglab::Point random_point(const qglab::MetricGraph& g, std::mt19937_64& rng, double grid = 1e-3) {
  std::uniform_int_distribution<std::size_t> pick_edge(0, g.edge_count() - 1);
  std::uniform_int_distribution<int> coin(0, 4);
  if (coin(rng) == 0) {
    std::uniform_int_distribution<std::size_t> pick_vertex(0, g.vertex_count() - 1);
    return qglab::Point::at_vertex(qglab::vertex_at(pick_vertex(rng)));
  }
  const qglab::EdgeId e = qglab::edge_at(pick_edge(rng));
  const auto cells = static_cast<long>(std::llround(g.edge(e).length / grid));
  std::uniform_int_distribution<long> pick(1, cells - 1);
  return qglab::Point::on_edge(e, static_cast<double>(pick(rng)) * grid);
}

}  // namespace support
