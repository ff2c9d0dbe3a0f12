#include "qglab/generators.hpp"

#include <cmath>
#include <random>

namespace qglab {

namespace {

void require_positive(double length, const char* what) {
  if (!std::isfinite(length) || length <= 0.0) {
    throw GraphError(std::string(what) + " must be positive and finite");
  }
}

}  // namespace

MetricGraph gen_star(int ray_count, double ray_length, const std::optional<StarCore>& core) {
  if (ray_count < 1) throw GraphError("ray_count must be >= 1");
  require_positive(ray_length, "ray_length");

  std::vector<Edge> edges;
  std::size_t core_vertices = 1;
  if (core) {
    if (core->vertex_count == 0) throw GraphError("star core needs at least one vertex");
    core_vertices = core->vertex_count;
    for (const Edge& e : core->edges) {
      require_positive(e.length, "core edge length");
      edges.push_back(e);
    }
  }
  std::size_t next = core_vertices;
  for (int k = 0; k < ray_count; ++k) {
    const VertexId anchor = vertex_at(static_cast<std::size_t>(k) % core_vertices);
    edges.push_back(Edge{anchor, vertex_at(next++), ray_length, std::nullopt});
  }
  nlohmann::json tips = nlohmann::json::array();
  for (std::size_t v = core_vertices; v < next; ++v) tips.push_back(v);
  MetricGraph g(next, std::move(edges));
  g.set_meta({{"generator", "star"},
              {"rays", ray_count},
              {"ray_length", ray_length},
              {"core_vertices", core_vertices},
              {"boundary", std::move(tips)},
              {"truncated", true}});
  return g;
}

MetricGraph gen_lattice(int dimension, int side, const LatticeLengths& lengths) {
  if (dimension != 1 && dimension != 2) throw GraphError("lattice dimension must be 1 or 2");
  if (side < 2) throw GraphError("lattice side must be >= 2");
  if (lengths.lo <= 0.0 || lengths.hi < lengths.lo) throw GraphError("lattice lengths need 0 < lo <= hi");

  std::mt19937_64 rng(lengths.seed);
  std::uniform_real_distribution<double> sample(lengths.lo, lengths.hi);
  auto next_length = [&] { return lengths.lo == lengths.hi ? lengths.lo : sample(rng); };

  const std::size_t n = static_cast<std::size_t>(side) + 1;
  const std::size_t vertex_count = dimension == 1 ? n : n * n;
  std::vector<Edge> edges;
  nlohmann::json coords = nlohmann::json::array();
  if (dimension == 1) {
    for (std::size_t x = 0; x < n; ++x) coords.push_back({x});
    for (std::size_t x = 0; x + 1 < n; ++x) {
      edges.push_back(Edge{vertex_at(x), vertex_at(x + 1), next_length(), std::nullopt});
    }
  } else {
    auto id = [n](std::size_t x, std::size_t y) { return vertex_at(y * n + x); };
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t x = 0; x < n; ++x) coords.push_back({x, y});
    }
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t x = 0; x < n; ++x) {
        if (x + 1 < n) edges.push_back(Edge{id(x, y), id(x + 1, y), next_length(), std::nullopt});
        if (y + 1 < n) edges.push_back(Edge{id(x, y), id(x, y + 1), next_length(), std::nullopt});
      }
    }
  }
  nlohmann::json boundary = nlohmann::json::array();
  if (dimension == 1) {
    boundary = {0, n - 1};
  } else {
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t x = 0; x < n; ++x) {
        if (x == 0 || y == 0 || x + 1 == n || y + 1 == n) boundary.push_back(y * n + x);
      }
    }
  }
  MetricGraph g(vertex_count, std::move(edges));
  g.set_meta({{"generator", "lattice"},
              {"dimension", dimension},
              {"side", side},
              {"length_range", {lengths.lo, lengths.hi}},
              {"seed", lengths.seed},
              {"coords", std::move(coords)},
              {"boundary", std::move(boundary)},
              {"truncated", true}});
  return g;
}

MetricGraph gen_tree(int branching, int depth, double edge_length) {
  if (branching < 2) throw GraphError("tree branching must be >= 2");
  if (depth < 0) throw GraphError("tree depth must be >= 0");
  require_positive(edge_length, "edge_length");

  std::vector<Edge> edges;
  nlohmann::json levels = nlohmann::json::array({0});
  std::size_t level_begin = 0;
  std::size_t level_end = 1;
  std::size_t next = 1;
  for (int d = 1; d <= depth; ++d) {
    for (std::size_t parent = level_begin; parent < level_end; ++parent) {
      for (int c = 0; c < branching; ++c) {
        edges.push_back(Edge{vertex_at(parent), vertex_at(next++), edge_length, std::nullopt});
        levels.push_back(d);
      }
    }
    level_begin = level_end;
    level_end = next;
  }
  nlohmann::json leaves = nlohmann::json::array();
  for (std::size_t v = level_begin; v < level_end; ++v) leaves.push_back(v);
  MetricGraph g(next, std::move(edges));
  g.set_meta({{"generator", "tree"},
              {"branching", branching},
              {"depth", depth},
              {"edge_length", edge_length},
              {"vertex_depth", std::move(levels)},
              {"boundary", std::move(leaves)},
              {"truncated", true}});
  return g;
}

Point Subdivision::map(const MetricGraph& original, const Point& p) const {
  const Point q = canonical(original, p);
  if (q.is_vertex()) return q;
  const auto& parts = pieces.at(index(q.edge()));
  const double step = piece_length.at(index(q.edge()));
  auto k = static_cast<std::size_t>(std::floor(q.offset() / step));
  if (k >= parts.size()) k = parts.size() - 1;
  return canonical(graph, Point::on_edge(parts[k], q.offset() - static_cast<double>(k) * step));
}

Subdivision subdivide_long_edges(const MetricGraph& g, double cap) {
  if (!(cap > 0.0)) throw GraphError("subdivision cap must be positive");
  Subdivision out;
  out.pieces.resize(g.edge_count());
  out.piece_length.resize(g.edge_count());

  std::vector<Edge> edges;
  std::size_t next = g.vertex_count();
  for (std::size_t k = 0; k < g.edge_count(); ++k) {
    const Edge& e = g.edges()[k];
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(e.length / cap)));
    const double step = e.length / static_cast<double>(n);
    out.piece_length[k] = step;
    VertexId prev = e.from;
    for (std::size_t j = 0; j < n; ++j) {
      const VertexId to = j + 1 == n ? e.to : vertex_at(next++);
      std::optional<WeightProfile> w;
      if (e.weight) {
        const double a = static_cast<double>(j) * step;
        const double b = j + 1 == n ? e.length : static_cast<double>(j + 1) * step;
        w = e.weight->slice(a, b);
      }
      const double len = j + 1 == n ? e.length - static_cast<double>(n - 1) * step : step;
      out.pieces[k].push_back(edge_at(edges.size()));
      edges.push_back(Edge{prev, to, len, std::move(w)});
      prev = to;
    }
  }
  out.graph = MetricGraph(next, std::move(edges), g.weight_bound());
  nlohmann::json meta = g.meta();
  meta["subdivided_cap"] = cap;
  out.graph.set_meta(std::move(meta));
  return out;
}

}  // namespace qglab
