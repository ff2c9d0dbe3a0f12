#include "qglab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>

#include "qglab/report.hpp"

namespace qglab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::int64_t next_label(std::int64_t current_max) { return current_max + 1; }

}  // namespace

Point SplitGraph::map(const Point& original) const {
  if (original.is_vertex()) return original;
  const std::size_t e = index(original.edge());
  const auto& c = cuts.at(e);
  const double s = original.offset();
  std::size_t k = static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), s) - c.begin());
  // s lies in piece k, which starts at c[k-1] (or 0).
  const double start = k == 0 ? 0.0 : c[k - 1];
  return canonical(graph, Point::on_edge(pieces.at(e).at(k), s - start));
}

Point SplitGraph::unmap(const MetricGraph& original, const Point& split) const {
  const Point p = canonical(graph, split);
  if (p.is_vertex()) {
    if (index(p.vertex()) < original.vertex_count()) return p;
  }
  const EdgeId se = p.is_vertex() ? graph.incident(p.vertex()).front() : p.edge();
  const double local = p.is_vertex() ? (graph.edge(se).from == p.vertex() ? 0.0 : graph.edge(se).length) : p.offset();
  for (std::size_t e = 0; e < pieces.size(); ++e) {
    const auto& parts = pieces[e];
    for (std::size_t k = 0; k < parts.size(); ++k) {
      if (parts[k] != se) continue;
      const double start = k == 0 ? 0.0 : cuts[e][k - 1];
      return canonical(original, Point::on_edge(edge_at(e), start + local));
    }
  }
  throw GraphError("point does not belong to the split graph");
}

SplitGraph split_at_points(const MetricGraph& g, std::span<const Point> xs) {
  SplitGraph out;
  out.cuts.resize(g.edge_count());
  out.pieces.resize(g.edge_count());
  std::vector<Point> canon;
  canon.reserve(xs.size());
  for (const Point& x : xs) {
    canon.push_back(canonical(g, x));
    if (!canon.back().is_vertex()) out.cuts[index(x.edge())].push_back(x.offset());
  }
  for (auto& c : out.cuts) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }

  std::vector<Edge> edges(g.edges().begin(), g.edges().end());
  std::vector<std::int64_t> vlabels;
  std::vector<std::int64_t> elabels;
  std::int64_t vmax = -1;
  std::int64_t emax = -1;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    vlabels.push_back(g.vertex_label(vertex_at(v)));
    vmax = std::max(vmax, vlabels.back());
  }
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    elabels.push_back(g.edge_label(edge_at(e)));
    emax = std::max(emax, elabels.back());
  }

  // cut vertex ids per edge, to resolve split_vertices afterwards
  std::vector<std::vector<VertexId>> cut_vertex(g.edge_count());
  std::size_t next_vertex = g.vertex_count();
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const auto& c = out.cuts[e];
    out.pieces[e].push_back(edge_at(e));
    if (c.empty()) continue;
    const Edge original = g.edges()[e];
    double start = 0.0;
    VertexId prev = original.from;
    for (std::size_t k = 0; k <= c.size(); ++k) {
      const double stop = k < c.size() ? c[k] : original.length;
      VertexId to = original.to;
      if (k < c.size()) {
        to = vertex_at(next_vertex++);
        vmax = next_label(vmax);
        vlabels.push_back(vmax);
        cut_vertex[e].push_back(to);
      }
      std::optional<WeightProfile> w;
      if (original.weight) w = original.weight->slice(start, stop);
      Edge piece{prev, to, k < c.size() ? stop - start : original.length - start, std::move(w)};
      if (k == 0) {
        edges[e] = std::move(piece);
      } else {
        out.pieces[e].push_back(edge_at(edges.size()));
        edges.push_back(std::move(piece));
        emax = next_label(emax);
        elabels.push_back(emax);
      }
      start = stop;
      prev = to;
    }
  }
  out.graph = MetricGraph(next_vertex, std::move(edges), g.weight_bound());
  out.graph.set_labels(std::move(vlabels), std::move(elabels));
  out.graph.set_meta(g.meta());

  for (const Point& x : canon) {
    if (x.is_vertex()) {
      out.split_vertices.push_back(x.vertex());
    } else {
      const auto& c = out.cuts[index(x.edge())];
      const auto k = static_cast<std::size_t>(std::lower_bound(c.begin(), c.end(), x.offset()) - c.begin());
      out.split_vertices.push_back(cut_vertex[index(x.edge())][k]);
    }
  }
  return out;
}

SplitGraph split_at_point(const MetricGraph& g, const Point& x) {
  return split_at_points(g, std::span<const Point>(&x, 1));
}

DistanceField::DistanceField(const MetricGraph& g, const Point& source, MetricKind kind)
    : graph_(&g), source_(canonical(g, source)), kind_(kind), dist_(g.vertex_count(), kInf) {
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  auto relax = [&](VertexId v, double d) {
    if (d < dist_[index(v)]) {
      dist_[index(v)] = d;
      queue.emplace(d, index(v));
    }
  };
  if (source_.is_vertex()) {
    relax(source_.vertex(), 0.0);
  } else {
    const Edge& e = g.edge(source_.edge());
    relax(e.from, along(source_.edge(), 0.0, source_.offset()));
    relax(e.to, along(source_.edge(), source_.offset(), e.length));
  }
  while (!queue.empty()) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (d > dist_[v]) continue;
    for (EdgeId e : g.incident(vertex_at(v))) {
      const Edge& edge = g.edge(e);
      relax(edge.other(vertex_at(v)), d + along(e, 0.0, edge.length));
    }
  }
}

double DistanceField::along(EdgeId e, double a, double b) const {
  if (kind_ == MetricKind::kPath) return b - a;
  const Edge& edge = graph_->edge(e);
  return edge.weight ? edge.weight->inverse_sqrt_integral(a, b) : b - a;
}

double DistanceField::at(EdgeId e, double s) const {
  const Edge& edge = graph_->edge(e);
  double d = std::min(dist_[index(edge.from)] + along(e, 0.0, s), dist_[index(edge.to)] + along(e, s, edge.length));
  if (!source_.is_vertex() && source_.edge() == e) {
    const double s0 = source_.offset();
    d = std::min(d, s < s0 ? along(e, s, s0) : along(e, s0, s));
  }
  return d;
}

double DistanceField::at(const Point& p) const {
  const Point q = canonical(*graph_, p);
  if (q.is_vertex()) return dist_[index(q.vertex())];
  return at(q.edge(), q.offset());
}

double distance(const MetricGraph& g, const Point& x, const Point& y) {
  const double d = DistanceField(g, x).at(y);
  if (!std::isfinite(d)) throw DisconnectedError("points lie in different components; distance undefined");
  return d;
}

double weighted_distance(const MetricGraph& g, const Point& x, const Point& y) {
  if (!g.has_weights()) throw GraphError("weighted_distance requires edge weights");
  const double d = DistanceField(g, x, MetricKind::kWeighted).at(y);
  if (!std::isfinite(d)) throw DisconnectedError("points lie in different components; distance undefined");
  return d;
}

BallGeometry ball_geometry(const DistanceField& field, const MetricGraph& g, double r) {
  if (!(r >= 0.0)) throw GraphError("ball radius must be non-negative");
  BallGeometry ball;
  ball.center = field.source();
  ball.radius = r;
  ball.covered.resize(g.edge_count());
  for (std::size_t k = 0; k < g.edge_count(); ++k) {
    const EdgeId e = edge_at(k);
    const Edge& edge = g.edge(e);
    const double l = edge.length;
    std::vector<Interval> parts;
    const double a = std::clamp(r - field.to_vertex(edge.from), 0.0, l);
    const double b = std::clamp(r - field.to_vertex(edge.to), 0.0, l);
    if (a > 0.0) parts.push_back({0.0, a});
    if (b > 0.0) parts.push_back({l - b, l});
    const Point& c = field.source();
    if (!c.is_vertex() && c.edge() == e && r > 0.0) {
      parts.push_back({std::max(0.0, c.offset() - r), std::min(l, c.offset() + r)});
    }
    std::sort(parts.begin(), parts.end(), [](const Interval& p, const Interval& q) { return p.lo < q.lo; });
    auto& merged = ball.covered[k];
    for (const Interval& p : parts) {
      if (!merged.empty() && p.lo <= merged.back().hi) {
        merged.back().hi = std::max(merged.back().hi, p.hi);
      } else {
        merged.push_back(p);
      }
    }
    for (const Interval& p : merged) ball.volume += p.length();
  }
  return ball;
}

BallGeometry ball_geometry(const MetricGraph& g, const Point& x, double r) {
  if (!(r >= 0.0)) throw GraphError("ball radius must be non-negative");
  return ball_geometry(DistanceField(g, x), g, r);
}

BallGeometry whole_graph_ball(const MetricGraph& g) {
  BallGeometry ball;
  ball.center = Point::at_vertex(vertex_at(0));
  ball.radius = kInf;
  ball.covered.resize(g.edge_count());
  for (std::size_t k = 0; k < g.edge_count(); ++k) {
    ball.covered[k].push_back({0.0, g.edges()[k].length});
    ball.volume += g.edges()[k].length;
  }
  return ball;
}

DoublingScan doubling_scan(const MetricGraph& g, std::span<const Point> centers, std::span<const double> radii) {
  const GeometryParams params = geometry_params(g);
  DoublingScan scan;
  for (const Point& x : centers) {
    const DistanceField field(g, x);
    for (double r : radii) {
      if (!(r > 0.0)) throw GraphError("doubling radii must be positive");
      DoublingRow row;
      row.center = field.source();
      row.radius = r;
      row.volume_r = ball_geometry(field, g, r).volume;
      row.volume_2r = ball_geometry(field, g, 2.0 * r).volume;
      row.ratio = row.volume_2r / row.volume_r;

      std::size_t branch_degree = 2;
      double branch_distance = kInf;
      for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        const std::size_t dv = g.degree(vertex_at(v));
        if (dv > 2 && field.to_vertex(vertex_at(v)) <= 2.0 * r) {
          ++row.branch_vertices;
          branch_degree = dv;
          branch_distance = field.to_vertex(vertex_at(v));
        }
      }
      // The lemma's argument also needs B_r to look like a ball in an
      // infinite star: a dangling end or a short cycle inside B_r lowers
      // m(B_r) below that and the bound can fail (ratio up to 3 at d_v = 3).
      const double star_volume =
          branch_distance < r ? 2.0 * branch_distance + static_cast<double>(branch_degree) * (r - branch_distance)
                              : 2.0 * r;
      row.star_like = row.volume_r >= star_volume * (1.0 - 1e-12);
      if (row.branch_vertices <= 1 && row.star_like) {
        row.bound_kind = DoublingBound::kLocalLemma;
        row.bound = static_cast<double>(branch_degree) / 2.0 + 1.0;
      } else if (r < params.min_length / 4.0) {
        row.bound_kind = DoublingBound::kUniformLocal;
        row.bound = params.doubling_constant;
      } else {
        row.bound_kind = DoublingBound::kCovering;
        row.bound = std::pow(params.doubling_constant, 8.0 * r / params.quarter_length);
      }
      row.pass = row.ratio <= row.bound * (1.0 + 1e-12);
      scan.max_ratio = std::max(scan.max_ratio, row.ratio);
      if (!row.pass) ++scan.violations;
      scan.rows.push_back(row);
    }
  }
  return scan;
}

void DoublingScan::write_csv(std::ostream& out, const MetricGraph& g) const {
  out << "center,r,vol_r,vol_2r,ratio,bound,pass\n";
  for (const DoublingRow& row : rows) {
    out << format_point(g, row.center) << ',' << format_number(row.radius) << ',' << format_number(row.volume_r)
        << ',' << format_number(row.volume_2r) << ',' << format_number(row.ratio) << ','
        << format_number(row.bound) << ',' << (row.pass ? "true" : "false") << '\n';
  }
}

namespace {

// max over t in [0, lf] of min_k (c_k + s_k t): concave, so the maximum is
// at an endpoint or at a crossing of two of the lines.
double max_of_min_lines(std::span<const std::pair<double, double>> lines, double lo, double hi) {
  auto value = [&](double t) {
    double v = kInf;
    for (const auto& [c, s] : lines) v = std::min(v, c + s * t);
    return v;
  };
  double best = std::max(value(lo), value(hi));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      const double ds = lines[i].second - lines[j].second;
      if (ds == 0.0) continue;
      const double t = (lines[j].first - lines[i].first) / ds;
      if (t > lo && t < hi) best = std::max(best, value(t));
    }
  }
  return best;
}

}  // namespace

Diameter diameter(const MetricGraph& g) {
  const std::size_t n = g.vertex_count();
  std::vector<std::vector<double>> D(n);
  for (std::size_t v = 0; v < n; ++v) {
    const DistanceField field(g, Point::at_vertex(vertex_at(v)));
    D[v].resize(n);
    for (std::size_t w = 0; w < n; ++w) {
      D[v][w] = field.to_vertex(vertex_at(w));
      if (!std::isfinite(D[v][w])) throw DisconnectedError("diameter of a disconnected graph");
    }
  }
  Diameter out;
  out.truncated = g.truncated();
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t w = 0; w < n; ++w) out.value = std::max(out.value, D[v][w]);
  }
  for (std::size_t i = 0; i < g.edge_count(); ++i) {
    const Edge& e = g.edges()[i];
    const std::size_t a = index(e.from);
    const std::size_t b = index(e.to);
    const double le = e.length;
    out.value = std::max(out.value, 0.5 * (D[a][b] + le));
    for (std::size_t j = i + 1; j < g.edge_count(); ++j) {
      const Edge& f = g.edges()[j];
      const std::size_t c = index(f.from);
      const std::size_t d = index(f.to);
      const double lf = f.length;
      // A(t) = d(a, f(t)), B(t) = d(b, f(t)); each has one kink.
      std::vector<double> cuts{0.0, lf};
      for (double kink : {0.5 * (D[a][d] + lf - D[a][c]), 0.5 * (D[b][d] + lf - D[b][c])}) {
        if (kink > 0.0 && kink < lf) cuts.push_back(kink);
      }
      std::sort(cuts.begin(), cuts.end());
      for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
        // On this piece A and B are affine: pick the active branch at mid.
        const bool a_first = D[a][c] + mid <= D[a][d] + lf - mid;
        const bool b_first = D[b][c] + mid <= D[b][d] + lf - mid;
        const std::pair<double, double> A = a_first ? std::pair{D[a][c], 1.0} : std::pair{D[a][d] + lf, -1.0};
        const std::pair<double, double> B = b_first ? std::pair{D[b][c], 1.0} : std::pair{D[b][d] + lf, -1.0};
        // sup over the point on e: min((A+B+le)/2, le+A, le+B)
        const std::pair<double, double> lines[3] = {
            {0.5 * (A.first + B.first + le), 0.5 * (A.second + B.second)},
            {le + A.first, A.second},
            {le + B.first, B.second},
        };
        out.value = std::max(out.value, max_of_min_lines(lines, cuts[k], cuts[k + 1]));
      }
    }
  }
  return out;
}

}  // namespace qglab
