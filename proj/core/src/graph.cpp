#include "qglab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <utility>

#include "qglab/report.hpp"

namespace qglab {

WeightProfile WeightProfile::constant(double length, double value) {
  return WeightProfile{{0.0, length}, {value}};
}

namespace {

template <typename F>
double piecewise_integral(const WeightProfile& w, double a, double b, F&& f) {
  if (b <= a) return 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < w.values.size(); ++k) {
    const double lo = std::max(a, w.breaks[k]);
    const double hi = std::min(b, w.breaks[k + 1]);
    if (hi > lo) total += (hi - lo) * f(w.values[k]);
  }
  return total;
}

}  // namespace

double WeightProfile::integral(double a, double b) const {
  return piecewise_integral(*this, a, b, [](double c) { return c; });
}

double WeightProfile::inverse_sqrt_integral(double a, double b) const {
  return piecewise_integral(*this, a, b, [](double c) { return 1.0 / std::sqrt(c); });
}

WeightProfile WeightProfile::slice(double a, double b) const {
  WeightProfile out;
  out.breaks.push_back(0.0);
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double lo = std::max(a, breaks[k]);
    const double hi = std::min(b, breaks[k + 1]);
    if (hi > lo) {
      out.values.push_back(values[k]);
      out.breaks.push_back(hi - a);
    }
  }
  if (out.values.empty()) throw GraphError("weight slice outside the profile");
  out.breaks.back() = b - a;
  return out;
}

double WeightProfile::min_value() const {
  return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end());
}

double WeightProfile::max_value() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

MetricGraph::MetricGraph(std::size_t vertex_count, std::vector<Edge> edges, double weight_bound)
    : edges_(std::move(edges)), incident_(vertex_count), weight_bound_(weight_bound) {
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const Edge& e = edges_[k];
    if (index(e.from) >= vertex_count || index(e.to) >= vertex_count) {
      throw GraphError("edge " + std::to_string(k) + " references an unknown vertex");
    }
    incident_[index(e.from)].push_back(edge_at(k));
    if (e.to != e.from) incident_[index(e.to)].push_back(edge_at(k));
  }
  vertex_labels_.resize(vertex_count);
  std::iota(vertex_labels_.begin(), vertex_labels_.end(), std::int64_t{0});
  edge_labels_.resize(edges_.size());
  std::iota(edge_labels_.begin(), edge_labels_.end(), std::int64_t{0});
}

double MetricGraph::total_length() const noexcept {
  double total = 0.0;
  for (const Edge& e : edges_) total += e.length;
  return total;
}

bool MetricGraph::has_weights() const noexcept {
  return std::any_of(edges_.begin(), edges_.end(), [](const Edge& e) { return e.weight.has_value(); });
}

std::optional<VertexId> MetricGraph::find_vertex(std::int64_t label) const {
  const auto it = std::find(vertex_labels_.begin(), vertex_labels_.end(), label);
  if (it == vertex_labels_.end()) return std::nullopt;
  return vertex_at(static_cast<std::size_t>(it - vertex_labels_.begin()));
}

std::optional<EdgeId> MetricGraph::find_edge(std::int64_t label) const {
  const auto it = std::find(edge_labels_.begin(), edge_labels_.end(), label);
  if (it == edge_labels_.end()) return std::nullopt;
  return edge_at(static_cast<std::size_t>(it - edge_labels_.begin()));
}

void MetricGraph::set_labels(std::vector<std::int64_t> vertex_labels,
                             std::vector<std::int64_t> edge_labels) {
  if (vertex_labels.size() != vertex_count() || edge_labels.size() != edge_count()) {
    throw GraphError("label count does not match graph size");
  }
  vertex_labels_ = std::move(vertex_labels);
  edge_labels_ = std::move(edge_labels);
}

bool MetricGraph::truncated() const {
  return meta_.is_object() && meta_.value("truncated", false);
}

ValidationReport validate(const MetricGraph& g) {
  ValidationReport report;
  auto& out = report.violations;
  if (g.vertex_count() == 0) {
    out.emplace_back("empty graph");
    return report;
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t k = 0; k < g.edge_count(); ++k) {
    const Edge& e = g.edges()[k];
    const std::string name = "edge " + std::to_string(g.edge_label(edge_at(k)));
    if (e.from == e.to) out.push_back("self-loop at " + name);
    const std::size_t a = index(e.from), b = index(e.to);
    const std::pair key{std::min(a, b), std::max(a, b)};
    if (e.from != e.to && !seen.insert(key).second) out.push_back("parallel edge at " + name);
    if (!std::isfinite(e.length) || e.length <= 0.0) {
      out.push_back("non-positive or non-finite length at " + name);
    }
    if (e.weight) {
      const WeightProfile& w = *e.weight;
      const double tol = 1e-12 * std::max(1.0, e.length);
      bool shape_ok = w.breaks.size() == w.values.size() + 1 && !w.values.empty();
      if (shape_ok) {
        shape_ok = std::abs(w.breaks.front()) <= tol && std::abs(w.breaks.back() - e.length) <= tol &&
                   std::is_sorted(w.breaks.begin(), w.breaks.end(), std::less_equal<>{});
      }
      if (!shape_ok) out.push_back("malformed weight breakpoints at " + name);
      const double lambda = g.weight_bound();
      for (double c : w.values) {
        if (!(c > 0.0) || c < 1.0 / lambda * (1 - 1e-12) || c > lambda * (1 + 1e-12)) {
          out.push_back("weight outside [1/Lambda, Lambda] at " + name);
          break;
        }
      }
    }
  }
  if (g.weight_bound() < 1.0) out.emplace_back("weight bound Lambda < 1");

  std::vector<bool> reached(g.vertex_count(), false);
  std::queue<VertexId> frontier;
  frontier.push(vertex_at(0));
  reached[0] = true;
  std::size_t count = 1;
  while (!frontier.empty()) {
    const VertexId v = frontier.front();
    frontier.pop();
    for (EdgeId e : g.incident(v)) {
      const VertexId w = g.edge(e).other(v);
      if (!reached[index(w)]) {
        reached[index(w)] = true;
        ++count;
        frontier.push(w);
      }
    }
  }
  if (count != g.vertex_count()) out.emplace_back("disconnected");
  return report;
}

GeometryParams geometry_params(const MetricGraph& g) {
  GeometryParams p;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    p.max_degree = std::max(p.max_degree, g.degree(vertex_at(v)));
  }
  p.min_length = std::numeric_limits<double>::infinity();
  for (const Edge& e : g.edges()) p.min_length = std::min(p.min_length, e.length);
  if (g.edge_count() == 0) p.min_length = 0.0;
  p.quarter_length = p.min_length / 4.0;
  const double D = static_cast<double>(p.max_degree);
  p.doubling_constant = 1.0 + D / 2.0;
  p.local_dimension = std::log(D + 2.0) / std::log(2.0) - 1.0;
  return p;
}

Point canonical(const MetricGraph& g, const Point& p) {
  if (p.is_vertex()) {
    if (index(p.vertex()) >= g.vertex_count()) throw GraphError("unknown vertex");
    return p;
  }
  if (index(p.edge()) >= g.edge_count()) throw GraphError("unknown edge");
  const Edge& e = g.edge(p.edge());
  const double s = p.offset();
  if (!(s >= 0.0 && s <= e.length)) throw GraphError("offset outside edge");
  if (s == 0.0) return Point::at_vertex(e.from);
  if (s == e.length) return Point::at_vertex(e.to);
  return p;
}

std::optional<double> offset_on_edge(const MetricGraph& g, const Point& p, EdgeId e) {
  const Edge& edge = g.edge(e);
  if (!p.is_vertex()) {
    if (p.edge() == e) return p.offset();
    return std::nullopt;
  }
  if (p.vertex() == edge.from) return 0.0;
  if (p.vertex() == edge.to) return edge.length;
  return std::nullopt;
}

Point parse_point(const MetricGraph& g, const std::string& literal) {
  auto fail = [&]() -> Point { throw GraphError("bad point literal '" + literal + "'"); };
  std::vector<std::string> parts;
  std::stringstream ss(literal);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  try {
    if (parts.size() == 2 && parts[0] == "v") {
      const auto v = g.find_vertex(std::stoll(parts[1]));
      if (!v) return fail();
      return Point::at_vertex(*v);
    }
    if (parts.size() == 3 && parts[0] == "e") {
      const auto e = g.find_edge(std::stoll(parts[1]));
      if (!e) return fail();
      return canonical(g, Point::on_edge(*e, std::stod(parts[2])));
    }
  } catch (const std::logic_error&) {
    return fail();
  }
  return fail();
}

std::string format_point(const MetricGraph& g, const Point& p) {
  if (p.is_vertex()) return "v:" + std::to_string(g.vertex_label(p.vertex()));
  return "e:" + std::to_string(g.edge_label(p.edge())) + ":" + format_number(p.offset());
}

}  // namespace qglab
