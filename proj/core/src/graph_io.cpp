#include "qglab/graph_io.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include "qglab/report.hpp"

namespace qglab {

namespace {

std::string number_list(const std::vector<double>& xs) {
  std::string out = "[";
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (k) out += ",";
    out += format_exact(xs[k]);
  }
  return out + "]";
}

}  // namespace

nlohmann::json graph_to_json(const MetricGraph& g) { return nlohmann::json::parse(dump_graph(g)); }

std::string dump_graph(const MetricGraph& g, int indent) {
  const std::string nl = indent >= 0 ? "\n" : "";
  const std::string pad = indent >= 0 ? std::string(static_cast<std::size_t>(indent), ' ') : "";
  std::ostringstream out;
  out << "{" << nl << pad << "\"vertices\":[";
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    if (v) out << ",";
    out << g.vertex_label(vertex_at(v));
  }
  out << "]," << nl << pad << "\"edges\":[";
  for (std::size_t k = 0; k < g.edge_count(); ++k) {
    const Edge& e = g.edges()[k];
    if (k) out << ",";
    out << nl << pad << pad << "{\"id\":" << g.edge_label(edge_at(k)) << ",\"i\":" << g.vertex_label(e.from)
        << ",\"j\":" << g.vertex_label(e.to) << ",\"len\":" << format_exact(e.length);
    if (e.weight) {
      out << ",\"weight\":{\"breaks\":" << number_list(e.weight->breaks)
          << ",\"vals\":" << number_list(e.weight->values) << "}";
    }
    out << "}";
  }
  nlohmann::json meta = g.meta().is_object() ? g.meta() : nlohmann::json::object();
  if (g.has_weights() || g.weight_bound() != 1.0) meta["lambda"] = g.weight_bound();
  out << nl << pad << "]," << nl << pad << "\"meta\":" << meta.dump() << nl << "}";
  return out.str();
}

MetricGraph graph_from_json(const nlohmann::json& doc) {
  try {
    std::unordered_map<std::int64_t, std::size_t> vertex_index;
    std::vector<std::int64_t> vertex_labels;
    for (const auto& v : doc.at("vertices")) {
      const auto label = v.get<std::int64_t>();
      if (!vertex_index.emplace(label, vertex_labels.size()).second) {
        throw GraphError("duplicate vertex id " + std::to_string(label));
      }
      vertex_labels.push_back(label);
    }
    std::vector<Edge> edges;
    std::vector<std::int64_t> edge_labels;
    for (const auto& e : doc.at("edges")) {
      const auto i = vertex_index.find(e.at("i").get<std::int64_t>());
      const auto j = vertex_index.find(e.at("j").get<std::int64_t>());
      if (i == vertex_index.end() || j == vertex_index.end()) throw GraphError("edge endpoint is not a vertex");
      Edge edge{vertex_at(i->second), vertex_at(j->second), e.at("len").get<double>(), std::nullopt};
      if (e.contains("weight") && !e.at("weight").is_null()) {
        WeightProfile w;
        w.breaks = e.at("weight").at("breaks").get<std::vector<double>>();
        w.values = e.at("weight").at("vals").get<std::vector<double>>();
        edge.weight = std::move(w);
      }
      edge_labels.push_back(e.contains("id") ? e.at("id").get<std::int64_t>()
                                             : static_cast<std::int64_t>(edge_labels.size()));
      edges.push_back(std::move(edge));
    }
    nlohmann::json meta = doc.value("meta", nlohmann::json::object());
    const double lambda = meta.is_object() ? meta.value("lambda", 1.0) : 1.0;
    MetricGraph g(vertex_labels.size(), std::move(edges), lambda);
    g.set_labels(std::move(vertex_labels), std::move(edge_labels));
    g.set_meta(std::move(meta));
    return g;
  } catch (const nlohmann::json::exception& ex) {
    throw GraphError(std::string("graph JSON: ") + ex.what());
  }
}

MetricGraph parse_graph(const std::string& text) {
  try {
    return graph_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& ex) {
    throw GraphError(std::string("graph JSON: ") + ex.what());
  }
}

MetricGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open graph file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_graph(buf.str());
}

void save_graph(const MetricGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw GraphError("cannot write graph file " + path);
  out << dump_graph(g, 2) << "\n";
}

}  // namespace qglab
