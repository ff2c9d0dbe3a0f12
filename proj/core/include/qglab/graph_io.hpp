#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "qglab/graph.hpp"

namespace qglab {

/// Graph JSON:
///   {"vertices":[int], "edges":[{"id":int,"i":int,"j":int,"len":float,
///    "weight":{"breaks":[float],"vals":[float]}}], "meta":{...}}
/// Vertex and edge ids are arbitrary integers; they become the graph labels.
/// Λ is read from meta["lambda"] when present.
nlohmann::json graph_to_json(const MetricGraph& g);
MetricGraph graph_from_json(const nlohmann::json& doc);

/// Serialized text with lengths written at 17 significant digits.
std::string dump_graph(const MetricGraph& g, int indent = -1);
MetricGraph parse_graph(const std::string& text);

MetricGraph load_graph(const std::string& path);
void save_graph(const MetricGraph& g, const std::string& path);

}  // namespace qglab
