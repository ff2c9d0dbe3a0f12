#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "qglab/generators.hpp"
#include "qglab/graph_io.hpp"
#include "qglab/report.hpp"
#include "params.hpp"
#include "suite.hpp"

namespace qglab::tools {

namespace {

nlohmann::json to_json(const toml::node& node) {
  if (const auto* table = node.as_table()) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [key, value] : *table) out[std::string(key.str())] = to_json(value);
    return out;
  }
  if (const auto* array = node.as_array()) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& value : *array) out.push_back(to_json(value));
    return out;
  }
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  if (const auto* v = node.as_string()) return v->get();
  // dates and times keep their TOML spelling
  std::ostringstream text;
  node.visit([&](const auto& v) { text << v; });
  return text.str();
}

int to_int(std::int64_t v, const std::string& what) {
  if (v < 0 || v > 1'000'000) throw ConfigError(what + ": out of range");
  return static_cast<int>(v);
}

}  // namespace

MetricGraph build_graph(const GraphSpec& spec) {
  try {
    if (spec.generator == "star") return gen_star(spec.rays, spec.ray_length);
    if (spec.generator == "lattice") {
      const LatticeLengths lengths = spec.length_lo == spec.length_hi && spec.length_lo == 1.0
                                         ? LatticeLengths::unit()
                                         : LatticeLengths::uniform(spec.length_lo, spec.length_hi, spec.length_seed);
      return gen_lattice(spec.dimension, spec.side, lengths);
    }
    if (spec.generator == "tree") return gen_tree(spec.branching, spec.depth, spec.edge_length);
    if (spec.generator == "file") return load_graph(spec.path);
  } catch (const GraphError& e) {
    throw ConfigError(std::string("graph: ") + e.what());
  }
  throw ConfigError("graph: unknown generator '" + spec.generator + "'");
}

SuiteConfig parse_suite_config(std::string_view toml_text, const std::string& base_dir) {
  nlohmann::json doc;
  try {
    doc = to_json(toml::parse(toml_text));
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "TOML parse error: " << e.description() << " at line " << e.source().begin.line;
    throw ConfigError(msg.str());
  }

  SuiteConfig cfg;
  cfg.hash = fnv1a_hex(doc.dump());
  Params top(doc, "config");
  cfg.name = top.string("name", cfg.name);
  if (cfg.name.empty() || cfg.name.find_first_of("/\\") != std::string::npos) {
    throw ConfigError("config.name must be a nonempty file-name stem");
  }
  const std::int64_t seed = top.integer("seed", 0);
  if (seed < 0) throw ConfigError("config.seed must be nonnegative");
  cfg.seed = static_cast<std::uint64_t>(seed);

  const nlohmann::json graph_json = top.table("graph");
  Params graph(graph_json, "graph");
  GraphSpec& gs = cfg.graph;
  gs.generator = graph.string("generator", gs.generator);
  gs.rays = to_int(graph.integer("rays", gs.rays), "graph.rays");
  gs.ray_length = graph.number("length", gs.ray_length);
  gs.dimension = to_int(graph.integer("dimension", gs.dimension), "graph.dimension");
  gs.side = to_int(graph.integer("side", gs.side), "graph.side");
  gs.length_lo = graph.number("length_lo", gs.length_lo);
  gs.length_hi = graph.number("length_hi", gs.length_hi);
  const std::int64_t length_seed = graph.integer("length_seed", 0);
  if (length_seed < 0) throw ConfigError("graph.length_seed must be nonnegative");
  gs.length_seed = static_cast<std::uint64_t>(length_seed);
  gs.branching = to_int(graph.integer("branching", gs.branching), "graph.branching");
  gs.depth = to_int(graph.integer("depth", gs.depth), "graph.depth");
  gs.edge_length = graph.number("edge_length", gs.edge_length);
  gs.path = graph.string("path", "");
  if (!gs.path.empty() && std::filesystem::path(gs.path).is_relative()) {
    gs.path = (std::filesystem::path(base_dir) / gs.path).string();
  }
  graph.finish();

  const nlohmann::json disc_json = top.table("discretization");
  Params disc(disc_json, "discretization");
  cfg.h = disc.number("h", cfg.h);
  cfg.dt = disc.number("dt", cfg.dt);
  cfg.theta = disc.number("theta", cfg.theta);
  cfg.margin_tolerance = disc.number("margin_tolerance", cfg.margin_tolerance);
  disc.finish();
  if (!(cfg.h > 0.0) || !(cfg.dt > 0.0)) throw ConfigError("discretization: h and dt must be positive");
  if (!(cfg.theta >= 0.5 && cfg.theta <= 1.0)) throw ConfigError("discretization.theta must lie in [0.5, 1]");
  if (!(cfg.margin_tolerance > 0.0)) throw ConfigError("discretization.margin_tolerance must be positive");

  const nlohmann::json out_json = top.table("output");
  Params output(out_json, "output");
  cfg.output_dir = output.string("dir", cfg.output_dir);
  output.finish();

  const nlohmann::json checks = top.table("check");
  if (!checks.is_array() && !(checks.is_object() && checks.empty())) {
    throw ConfigError("check: expected an array of tables ([[check]])");
  }
  std::set<std::string> names;
  for (std::size_t k = 0; checks.is_array() && k < checks.size(); ++k) {
    const nlohmann::json& c = checks[k];
    if (!c.is_object()) throw ConfigError("check[" + std::to_string(k) + "]: expected a table");
    CheckSpec spec;
    spec.params = c;
    if (!c.contains("kind") || !c["kind"].is_string()) {
      throw ConfigError("check[" + std::to_string(k) + "]: missing string 'kind'");
    }
    spec.kind = c["kind"].get<std::string>();
    spec.params.erase("kind");
    spec.name = spec.kind + "-" + std::to_string(k);
    if (c.contains("name")) {
      if (!c["name"].is_string()) throw ConfigError("check[" + std::to_string(k) + "].name: expected a string");
      spec.name = c["name"].get<std::string>();
      spec.params.erase("name");
    }
    if (c.contains("assert")) {
      if (!c["assert"].is_boolean()) throw ConfigError("check " + spec.name + ".assert: expected a boolean");
      spec.asserted = c["assert"].get<bool>();
      spec.params.erase("assert");
    }
    const auto& kinds = check_kinds();
    if (std::find(kinds.begin(), kinds.end(), spec.kind) == kinds.end()) {
      throw ConfigError("check " + spec.name + ": unknown kind '" + spec.kind + "'");
    }
    if (!names.insert(spec.name).second) throw ConfigError("duplicate check name '" + spec.name + "'");
    if (spec.name.find_first_of("/\\") != std::string::npos) {
      throw ConfigError("check name '" + spec.name + "' must not contain path separators");
    }
    cfg.checks.push_back(std::move(spec));
  }
  top.finish();
  return cfg;
}

SuiteConfig load_suite_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  const std::filesystem::path dir = std::filesystem::path(path).parent_path();
  return parse_suite_config(text.str(), dir.empty() ? "." : dir.string());
}

}  // namespace qglab::tools
