#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qglab/graph.hpp"
#include "suite.hpp"

namespace qglab::tools {

/// Typed reads from one configuration table. Every read marks its key as
/// used; `finish` rejects the keys nobody asked for.
class Params {
 public:
  Params(nlohmann::json j, std::string where) : j_(std::move(j)), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected a table");
  }

  const std::string& where() const { return where_; }
  bool has(const std::string& key) const { return j_.contains(key); }

  double number(const std::string& key, double fallback) { return number_opt(key).value_or(fallback); }
  std::optional<double> number_opt(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    return as_number(j_[key], key);
  }
  double positive(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v > 0.0)) fail(key, "must be positive");
    return v;
  }
  /// Exponent in [1, inf]; accepts the string "inf".
  double exponent(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v >= 1.0)) fail(key, "must be >= 1");
    return v;
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    if (!j_[key].is_number_integer()) fail(key, "expected an integer");
    return j_[key].get<std::int64_t>();
  }
  std::size_t count(const std::string& key, std::size_t fallback, std::size_t max = 1'000'000) {
    const std::int64_t v = integer(key, static_cast<std::int64_t>(fallback));
    if (v < 0 || static_cast<std::uint64_t>(v) > max) fail(key, "out of range");
    return static_cast<std::size_t>(v);
  }
  bool boolean(const std::string& key, bool fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    if (!j_[key].is_boolean()) fail(key, "expected a boolean");
    return j_[key].get<bool>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    if (!j_[key].is_string()) fail(key, "expected a string");
    return j_[key].get<std::string>();
  }
  std::string choice(const std::string& key, const std::string& fallback, const std::vector<std::string>& allowed) {
    const std::string v = string(key, fallback);
    for (const std::string& a : allowed) {
      if (a == v) return v;
    }
    fail(key, "unknown value '" + v + "'");
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback = {}) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    if (!j_[key].is_array()) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : j_[key]) out.push_back(as_number(v, key));
    return out;
  }
  nlohmann::json raw(const std::string& key) {
    used_.insert(key);
    return j_.contains(key) ? j_[key] : nlohmann::json();
  }
  nlohmann::json table(const std::string& key) {
    used_.insert(key);
    return j_.contains(key) ? j_[key] : nlohmann::json::object();
  }

  Point point(const MetricGraph& g, const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) fail(key, "required point is missing");
    return parse_literal(g, j_[key], key);
  }
  std::optional<Point> point_opt(const MetricGraph& g, const std::string& key) {
    if (!j_.contains(key)) {
      used_.insert(key);
      return std::nullopt;
    }
    return point(g, key);
  }
  std::vector<Point> points(const MetricGraph& g, const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) return {};
    if (!j_[key].is_array()) fail(key, "expected an array of point literals");
    std::vector<Point> out;
    for (const auto& v : j_[key]) out.push_back(parse_literal(g, v, key));
    return out;
  }
  std::vector<std::pair<Point, Point>> pairs(const MetricGraph& g, const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) return {};
    if (!j_[key].is_array()) fail(key, "expected an array of [from, to] pairs");
    std::vector<std::pair<Point, Point>> out;
    for (const auto& v : j_[key]) {
      if (!v.is_array() || v.size() != 2) fail(key, "expected an array of [from, to] pairs");
      out.emplace_back(parse_literal(g, v[0], key), parse_literal(g, v[1], key));
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    throw ConfigError(where_ + "." + key + ": " + why);
  }

 private:
  double as_number(const nlohmann::json& v, const std::string& key) const {
    if (v.is_number()) return v.get<double>();
    if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "+inf")) {
      return std::numeric_limits<double>::infinity();
    }
    fail(key, "expected a number");
  }
  Point parse_literal(const MetricGraph& g, const nlohmann::json& v, const std::string& key) const {
    if (!v.is_string()) fail(key, "expected a point literal string");
    try {
      return canonical(g, parse_point(g, v.get<std::string>()));
    } catch (const GraphError& e) {
      fail(key, e.what());
    }
  }

  nlohmann::json j_;
  std::string where_;
  std::set<std::string> used_;
};

}  // namespace qglab::tools
