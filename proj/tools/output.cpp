#include "output.hpp"

#include <cmath>
#include <ostream>

#include "qglab/report.hpp"

namespace qglab::tools {

namespace {

void emit(std::string& out, const nlohmann::json& v) {
  switch (v.type()) {
    case nlohmann::json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) out += ',';
        first = false;
        out += nlohmann::json(key).dump();
        out += ':';
        emit(out, item);
      }
      out += '}';
      break;
    }
    case nlohmann::json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& item : v) {
        if (!first) out += ',';
        first = false;
        emit(out, item);
      }
      out += ']';
      break;
    }
    case nlohmann::json::value_t::number_float: {
      const double x = v.get<double>();
      out += std::isfinite(x) ? format_number(x) : nlohmann::json(format_number(x)).dump();
      break;
    }
    default:
      out += v.dump();
  }
}

}  // namespace

std::string json_line(const nlohmann::json& value) {
  std::string out;
  emit(out, value);
  return out;
}

void write_json_line(std::ostream& out, const nlohmann::json& value) { out << json_line(value) << '\n'; }

}  // namespace qglab::tools
