#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

namespace qglab::tools {

/// Compact JSON with every floating-point value printed by format_number
/// (12 significant digits). Non-finite values become the strings "nan",
/// "inf" and "-inf". Object keys keep nlohmann's sorted order, so equal
/// documents always serialize to equal bytes.
std::string json_line(const nlohmann::json& value);

void write_json_line(std::ostream& out, const nlohmann::json& value);

}  // namespace qglab::tools
