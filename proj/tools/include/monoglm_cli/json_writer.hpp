#pragma once

#include <json.hpp>

#include <string>

namespace monoglm::cli {

/// Serializes with floating point values at 17 significant digits and non-finite values as
/// null. Object keys keep insertion order when the input is an ordered_json.
std::string to_json_text(const nlohmann::ordered_json& value, int indent = 2);

} // namespace monoglm::cli
