#pragma once

#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "vt/error.hpp"

namespace vt::detail {

using nlohmann::json;

inline json parse_json(std::string_view text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError("json", where + ": invalid JSON: " + e.what());
  }
}

// Rejects keys outside `required` + `optional` and missing required keys.
inline void check_keys(const json& obj, std::initializer_list<std::string_view> required,
                       std::initializer_list<std::string_view> optional, const std::string& where) {
  if (!obj.is_object()) throw FormatError("schema", where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto k : required) known = known || key == k;
    for (auto k : optional) known = known || key == k;
    if (!known) throw FormatError("schema", where + ": unknown key '" + key + "'");
  }
  for (auto k : required) {
    if (!obj.contains(std::string(k))) throw FormatError("schema", where + ": missing key '" + std::string(k) + "'");
  }
}

template <typename T>
T get_as(const json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw FormatError("schema", where + ": bad value for '" + key + "'");
  }
}

}  // namespace vt::detail
