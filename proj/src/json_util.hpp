#pragma once

// Small helpers for reading config files with field-naming errors.

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <json.hpp>

#include "signalbench/errors.hpp"

namespace signalbench::detail {

inline const nlohmann::json& field(const nlohmann::json& j, const std::string& key,
                                   const std::string& ctx) {
  if (!j.is_object()) throw ConfigError(ctx + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(ctx + "." + key + ": missing field");
  return *it;
}

inline double number(const nlohmann::json& j, const std::string& key, const std::string& ctx) {
  const auto& v = field(j, key, ctx);
  if (!v.is_number()) throw ConfigError(ctx + "." + key + ": expected a number");
  return v.get<double>();
}

inline double number_or(const nlohmann::json& j, const std::string& key, double fallback,
                        const std::string& ctx) {
  if (!j.contains(key)) return fallback;
  return number(j, key, ctx);
}

inline int integer(const nlohmann::json& j, const std::string& key, const std::string& ctx) {
  const auto& v = field(j, key, ctx);
  if (!v.is_number_integer()) throw ConfigError(ctx + "." + key + ": expected an integer");
  return v.get<int>();
}

inline std::string text(const nlohmann::json& j, const std::string& key, const std::string& ctx) {
  const auto& v = field(j, key, ctx);
  if (!v.is_string()) throw ConfigError(ctx + "." + key + ": expected a string");
  return v.get<std::string>();
}

inline void only_keys(const nlohmann::json& j, std::initializer_list<const char*> keys,
                      const std::string& ctx) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) throw ConfigError(ctx + "." + it.key() + ": unknown field");
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace signalbench::detail
