#pragma once

// Line-delimited JSON records.

#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rankpromo/common.hpp"

namespace rankpromo {

using json = nlohmann::json;

inline std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::vector<json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline void write_jsonl(const std::string& path, const std::vector<json>& records) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write " + path);
  for (const auto& r : records) out << r.dump() << '\n';
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

/// Required field access with a validation error naming the field.
template <typename T>
T require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ValidationError(std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("field '") + key + "': " + e.what());
  }
}

template <typename T>
T optional_field(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace rankpromo
