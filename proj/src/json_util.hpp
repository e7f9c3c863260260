#pragma once

// Internal JSON plumbing shared by the .cpp files. Not installed.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "deckgen/errors.hpp"
#include "deckgen/types.hpp"

namespace deckgen::detail {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

inline json parse_text(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw MalformedFile(where + ": " + e.what());
  }
}

inline json parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedFile("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), "'" + path + "'");
}

inline const json& require(const json& j, const char* field, const std::string& where) {
  if (!j.is_object() || !j.contains(field))
    throw SchemaViolation(where + ": missing field '" + field + "'");
  return j.at(field);
}

inline std::string require_string(const json& j, const char* field, const std::string& where) {
  const json& v = require(j, field, where);
  if (!v.is_string()) throw SchemaViolation(where + ": field '" + field + "' must be a string");
  return v.get<std::string>();
}

inline double require_number(const json& j, const char* field, const std::string& where) {
  const json& v = require(j, field, where);
  if (!v.is_number()) throw SchemaViolation(where + ": field '" + field + "' must be a number");
  return v.get<double>();
}

inline std::size_t require_index(const json& j, const char* field, const std::string& where) {
  const json& v = require(j, field, where);
  if (!v.is_number_unsigned())
    throw SchemaViolation(where + ": field '" + field + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

inline const json& require_array(const json& j, const char* field, const std::string& where) {
  const json& v = require(j, field, where);
  if (!v.is_array()) throw SchemaViolation(where + ": field '" + field + "' must be an array");
  return v;
}

inline BBox parse_bbox(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 4)
    throw SchemaViolation(where + ": bbox must be an array [x, y, w, h]");
  for (const auto& c : v)
    if (!c.is_number()) throw SchemaViolation(where + ": bbox components must be numbers");
  BBox b{v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>()};
  if (!bbox_valid(b)) throw SchemaViolation(where + ": bbox violates the unit-square invariants");
  return b;
}

inline ojson bbox_to_json(const BBox& b) { return ojson::array({b.x, b.y, b.w, b.h}); }

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw WriteFailure("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw WriteFailure("write to '" + path + "' failed");
}

inline std::string slurp_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedFile("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace deckgen::detail
