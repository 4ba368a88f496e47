#pragma once

// Canonical framework document:
//
//   { "root": "c",
//     "arguments": [ {"id": "c", "text": "...", "base_score": 0.5}, ... ],
//     "relations": [ {"source": "s1", "target": "c", "polarity": "support"}, ... ],
//     "strengths": { "df-quad": { "c": 0.575, ... } } }      // optional
//
// The same shape is used by the CLI, the HTTP service and the harness.

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "argllm/error.hpp"
#include "argllm/qbaf.hpp"
#include "argllm/semantics.hpp"

namespace argllm {

using Json = nlohmann::ordered_json;

namespace detail {
inline const Json& require_field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorCode::missing_field, "'" + std::string(key) + "' missing in " + where);
  return j.at(key);
}
inline std::string require_string(const Json& j, const char* key, const std::string& where) {
  const auto& v = require_field(j, key, where);
  if (!v.is_string()) throw Error(ErrorCode::parse_error, "'" + std::string(key) + "' must be a string in " + where);
  return v.get<std::string>();
}
}  // namespace detail

inline Json to_json(const Argument& a) {
  Json j;
  j["id"] = a.id.value;
  j["text"] = a.text;
  j["base_score"] = a.base_score ? Json(*a.base_score) : Json(nullptr);
  return j;
}

inline Json to_json(const Relation& r) {
  return Json{{"source", r.source.value}, {"target", r.target.value}, {"polarity", std::string(to_string(r.polarity))}};
}

inline Json to_json(const Qbaf& q) {
  Json j;
  j["root"] = q.root().value;
  j["arguments"] = Json::array();
  for (const auto& a : q.arguments()) j["arguments"].push_back(to_json(a));
  j["relations"] = Json::array();
  for (const auto& r : q.relations()) j["relations"].push_back(to_json(r));
  return j;
}

inline Json to_json(const StrengthMap& s) {
  Json j = Json::object();
  for (const auto& [id, v] : s.strengths) j[id.value] = v;
  return j;
}

/// Framework document with one strength table per semantics.
inline Json to_document(const Qbaf& q, const std::vector<StrengthMap>& strengths = {}) {
  Json j = to_json(q);
  if (!strengths.empty()) {
    j["strengths"] = Json::object();
    for (const auto& s : strengths) j["strengths"][s.semantics] = to_json(s);
  }
  return j;
}

inline Argument argument_from_json(const Json& j) {
  const std::string where = "argument";
  Argument a;
  a.id = detail::require_string(j, "id", where);
  if (j.contains("text")) {
    if (!j["text"].is_string()) throw Error(ErrorCode::parse_error, "'text' must be a string in argument");
    a.text = j["text"].get<std::string>();
  }
  if (j.contains("base_score") && !j["base_score"].is_null()) {
    if (!j["base_score"].is_number())
      throw Error(ErrorCode::parse_error, "'base_score' must be a number in argument '" + a.id.value + "'");
    a.base_score = j["base_score"].get<double>();
  }
  return a;
}

inline Relation relation_from_json(const Json& j) {
  const std::string where = "relation";
  Relation r;
  r.source = detail::require_string(j, "source", where);
  r.target = detail::require_string(j, "target", where);
  auto pol = parse_polarity(detail::require_string(j, "polarity", where));
  if (!pol) throw Error(ErrorCode::parse_error, "polarity must be 'attack' or 'support'");
  r.polarity = *pol;
  return r;
}

/// Parses the document shape only; call validate() for tree well-formedness.
inline Qbaf qbaf_from_json(const Json& j) {
  const std::string where = "framework document";
  auto root = detail::require_string(j, "root", where);
  const auto& ja = detail::require_field(j, "arguments", where);
  if (!ja.is_array()) throw Error(ErrorCode::parse_error, "'arguments' must be an array");
  std::vector<Argument> args;
  for (const auto& a : ja) args.push_back(argument_from_json(a));
  std::vector<Relation> rels;
  if (j.contains("relations")) {
    if (!j["relations"].is_array()) throw Error(ErrorCode::parse_error, "'relations' must be an array");
    for (const auto& r : j["relations"]) rels.push_back(relation_from_json(r));
  }
  return Qbaf(std::move(root), std::move(args), std::move(rels));
}

inline Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::parse_error, origin + ": " + e.what());
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::precondition, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::precondition, "cannot write '" + path + "'");
  out << content;
}

inline Qbaf load_qbaf(const std::string& path) { return qbaf_from_json(parse_json_text(read_text_file(path), path)); }

}  // namespace argllm
