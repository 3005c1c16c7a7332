#pragma once

// JSON model files:
//   {"beta": r, "sigma2": r, "kappa": r,
//    "jumps": [{"type": "atom", "y": r, "w": r} | {"type": "exp", "c": r, "lambda": r}]}

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "bernstein.hpp"

namespace glsemi {

struct ModelParseError : std::runtime_error {
  ModelParseError(const std::string& what, int line, std::string field)
      : std::runtime_error(what), line(line), field(std::move(field)) {}
  int line;  // 0 when unknown
  std::string field;
};

namespace detail {

inline int line_of(const std::string& text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

// Line of the first occurrence of "key" at or after `from`; 0 if absent.
inline int line_of_key(const std::string& text, const std::string& key, std::size_t from = 0) {
  const auto pos = text.find('"' + key + '"', from);
  return pos == std::string::npos ? 0 : line_of(text, pos);
}

// Offset of the i-th element of the "jumps" array; npos if not found.
inline std::size_t jump_offset(const std::string& text, std::size_t i) {
  std::size_t pos = text.find("\"jumps\"");
  if (pos == std::string::npos) return pos;
  pos = text.find('[', pos);
  if (pos == std::string::npos) return pos;
  int depth = 0;
  std::size_t seen = 0;
  bool in_string = false;
  for (std::size_t k = pos + 1; k < text.size(); ++k) {
    const char c = text[k];
    if (in_string) {
      if (c == '\\') ++k;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    if (depth == 0 && !std::isspace(static_cast<unsigned char>(c)) && c != ',' && c != ']') {
      if (seen++ == i) return k;
    }
    if (c == '{' || c == '[') ++depth;
    if (c == '}' || c == ']') {
      if (depth == 0) return std::string::npos;
      --depth;
    }
  }
  return std::string::npos;
}

// A missing key is reported at the line where its object starts.
inline double number_field(const nlohmann::json& j, const std::string& key, const std::string& path,
                           const std::string& text, bool required, double fallback = 0,
                           std::size_t from = 0) {
  if (!j.contains(key)) {
    if (required)
      throw ModelParseError("missing field '" + path + key + "'", from ? line_of(text, from) : 0,
                            path + key);
    return fallback;
  }
  if (!j.at(key).is_number())
    throw ModelParseError("field '" + path + key + "' must be a number", line_of_key(text, key, from),
                          path + key);
  return j.at(key).get<double>();
}

}  // namespace detail

inline LevyQuadruplet parse_model(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const int line = detail::line_of(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ModelParseError("line " + std::to_string(line) + ": " + e.what(), line, "");
  }
  if (!j.is_object()) throw ModelParseError("model file must hold a JSON object", 1, "");
  static const char* known[] = {"beta", "sigma2", "kappa", "jumps", "name"};
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok)
      throw ModelParseError("unknown field '" + key + "'", detail::line_of_key(text, key), key);
  }
  LevyQuadruplet q;
  q.beta = detail::number_field(j, "beta", "", text, true, 0, 1);
  q.sigma2 = detail::number_field(j, "sigma2", "", text, true, 0, 1);
  q.kappa = detail::number_field(j, "kappa", "", text, false, 0);
  if (j.contains("jumps")) {
    const auto& jumps = j.at("jumps");
    if (!jumps.is_array())
      throw ModelParseError("field 'jumps' must be an array", detail::line_of_key(text, "jumps"),
                            "jumps");
    for (std::size_t i = 0; i < jumps.size(); ++i) {
      const auto& c = jumps[i];
      const std::string path = "jumps[" + std::to_string(i) + "].";
      const std::size_t at = detail::jump_offset(text, i);
      const std::size_t from = at == std::string::npos ? 0 : at;
      const int line = from ? detail::line_of(text, from) : 0;
      if (!c.is_object() || !c.contains("type") || !c.at("type").is_string())
        throw ModelParseError("'" + path + "type' must be \"atom\" or \"exp\"", line, path + "type");
      const std::string type = c.at("type").get<std::string>();
      if (type == "atom") {
        q.jumps.components.push_back(Atom{detail::number_field(c, "y", path, text, true, 0, from),
                                          detail::number_field(c, "w", path, text, true, 0, from)});
      } else if (type == "exp") {
        q.jumps.components.push_back(ExpDensity{detail::number_field(c, "c", path, text, true, 0, from),
                                                detail::number_field(c, "lambda", path, text, true, 0, from)});
      } else {
        throw ModelParseError("'" + path + "type' must be \"atom\" or \"exp\", got \"" + type + "\"",
                              line, path + "type");
      }
    }
  }
  try {
    q.validate();
  } catch (const DomainError& e) {
    throw ModelParseError(e.what(), 0, "");
  }
  return q;
}

inline LevyQuadruplet load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelParseError("cannot open model file '" + path + "'", 0, "");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

inline nlohmann::json to_json(const LevyQuadruplet& q) {
  nlohmann::json j;
  j["beta"] = q.beta;
  j["sigma2"] = q.sigma2;
  j["kappa"] = q.kappa;
  j["jumps"] = nlohmann::json::array();
  for (const auto& c : q.jumps.components)
    std::visit(
        [&](const auto& x) {
          if constexpr (std::is_same_v<std::decay_t<decltype(x)>, Atom>)
            j["jumps"].push_back({{"type", "atom"}, {"y", x.y}, {"w", x.w}});
          else
            j["jumps"].push_back({{"type", "exp"}, {"c", x.c}, {"lambda", x.lambda}});
        },
        c);
  return j;
}

}  // namespace glsemi
