// Copyright 2026 The lpvred Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/** \file
    Pipeline configuration: a small TOML subset read into JSON, merged over
    defaults and checked against them before anything runs.

    Supported TOML: [section] and [section.sub] headers, key = value with
    strings, numbers, booleans and single-line arrays of those, # comments.
*/

#ifndef LPVRED_CONFIG_HPP
#define LPVRED_CONFIG_HPP

#include "core.hpp"

#include <json.hpp>

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace lpvred {

class ConfigError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

/// Drops a trailing # comment that is not inside a string.
inline std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

inline nlohmann::json toml_scalar(const std::string& raw, int line) {
  const std::string v = trim(raw);
  auto fail = [&](const std::string& why) {
    throw ConfigError("config line " + std::to_string(line) + ": " + why + " ('" + v + "')");
  };
  if (v.empty()) fail("missing value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') fail("unterminated string");
    return nlohmann::json::parse(v);  // JSON string escapes are a superset of what we accept
  }
  if (v == "true") return true;
  if (v == "false") return false;
  std::string num;
  for (char ch : v)
    if (ch != '_') num += ch;
  try {
    size_t used = 0;
    if (num.find_first_of(".eEn") == std::string::npos) {
      const long long i = std::stoll(num, &used);
      if (used == num.size()) return i;
    }
    const double d = std::stod(num, &used);
    if (used == num.size()) return d;
  } catch (const std::exception&) {
  }
  fail("cannot parse value");
  return nullptr;
}

inline std::vector<std::string> split_array(const std::string& body, int line) {
  std::vector<std::string> items;
  std::string cur;
  bool in_str = false;
  for (size_t i = 0; i < body.size(); ++i) {
    const char ch = body[i];
    if (ch == '"' && (i == 0 || body[i - 1] != '\\')) in_str = !in_str;
    if (ch == '[' && !in_str) throw ConfigError("config line " + std::to_string(line) + ": nested arrays are not supported");
    if (ch == ',' && !in_str) {
      items.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!trim(cur).empty()) items.push_back(cur);
  return items;
}

}  // namespace detail

inline nlohmann::json parse_toml(const std::string& text) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* section = &root;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = detail::trim(detail::strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("config line " + std::to_string(line) + ": malformed section header");
      const std::string name = detail::trim(s.substr(1, s.size() - 2));
      if (name.empty()) throw ConfigError("config line " + std::to_string(line) + ": empty section name");
      section = &root;
      std::istringstream parts(name);
      std::string part;
      while (std::getline(parts, part, '.')) {
        part = detail::trim(part);
        if (part.empty()) throw ConfigError("config line " + std::to_string(line) + ": empty section name part");
        auto& next = (*section)[part];
        if (next.is_null()) next = nlohmann::json::object();
        if (!next.is_object()) throw ConfigError("config line " + std::to_string(line) + ": '" + part + "' is not a table");
        section = &next;
      }
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line) + ": expected key = value");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string val = detail::trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line) + ": empty key");
    if (section->contains(key)) throw ConfigError("config line " + std::to_string(line) + ": duplicate key '" + key + "'");
    if (!val.empty() && val.front() == '[') {
      if (val.back() != ']') throw ConfigError("config line " + std::to_string(line) + ": arrays must fit on one line");
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& item : detail::split_array(val.substr(1, val.size() - 2), line))
        arr.push_back(detail::toml_scalar(item, line));
      (*section)[key] = arr;
    } else {
      (*section)[key] = detail::toml_scalar(val, line);
    }
  }
  return root;
}

/// JSON if the text starts with '{', otherwise the TOML subset.
inline nlohmann::json parse_config_text(const std::string& text) {
  const std::string t = detail::trim(text);
  if (!t.empty() && t.front() == '{') {
    try {
      return nlohmann::json::parse(t);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
  }
  return parse_toml(text);
}

inline nlohmann::json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// Default configuration. Every accepted key appears here; the shape of the
/// defaults is the schema.
inline nlohmann::json default_config() {
  return nlohmann::json::parse(R"({
    "model": {"id": "analytic", "parameters": {}},
    "simulation": {"h": 0.01, "T": 20.0, "scenarios": 40, "seed": 1, "dwell_min": 1.0, "dwell_max": 5.0,
                   "validation_stride": 5},
    "dataset": {"N": 50000, "seed": 2, "blocks": "state_input", "exactness_points": 10000},
    "pca": {"enabled": true, "normalizations": ["std", "minmax"], "nhat": [1, 2, 3, 4, 5, 6, 7, 8, 9, 10]},
    "dnn": {"enabled": false, "normalizations": ["minmax"], "nhat": [1, 2, 3], "hidden": [64, 64, 64, 64],
            "learning_rate": 0.001, "batch_size": 128, "epochs": 200, "l2": 0.0001, "patience": 20,
            "bypass": false, "seed": 3, "early_stopping_stride": 4},
    "region": {"enabled": true, "method": "kabsch", "conservatism": true, "conservatism_max_dim": 3,
               "mc_samples": 200000, "seed": 11, "mvee_tolerance": 1e-6},
    "evaluate": {"enabled": true, "datasets": ["validation", "training"], "mean_square": false},
    "compare": {"enabled": true, "method": "pca", "normalization": "", "nhat": [3, 5, 10], "maneuver": "s_turn",
                "h": 0.01, "T": 20.0},
    "run": {"threads": 1, "deterministic": true}
  })");
}

namespace detail {

inline const char* json_kind(const nlohmann::json& j) {
  if (j.is_boolean()) return "boolean";
  if (j.is_number()) return "number";
  if (j.is_string()) return "string";
  if (j.is_array()) return "array";
  if (j.is_object()) return "table";
  return "null";
}

inline void merge_checked(nlohmann::json& base, const nlohmann::json& over, const std::string& path) {
  if (!over.is_object()) throw ConfigError("config: '" + path + "' must be a table");
  for (auto it = over.begin(); it != over.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("config: unknown key '" + key + "'");
    auto& slot = base[it.key()];
    if (key == "model.parameters") {
      if (!it.value().is_object()) throw ConfigError("config: 'model.parameters' must be a table");
      slot = it.value();
      continue;
    }
    if (std::string(json_kind(slot)) != json_kind(it.value()))
      throw ConfigError("config: '" + key + "' must be a " + json_kind(slot) + ", got " + json_kind(it.value()));
    if (slot.is_object())
      merge_checked(slot, it.value(), key);
    else
      slot = it.value();
  }
}

}  // namespace detail

/// Defaults overlaid with `user`; unknown keys and type changes are errors.
inline nlohmann::json merge_config(const nlohmann::json& user) {
  nlohmann::json cfg = default_config();
  detail::merge_checked(cfg, user, "");
  return cfg;
}

}  // namespace lpvred

#endif  // LPVRED_CONFIG_HPP
