// Copyright 2026 The dipcheck Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>

#include "dipcheck/error.hpp"

namespace dipcheck::json_util {

using Json = nlohmann::ordered_json;

// Parses a document, mapping parser failures to kSyntaxError with a
// 1-based line:column position.
inline Json parse_document(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t limit = std::min<std::size_t>(
        e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::kSyntaxError, "syntax error at line " +
                                             std::to_string(line) + ", column " +
                                             std::to_string(col) + ": " +
                                             e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void require_object(const Json& j, std::string_view what) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kSchemaError, std::string(what) + " must be an object");
  }
}

// Rejects unknown keys and reports the first missing required key.
inline void check_fields(const Json& j, std::string_view what,
                         std::initializer_list<std::string_view> required,
                         std::initializer_list<std::string_view> optional = {}) {
  require_object(j, what);
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (auto k : required) known = known || it.key() == k;
    for (auto k : optional) known = known || it.key() == k;
    if (!known) {
      throw Error(ErrorCode::kSchemaError, std::string(what) +
                                               ": unexpected field '" +
                                               it.key() + "'");
    }
  }
  for (auto k : required) {
    if (!j.contains(std::string(k))) {
      throw Error(ErrorCode::kSchemaError, std::string(what) +
                                               ": missing field '" +
                                               std::string(k) + "'");
    }
  }
}

inline const std::string& get_string(const Json& j, std::string_view key,
                                     std::string_view what) {
  const auto& v = j.at(std::string(key));
  if (!v.is_string()) {
    throw Error(ErrorCode::kSchemaError, std::string(what) + ": field '" +
                                             std::string(key) +
                                             "' must be a string");
  }
  return v.get_ref<const std::string&>();
}

}  // namespace dipcheck::json_util
