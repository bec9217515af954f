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

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>

#include "dipcheck/automaton.hpp"
#include "dipcheck/json_util.hpp"

namespace dipcheck {

namespace detail {

inline Rational rational_field(const json_util::Json& j, const char* key,
                               const std::string& what) {
  const auto& v = j.at(key);
  std::optional<Rational> r;
  if (v.is_string()) {
    r = parse_rational(v.get_ref<const std::string&>());
  } else if (v.is_number_integer()) {
    r = Rational(v.get<long long>());
  }
  if (!r) {
    throw Error(ErrorCode::kSchemaError,
                what + ": field '" + key +
                    "' must be a rational string \"p/q\" or an integer");
  }
  return *r;
}

}  // namespace detail

// Parses the automaton document into an unvalidated description.
inline RawAutomaton parse_automaton(std::string_view text) {
  using json_util::check_fields;
  using json_util::get_string;
  const auto doc = json_util::parse_document(text);
  check_fields(doc, "automaton", {"name", "init", "states", "transitions"},
               {"alphabet"});

  RawAutomaton raw;
  raw.name = get_string(doc, "name", "automaton");
  raw.init = get_string(doc, "init", "automaton");

  if (!doc["states"].is_array()) {
    throw Error(ErrorCode::kSchemaError, "automaton: 'states' must be an array");
  }
  std::size_t i = 0;
  for (const auto& s : doc["states"]) {
    const std::string what = "states[" + std::to_string(i++) + "]";
    check_fields(s, what, {"id", "kind", "d", "mu", "d_aux", "mu_aux"});
    StateDecl decl;
    decl.id = get_string(s, "id", what);
    const auto& kind = get_string(s, "kind", what);
    if (kind == "input") {
      decl.kind = StateKind::kInput;
    } else if (kind == "noninput") {
      decl.kind = StateKind::kNonInput;
    } else {
      throw Error(ErrorCode::kSchemaError,
                  what + ": kind must be \"input\" or \"noninput\", got \"" +
                      kind + "\"");
    }
    decl.params.d = detail::rational_field(s, "d", what);
    decl.params.mu = detail::rational_field(s, "mu", what);
    decl.params.d_aux = detail::rational_field(s, "d_aux", what);
    decl.params.mu_aux = detail::rational_field(s, "mu_aux", what);
    raw.states.push_back(std::move(decl));
  }

  if (!doc["transitions"].is_array()) {
    throw Error(ErrorCode::kSchemaError,
                "automaton: 'transitions' must be an array");
  }
  i = 0;
  for (const auto& t : doc["transitions"]) {
    const std::string what = "transitions[" + std::to_string(i++) + "]";
    check_fields(t, what, {"from", "guard", "to", "output", "assign"});
    TransitionDecl decl;
    decl.source = get_string(t, "from", what);
    decl.target = get_string(t, "to", what);
    const auto& g = get_string(t, "guard", what);
    auto guard = parse_guard(g);
    if (!guard) {
      throw Error(ErrorCode::kSchemaError,
                  what + ": guard must be one of true|ge|lt, got \"" + g + "\"");
    }
    decl.guard = *guard;
    if (!t["assign"].is_boolean()) {
      throw Error(ErrorCode::kSchemaError, what + ": 'assign' must be a boolean");
    }
    decl.assign = t["assign"].get<bool>();

    const auto& out = t["output"];
    json_util::require_object(out, what + ".output");
    if (out.size() != 1) {
      throw Error(ErrorCode::kSchemaError,
                  what + ".output must have exactly one of 'sym' or 'var'");
    }
    if (out.contains("sym")) {
      decl.output = OutputLabel::symbol(get_string(out, "sym", what + ".output"));
    } else if (out.contains("var")) {
      const auto& v = get_string(out, "var", what + ".output");
      if (v == "sample") {
        decl.output = OutputLabel::real(RealVar::kSample);
      } else if (v == "sample_aux") {
        decl.output = OutputLabel::real(RealVar::kSampleAux);
      } else {
        throw Error(ErrorCode::kSchemaError,
                    what + ".output.var must be sample|sample_aux, got \"" + v +
                        "\"");
      }
    } else {
      throw Error(ErrorCode::kSchemaError,
                  what + ".output: unexpected field '" + out.begin().key() + "'");
    }
    raw.transitions.push_back(std::move(decl));
  }

  if (doc.contains("alphabet")) {
    if (!doc["alphabet"].is_array()) {
      throw Error(ErrorCode::kSchemaError, "automaton: 'alphabet' must be an array");
    }
    std::vector<std::string> symbols;
    for (const auto& s : doc["alphabet"]) {
      if (!s.is_string()) {
        throw Error(ErrorCode::kSchemaError,
                    "automaton: 'alphabet' entries must be strings");
      }
      symbols.push_back(s.get<std::string>());
    }
    raw.alphabet = std::move(symbols);
  }
  return raw;
}

inline json_util::Json output_to_json(const OutputLabel& o) {
  json_util::Json j = json_util::Json::object();
  if (o.is_symbol()) {
    j["sym"] = o.sym();
  } else {
    j["var"] = std::string(to_string(o.var()));
  }
  return j;
}

inline json_util::Json to_json(const TransitionRef& r) {
  json_util::Json j = json_util::Json::object();
  j["from"] = r.from;
  j["guard"] = std::string(to_string(r.guard));
  j["to"] = r.to;
  return j;
}

inline json_util::Json to_json(const DipAutomaton& a) {
  using json_util::Json;
  Json doc = Json::object();
  doc["name"] = a.name();
  doc["init"] = a.state(a.init()).id;
  Json states = Json::array();
  for (const auto& s : a.states()) {
    Json j = Json::object();
    j["id"] = s.id;
    j["kind"] = std::string(to_string(s.kind));
    j["d"] = to_string(s.params.d);
    j["mu"] = to_string(s.params.mu);
    j["d_aux"] = to_string(s.params.d_aux);
    j["mu_aux"] = to_string(s.params.mu_aux);
    states.push_back(std::move(j));
  }
  doc["states"] = std::move(states);
  Json transitions = Json::array();
  for (const auto& t : a.transitions()) {
    Json j = Json::object();
    j["from"] = t.source;
    j["guard"] = std::string(to_string(t.guard));
    j["to"] = t.target;
    j["output"] = output_to_json(t.output);
    j["assign"] = t.assign;
    transitions.push_back(std::move(j));
  }
  doc["transitions"] = std::move(transitions);
  return doc;
}

// Canonical, byte-deterministic document text.
inline std::string serialize(const DipAutomaton& a) {
  return to_json(a).dump(2) + "\n";
}

inline DipAutomaton load_automaton_text(std::string_view text) {
  return validate_or_throw(parse_automaton(text));
}

// Resolves a CLI/path-document reference: an existing file path, otherwise a
// built-in name.
inline DipAutomaton load_automaton(const std::string& name_or_file) {
  std::ifstream probe(name_or_file);
  if (probe.good()) return load_automaton_text(json_util::read_file(name_or_file));
  if (is_builtin(name_or_file)) return builtin(name_or_file);
  throw Error(ErrorCode::kIoError, "'" + name_or_file +
                                       "' is neither a readable file nor a "
                                       "built-in automaton name");
}

// 64-bit FNV-1a of the canonical serialization, as 16 hex digits.
inline std::string automaton_hash(const DipAutomaton& a) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : serialize(a)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace dipcheck
