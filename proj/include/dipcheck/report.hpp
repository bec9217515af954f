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
#include <optional>
#include <string>
#include <vector>

#include "dipcheck/automaton.hpp"
#include "dipcheck/automaton_io.hpp"
#include "dipcheck/error.hpp"
#include "dipcheck/json_util.hpp"
#include "dipcheck/path.hpp"
#include "dipcheck/pathprob.hpp"
#include "dipcheck/weight.hpp"
#include "dipcheck/wellformed.hpp"
#include "dipcheck/witness.hpp"

#ifndef DIPCHECK_VERSION
#define DIPCHECK_VERSION "0.0.0"
#endif

namespace dipcheck {

inline constexpr const char* kSchemaVersion = "1";
inline constexpr const char* kToolVersion = DIPCHECK_VERSION;

// The invocation a report answers.
struct CommandEcho {
  std::string name;
  std::vector<std::string> args;
};

// Envelope shared by every report. Keys serialize in sorted order, so equal
// inputs give byte-identical documents.
inline json_util::Json report_envelope(const CommandEcho& cmd, const DipAutomaton* a,
                                       std::optional<std::uint64_t> seed) {
  json_util::Json j = json_util::Json::object();
  j["schema_version"] = kSchemaVersion;
  j["tool"] = {{"name", "dipcheck"}, {"version", kToolVersion}};
  j["command"] = {{"name", cmd.name}, {"args", cmd.args}};
  if (a) j["automaton"] = {{"name", a->name()}, {"hash", automaton_hash(*a)}};
  if (seed) j["seed"] = *seed;
  return j;
}

inline json_util::Json error_to_json(const Error& e) {
  json_util::Json j = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
  if (const auto* v = dynamic_cast<const ValidationError*>(&e)) {
    auto diags = json_util::Json::array();
    for (const auto& d : v->diagnostics()) {
      diags.push_back({{"code", std::string(to_string(d.code))},
                       {"where", d.where},
                       {"message", d.message}});
    }
    j["diagnostics"] = std::move(diags);
  }
  return j;
}

inline json_util::Json cost_table_to_json(const DipAutomaton& a) {
  auto arr = json_util::Json::array();
  for (const auto& c : cost_table(a)) {
    json_util::Json j = to_json(c.ref);
    j["critical"] = c.critical;
    j["cost"] = to_string(c.cost);
    arr.push_back(std::move(j));
  }
  return arr;
}

inline json_util::Json to_json(const ProbResult& r) {
  json_util::Json j = {{"value", r.value}, {"method", r.monte_carlo ? "monte_carlo" : "exact"}};
  if (r.monte_carlo) {
    j["std_error"] = r.std_error;
    j["samples"] = r.samples;
    j["hits"] = r.hits;
    j["seed"] = r.seed;
  }
  return j;
}

inline json_util::Json to_json(const RatioEntry& r) {
  return {{"eps", r.eps}, {"p1", r.p1}, {"p2", r.p2}, {"ratio", r.ratio}};
}

inline json_util::Json to_json(const WitnessPair& p, const std::string& automaton_ref) {
  auto report = json_util::Json::array();
  for (const auto& r : p.ratio_report) {
    auto entry = to_json(r);
    entry["ell"] = p.ell;
    report.push_back(std::move(entry));
  }
  return {{"kind", std::string(to_string(p.kind))},
          {"ell", p.ell},
          {"rho1", to_json(to_document(p.rho1, automaton_ref))},
          {"rho2", to_json(to_document(p.rho2, automaton_ref))},
          {"ratio_report", std::move(report)}};
}

inline json_util::Json to_json(const McCheck& c) {
  return {{"estimate", to_json(c.estimate)},
          {"exact", c.exact},
          {"rare_event", c.rare_event},
          {"agrees", c.agrees}};
}

inline json_util::Json to_json(const DipAutomaton& a, const Refutation& r,
                               const std::string& automaton_ref) {
  json_util::Json j = {{"found", r.found},
                       {"witness", to_json(a, r.witness)},
                       {"ell", r.ell},
                       {"eps", r.eps},
                       {"p1", r.p1},
                       {"p2", r.p2},
                       {"ratio", r.ratio},
                       {"threshold", r.threshold},
                       {"evaluations", r.evaluations},
                       {"mc_status", std::string(to_string(r.mc_status))}};
  if (r.found) j["ratio_check"] = r.ratio_check;
  if (r.mc1) j["mc"] = {to_json(*r.mc1), to_json(*r.mc2)};
  if (r.pair) j["pair"] = to_json(*r.pair, automaton_ref);
  return j;
}

// "q1 -[lt, bot, assign]-> q1"
inline std::string describe_transition(const DipAutomaton& a, std::size_t t) {
  const auto& d = a.transition(t);
  std::string s = d.source + " -[" + std::string(to_string(d.guard)) + ", " +
                  d.output.describe();
  if (d.assign) s += ", assign";
  return s + "]-> " + d.target;
}

inline std::string describe_sequence(const DipAutomaton& a, const std::vector<std::size_t>& seq) {
  if (seq.empty()) return "(empty)";
  std::string s;
  for (std::size_t t : seq) {
    if (!s.empty()) s += "; ";
    s += describe_transition(a, t);
  }
  return s;
}

inline std::string describe_witness(const DipAutomaton& a, const ViolationWitness& w) {
  std::string s = std::string(to_string(w.kind));
  if (w.kind == ViolationKind::kPrivacyViolatingPath) {
    s += " (clause " + std::string(1, w.clause) + ", " + std::string(to_string(w.polarity)) + ")";
  } else if (w.kind == ViolationKind::kLeakingPair) {
    s += " (" + std::string(to_string(w.polarity)) + ")";
  }
  s += "\n  prefix: " + describe_sequence(a, w.prefix);
  s += "\n  cycle:  " + describe_sequence(a, w.cycle);
  if (w.kind == ViolationKind::kLeakingPair) {
    s += "\n  then:   " + describe_sequence(a, w.connector);
    s += "\n  cycle2: " + describe_sequence(a, w.cycle2);
  }
  if (w.kind == ViolationKind::kPrivacyViolatingPath) {
    s += "\n  path:   " + describe_sequence(a, w.path);
  }
  return s;
}

inline std::string describe_inputs(const Path& p) {
  std::string s;
  for (const auto& in : p.inseq()) {
    if (!s.empty()) s += " ";
    s += in ? json_util::Json(*in).dump() : "-";
  }
  return s;
}

}  // namespace dipcheck
