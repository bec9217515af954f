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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dipcheck/automaton.hpp"
#include "dipcheck/automaton_io.hpp"
#include "dipcheck/error.hpp"
#include "dipcheck/json_util.hpp"

namespace dipcheck {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// What a step emitted: a symbol, or a real variable known to lie in the open
// interval (lo, hi).
struct Observed {
  OutputLabel label = OutputLabel::symbol("?");
  double lo = -kInf;
  double hi = kInf;

  static Observed symbol(std::string s) { return {OutputLabel::symbol(std::move(s))}; }
  static Observed real(RealVar v, double lo = -kInf, double hi = kInf) {
    return {OutputLabel::real(v), lo, hi};
  }

  bool is_symbol() const { return label.is_symbol(); }

  friend bool operator==(const Observed& a, const Observed& b) {
    if (a.label != b.label) return false;
    return a.is_symbol() || (a.lo == b.lo && a.hi == b.hi);
  }
};

struct RawStep {
  std::optional<double> input;
  Observed observed;
};

struct PathStep {
  std::size_t state;
  std::size_t transition;
  std::optional<double> input;
  Observed observed;
};

// A checked path of a particular automaton. The automaton must outlive it.
class Path {
 public:
  const DipAutomaton& automaton() const { return *automaton_; }
  std::size_t start() const { return start_; }
  std::size_t size() const { return steps_.size(); }
  bool empty() const { return steps_.empty(); }
  const PathStep& operator[](std::size_t i) const { return steps_[i]; }
  const std::vector<PathStep>& steps() const { return steps_; }

  std::vector<std::optional<double>> inseq() const {
    std::vector<std::optional<double>> out;
    for (const auto& s : steps_) out.push_back(s.input);
    return out;
  }

  std::vector<Observed> outseq() const {
    std::vector<Observed> out;
    for (const auto& s : steps_) out.push_back(s.observed);
    return out;
  }

  std::vector<std::size_t> transitions() const {
    std::vector<std::size_t> out;
    for (const auto& s : steps_) out.push_back(s.transition);
    return out;
  }

  std::vector<RawStep> raw() const {
    std::vector<RawStep> out;
    for (const auto& s : steps_) out.push_back({s.input, s.observed});
    return out;
  }

 private:
  friend Path check_path(const DipAutomaton&, std::size_t, const std::vector<RawStep>&);

  const DipAutomaton* automaton_ = nullptr;
  std::size_t start_ = 0;
  std::vector<PathStep> steps_;
};

// Resolves each observation to the unique transition producing it and checks
// input presence and interval sanity.
inline Path check_path(const DipAutomaton& a, std::size_t start,
                       const std::vector<RawStep>& steps) {
  if (start >= a.num_states()) {
    throw Error(ErrorCode::kInvalidArgument, "path start is not a state");
  }
  Path p;
  p.automaton_ = &a;
  p.start_ = start;
  std::size_t at = start;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const RawStep& step = steps[i];
    const std::string where = "step " + std::to_string(i);
    std::size_t chosen = DipAutomaton::npos;
    for (std::size_t t : a.outgoing(at)) {
      const OutputLabel& out = a.transition(t).output;
      if (out == step.observed.label) chosen = t;
    }
    if (chosen == DipAutomaton::npos) {
      throw Error(ErrorCode::kNoSuchTransition,
                  where + ": no transition from '" + a.state(at).id + "' outputs " +
                      step.observed.label.describe());
    }
    if (step.input.has_value() != a.is_input(at)) {
      throw Error(ErrorCode::kInputKindMismatch,
                  where + ": state '" + a.state(at).id + "' is " +
                      std::string(to_string(a.state(at).kind)) +
                      (step.input ? " but an input was given" : " but no input was given"));
    }
    if (step.input && !std::isfinite(*step.input)) {
      throw Error(ErrorCode::kInvalidArgument, where + ": input must be finite");
    }
    if (!step.observed.is_symbol() &&
        !(step.observed.lo < step.observed.hi)) {
      throw Error(ErrorCode::kBadInterval,
                  where + ": output interval needs lo < hi");
    }
    p.steps_.push_back({at, chosen, step.input, step.observed});
    at = a.target(chosen);
  }
  return p;
}

inline Path check_path(const DipAutomaton& a, const std::vector<RawStep>& steps) {
  return check_path(a, a.init(), steps);
}

inline bool inputs_close(double a, double b, double tol_scale = 1e-12) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= 1 + tol_scale * scale;
}

// Equal length, absent inputs aligned, and pointwise distance at most 1. A
// relative slack of 1e-12 absorbs rounding of inputs computed from rationals.
inline bool adjacent(const std::vector<std::optional<double>>& s1,
                     const std::vector<std::optional<double>>& s2) {
  if (s1.size() != s2.size()) return false;
  for (std::size_t i = 0; i < s1.size(); ++i) {
    if (s1[i].has_value() != s2[i].has_value()) return false;
    if (s1[i] && !inputs_close(*s1[i], *s2[i])) return false;
  }
  return true;
}

inline bool equivalent(const Path& p1, const Path& p2) {
  return &p1.automaton() == &p2.automaton() && p1.start() == p2.start() &&
         p1.outseq() == p2.outseq();
}

// --- documents -------------------------------------------------------------

struct PathDocument {
  std::string automaton;
  double x0 = 0;
  std::optional<std::string> start;
  std::vector<RawStep> steps;
};

namespace detail {

inline double bound_from_json(const json_util::Json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "-inf") return -kInf;
    if (s == "inf" || s == "+inf") return kInf;
  }
  throw Error(ErrorCode::kSchemaError, what + ": bound must be a number, \"-inf\" or \"inf\"");
}

inline json_util::Json bound_to_json(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

}  // namespace detail

inline Observed observed_from_json(const json_util::Json& j, const std::string& what) {
  json_util::require_object(j, what);
  if (j.contains("sym")) {
    json_util::check_fields(j, what, {"sym"});
    return Observed::symbol(json_util::get_string(j, "sym", what));
  }
  json_util::check_fields(j, what, {"var"}, {"lo", "hi"});
  const auto& v = json_util::get_string(j, "var", what);
  RealVar var;
  if (v == "sample") {
    var = RealVar::kSample;
  } else if (v == "sample_aux") {
    var = RealVar::kSampleAux;
  } else {
    throw Error(ErrorCode::kSchemaError, what + ": unknown var '" + v + "'");
  }
  Observed o = Observed::real(var);
  if (j.contains("lo")) o.lo = detail::bound_from_json(j["lo"], what);
  if (j.contains("hi")) o.hi = detail::bound_from_json(j["hi"], what);
  return o;
}

inline json_util::Json to_json(const Observed& o) {
  json_util::Json j = json_util::Json::object();
  if (o.is_symbol()) {
    j["sym"] = o.label.sym();
    return j;
  }
  j["var"] = std::string(to_string(o.label.var()));
  j["lo"] = detail::bound_to_json(o.lo);
  j["hi"] = detail::bound_to_json(o.hi);
  return j;
}

inline PathDocument parse_path_document(std::string_view text) {
  const auto doc = json_util::parse_document(text);
  json_util::check_fields(doc, "path", {"automaton", "steps"}, {"x0", "start"});
  PathDocument out;
  out.automaton = json_util::get_string(doc, "automaton", "path");
  if (doc.contains("x0")) {
    if (!doc["x0"].is_number()) {
      throw Error(ErrorCode::kSchemaError, "path: 'x0' must be a number");
    }
    out.x0 = doc["x0"].get<double>();
  }
  if (doc.contains("start")) out.start = json_util::get_string(doc, "start", "path");
  if (!doc["steps"].is_array()) {
    throw Error(ErrorCode::kSchemaError, "path: 'steps' must be an array");
  }
  std::size_t i = 0;
  for (const auto& s : doc["steps"]) {
    const std::string what = "path step " + std::to_string(i++);
    json_util::check_fields(s, what, {"observed"}, {"input"});
    RawStep step;
    if (s.contains("input") && !s["input"].is_null()) {
      if (!s["input"].is_number()) {
        throw Error(ErrorCode::kSchemaError, what + ": 'input' must be a number or null");
      }
      step.input = s["input"].get<double>();
    }
    step.observed = observed_from_json(s["observed"], what);
    out.steps.push_back(std::move(step));
  }
  return out;
}

inline json_util::Json to_json(const PathDocument& d) {
  json_util::Json j = json_util::Json::object();
  j["automaton"] = d.automaton;
  j["x0"] = d.x0;
  if (d.start) j["start"] = *d.start;
  auto steps = json_util::Json::array();
  for (const auto& s : d.steps) {
    json_util::Json step = json_util::Json::object();
    step["input"] = s.input ? json_util::Json(*s.input) : json_util::Json(nullptr);
    step["observed"] = to_json(s.observed);
    steps.push_back(std::move(step));
  }
  j["steps"] = std::move(steps);
  return j;
}

inline PathDocument to_document(const Path& p, std::string automaton_ref, double x0 = 0) {
  PathDocument d;
  d.automaton = std::move(automaton_ref);
  d.x0 = x0;
  if (p.start() != p.automaton().init()) d.start = p.automaton().state(p.start()).id;
  d.steps = p.raw();
  return d;
}

inline Path check_path(const DipAutomaton& a, const PathDocument& d) {
  std::size_t start = a.init();
  if (d.start) {
    auto s = a.state_index(*d.start);
    if (!s) throw Error(ErrorCode::kDanglingReference, "path start '" + *d.start + "' is not a state");
    start = *s;
  }
  return check_path(a, start, d.steps);
}

}  // namespace dipcheck
