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
#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "dipcheck/error.hpp"
#include "dipcheck/rational.hpp"

namespace dipcheck {

// Comparison of the fresh sample s against the stored register r.
// Declaration order is the serialization order: True < Ge < Lt.
enum class Guard : std::uint8_t { kTrue = 0, kGe = 1, kLt = 2 };

inline constexpr std::array<Guard, 3> kAllGuards = {Guard::kTrue, Guard::kGe,
                                                    Guard::kLt};

inline std::string_view to_string(Guard g) {
  switch (g) {
    case Guard::kTrue: return "true";
    case Guard::kGe: return "ge";
    case Guard::kLt: return "lt";
  }
  return "?";
}

inline std::optional<Guard> parse_guard(std::string_view s) {
  if (s == "true") return Guard::kTrue;
  if (s == "ge") return Guard::kGe;
  if (s == "lt") return Guard::kLt;
  return std::nullopt;
}

enum class StateKind : std::uint8_t { kInput, kNonInput };

inline std::string_view to_string(StateKind k) {
  return k == StateKind::kInput ? "input" : "noninput";
}

// Which sampled real a transition outputs: s (kSample) or s' (kSampleAux).
enum class RealVar : std::uint8_t { kSample, kSampleAux };

inline std::string_view to_string(RealVar v) {
  return v == RealVar::kSample ? "sample" : "sample_aux";
}

class OutputLabel {
 public:
  static OutputLabel symbol(std::string s) { return OutputLabel(std::move(s)); }
  static OutputLabel real(RealVar v) { return OutputLabel(v); }

  bool is_symbol() const { return std::holds_alternative<std::string>(value_); }
  bool is_real() const { return !is_symbol(); }
  const std::string& sym() const { return std::get<std::string>(value_); }
  RealVar var() const { return std::get<RealVar>(value_); }
  bool outputs(RealVar v) const { return is_real() && var() == v; }

  std::string describe() const {
    return is_symbol() ? sym() : std::string(to_string(var()));
  }

  friend bool operator==(const OutputLabel&, const OutputLabel&) = default;
  friend auto operator<=>(const OutputLabel&, const OutputLabel&) = default;

 private:
  explicit OutputLabel(std::string s) : value_(std::move(s)) {}
  explicit OutputLabel(RealVar v) : value_(v) {}

  std::variant<std::string, RealVar> value_;
};

// Sampling parameters of a state: s ~ Lap(d*eps, mu + input),
// s' ~ Lap(d_aux*eps, mu_aux + input).
struct StateParams {
  Rational d;
  Rational mu;
  Rational d_aux;
  Rational mu_aux;

  friend bool operator==(const StateParams&, const StateParams&) = default;
};

struct StateDecl {
  std::string id;
  StateKind kind = StateKind::kInput;
  StateParams params;

  friend bool operator==(const StateDecl&, const StateDecl&) = default;
};

struct TransitionDecl {
  std::string source;
  Guard guard = Guard::kTrue;
  std::string target;
  OutputLabel output = OutputLabel::symbol("");
  bool assign = false;

  friend bool operator==(const TransitionDecl&, const TransitionDecl&) = default;
};

// (source, guard, target): how witnesses and reports name a transition.
struct TransitionRef {
  std::string from;
  Guard guard = Guard::kTrue;
  std::string to;

  friend bool operator==(const TransitionRef&, const TransitionRef&) = default;
  friend auto operator<=>(const TransitionRef&, const TransitionRef&) = default;
};

// Unvalidated description, as parsed from a document or built in code.
struct RawAutomaton {
  std::string name;
  std::string init;
  std::vector<StateDecl> states;
  std::vector<TransitionDecl> transitions;
  // Optional declared output alphabet; when present it must cover every
  // symbol used on a transition.
  std::optional<std::vector<std::string>> alphabet;
};

struct ValidationResult;

inline ValidationResult validate(const RawAutomaton& raw);

// Immutable, validated automaton. States are stored sorted by id and
// transitions sorted by (source id, guard), so indices are canonical.
class DipAutomaton {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  const std::string& name() const { return name_; }
  std::size_t init() const { return init_; }
  std::size_t num_states() const { return states_.size(); }
  std::size_t num_transitions() const { return transitions_.size(); }

  const std::vector<StateDecl>& states() const { return states_; }
  const StateDecl& state(std::size_t i) const { return states_[i]; }
  const std::vector<TransitionDecl>& transitions() const { return transitions_; }
  const TransitionDecl& transition(std::size_t t) const { return transitions_[t]; }

  std::size_t source(std::size_t t) const { return source_[t]; }
  std::size_t target(std::size_t t) const { return target_[t]; }

  // Index of delta(state, guard), or npos when undefined.
  std::size_t delta(std::size_t state, Guard g) const {
    return slots_[state][static_cast<std::size_t>(g)];
  }

  // Outgoing transition indices of a state, in guard order.
  std::vector<std::size_t> outgoing(std::size_t state) const {
    std::vector<std::size_t> out;
    for (std::size_t t : slots_[state]) {
      if (t != npos) out.push_back(t);
    }
    return out;
  }

  std::optional<std::size_t> state_index(std::string_view id) const {
    auto it = std::lower_bound(
        states_.begin(), states_.end(), id,
        [](const StateDecl& s, std::string_view v) { return s.id < v; });
    if (it == states_.end() || it->id != id) return std::nullopt;
    return static_cast<std::size_t>(it - states_.begin());
  }

  bool is_input(std::size_t state) const {
    return states_[state].kind == StateKind::kInput;
  }
  bool is_input_transition(std::size_t t) const { return is_input(source_[t]); }

  TransitionRef ref(std::size_t t) const {
    return {states_[source_[t]].id, transitions_[t].guard,
            states_[target_[t]].id};
  }

  std::optional<std::size_t> find(const TransitionRef& r) const {
    auto s = state_index(r.from);
    if (!s) return std::nullopt;
    std::size_t t = delta(*s, r.guard);
    if (t == npos || states_[target_[t]].id != r.to) return std::nullopt;
    return t;
  }

  // Finite output symbols actually used on transitions, sorted.
  const std::vector<std::string>& out_alphabet() const { return alphabet_; }

  RawAutomaton to_raw() const {
    RawAutomaton raw{name_, states_[init_].id, states_, transitions_,
                     std::nullopt};
    return raw;
  }

  friend bool operator==(const DipAutomaton& a, const DipAutomaton& b) {
    return a.name_ == b.name_ && a.init_ == b.init_ && a.states_ == b.states_ &&
           a.transitions_ == b.transitions_;
  }

 private:
  friend ValidationResult validate(const RawAutomaton& raw);

  DipAutomaton() = default;

  std::string name_;
  std::size_t init_ = 0;
  std::vector<StateDecl> states_;
  std::vector<TransitionDecl> transitions_;
  std::vector<std::size_t> source_;
  std::vector<std::size_t> target_;
  std::vector<std::array<std::size_t, 3>> slots_;
  std::vector<std::string> alphabet_;
};

struct ValidationResult {
  std::optional<DipAutomaton> automaton;
  std::vector<Diagnostic> errors;

  bool ok() const { return errors.empty(); }
};

namespace detail {

inline std::string describe(const TransitionDecl& t) {
  return t.source + " -" + std::string(to_string(t.guard)) + "-> " + t.target;
}

}  // namespace detail

// Checks every structural condition and reports all violations, not just
// the first one.
inline ValidationResult validate(const RawAutomaton& raw) {
  ValidationResult result;
  auto& errors = result.errors;
  auto report = [&errors](ErrorCode c, std::string where, std::string msg) {
    errors.push_back({c, std::move(where), std::move(msg)});
  };

  std::map<std::string, const StateDecl*> by_id;
  for (const auto& s : raw.states) {
    if (s.id.empty()) {
      report(ErrorCode::kSchemaError, "state", "state id must be non-empty");
      continue;
    }
    if (!by_id.emplace(s.id, &s).second) {
      report(ErrorCode::kDuplicateStateId, s.id, "state id declared twice");
    }
    if (s.params.d < 0) {
      report(ErrorCode::kNegativeScale, s.id, "scale d is negative");
    }
    if (s.params.d_aux < 0) {
      report(ErrorCode::kNegativeScale, s.id, "scale d_aux is negative");
    }
  }

  if (!by_id.count(raw.init)) {
    report(ErrorCode::kDanglingReference, raw.init,
           "initial state '" + raw.init + "' is not declared");
  }

  // delta keyed by (source, guard)
  std::map<std::pair<std::string, Guard>, const TransitionDecl*> delta;
  for (const auto& t : raw.transitions) {
    const bool src_ok = by_id.count(t.source) > 0;
    const bool dst_ok = by_id.count(t.target) > 0;
    if (!src_ok) {
      report(ErrorCode::kDanglingReference, detail::describe(t),
             "source state '" + t.source + "' is not declared");
    }
    if (!dst_ok) {
      report(ErrorCode::kDanglingReference, detail::describe(t),
             "target state '" + t.target + "' is not declared");
    }
    if (t.output.is_symbol() && t.output.sym().empty()) {
      report(ErrorCode::kSchemaError, detail::describe(t),
             "output symbol must be non-empty");
    }
    if (!delta.emplace(std::make_pair(t.source, t.guard), &t).second) {
      report(ErrorCode::kDeterminismViolation, detail::describe(t),
             "more than one transition for (" + t.source + ", " +
                 std::string(to_string(t.guard)) + ")");
    }
  }

  auto lookup = [&delta](const std::string& q, Guard g) -> const TransitionDecl* {
    auto it = delta.find({q, g});
    return it == delta.end() ? nullptr : it->second;
  };

  for (const auto& [id, decl] : by_id) {
    const TransitionDecl* tt = lookup(id, Guard::kTrue);
    const TransitionDecl* ge = lookup(id, Guard::kGe);
    const TransitionDecl* lt = lookup(id, Guard::kLt);

    if (tt && (ge || lt)) {
      report(ErrorCode::kDeterminismViolation, id,
             "a true-guarded transition coexists with a ge/lt transition");
    }
    if (ge && lt) {
      if (ge->output == lt->output) {
        report(ErrorCode::kOutputDistinctionViolation, id,
               "ge and lt transitions have the same output '" +
                   ge->output.describe() + "'");
      } else if (ge->output.is_real() && lt->output.is_real()) {
        report(ErrorCode::kOutputDistinctionViolation, id,
               "ge and lt transitions both output real values");
      }
    }
    if (decl->kind == StateKind::kNonInput && (ge || lt)) {
      report(ErrorCode::kNonInputViolation, id,
             "non-input state has a ge/lt-guarded transition");
    }
    if (id == raw.init) {
      if (!tt || ge || lt) {
        report(ErrorCode::kInitializationViolation, id,
               "initial state must have exactly one transition, guarded by "
               "true");
      } else if (!tt->assign) {
        report(ErrorCode::kInitializationViolation, id,
               "the transition out of the initial state must assign r");
      }
    }

    const StateParams& p = decl->params;
    for (const TransitionDecl* t : {tt, ge, lt}) {
      if (!t) continue;
      if (p.d == 0 && (t->guard != Guard::kTrue ||
                       t->output.outputs(RealVar::kSample))) {
        report(ErrorCode::kDegenerateScale, detail::describe(*t),
               "d = 0 but the transition compares or outputs s");
      }
      if (p.d_aux == 0 && t->output.outputs(RealVar::kSampleAux)) {
        report(ErrorCode::kDegenerateScale, detail::describe(*t),
               "d_aux = 0 but the transition outputs s'");
      }
    }
  }

  std::set<std::string> used;
  for (const auto& t : raw.transitions) {
    if (t.output.is_symbol() && !t.output.sym().empty()) used.insert(t.output.sym());
  }
  if (raw.alphabet) {
    std::set<std::string> declared(raw.alphabet->begin(), raw.alphabet->end());
    for (const auto& s : used) {
      if (!declared.count(s)) {
        report(ErrorCode::kUndeclaredSymbol, s,
               "output symbol '" + s + "' is not in the declared alphabet");
      }
    }
  }

  if (!errors.empty()) return result;

  DipAutomaton a;
  a.name_ = raw.name;
  a.states_ = raw.states;
  std::sort(a.states_.begin(), a.states_.end(),
            [](const StateDecl& x, const StateDecl& y) { return x.id < y.id; });
  a.transitions_ = raw.transitions;
  std::sort(a.transitions_.begin(), a.transitions_.end(),
            [](const TransitionDecl& x, const TransitionDecl& y) {
              return std::tie(x.source, x.guard) < std::tie(y.source, y.guard);
            });
  a.init_ = *a.state_index(raw.init);
  a.slots_.assign(a.states_.size(), {DipAutomaton::npos, DipAutomaton::npos,
                                     DipAutomaton::npos});
  for (std::size_t t = 0; t < a.transitions_.size(); ++t) {
    const auto& decl = a.transitions_[t];
    const std::size_t s = *a.state_index(decl.source);
    a.source_.push_back(s);
    a.target_.push_back(*a.state_index(decl.target));
    a.slots_[s][static_cast<std::size_t>(decl.guard)] = t;
  }
  a.alphabet_.assign(used.begin(), used.end());
  result.automaton = std::move(a);
  return result;
}

inline DipAutomaton validate_or_throw(const RawAutomaton& raw) {
  auto result = validate(raw);
  if (!result.ok()) throw ValidationError(std::move(result.errors));
  return std::move(*result.automaton);
}

// --- built-in automata -----------------------------------------------------

inline constexpr std::array<std::string_view, 5> kBuiltinNames = {
    "svt", "numeric_sparse", "sort", "svt_two_phase", "numeric_sparse_mod"};

namespace detail {

inline StateDecl make_state(std::string id, StateKind kind, Rational d,
                            Rational mu, Rational d_aux = 0,
                            Rational mu_aux = 0) {
  return {std::move(id), kind, {std::move(d), std::move(mu), std::move(d_aux),
                                std::move(mu_aux)}};
}

inline TransitionDecl make_transition(std::string from, Guard g,
                                      std::string to, OutputLabel out,
                                      bool assign) {
  return {std::move(from), g, std::move(to), std::move(out), assign};
}

inline RawAutomaton threshold_gadget(std::string name, Rational d0, Rational d1,
                                     Rational d_aux, OutputLabel exit_output,
                                     StateKind init_kind, bool loop_assigns) {
  using K = StateKind;
  RawAutomaton a;
  a.name = std::move(name);
  a.init = "q0";
  a.states = {make_state("q0", init_kind, d0, 0, d_aux, 0),
              make_state("q1", K::kInput, d1, 0, d_aux, 0),
              make_state("q2", K::kInput, d1, 0, d_aux, 0)};
  const auto bot = OutputLabel::symbol("bot");
  a.transitions = {
      make_transition("q0", Guard::kTrue, "q1", bot, true),
      make_transition("q1", Guard::kLt, "q1", bot, loop_assigns),
      make_transition("q1", Guard::kGe, "q2", std::move(exit_output), false)};
  return a;
}

}  // namespace detail

// The unvalidated description of a built-in; throws kUnknownBuiltin.
inline RawAutomaton builtin_raw(std::string_view name) {
  using detail::make_state;
  using detail::make_transition;
  using K = StateKind;
  const auto top = OutputLabel::symbol("top");
  const auto bot = OutputLabel::symbol("bot");

  if (name == "svt") {
    return detail::threshold_gadget("svt", Rational(1, 2), Rational(1, 4), 0,
                                    top, K::kNonInput, false);
  }
  if (name == "numeric_sparse") {
    return detail::threshold_gadget(
        "numeric_sparse", Rational(4, 9), Rational(2, 9), Rational(1, 9),
        OutputLabel::real(RealVar::kSampleAux), K::kNonInput, false);
  }
  if (name == "numeric_sparse_mod") {
    return detail::threshold_gadget(
        "numeric_sparse_mod", Rational(4, 9), Rational(2, 9), Rational(1, 9),
        OutputLabel::real(RealVar::kSample), K::kNonInput, false);
  }
  if (name == "sort") {
    return detail::threshold_gadget("sort", Rational(1, 2), Rational(1, 4), 0,
                                    top, K::kInput, true);
  }
  if (name == "svt_two_phase") {
    RawAutomaton a;
    a.name = "svt_two_phase";
    a.init = "q0";
    a.states = {make_state("q0", K::kNonInput, Rational(1, 2), 0),
                make_state("q1", K::kInput, Rational(1, 4), 0),
                make_state("q2", K::kInput, Rational(1, 4), 0),
                make_state("q3", K::kInput, Rational(1, 4), 0)};
    a.transitions = {make_transition("q0", Guard::kTrue, "q1", bot, true),
                     make_transition("q1", Guard::kLt, "q1", bot, false),
                     make_transition("q1", Guard::kGe, "q2", top, false),
                     make_transition("q2", Guard::kGe, "q2", top, false),
                     make_transition("q2", Guard::kLt, "q3", bot, false)};
    return a;
  }
  throw Error(ErrorCode::kUnknownBuiltin,
              "unknown built-in automaton '" + std::string(name) + "'");
}

inline DipAutomaton builtin(std::string_view name) {
  return validate_or_throw(builtin_raw(name));
}

inline bool is_builtin(std::string_view name) {
  return std::find(kBuiltinNames.begin(), kBuiltinNames.end(), name) !=
         kBuiltinNames.end();
}

}  // namespace dipcheck
