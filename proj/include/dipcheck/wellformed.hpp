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

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "dipcheck/automaton.hpp"
#include "dipcheck/automaton_io.hpp"
#include "dipcheck/graph.hpp"
#include "dipcheck/json_util.hpp"
#include "dipcheck/rational.hpp"
#include "dipcheck/weight.hpp"

namespace dipcheck {

enum class ViolationKind : std::uint8_t {
  kLeakingCycle,
  kLeakingPair,
  kDisclosingCycle,
  kPrivacyViolatingPath,
};

inline std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::kLeakingCycle: return "leaking_cycle";
    case ViolationKind::kLeakingPair: return "leaking_pair";
    case ViolationKind::kDisclosingCycle: return "disclosing_cycle";
    case ViolationKind::kPrivacyViolatingPath: return "privacy_violating_path";
  }
  return "?";
}

// kAG: the shape whose connecting path is an AG-path (an L-cycle feeding a
// G-cycle, or a violating path continuing into a G-cycle / starting on an
// L-cycle). kAL is the mirror image.
enum class Polarity : std::uint8_t { kAG, kAL };

inline std::string_view to_string(Polarity p) {
  return p == Polarity::kAG ? "ag" : "al";
}

// Structural witness. All sequences are transition indices of the automaton.
//
// kLeakingCycle: prefix reaches cycle[0]'s source; cycle[mark_i] is an
//   assignment, cycle[mark_j] (mark_i < mark_j) has a non-true guard, and the
//   transitions strictly between them are non-assigning with guard true.
// kLeakingPair: prefix reaches cycle; connector leads from cycle's start to
//   cycle2's start (empty for a self-pair).
// kDisclosingCycle: cycle[mark_i] is the offending input transition.
// kPrivacyViolatingPath: for clauses a and b, prefix reaches path[0]'s source
//   and cycle starts where path ends; for clause c, cycle starts where prefix
//   ends and path starts there too.
struct ViolationWitness {
  ViolationKind kind = ViolationKind::kLeakingCycle;
  Polarity polarity = Polarity::kAG;
  char clause = 0;
  std::vector<std::size_t> prefix;
  std::vector<std::size_t> cycle;
  std::vector<std::size_t> connector;
  std::vector<std::size_t> cycle2;
  std::vector<std::size_t> path;
  std::size_t mark_i = 0;
  std::size_t mark_j = 0;

  friend bool operator==(const ViolationWitness&, const ViolationWitness&) = default;
};

struct WellFormed {
  Rational weight;
};

struct NotWellFormed {
  ViolationWitness witness;
};

struct Verdict {
  std::variant<WellFormed, NotWellFormed> value;

  bool well_formed() const { return std::holds_alternative<WellFormed>(value); }
  const Rational& weight() const { return std::get<WellFormed>(value).weight; }
  const ViolationWitness& witness() const {
    return std::get<NotWellFormed>(value).witness;
  }
};

// Everything the finders share, computed once.
struct Analysis {
  explicit Analysis(const DipAutomaton& a)
      : graph(a), components(scc(graph)), flags(cycle_flags(graph, components)) {}

  UnderlyingGraph graph;
  SccDecomposition components;
  CycleFlags flags;
};

namespace detail {

inline bool ag_edge(const UnderlyingGraph& g, std::size_t e) { return in_ag(g.edge(e)); }
inline bool al_edge(const UnderlyingGraph& g, std::size_t e) { return in_al(g.edge(e)); }

inline std::vector<std::size_t> concat(std::vector<std::size_t> a,
                                       const std::vector<std::size_t>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace detail

inline std::optional<ViolationWitness> find_leaking_cycle(const Analysis& an) {
  const auto& g = an.graph;
  const auto& s = an.components;
  const std::size_t c = s.num_components();
  std::vector<bool> has_nontrue(c, false);
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    if (an.flags.on_cycle[e] && g.edge(e).guard != Guard::kTrue) {
      has_nontrue[s.component[g.edge(e).source]] = true;
    }
  }
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const Edge& edge = g.edge(e);
    if (!edge.assign || !an.flags.on_cycle[e] || !g.reachable(edge.source)) continue;
    if (!has_nontrue[s.component[edge.source]]) continue;
    std::size_t guard_edge = kNone;
    for (std::size_t f = 0; f < g.num_edges(); ++f) {
      if (an.flags.on_cycle[f] && g.edge(f).guard != Guard::kTrue &&
          s.same(g.edge(f).source, edge.source)) {
        guard_edge = f;
        break;
      }
    }
    // Walk e, then on to the guarded edge and back; if they coincide the
    // loop is taken twice so that the guard follows the assignment.
    std::vector<std::size_t> cycle{e};
    const auto to_guard = path_within(g, s, edge.target, g.edge(guard_edge).source);
    cycle.insert(cycle.end(), to_guard.begin(), to_guard.end());
    cycle.push_back(guard_edge);
    const auto back = path_within(g, s, g.edge(guard_edge).target, edge.source);
    cycle.insert(cycle.end(), back.begin(), back.end());

    // Tighten the marks: first non-true guard after the first assignment,
    // paired with the last assignment before it.
    std::size_t j = 1;
    while (g.edge(cycle[j]).guard == Guard::kTrue) ++j;
    std::size_t i = j - 1;
    while (!g.edge(cycle[i]).assign) --i;

    ViolationWitness w;
    w.kind = ViolationKind::kLeakingCycle;
    w.prefix = g.prefix_to(edge.source);
    w.cycle = std::move(cycle);
    w.mark_i = i;
    w.mark_j = j;
    return w;
  }
  return std::nullopt;
}

namespace detail {

// BFS from reachable states on `from_cycle` inside the restricted subgraph
// to the first state on `to_cycle`.
inline std::optional<ViolationWitness> leaking_pair_side(
    const Analysis& an, const std::vector<bool>& from_cycle, Guard from_guard,
    const std::vector<bool>& to_cycle, Guard to_guard, Polarity polarity) {
  const auto& g = an.graph;
  std::vector<std::size_t> sources;
  for (std::size_t v = 0; v < g.num_vertices(); ++v) {
    if (from_cycle[v] && g.reachable(v)) sources.push_back(v);
  }
  if (sources.empty()) return std::nullopt;
  const auto tree = bfs(g, sources, [&](std::size_t e) {
    return polarity == Polarity::kAG ? ag_edge(g, e) : al_edge(g, e);
  });
  for (std::size_t v : tree.order) {
    if (!to_cycle[v]) continue;
    const std::size_t start = tree.origin[v];
    ViolationWitness w;
    w.kind = ViolationKind::kLeakingPair;
    w.polarity = polarity;
    w.prefix = g.prefix_to(start);
    w.cycle = closed_walk(g, an.components, start,
                          first_internal_edge(g, an.components, start, from_guard));
    w.connector = trace(g, tree, v);
    w.cycle2 = closed_walk(g, an.components, v,
                           first_internal_edge(g, an.components, v, to_guard));
    return w;
  }
  return std::nullopt;
}

}  // namespace detail

inline std::optional<ViolationWitness> find_leaking_pair(const Analysis& an) {
  const auto& f = an.flags;
  if (auto w = detail::leaking_pair_side(an, f.in_l_cycle, Guard::kLt, f.in_g_cycle,
                                         Guard::kGe, Polarity::kAG)) {
    return w;
  }
  return detail::leaking_pair_side(an, f.in_g_cycle, Guard::kGe, f.in_l_cycle,
                                   Guard::kLt, Polarity::kAL);
}

inline std::optional<ViolationWitness> find_disclosing_cycle(const Analysis& an) {
  const auto& g = an.graph;
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const Edge& edge = g.edge(e);
    if (!an.flags.on_cycle[e] || !edge.from_input || !g.reachable(edge.source)) continue;
    if (edge.output == OutputKind::kFinite) continue;
    ViolationWitness w;
    w.kind = ViolationKind::kDisclosingCycle;
    w.prefix = g.prefix_to(edge.source);
    w.cycle = closed_walk(g, an.components, edge.source, e);
    w.mark_i = 0;
    return w;
  }
  return std::nullopt;
}

namespace detail {

// Clauses a and b: a leading Sample-output transition selected by `first`,
// then a restricted path from its target to a state on `to_cycle`.
template <typename Pred>
std::optional<ViolationWitness> violating_leading(const Analysis& an, char clause,
                                                  Polarity polarity, Pred first) {
  const auto& g = an.graph;
  const auto& to_cycle =
      polarity == Polarity::kAG ? an.flags.in_g_cycle : an.flags.in_l_cycle;
  const Guard cycle_guard = polarity == Polarity::kAG ? Guard::kGe : Guard::kLt;
  std::vector<std::size_t> starters;
  std::vector<std::size_t> targets;
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const Edge& edge = g.edge(e);
    if (edge.output != OutputKind::kSample || !g.reachable(edge.source)) continue;
    if (!first(edge)) continue;
    starters.push_back(e);
    targets.push_back(edge.target);
  }
  if (starters.empty()) return std::nullopt;
  const auto tree = bfs(g, targets, [&](std::size_t e) {
    return polarity == Polarity::kAG ? ag_edge(g, e) : al_edge(g, e);
  });
  for (std::size_t v : tree.order) {
    if (!to_cycle[v]) continue;
    const std::size_t origin = tree.origin[v];
    std::size_t lead = kNone;
    for (std::size_t e : starters) {
      if (g.edge(e).target == origin) {
        lead = e;
        break;
      }
    }
    ViolationWitness w;
    w.kind = ViolationKind::kPrivacyViolatingPath;
    w.clause = clause;
    w.polarity = polarity;
    w.prefix = g.prefix_to(g.edge(lead).source);
    w.path = concat({lead}, trace(g, tree, v));
    w.cycle = closed_walk(g, an.components, v,
                          first_internal_edge(g, an.components, v, cycle_guard));
    return w;
  }
  return std::nullopt;
}

// Clause c: a restricted path from a cycle state to the source of a
// Sample-output transition with the closing guard.
inline std::optional<ViolationWitness> violating_trailing(const Analysis& an,
                                                          Polarity polarity) {
  const auto& g = an.graph;
  const auto& from_cycle =
      polarity == Polarity::kAG ? an.flags.in_l_cycle : an.flags.in_g_cycle;
  const Guard cycle_guard = polarity == Polarity::kAG ? Guard::kLt : Guard::kGe;
  const Guard last_guard = polarity == Polarity::kAG ? Guard::kGe : Guard::kLt;
  std::vector<std::size_t> closing(g.num_vertices(), kNone);
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const Edge& edge = g.edge(e);
    if (edge.output == OutputKind::kSample && edge.guard == last_guard &&
        closing[edge.source] == kNone) {
      closing[edge.source] = e;
    }
  }
  std::vector<std::size_t> sources;
  for (std::size_t v = 0; v < g.num_vertices(); ++v) {
    if (from_cycle[v] && g.reachable(v)) sources.push_back(v);
  }
  if (sources.empty()) return std::nullopt;
  const auto tree = bfs(g, sources, [&](std::size_t e) {
    return polarity == Polarity::kAG ? ag_edge(g, e) : al_edge(g, e);
  });
  for (std::size_t v : tree.order) {
    if (closing[v] == kNone) continue;
    const std::size_t start = tree.origin[v];
    ViolationWitness w;
    w.kind = ViolationKind::kPrivacyViolatingPath;
    w.clause = 'c';
    w.polarity = polarity;
    w.prefix = g.prefix_to(start);
    w.cycle = closed_walk(g, an.components, start,
                          first_internal_edge(g, an.components, start, cycle_guard));
    w.path = trace(g, tree, v);
    w.path.push_back(closing[v]);
    return w;
  }
  return std::nullopt;
}

}  // namespace detail

inline std::optional<ViolationWitness> find_privacy_violating_path(const Analysis& an) {
  using detail::violating_leading;
  if (auto w = violating_leading(an, 'a', Polarity::kAG,
                                 [](const Edge& e) { return e.assign; })) {
    return w;
  }
  if (auto w = violating_leading(an, 'a', Polarity::kAL,
                                 [](const Edge& e) { return e.assign; })) {
    return w;
  }
  if (auto w = violating_leading(an, 'b', Polarity::kAG, [](const Edge& e) {
        return !e.assign && e.guard == Guard::kLt;
      })) {
    return w;
  }
  if (auto w = violating_leading(an, 'b', Polarity::kAL, [](const Edge& e) {
        return !e.assign && e.guard == Guard::kGe;
      })) {
    return w;
  }
  if (auto w = detail::violating_trailing(an, Polarity::kAG)) return w;
  return detail::violating_trailing(an, Polarity::kAL);
}

inline Verdict check_well_formed(const DipAutomaton& a) {
  const Analysis an(a);
  if (auto w = find_leaking_cycle(an)) return {NotWellFormed{std::move(*w)}};
  if (auto w = find_leaking_pair(an)) return {NotWellFormed{std::move(*w)}};
  if (auto w = find_disclosing_cycle(an)) return {NotWellFormed{std::move(*w)}};
  if (auto w = find_privacy_violating_path(an)) return {NotWellFormed{std::move(*w)}};
  return {WellFormed{weight(a, an.graph, an.components)}};
}

// Replays a witness against the automaton: every sequence must chain, cycles
// must close, the prefix must start at init and the pieces must join up.
inline bool witness_replays(const DipAutomaton& a, const ViolationWitness& w) {
  auto chains = [&](const std::vector<std::size_t>& seq, std::size_t from) {
    std::size_t at = from;
    for (std::size_t t : seq) {
      if (t >= a.num_transitions() || a.source(t) != at) return DipAutomaton::npos;
      at = a.target(t);
    }
    return at;
  };
  auto closes = [&](const std::vector<std::size_t>& cyc) {
    return !cyc.empty() && chains(cyc, a.source(cyc.front())) == a.source(cyc.front());
  };
  const std::size_t after_prefix = chains(w.prefix, a.init());
  if (after_prefix == DipAutomaton::npos) return false;

  switch (w.kind) {
    case ViolationKind::kLeakingCycle:
      return closes(w.cycle) && a.source(w.cycle.front()) == after_prefix &&
             w.mark_i < w.mark_j && w.mark_j < w.cycle.size() &&
             a.transition(w.cycle[w.mark_i]).assign &&
             a.transition(w.cycle[w.mark_j]).guard != Guard::kTrue;
    case ViolationKind::kDisclosingCycle:
      return closes(w.cycle) && a.source(w.cycle.front()) == after_prefix &&
             w.mark_i < w.cycle.size();
    case ViolationKind::kLeakingPair: {
      if (!closes(w.cycle) || !closes(w.cycle2)) return false;
      if (a.source(w.cycle.front()) != after_prefix) return false;
      return chains(w.connector, after_prefix) == a.source(w.cycle2.front());
    }
    case ViolationKind::kPrivacyViolatingPath: {
      if (w.path.empty() || !closes(w.cycle)) return false;
      const std::size_t end = chains(w.path, after_prefix);
      if (end == DipAutomaton::npos) return false;
      if (w.clause == 'c') return a.source(w.cycle.front()) == after_prefix;
      return a.source(w.cycle.front()) == end;
    }
  }
  return false;
}

inline json_util::Json refs_to_json(const DipAutomaton& a,
                                    const std::vector<std::size_t>& seq) {
  auto arr = json_util::Json::array();
  for (std::size_t t : seq) arr.push_back(to_json(a.ref(t)));
  return arr;
}

inline json_util::Json to_json(const DipAutomaton& a, const ViolationWitness& w) {
  json_util::Json j;
  j["kind"] = std::string(to_string(w.kind));
  switch (w.kind) {
    case ViolationKind::kLeakingCycle:
      j["prefix"] = refs_to_json(a, w.prefix);
      j["cycle"] = refs_to_json(a, w.cycle);
      j["marks"] = {{"assign", w.mark_i}, {"guard", w.mark_j}};
      break;
    case ViolationKind::kLeakingPair:
      j["polarity"] = std::string(to_string(w.polarity));
      j["prefix"] = refs_to_json(a, w.prefix);
      j["cycles"] = {refs_to_json(a, w.cycle), refs_to_json(a, w.cycle2)};
      j["connector"] = refs_to_json(a, w.connector);
      break;
    case ViolationKind::kDisclosingCycle:
      j["prefix"] = refs_to_json(a, w.prefix);
      j["cycle"] = refs_to_json(a, w.cycle);
      j["marks"] = {{"output", w.mark_i}};
      break;
    case ViolationKind::kPrivacyViolatingPath:
      j["clause"] = std::string(1, w.clause);
      j["polarity"] = std::string(to_string(w.polarity));
      j["prefix"] = refs_to_json(a, w.prefix);
      j["path"] = refs_to_json(a, w.path);
      j["cycle"] = refs_to_json(a, w.cycle);
      break;
  }
  return j;
}

inline json_util::Json to_json(const DipAutomaton& a, const Verdict& v) {
  json_util::Json j;
  if (v.well_formed()) {
    j["status"] = "well_formed";
    j["weight"] = to_string(v.weight());
  } else {
    j["status"] = "violation";
    j["witness"] = to_json(a, v.witness());
  }
  return j;
}

}  // namespace dipcheck
