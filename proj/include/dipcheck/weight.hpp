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
#include <vector>

#include "dipcheck/automaton.hpp"
#include "dipcheck/graph.hpp"
#include "dipcheck/rational.hpp"

namespace dipcheck {

struct CostedTransition {
  std::size_t transition;
  TransitionRef ref;
  bool critical;
  Rational cost;
};

// A transition is critical when it lies on no cycle, i.e. its endpoints sit
// in different SCCs. Self-loops are never critical.
inline std::vector<bool> critical_flags(const UnderlyingGraph& g,
                                        const SccDecomposition& s) {
  std::vector<bool> out(g.num_edges(), false);
  for (std::size_t e : s.cross_edges) out[e] = true;
  return out;
}

inline std::vector<TransitionRef> critical_transitions(const DipAutomaton& a) {
  const auto g = build_graph(a);
  const auto s = scc(g);
  std::vector<TransitionRef> refs;
  for (std::size_t e : s.cross_edges) refs.push_back(a.ref(e));
  return refs;
}

// Cost of transition t assuming it is critical; uses the source's scales.
inline Rational critical_cost(const DipAutomaton& a, std::size_t t) {
  const auto& params = a.state(a.source(t)).params;
  if (!a.is_input_transition(t)) return params.d;
  const auto& out = a.transition(t).output;
  if (!out.is_symbol() && out.var() == RealVar::kSampleAux) {
    return 2 * params.d + params.d_aux;
  }
  return 2 * params.d;
}

inline std::vector<CostedTransition> cost_table(const DipAutomaton& a) {
  const auto g = build_graph(a);
  const auto s = scc(g);
  const auto crit = critical_flags(g, s);
  std::vector<CostedTransition> out;
  out.reserve(a.num_transitions());
  for (std::size_t t = 0; t < a.num_transitions(); ++t) {
    out.push_back({t, a.ref(t), crit[t],
                   crit[t] ? critical_cost(a, t) : Rational(0)});
  }
  return out;
}

inline Rational cost(const DipAutomaton& a, std::size_t t) {
  return cost_table(a)[t].cost;
}

enum class WeightScope { kFromInit, kAllPaths };

// Longest cost-weighted path in the condensation DAG. kFromInit starts at
// init's component; kAllPaths allows every component as a start.
inline Rational weight(const DipAutomaton& a, const UnderlyingGraph& g,
                       const SccDecomposition& s,
                       WeightScope scope = WeightScope::kFromInit) {
  const std::size_t c = s.num_components();
  std::vector<std::vector<std::size_t>> out_edges(c);
  for (std::size_t e : s.cross_edges) {
    out_edges[s.component[g.edge(e).source]].push_back(e);
  }
  std::vector<bool> live(c, scope == WeightScope::kAllPaths);
  live[s.component[g.init()]] = true;
  std::vector<Rational> best(c, Rational(0));
  Rational result(0);
  for (std::size_t comp : s.topo_order) {
    if (!live[comp]) continue;
    if (best[comp] > result) result = best[comp];
    for (std::size_t e : out_edges[comp]) {
      const std::size_t next = s.component[g.edge(e).target];
      const Rational candidate = best[comp] + critical_cost(a, e);
      if (!live[next] || candidate > best[next]) best[next] = candidate;
      live[next] = true;
    }
  }
  return result;
}

inline Rational weight(const DipAutomaton& a,
                       WeightScope scope = WeightScope::kFromInit) {
  const auto g = build_graph(a);
  return weight(a, g, scc(g), scope);
}

}  // namespace dipcheck
