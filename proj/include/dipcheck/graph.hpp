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
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "dipcheck/automaton.hpp"

namespace dipcheck {

enum class OutputKind : std::uint8_t { kFinite, kSample, kSampleAux };

inline OutputKind output_kind(const OutputLabel& o) {
  if (o.is_symbol()) return OutputKind::kFinite;
  return o.var() == RealVar::kSample ? OutputKind::kSample
                                     : OutputKind::kSampleAux;
}

// One edge per transition; edge i is transition i of the automaton.
struct Edge {
  std::size_t source;
  std::size_t target;
  Guard guard;
  bool assign;
  OutputKind output;
  bool from_input;
};

inline constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Edge-labeled graph underlying an automaton, plus reachability from init.
class UnderlyingGraph {
 public:
  explicit UnderlyingGraph(const DipAutomaton& a) : init_(a.init()) {
    const std::size_t n = a.num_states();
    out_.resize(n);
    edges_.reserve(a.num_transitions());
    for (std::size_t t = 0; t < a.num_transitions(); ++t) {
      const auto& decl = a.transition(t);
      edges_.push_back({a.source(t), a.target(t), decl.guard, decl.assign,
                        output_kind(decl.output), a.is_input_transition(t)});
      out_[a.source(t)].push_back(t);
    }
    // Successors in ascending (target id, guard) order so every search
    // takes the lexicographically smallest next state first.
    for (auto& list : out_) {
      std::sort(list.begin(), list.end(), [this](std::size_t x, std::size_t y) {
        return std::tie(edges_[x].target, edges_[x].guard) <
               std::tie(edges_[y].target, edges_[y].guard);
      });
    }

    reach_parent_.assign(n, kNone);
    reachable_.assign(n, false);
    std::deque<std::size_t> queue{init_};
    reachable_[init_] = true;
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop_front();
      for (std::size_t e : out_[v]) {
        const std::size_t w = edges_[e].target;
        if (!reachable_[w]) {
          reachable_[w] = true;
          reach_parent_[w] = e;
          queue.push_back(w);
        }
      }
    }
  }

  std::size_t num_vertices() const { return out_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t init() const { return init_; }
  const Edge& edge(std::size_t e) const { return edges_[e]; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::size_t>& out(std::size_t v) const { return out_[v]; }
  bool reachable(std::size_t v) const { return reachable_[v]; }

  // Shortest path of edges from init to v (empty for init itself).
  std::vector<std::size_t> prefix_to(std::size_t v) const {
    std::vector<std::size_t> path;
    while (v != init_) {
      const std::size_t e = reach_parent_[v];
      if (e == kNone) return {};
      path.push_back(e);
      v = edges_[e].source;
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

 private:
  std::size_t init_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<bool> reachable_;
  std::vector<std::size_t> reach_parent_;
};

inline UnderlyingGraph build_graph(const DipAutomaton& a) {
  return UnderlyingGraph(a);
}

struct SccDecomposition {
  std::vector<std::size_t> component;             // per vertex
  std::vector<std::vector<std::size_t>> members;  // per component, ascending
  std::vector<std::size_t> topo_order;            // sources of the DAG first
  std::vector<std::size_t> cross_edges;           // condensation edges

  std::size_t num_components() const { return members.size(); }
  bool same(std::size_t u, std::size_t v) const {
    return component[u] == component[v];
  }
};

// Tarjan's algorithm with an explicit stack; linear in |V| + |E|.
inline SccDecomposition scc(const UnderlyingGraph& g) {
  const std::size_t n = g.num_vertices();
  std::vector<std::size_t> index(n, kNone);
  std::vector<std::size_t> low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  SccDecomposition out;
  out.component.assign(n, kNone);

  struct Frame {
    std::size_t v;
    std::size_t next;  // position in g.out(v)
  };
  std::vector<Frame> call;
  std::size_t counter = 0;

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kNone) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;

    while (!call.empty()) {
      Frame& f = call.back();
      const auto& succ = g.out(f.v);
      if (f.next < succ.size()) {
        const std::size_t w = g.edge(succ[f.next++]).target;
        if (index[w] == kNone) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      const std::size_t v = f.v;
      call.pop_back();
      if (!call.empty()) {
        low[call.back().v] = std::min(low[call.back().v], low[v]);
      }
      if (low[v] == index[v]) {
        const std::size_t id = out.members.size();
        std::vector<std::size_t> members;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          out.component[w] = id;
          members.push_back(w);
        } while (w != v);
        std::sort(members.begin(), members.end());
        out.members.push_back(std::move(members));
      }
    }
  }

  // Tarjan emits components sinks first.
  out.topo_order.resize(out.members.size());
  for (std::size_t i = 0; i < out.members.size(); ++i) {
    out.topo_order[i] = out.members.size() - 1 - i;
  }
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    if (!out.same(g.edge(e).source, g.edge(e).target)) out.cross_edges.push_back(e);
  }
  return out;
}

// Which states lie on L-/G-cycles and which edges lie on some cycle.
struct CycleFlags {
  std::vector<bool> in_l_cycle;  // per vertex
  std::vector<bool> in_g_cycle;  // per vertex
  std::vector<bool> on_cycle;    // per edge

  // Per component, over internal edges only.
  std::vector<bool> has_ge;
  std::vector<bool> has_lt;
  std::vector<bool> has_assign;
};

inline CycleFlags cycle_flags(const UnderlyingGraph& g, const SccDecomposition& s) {
  CycleFlags f;
  const std::size_t c = s.num_components();
  f.has_ge.assign(c, false);
  f.has_lt.assign(c, false);
  f.has_assign.assign(c, false);
  f.on_cycle.assign(g.num_edges(), false);
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const Edge& edge = g.edge(e);
    if (!s.same(edge.source, edge.target)) continue;
    f.on_cycle[e] = true;
    const std::size_t comp = s.component[edge.source];
    if (edge.guard == Guard::kGe) f.has_ge[comp] = true;
    if (edge.guard == Guard::kLt) f.has_lt[comp] = true;
    if (edge.assign) f.has_assign[comp] = true;
  }
  f.in_l_cycle.resize(g.num_vertices());
  f.in_g_cycle.resize(g.num_vertices());
  for (std::size_t v = 0; v < g.num_vertices(); ++v) {
    f.in_l_cycle[v] = f.has_lt[s.component[v]];
    f.in_g_cycle[v] = f.has_ge[s.component[v]];
  }
  return f;
}

// Edge predicates for the restricted subgraphs: G_AG keeps assignment edges
// only when guarded by ge, G_AL only when guarded by lt.
inline bool in_ag(const Edge& e) { return !e.assign || e.guard == Guard::kGe; }
inline bool in_al(const Edge& e) { return !e.assign || e.guard == Guard::kLt; }

using EdgeFilter = std::function<bool(std::size_t)>;

// Result of a multi-source BFS: for every reached vertex the edge it was
// first reached through and the source it descends from.
struct SearchTree {
  std::vector<std::size_t> parent_edge;
  std::vector<std::size_t> origin;
  std::vector<std::size_t> order;  // vertices in visit order

  bool reached(std::size_t v) const { return origin[v] != kNone; }
};

inline SearchTree bfs(const UnderlyingGraph& g,
                      const std::vector<std::size_t>& sources,
                      const EdgeFilter& keep) {
  SearchTree t;
  t.parent_edge.assign(g.num_vertices(), kNone);
  t.origin.assign(g.num_vertices(), kNone);
  std::deque<std::size_t> queue;
  for (std::size_t s : sources) {
    if (t.origin[s] != kNone) continue;
    t.origin[s] = s;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    t.order.push_back(v);
    for (std::size_t e : g.out(v)) {
      if (!keep(e)) continue;
      const std::size_t w = g.edge(e).target;
      if (t.origin[w] != kNone) continue;
      t.origin[w] = t.origin[v];
      t.parent_edge[w] = e;
      queue.push_back(w);
    }
  }
  return t;
}

// Edge path from the search origin to v.
inline std::vector<std::size_t> trace(const UnderlyingGraph& g,
                                      const SearchTree& t, std::size_t v) {
  std::vector<std::size_t> path;
  while (t.parent_edge[v] != kNone) {
    const std::size_t e = t.parent_edge[v];
    path.push_back(e);
    v = g.edge(e).source;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

// Shortest path from `from` to `to` using only edges inside one SCC.
inline std::vector<std::size_t> path_within(const UnderlyingGraph& g,
                                            const SccDecomposition& s,
                                            std::size_t from, std::size_t to) {
  if (from == to) return {};
  const std::size_t comp = s.component[from];
  const auto tree = bfs(g, {from}, [&](std::size_t e) {
    return s.component[g.edge(e).target] == comp;
  });
  return trace(g, tree, to);
}

// A closed walk from `at` back to `at` that traverses edge `via`, which must
// be internal to at's SCC.
inline std::vector<std::size_t> closed_walk(const UnderlyingGraph& g,
                                            const SccDecomposition& s,
                                            std::size_t at, std::size_t via) {
  auto walk = path_within(g, s, at, g.edge(via).source);
  walk.push_back(via);
  auto back = path_within(g, s, g.edge(via).target, at);
  walk.insert(walk.end(), back.begin(), back.end());
  return walk;
}

// First internal edge (canonical order) of v's component with guard g.
inline std::size_t first_internal_edge(const UnderlyingGraph& gr,
                                       const SccDecomposition& s,
                                       std::size_t v, Guard guard) {
  const std::size_t comp = s.component[v];
  for (std::size_t e = 0; e < gr.num_edges(); ++e) {
    const Edge& edge = gr.edge(e);
    if (edge.guard == guard && s.component[edge.source] == comp &&
        s.component[edge.target] == comp) {
      return e;
    }
  }
  return kNone;
}

}  // namespace dipcheck
