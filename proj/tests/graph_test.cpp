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

#include <optional>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "dipcheck/automaton.hpp"
#include "dipcheck/graph.hpp"
#include "dipcheck/wellformed.hpp"
#include "support.hpp"

namespace dipcheck {
namespace {

using testing::closure;

TEST(Graph, SvtBasics) {
  const auto a = builtin("svt");
  const auto g = build_graph(a);
  EXPECT_EQ(g.num_vertices(), 3u);
  EXPECT_EQ(g.num_edges(), 3u);
  for (std::size_t v = 0; v < 3; ++v) EXPECT_TRUE(g.reachable(v));
  const auto s = scc(g);
  EXPECT_EQ(s.num_components(), 3u);
  const auto flags = cycle_flags(g, s);
  const auto q1 = *a.state_index("q1");
  EXPECT_TRUE(flags.in_l_cycle[q1]);
  EXPECT_FALSE(flags.in_g_cycle[q1]);
  EXPECT_TRUE(flags.on_cycle[a.delta(q1, Guard::kLt)]);
  EXPECT_FALSE(flags.on_cycle[a.delta(q1, Guard::kGe)]);
}

TEST(Graph, TwoPhaseShape) {
  const auto g = build_graph(builtin("svt_two_phase"));
  EXPECT_EQ(g.num_vertices(), 4u);
  EXPECT_EQ(g.num_edges(), 5u);
}

TEST(Graph, UnreachableState) {
  auto raw = builtin_raw("svt");
  raw.states.push_back({"z", StateKind::kInput, {1, 0, 0, 0}});
  raw.transitions.push_back({"z", Guard::kTrue, "q1", OutputLabel::symbol("bot"), false});
  const auto a = validate_or_throw(raw);
  const auto g = build_graph(a);
  EXPECT_FALSE(g.reachable(*a.state_index("z")));
  EXPECT_TRUE(g.reachable(*a.state_index("q2")));
}

TEST(Graph, SingletonAndMutualComponents) {
  RawAutomaton raw;
  raw.name = "m";
  raw.init = "a";
  raw.states = {{"a", StateKind::kNonInput, {1, 0, 0, 0}},
                {"b", StateKind::kInput, {1, 0, 0, 0}},
                {"c", StateKind::kInput, {1, 0, 0, 0}},
                {"d", StateKind::kInput, {1, 0, 0, 0}}};
  raw.transitions = {{"a", Guard::kTrue, "b", OutputLabel::symbol("x"), true},
                     {"b", Guard::kTrue, "c", OutputLabel::symbol("x"), false},
                     {"c", Guard::kTrue, "b", OutputLabel::symbol("x"), false}};
  const auto a = validate_or_throw(raw);
  const auto g = build_graph(a);
  const auto s = scc(g);
  EXPECT_EQ(s.num_components(), 3u);
  EXPECT_TRUE(s.same(1, 2));
  EXPECT_FALSE(s.same(0, 1));
  const auto flags = cycle_flags(g, s);
  EXPECT_FALSE(flags.on_cycle[a.delta(0, Guard::kTrue)]);
  EXPECT_TRUE(flags.on_cycle[a.delta(1, Guard::kTrue)]);
  // d has no edges at all: a singleton component that is not a cycle.
  EXPECT_EQ(s.members[s.component[3]].size(), 1u);
}

TEST(Graph, TopologicalOrder) {
  std::mt19937_64 rng(11);
  for (int iter = 0; iter < 200; ++iter) {
    const auto a = validate_or_throw(testing::random_automaton(rng, 2 + iter % 9));
    const auto g = build_graph(a);
    const auto s = scc(g);
    std::vector<std::size_t> pos(s.num_components());
    for (std::size_t i = 0; i < s.topo_order.size(); ++i) pos[s.topo_order[i]] = i;
    for (std::size_t e : s.cross_edges) {
      EXPECT_LT(pos[s.component[g.edge(e).source]], pos[s.component[g.edge(e).target]]);
    }
    const auto r = closure(a, [](const TransitionDecl&) { return true; });
    for (std::size_t u = 0; u < a.num_states(); ++u) {
      for (std::size_t v = 0; v < a.num_states(); ++v) {
        EXPECT_EQ(s.same(u, v), r[u][v] && r[v][u]);
      }
    }
  }
}

// Witness kinds expected from closure-matrix evaluation of each definition.
std::optional<ViolationKind> oracle_kind(const DipAutomaton& a) {
  const auto all = closure(a, [](const TransitionDecl&) { return true; });
  const auto ag = closure(a, [](const TransitionDecl& t) {
    return !t.assign || t.guard == Guard::kGe;
  });
  const auto al = closure(a, [](const TransitionDecl& t) {
    return !t.assign || t.guard == Guard::kLt;
  });
  const std::size_t n = a.num_states();
  const std::size_t m = a.num_transitions();
  auto on_cycle = [&](std::size_t t) { return all[a.target(t)][a.source(t)]; };
  auto same = [&](std::size_t u, std::size_t v) { return all[u][v] && all[v][u]; };
  auto reach = [&](std::size_t v) { return all[a.init()][v]; };
  auto in_cycle_with = [&](std::size_t v, Guard g) {
    for (std::size_t t = 0; t < m; ++t) {
      if (a.transition(t).guard == g && on_cycle(t) && same(v, a.source(t))) return true;
    }
    return false;
  };
  auto sample = [&](std::size_t t) {
    return a.transition(t).output.outputs(RealVar::kSample);
  };

  for (std::size_t t1 = 0; t1 < m; ++t1) {
    for (std::size_t t2 = 0; t2 < m; ++t2) {
      if (a.transition(t1).assign && a.transition(t2).guard != Guard::kTrue &&
          on_cycle(t1) && on_cycle(t2) && same(a.source(t1), a.source(t2)) &&
          reach(a.source(t1))) {
        return ViolationKind::kLeakingCycle;
      }
    }
  }
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (!reach(u)) continue;
      if (in_cycle_with(u, Guard::kLt) && in_cycle_with(v, Guard::kGe) && ag[u][v]) {
        return ViolationKind::kLeakingPair;
      }
      if (in_cycle_with(u, Guard::kGe) && in_cycle_with(v, Guard::kLt) && al[u][v]) {
        return ViolationKind::kLeakingPair;
      }
    }
  }
  for (std::size_t t = 0; t < m; ++t) {
    if (on_cycle(t) && reach(a.source(t)) && a.is_input_transition(t) &&
        a.transition(t).output.is_real()) {
      return ViolationKind::kDisclosingCycle;
    }
  }
  for (std::size_t t = 0; t < m; ++t) {
    if (!sample(t) || !reach(a.source(t))) continue;
    const auto& tr = a.transition(t);
    for (std::size_t v = 0; v < n; ++v) {
      const bool ag_lead = tr.assign || tr.guard == Guard::kLt;
      const bool al_lead = tr.assign || tr.guard == Guard::kGe;
      if (ag_lead && ag[a.target(t)][v] && in_cycle_with(v, Guard::kGe)) {
        return ViolationKind::kPrivacyViolatingPath;
      }
      if (al_lead && al[a.target(t)][v] && in_cycle_with(v, Guard::kLt)) {
        return ViolationKind::kPrivacyViolatingPath;
      }
      if (reach(v) && tr.guard == Guard::kGe && in_cycle_with(v, Guard::kLt) &&
          ag[v][a.source(t)]) {
        return ViolationKind::kPrivacyViolatingPath;
      }
      if (reach(v) && tr.guard == Guard::kLt && in_cycle_with(v, Guard::kGe) &&
          al[v][a.source(t)]) {
        return ViolationKind::kPrivacyViolatingPath;
      }
    }
  }
  return std::nullopt;
}

// Checks the defining properties of a witness beyond plain replay.
void expect_witness_shape(const DipAutomaton& a, const ViolationWitness& w) {
  ASSERT_TRUE(witness_replays(a, w));
  auto guard = [&](std::size_t t) { return a.transition(t).guard; };
  auto has_guard = [&](const std::vector<std::size_t>& seq, Guard g) {
    for (std::size_t t : seq) {
      if (guard(t) == g) return true;
    }
    return false;
  };
  auto restricted = [&](const std::vector<std::size_t>& seq, Polarity p) {
    const Guard allowed = p == Polarity::kAG ? Guard::kGe : Guard::kLt;
    for (std::size_t t : seq) {
      if (a.transition(t).assign && guard(t) != allowed) return false;
    }
    return true;
  };
  switch (w.kind) {
    case ViolationKind::kLeakingCycle:
      for (std::size_t k = w.mark_i + 1; k < w.mark_j; ++k) {
        EXPECT_FALSE(a.transition(w.cycle[k]).assign);
        EXPECT_EQ(guard(w.cycle[k]), Guard::kTrue);
      }
      break;
    case ViolationKind::kLeakingPair: {
      const Guard first = w.polarity == Polarity::kAG ? Guard::kLt : Guard::kGe;
      const Guard second = w.polarity == Polarity::kAG ? Guard::kGe : Guard::kLt;
      EXPECT_TRUE(has_guard(w.cycle, first));
      EXPECT_TRUE(has_guard(w.cycle2, second));
      EXPECT_TRUE(restricted(w.connector, w.polarity));
      break;
    }
    case ViolationKind::kDisclosingCycle:
      EXPECT_TRUE(a.is_input_transition(w.cycle[w.mark_i]));
      EXPECT_TRUE(a.transition(w.cycle[w.mark_i]).output.is_real());
      break;
    case ViolationKind::kPrivacyViolatingPath: {
      const bool ag = w.polarity == Polarity::kAG;
      const auto& first = a.transition(w.path.front());
      const auto& last = a.transition(w.path.back());
      if (w.clause == 'a') {
        EXPECT_TRUE(first.assign);
        EXPECT_TRUE(first.output.outputs(RealVar::kSample));
        EXPECT_TRUE(restricted({w.path.begin() + 1, w.path.end()}, w.polarity));
        EXPECT_TRUE(has_guard(w.cycle, ag ? Guard::kGe : Guard::kLt));
      } else if (w.clause == 'b') {
        EXPECT_EQ(first.guard, ag ? Guard::kLt : Guard::kGe);
        EXPECT_TRUE(first.output.outputs(RealVar::kSample));
        EXPECT_TRUE(restricted(w.path, w.polarity));
        EXPECT_TRUE(has_guard(w.cycle, ag ? Guard::kGe : Guard::kLt));
      } else {
        ASSERT_EQ(w.clause, 'c');
        EXPECT_EQ(last.guard, ag ? Guard::kGe : Guard::kLt);
        EXPECT_TRUE(last.output.outputs(RealVar::kSample));
        EXPECT_TRUE(restricted(w.path, w.polarity));
        EXPECT_TRUE(has_guard(w.cycle, ag ? Guard::kLt : Guard::kGe));
      }
      break;
    }
  }
}

TEST(WellFormed, BuiltinMatrix) {
  EXPECT_TRUE(check_well_formed(builtin("svt")).well_formed());
  EXPECT_TRUE(check_well_formed(builtin("numeric_sparse")).well_formed());
  const auto sort = check_well_formed(builtin("sort"));
  ASSERT_FALSE(sort.well_formed());
  EXPECT_EQ(sort.witness().kind, ViolationKind::kLeakingCycle);
  const auto two = check_well_formed(builtin("svt_two_phase"));
  ASSERT_FALSE(two.well_formed());
  EXPECT_EQ(two.witness().kind, ViolationKind::kLeakingPair);
  const auto mod = check_well_formed(builtin("numeric_sparse_mod"));
  ASSERT_FALSE(mod.well_formed());
  EXPECT_EQ(mod.witness().kind, ViolationKind::kPrivacyViolatingPath);
}

TEST(WellFormed, SortWitness) {
  const auto a = builtin("sort");
  const auto w = check_well_formed(a).witness();
  const auto loop = a.delta(*a.state_index("q1"), Guard::kLt);
  EXPECT_EQ(w.prefix, std::vector<std::size_t>{a.delta(a.init(), Guard::kTrue)});
  EXPECT_EQ(w.cycle, (std::vector<std::size_t>{loop, loop}));
  EXPECT_EQ(w.mark_i, 0u);
  EXPECT_EQ(w.mark_j, 1u);
  expect_witness_shape(a, w);
}

TEST(WellFormed, TwoPhaseWitness) {
  const auto a = builtin("svt_two_phase");
  const auto w = check_well_formed(a).witness();
  const auto q1 = *a.state_index("q1");
  const auto q2 = *a.state_index("q2");
  EXPECT_EQ(w.polarity, Polarity::kAG);
  EXPECT_EQ(w.cycle, std::vector<std::size_t>{a.delta(q1, Guard::kLt)});
  EXPECT_EQ(w.cycle2, std::vector<std::size_t>{a.delta(q2, Guard::kGe)});
  EXPECT_EQ(w.connector, std::vector<std::size_t>{a.delta(q1, Guard::kGe)});
  expect_witness_shape(a, w);
}

TEST(WellFormed, NumericSparseModWitness) {
  const auto a = builtin("numeric_sparse_mod");
  const auto w = check_well_formed(a).witness();
  const auto q1 = *a.state_index("q1");
  EXPECT_EQ(w.clause, 'c');
  EXPECT_EQ(w.polarity, Polarity::kAG);
  EXPECT_EQ(w.cycle, std::vector<std::size_t>{a.delta(q1, Guard::kLt)});
  EXPECT_EQ(w.path, std::vector<std::size_t>{a.delta(q1, Guard::kGe)});
  expect_witness_shape(a, w);
}

TEST(WellFormed, DisclosingMutant) {
  const auto a = validate_or_throw(testing::disclosing_svt());
  const auto v = check_well_formed(a);
  ASSERT_FALSE(v.well_formed());
  EXPECT_EQ(v.witness().kind, ViolationKind::kDisclosingCycle);
  const auto q1 = *a.state_index("q1");
  EXPECT_EQ(v.witness().cycle, std::vector<std::size_t>{a.delta(q1, Guard::kLt)});
  expect_witness_shape(a, v.witness());
}

TEST(WellFormed, NonInputSampleLoopIsNotDisclosing) {
  RawAutomaton raw;
  raw.name = "n";
  raw.init = "a";
  raw.states = {{"a", StateKind::kNonInput, {1, 0, 0, 0}},
                {"b", StateKind::kNonInput, {1, 0, 0, 0}}};
  raw.transitions = {
      {"a", Guard::kTrue, "b", OutputLabel::symbol("x"), true},
      {"b", Guard::kTrue, "b", OutputLabel::real(RealVar::kSample), false}};
  const auto v = check_well_formed(validate_or_throw(raw));
  EXPECT_TRUE(v.well_formed());
}

TEST(WellFormed, TrueAssignLoopIsNotLeaking) {
  RawAutomaton raw;
  raw.name = "n";
  raw.init = "a";
  raw.states = {{"a", StateKind::kNonInput, {1, 0, 0, 0}},
                {"b", StateKind::kInput, {1, 0, 0, 0}}};
  raw.transitions = {{"a", Guard::kTrue, "b", OutputLabel::symbol("x"), true},
                     {"b", Guard::kTrue, "b", OutputLabel::symbol("y"), true}};
  EXPECT_TRUE(check_well_formed(validate_or_throw(raw)).well_formed());
}

TEST(WellFormed, SelfLeakingPair) {
  // q1 has a ge loop and an lt loop through a helper state: one SCC that is
  // both an L- and a G-cycle.
  RawAutomaton raw;
  raw.name = "selfpair";
  raw.init = "q0";
  raw.states = {{"q0", StateKind::kNonInput, {1, 0, 0, 0}},
                {"q1", StateKind::kInput, {1, 0, 0, 0}},
                {"q2", StateKind::kInput, {1, 0, 0, 0}}};
  raw.transitions = {{"q0", Guard::kTrue, "q1", OutputLabel::symbol("x"), true},
                     {"q1", Guard::kGe, "q1", OutputLabel::symbol("x"), false},
                     {"q1", Guard::kLt, "q2", OutputLabel::symbol("y"), false},
                     {"q2", Guard::kTrue, "q1", OutputLabel::symbol("x"), false}};
  const auto a = validate_or_throw(raw);
  const auto v = check_well_formed(a);
  ASSERT_FALSE(v.well_formed());
  EXPECT_EQ(v.witness().kind, ViolationKind::kLeakingPair);
  EXPECT_TRUE(v.witness().connector.empty());
  expect_witness_shape(a, v.witness());
}

TEST(WellFormed, NoSampleOutputsMeansNoViolatingPath) {
  for (auto name : {"svt", "svt_two_phase", "sort"}) {
    const Analysis an(builtin(name));
    EXPECT_FALSE(find_privacy_violating_path(an)) << name;
  }
}

TEST(WellFormed, AgreesWithClosureOracle) {
  std::mt19937_64 rng(2024);
  int counts[5] = {0, 0, 0, 0, 0};
  for (int iter = 0; iter < 10000; ++iter) {
    const double assign_rate = iter % 2 == 0 ? 0.5 : 0.1;
    const auto a =
        validate_or_throw(testing::random_automaton(rng, 2 + iter % 7, assign_rate));
    const auto v = check_well_formed(a);
    const auto expected = oracle_kind(a);
    if (!expected) {
      EXPECT_TRUE(v.well_formed()) << serialize(a);
      ++counts[4];
      continue;
    }
    ASSERT_FALSE(v.well_formed()) << serialize(a);
    EXPECT_EQ(v.witness().kind, *expected) << serialize(a);
    expect_witness_shape(a, v.witness());
    ++counts[static_cast<int>(*expected)];
  }
  // The generator must exercise every outcome.
  for (int c : counts) EXPECT_GT(c, 50);
}

TEST(WellFormed, InvariantUnderMeansRenamingAndOrder) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> mu(-50, 50);
  for (int iter = 0; iter < 300; ++iter) {
    auto raw = testing::random_automaton(rng, 2 + iter % 6);
    const auto base = check_well_formed(validate_or_throw(raw));

    auto perturbed = raw;
    for (auto& s : perturbed.states) {
      s.params.mu = Rational(mu(rng), 7);
      s.params.mu_aux = Rational(mu(rng), 3);
    }
    std::shuffle(perturbed.transitions.begin(), perturbed.transitions.end(), rng);
    const auto pv = check_well_formed(validate_or_throw(perturbed));
    ASSERT_EQ(pv.well_formed(), base.well_formed());
    if (base.well_formed()) {
      EXPECT_EQ(pv.weight(), base.weight());
    } else {
      EXPECT_EQ(pv.witness(), base.witness());
    }

    // Renaming with an order-preserving map keeps the witness identical;
    // an arbitrary renaming keeps the kind.
    auto renamed = raw;
    auto rename = [](std::string& id) { id = "z" + id; };
    for (auto& s : renamed.states) rename(s.id);
    for (auto& t : renamed.transitions) {
      rename(t.source);
      rename(t.target);
    }
    rename(renamed.init);
    const auto rv = check_well_formed(validate_or_throw(renamed));
    ASSERT_EQ(rv.well_formed(), base.well_formed());
    if (!base.well_formed()) EXPECT_EQ(rv.witness(), base.witness());
  }
}

TEST(WellFormed, VerdictJsonIsDeterministic) {
  for (auto name : kBuiltinNames) {
    const auto a = builtin(name);
    EXPECT_EQ(to_json(a, check_well_formed(a)).dump(),
              to_json(a, check_well_formed(a)).dump());
  }
  const auto svt = builtin("svt");
  const auto j = to_json(svt, check_well_formed(svt));
  EXPECT_EQ(j["status"], "well_formed");
  EXPECT_EQ(j["weight"], "1");
  const auto sort = builtin("sort");
  const auto k = to_json(sort, check_well_formed(sort));
  EXPECT_EQ(k["status"], "violation");
  EXPECT_EQ(k["witness"]["kind"], "leaking_cycle");
  EXPECT_EQ(k["witness"]["cycle"][0]["from"], "q1");
  EXPECT_EQ(k["witness"]["cycle"][0]["guard"], "lt");
}

}  // namespace
}  // namespace dipcheck
