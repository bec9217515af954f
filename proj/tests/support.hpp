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

// Shared helpers for the test binaries.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dipcheck/automaton.hpp"
#include "dipcheck/path.hpp"
#include "dipcheck/pathprob.hpp"

namespace dipcheck::testing {

inline std::string state_name(int i) { return "s" + std::to_string(i); }

// A random automaton satisfying every validation rule. States are s0..s{n-1}
// with s0 the initial state; non-initial transitions assign with
// probability `assign_rate`.
inline RawAutomaton random_automaton(std::mt19937_64& rng, int n,
                                     double assign_rate = 0.5) {
  std::bernoulli_distribution assigns(assign_rate);
  std::uniform_int_distribution<int> pick_state(0, n - 1);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> shape(0, 4);
  const Rational scales[] = {Rational(1, 4), Rational(1, 2), Rational(1),
                             Rational(2, 3)};
  std::uniform_int_distribution<int> pick_scale(0, 3);
  std::uniform_int_distribution<int> pick_mu(-2, 2);

  auto random_output = [&](bool allow_real) {
    std::uniform_int_distribution<int> o(0, allow_real ? 3 : 1);
    switch (o(rng)) {
      case 0: return OutputLabel::symbol("a");
      case 1: return OutputLabel::symbol("b");
      case 2: return OutputLabel::real(RealVar::kSample);
      default: return OutputLabel::real(RealVar::kSampleAux);
    }
  };

  RawAutomaton raw;
  raw.name = "random";
  raw.init = state_name(0);
  for (int i = 0; i < n; ++i) {
    const bool input = i == 0 ? coin(rng) == 1 : shape(rng) != 0;
    raw.states.push_back({state_name(i),
                          input ? StateKind::kInput : StateKind::kNonInput,
                          {scales[pick_scale(rng)], Rational(pick_mu(rng)),
                           scales[pick_scale(rng)], Rational(pick_mu(rng))}});
  }
  raw.transitions.push_back({state_name(0), Guard::kTrue,
                             state_name(pick_state(rng)), random_output(true),
                             true});
  for (int i = 1; i < n; ++i) {
    const bool input = raw.states[i].kind == StateKind::kInput;
    const int s = input ? shape(rng) : coin(rng);
    const std::string from = state_name(i);
    if (s == 1) {
      raw.transitions.push_back({from, Guard::kTrue, state_name(pick_state(rng)),
                                 random_output(true), assigns(rng)});
    } else if (s == 2 || s == 3) {
      raw.transitions.push_back({from, s == 2 ? Guard::kGe : Guard::kLt,
                                 state_name(pick_state(rng)),
                                 random_output(true), assigns(rng)});
    } else if (s == 4) {
      auto real_side = random_output(true);
      auto sym_side = OutputLabel::symbol(real_side.is_symbol() &&
                                                  real_side.sym() == "a"
                                              ? "b"
                                              : "a");
      const bool real_on_ge = coin(rng) == 1;
      raw.transitions.push_back({from, Guard::kGe, state_name(pick_state(rng)),
                                 real_on_ge ? real_side : sym_side, assigns(rng)});
      raw.transitions.push_back({from, Guard::kLt, state_name(pick_state(rng)),
                                 real_on_ge ? sym_side : real_side, assigns(rng)});
    }
  }
  return raw;
}

// SVT with the q1 loop emitting the sample: the smallest disclosing cycle.
inline RawAutomaton disclosing_svt() {
  auto raw = builtin_raw("svt");
  raw.name = "svt_disclosing";
  for (auto& t : raw.transitions) {
    if (t.source == "q1" && t.guard == Guard::kLt) {
      t.output = OutputLabel::real(RealVar::kSample);
    }
  }
  return raw;
}

// Reflexive-transitive closure over the transitions accepted by `keep`,
// computed by Floyd-Warshall. Used as an oracle independent of the SCC code.
template <typename Keep>
std::vector<std::vector<bool>> closure(const DipAutomaton& a, Keep keep) {
  const std::size_t n = a.num_states();
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t v = 0; v < n; ++v) r[v][v] = true;
  for (std::size_t t = 0; t < a.num_transitions(); ++t) {
    if (keep(a.transition(t))) r[a.source(t)][a.target(t)] = true;
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!r[i][k]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (r[k][j]) r[i][j] = true;
      }
    }
  }
  return r;
}

// Pr[X1 <= X2] for X_i ~ Lap(k_i, mu_i) by nested adaptive quadrature of the
// joint density over {x1 <= x2}. Tails beyond 40/k of the mean hold less
// than e^{-40} of the mass and are dropped; integrands are split at kinks.
inline double prob_le_quadrature(double k1, double mu1, double k2, double mu2) {
  using boost::math::quadrature::gauss_kronrod;
  auto pdf = [](double k, double mu, double x) { return k / 2 * std::exp(-k * std::abs(x - mu)); };
  auto piecewise = [](const std::function<double(double)>& f, double lo, double hi,
                      std::vector<double> kinks) {
    std::vector<double> cuts{lo};
    for (double c : kinks) {
      if (c > lo && c < hi) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(hi);
    double total = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      if (cuts[i] < cuts[i + 1]) {
        total += gauss_kronrod<double, 31>::integrate(f, cuts[i], cuts[i + 1], 10, 1e-13);
      }
    }
    return total;
  };
  const double lo1 = mu1 - 40 / k1;
  const double lo = std::min(lo1, mu2 - 40 / k2);
  const double hi = std::max(mu1 + 40 / k1, mu2 + 40 / k2);
  auto inner = [&](double y) {
    if (y <= lo1) return 0.0;
    return piecewise([&](double x) { return pdf(k1, mu1, x); }, lo1, y, {mu1});
  };
  return piecewise([&](double y) { return pdf(k2, mu2, y) * inner(y); }, lo, hi, {mu1, mu2});
}

// A random path from init of the given length. Inputs are uniform on
// [-2, 2]; real outputs get a random interval, sometimes the whole line.
inline std::vector<RawStep> random_walk(const DipAutomaton& a, std::mt19937_64& rng,
                                        std::size_t length) {
  std::uniform_real_distribution<double> input(-2, 2);
  std::uniform_int_distribution<int> shape(0, 3);
  std::vector<RawStep> steps;
  std::size_t at = a.init();
  for (std::size_t i = 0; i < length; ++i) {
    const auto out = a.outgoing(at);
    if (out.empty()) break;
    std::uniform_int_distribution<std::size_t> pick(0, out.size() - 1);
    const std::size_t t = out[pick(rng)];
    const OutputLabel& label = a.transition(t).output;
    RawStep s;
    if (a.is_input(at)) s.input = input(rng);
    if (label.is_symbol()) {
      s.observed = Observed::symbol(label.sym());
    } else {
      s.observed = Observed::real(label.var());
      switch (shape(rng)) {
        case 0: break;
        case 1: s.observed.lo = input(rng); break;
        case 2: s.observed.hi = input(rng); break;
        default: {
          const double x = input(rng), y = input(rng);
          s.observed.lo = std::min(x, y) - 0.25;
          s.observed.hi = std::max(x, y) + 0.25;
        }
      }
    }
    steps.push_back(s);
    at = a.target(t);
  }
  return steps;
}

struct SpotCheck {
  std::size_t pairs = 0;
  std::size_t failures = 0;
  // Largest p1 / (e^{w eps} p2) seen.
  double worst = 0;
};

// Every path shape from init of length 1..max_len (real outputs observed on
// a fixed set of intervals), each with `fuzz` adjacent input pairs; checks
// pathprob(rho1) <= e^{w eps} pathprob(rho2) both ways.
inline SpotCheck dp_spot_check(const DipAutomaton& a, double w, const std::vector<double>& eps,
                               std::size_t max_len = 8, std::uint64_t seed = 99,
                               int fuzz = 8) {
  const std::vector<std::pair<double, double>> intervals = {
      {-kInf, kInf}, {0, kInf}, {-1, 1}};
  std::vector<std::vector<RawStep>> shapes;
  std::function<void(std::size_t, std::vector<RawStep>&)> grow =
      [&](std::size_t at, std::vector<RawStep>& cur) {
        if (!cur.empty()) shapes.push_back(cur);
        if (cur.size() == max_len) return;
        for (std::size_t t : a.outgoing(at)) {
          const OutputLabel& label = a.transition(t).output;
          RawStep s;
          if (a.is_input(at)) s.input = 0.0;
          if (label.is_symbol()) {
            s.observed = Observed::symbol(label.sym());
            cur.push_back(s);
            grow(a.target(t), cur);
            cur.pop_back();
            continue;
          }
          for (auto [lo, hi] : intervals) {
            s.observed = Observed::real(label.var(), lo, hi);
            cur.push_back(s);
            grow(a.target(t), cur);
            cur.pop_back();
          }
        }
      };
  std::vector<RawStep> cur;
  grow(a.init(), cur);

  std::mt19937_64 rng(seed);
  const double base[] = {-1, -0.5, 0, 0.5, 1, 2};
  const double delta[] = {-1, -0.5, 0, 0.5, 1};
  std::uniform_int_distribution<int> pick_base(0, 5), pick_delta(0, 4);
  SpotCheck out;
  for (const auto& shape : shapes) {
    for (int f = 0; f < fuzz; ++f) {
      auto s1 = shape, s2 = shape;
      for (std::size_t i = 0; i < shape.size(); ++i) {
        if (!shape[i].input) continue;
        const double x = base[pick_base(rng)];
        const double d = f == 0 ? 1 : f == 1 ? -1 : delta[pick_delta(rng)];
        s1[i].input = x;
        s2[i].input = x + d;
      }
      const Path p1 = check_path(a, s1);
      const Path p2 = check_path(a, s2);
      ++out.pairs;
      for (double e : eps) {
        const double v1 = pathprob_exact(p1, e).value;
        const double v2 = pathprob_exact(p2, e).value;
        const double bound = std::exp(w * e);
        for (auto [x, y] : {std::pair{v1, v2}, std::pair{v2, v1}}) {
          if (x > bound * y * (1 + 1e-9)) ++out.failures;
          if (y > 0) out.worst = std::max(out.worst, x / (bound * y));
        }
      }
    }
  }
  return out;
}

}  // namespace dipcheck::testing
