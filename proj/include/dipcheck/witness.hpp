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
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "dipcheck/automaton.hpp"
#include "dipcheck/error.hpp"
#include "dipcheck/graph.hpp"
#include "dipcheck/path.hpp"
#include "dipcheck/pathprob.hpp"
#include "dipcheck/rational.hpp"
#include "dipcheck/wellformed.hpp"

namespace dipcheck {

// How inputs are shifted for violating-path pairs. kUnit centres samples on
// zero and moves one marked cycle transition by 1, giving a ratio of exactly
// e^{l d eps}. kHalf (clause c only) uses +-1/2 around zero on every cycle
// transition with the cycle's guard and observes the opposite half line.
enum class ShiftRecipe { kUnit, kHalf };

struct WitnessOptions {
  ShiftRecipe recipe = ShiftRecipe::kUnit;
};

struct RatioEntry {
  double eps = 0;
  double p1 = 0;
  double p2 = 0;
  double ratio = 0;
};

// Two equivalent paths from init with adjacent inputs. rho1 is the one the
// construction expects to be more likely.
struct WitnessPair {
  Path rho1;
  Path rho2;
  std::size_t ell = 0;
  ViolationKind kind = ViolationKind::kLeakingCycle;
  std::vector<RatioEntry> ratio_report;
};

namespace detail {

// A path under construction: transitions plus per-step inputs and intervals.
struct Skeleton {
  const DipAutomaton* a;
  std::vector<std::size_t> trans;
  std::vector<double> in1, in2;
  std::vector<double> lo, hi;

  explicit Skeleton(const DipAutomaton& automaton) : a(&automaton) {}

  std::size_t append(std::size_t t) {
    trans.push_back(t);
    in1.push_back(0);
    in2.push_back(0);
    lo.push_back(-kInf);
    hi.push_back(kInf);
    return trans.size() - 1;
  }
  void append_all(const std::vector<std::size_t>& ts) {
    for (std::size_t t : ts) append(t);
  }
  std::size_t state(std::size_t k) const { return a->source(trans[k]); }
  bool input(std::size_t k) const { return a->is_input(state(k)); }
  double mu(std::size_t k) const { return to_double(a->state(state(k)).params.mu); }
  const TransitionDecl& decl(std::size_t k) const { return a->transition(trans[k]); }

  std::vector<RawStep> steps(const std::vector<double>& in) const {
    std::vector<RawStep> out;
    for (std::size_t k = 0; k < trans.size(); ++k) {
      const OutputLabel& o = decl(k).output;
      RawStep s;
      if (input(k)) s.input = in[k];
      s.observed = o.is_symbol() ? Observed::symbol(o.sym()) : Observed::real(o.var(), lo[k], hi[k]);
      out.push_back(std::move(s));
    }
    return out;
  }
};

inline void require_kind(const ViolationWitness& w, ViolationKind k) {
  if (w.kind != k) {
    throw Error(ErrorCode::kWrongWitnessKind, "expected a " + std::string(to_string(k)) +
                                                  " witness, got " +
                                                  std::string(to_string(w.kind)));
  }
}

inline void require_ell(std::size_t ell) {
  if (ell < 1) throw Error(ErrorCode::kInvalidArgument, "repetition count must be at least 1");
}

inline WitnessPair finish(const Skeleton& s, std::size_t ell, ViolationKind kind) {
  const DipAutomaton& a = *s.a;
  WitnessPair p{check_path(a, s.steps(s.in1)), check_path(a, s.steps(s.in2)), ell, kind, {}};
  if (!adjacent(p.rho1.inseq(), p.rho2.inseq()) || !equivalent(p.rho1, p.rho2)) {
    throw Error(ErrorCode::kInvalidArgument, "generated pair is not adjacent and equivalent");
  }
  return p;
}

// Cycle position with the given guard, preferring input states.
inline std::size_t marked_position(const DipAutomaton& a, const std::vector<std::size_t>& cycle,
                                   Guard g) {
  std::size_t fallback = kNone;
  for (std::size_t k = 0; k < cycle.size(); ++k) {
    if (a.transition(cycle[k]).guard != g) continue;
    if (a.is_input(a.source(cycle[k]))) return k;
    if (fallback == kNone) fallback = k;
  }
  return fallback;
}

}  // namespace detail

// Prefix then the cycle l times. rho1 drives every guard true with margin 1
// relative to the last assignment; rho2 swaps the effective means of the
// marked assignment and guard in each repetition.
inline WitnessPair gen_leaking_cycle_pair(const DipAutomaton& a, const ViolationWitness& w,
                                          std::size_t ell) {
  detail::require_kind(w, ViolationKind::kLeakingCycle);
  detail::require_ell(ell);
  detail::Skeleton s(a);
  s.append_all(w.prefix);
  const std::size_t m = s.trans.size();
  const std::size_t n = w.cycle.size();
  for (std::size_t r = 0; r < ell; ++r) s.append_all(w.cycle);

  // nu[k] is the mean of the sample at step k under rho1.
  std::vector<double> nu(s.trans.size(), 0);
  std::size_t last = kNone;
  for (std::size_t k = 0; k < s.trans.size(); ++k) {
    if (s.input(k) && last != kNone) {
      const double margin = s.decl(k).guard == Guard::kGe ? 1 : -1;
      s.in1[k] = nu[last] + margin - s.mu(k);
    }
    nu[k] = s.mu(k) + (s.input(k) ? s.in1[k] : 0);
    if (s.decl(k).assign) last = k;
  }
  s.in2 = s.in1;
  const bool ge = a.transition(w.cycle[w.mark_j]).guard == Guard::kGe;
  for (std::size_t r = 0; r < ell; ++r) {
    const std::size_t i = m + r * n + w.mark_i;
    const std::size_t j = m + r * n + w.mark_j;
    if (s.input(i) && s.input(j)) {
      s.in2[i] = nu[j] - s.mu(i);
      s.in2[j] = nu[i] - s.mu(j);
    } else if (s.input(j)) {
      // The assignment's mean is fixed; move the guarded sample across it.
      s.in1[j] = nu[i] + (ge ? 0.5 : -0.5) - s.mu(j);
      s.in2[j] = nu[i] + (ge ? -0.5 : 0.5) - s.mu(j);
    } else if (s.input(i)) {
      s.in1[i] = nu[j] + (ge ? -0.5 : 0.5) - s.mu(i);
      s.in2[i] = nu[j] + (ge ? 0.5 : -0.5) - s.mu(i);
    }
  }
  return detail::finish(s, ell, w.kind);
}

// Prefix, C l times, connector, C' l times, then one step out of C' when
// there is one. Inside the cycles rho1 uses +-1/2 - mu by guard and rho2 the
// opposite sign; every other input is 0.
inline WitnessPair gen_leaking_pair_pair(const DipAutomaton& a, const ViolationWitness& w,
                                         std::size_t ell) {
  detail::require_kind(w, ViolationKind::kLeakingPair);
  detail::require_ell(ell);
  detail::Skeleton s(a);
  auto repeat = [&](const std::vector<std::size_t>& cycle) {
    for (std::size_t r = 0; r < ell; ++r) {
      for (std::size_t t : cycle) {
        const std::size_t k = s.append(t);
        const Guard g = s.decl(k).guard;
        if (!s.input(k) || g == Guard::kTrue) continue;
        const double half = g == Guard::kGe ? 0.5 : -0.5;
        s.in1[k] = half - s.mu(k);
        s.in2[k] = -half - s.mu(k);
      }
    }
  };
  s.append_all(w.prefix);
  repeat(w.cycle);
  s.append_all(w.connector);
  repeat(w.cycle2);

  const UnderlyingGraph g(a);
  const SccDecomposition c = scc(g);
  const std::size_t at = a.source(w.cycle2.front());
  for (std::size_t e : g.out(at)) {
    if (!c.same(g.edge(e).target, at)) {
      s.append(e);
      break;
    }
  }
  return detail::finish(s, ell, w.kind);
}

// Prefix then the cycle l times. Inputs centre every sample on zero; at the
// marked real-output transition rho2 moves the mean away from the observed
// half line by 1, so each repetition contributes exactly e^{d eps}.
inline WitnessPair gen_disclosing_cycle_pair(const DipAutomaton& a, const ViolationWitness& w,
                                             std::size_t ell) {
  detail::require_kind(w, ViolationKind::kDisclosingCycle);
  detail::require_ell(ell);
  detail::Skeleton s(a);
  s.append_all(w.prefix);
  const std::size_t m = s.trans.size();
  for (std::size_t r = 0; r < ell; ++r) s.append_all(w.cycle);

  const TransitionDecl& marked = a.transition(w.cycle[w.mark_i]);
  const bool aux = marked.output.outputs(RealVar::kSampleAux);
  for (std::size_t k = 0; k < s.trans.size(); ++k) {
    if (!s.input(k)) continue;
    const auto& params = a.state(s.state(k)).params;
    s.in1[k] = s.in2[k] = -to_double(params.mu);
    if (aux && k >= m && (k - m) % w.cycle.size() == w.mark_i) {
      s.in1[k] = s.in2[k] = -to_double(params.mu_aux);
    }
  }
  // Lt keeps the sample below the register, so observe (-inf, 0) instead.
  const bool below = !aux && marked.guard == Guard::kLt;
  for (std::size_t r = 0; r < ell; ++r) {
    const std::size_t k = m + r * w.cycle.size() + w.mark_i;
    if (below) {
      s.hi[k] = 0;
      s.in2[k] += 1;
    } else {
      s.lo[k] = 0;
      s.in2[k] -= 1;
    }
  }
  return detail::finish(s, ell, w.kind);
}

// Clauses a and b: prefix, the leading Sample step, the restricted path, then
// the cycle l times. Clause c: prefix, the cycle l times, then the path
// ending in the closing Sample step. The observed interval on the leading or
// closing step pins the register's sign while the cycle runs.
inline WitnessPair gen_violating_path_pair(const DipAutomaton& a, const ViolationWitness& w,
                                           std::size_t ell, const WitnessOptions& opt = {}) {
  detail::require_kind(w, ViolationKind::kPrivacyViolatingPath);
  detail::require_ell(ell);
  detail::Skeleton s(a);
  const bool trailing = w.clause == 'c';
  // Register sign during the cycle: positive for AG clauses a/b and for AL
  // clause c; non-positive otherwise.
  const bool positive = (w.polarity == Polarity::kAG) != trailing;
  const Guard cycle_guard = positive ? Guard::kGe : Guard::kLt;

  s.append_all(w.prefix);
  std::size_t signed_step = kNone;
  if (!trailing) {
    signed_step = s.trans.size();
    s.append_all(w.path);
  }
  const std::size_t m = s.trans.size();
  for (std::size_t r = 0; r < ell; ++r) s.append_all(w.cycle);
  if (trailing) {
    s.append_all(w.path);
    signed_step = s.trans.size() - 1;
  }
  // The half recipe mirrors the clause c construction only.
  const bool half = trailing && opt.recipe == ShiftRecipe::kHalf;
  if (positive != half) {
    s.lo[signed_step] = 0;
  } else {
    s.hi[signed_step] = 0;
  }

  // +1 when the cycle guard favours large samples.
  const double side = cycle_guard == Guard::kGe ? 1 : -1;
  const std::size_t mark = detail::marked_position(a, w.cycle, cycle_guard);
  for (std::size_t k = 0; k < s.trans.size(); ++k) {
    if (!s.input(k)) continue;
    const bool in_cycle = k >= m && k < m + ell * w.cycle.size();
    if (half) {
      if (in_cycle && s.decl(k).guard == cycle_guard) {
        s.in1[k] = 0.5 * side - s.mu(k);
        s.in2[k] = -0.5 * side - s.mu(k);
      }
      continue;
    }
    s.in1[k] = s.in2[k] = -s.mu(k);
    if (in_cycle && (k - m) % w.cycle.size() == mark) s.in2[k] -= side;
  }
  return detail::finish(s, ell, w.kind);
}

inline WitnessPair gen_witness_pair(const DipAutomaton& a, const ViolationWitness& w,
                                    std::size_t ell, const WitnessOptions& opt = {}) {
  switch (w.kind) {
    case ViolationKind::kLeakingCycle: return gen_leaking_cycle_pair(a, w, ell);
    case ViolationKind::kLeakingPair: return gen_leaking_pair_pair(a, w, ell);
    case ViolationKind::kDisclosingCycle: return gen_disclosing_cycle_pair(a, w, ell);
    case ViolationKind::kPrivacyViolatingPath: return gen_violating_path_pair(a, w, ell, opt);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown witness kind");
}

// Exact pathprob of both paths at each eps.
inline std::vector<RatioEntry> ratio_report(const WitnessPair& p, const std::vector<double>& eps) {
  std::vector<RatioEntry> out;
  for (double e : eps) {
    RatioEntry r{e, pathprob_exact(p.rho1, e).value, pathprob_exact(p.rho2, e).value, 0};
    r.ratio = r.p2 > 0 ? r.p1 / r.p2 : kInf;
    out.push_back(r);
  }
  return out;
}

struct RefuteOptions {
  std::vector<double> eps_grid{1, 2, 4, 8};
  std::size_t ell_max = 64;
  std::uint64_t mc_samples = 1000000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  bool confirm = true;
  WitnessOptions witness;
};

struct McCheck {
  ProbResult estimate;
  double exact = 0;
  bool rare_event = false;
  bool agrees = false;
};

// Outcome of the simulation check on a hit. Paths this unlikely are rare
// events: zero hits are expected and the check says nothing.
enum class McStatus { kSkipped, kConfirmed, kRareEvent, kDisagrees };

inline std::string_view to_string(McStatus s) {
  switch (s) {
    case McStatus::kSkipped: return "skipped";
    case McStatus::kConfirmed: return "confirmed";
    case McStatus::kRareEvent: return "rare_event";
    case McStatus::kDisagrees: return "disagrees";
  }
  return "unknown";
}

struct Refutation {
  bool found = false;
  ViolationWitness witness;
  std::optional<WitnessPair> pair;
  std::size_t ell = 0;
  double eps = 0;
  double p1 = 0;
  double p2 = 0;
  double ratio = 0;
  double threshold = 0;
  // The same ratio evaluated with 50 significant digits.
  double ratio_check = 0;
  McStatus mc_status = McStatus::kSkipped;
  std::optional<McCheck> mc1, mc2;
  std::size_t evaluations = 0;
};

inline McCheck mc_check(const Path& p, double eps, double exact, const RefuteOptions& opt,
                        std::uint64_t seed) {
  McCheck c;
  c.exact = exact;
  c.estimate = pathprob_mc(p, eps, 0, opt.mc_samples, seed, opt.workers);
  c.rare_event = is_rare_event(exact, opt.mc_samples);
  const double n = static_cast<double>(opt.mc_samples);
  const double se = std::max(c.estimate.std_error, std::sqrt(exact * (1 - exact) / n));
  c.agrees = std::abs(c.estimate.value - exact) <= 4 * se;
  return c;
}

// Searches l in {1, 2, 4, ..., ell_max} (outer) and eps in the grid (inner)
// for a generated pair whose exact ratio exceeds e^{d eps}. The first hit is
// re-evaluated at 50 digits and checked by simulation.
inline Refutation refute(const DipAutomaton& a, const Rational& d, const RefuteOptions& opt = {}) {
  if (d <= 0) throw Error(ErrorCode::kInvalidArgument, "d must be positive");
  if (opt.ell_max < 1) throw Error(ErrorCode::kInvalidArgument, "ell_max must be at least 1");
  for (double e : opt.eps_grid) detail::require_eps(e);
  const Verdict v = check_well_formed(a);
  if (v.well_formed()) {
    throw Error(ErrorCode::kAutomatonIsWellFormed,
                "automaton '" + a.name() + "' is well-formed; nothing to refute");
  }
  Refutation out;
  out.witness = v.witness();
  const double dd = to_double(d);
  double best = -1;
  for (std::size_t ell = 1; ell <= opt.ell_max; ell *= 2) {
    WitnessPair pair = gen_witness_pair(a, out.witness, ell, opt.witness);
    for (double eps : opt.eps_grid) {
      ++out.evaluations;
      double p1 = pathprob_exact(pair.rho1, eps).value;
      double p2 = pathprob_exact(pair.rho2, eps).value;
      // Differential privacy is symmetric in the pair; test the larger side.
      const bool swap = p2 > p1;
      if (swap) std::swap(p1, p2);
      const double ratio = p2 > 0 ? p1 / p2 : kInf;
      const double threshold = std::exp(dd * eps);
      if (ratio > best) {
        best = ratio;
        out.ell = ell;
        out.eps = eps;
        out.p1 = p1;
        out.p2 = p2;
        out.ratio = ratio;
        out.threshold = threshold;
        if (swap) std::swap(pair.rho1, pair.rho2);
        out.pair = pair;
        if (swap) std::swap(pair.rho1, pair.rho2);
      }
      if (!(ratio > threshold)) continue;

      out.found = true;
      out.ell = ell;
      out.eps = eps;
      out.p1 = p1;
      out.p2 = p2;
      out.ratio = ratio;
      out.threshold = threshold;
      if (swap) std::swap(pair.rho1, pair.rho2);
      pair.ratio_report = ratio_report(pair, opt.eps_grid);
      using High = boost::multiprecision::cpp_bin_float_50;
      const High h1 = pathprob_exact_as<High>(pair.rho1, eps, 0);
      const High h2 = pathprob_exact_as<High>(pair.rho2, eps, 0);
      out.ratio_check = h2 > 0 ? static_cast<double>(h1 / h2) : kInf;
      if (opt.confirm) {
        out.mc1 = mc_check(pair.rho1, eps, p1, opt, opt.seed);
        out.mc2 = mc_check(pair.rho2, eps, p2, opt, opt.seed + 0x9e3779b97f4a7c15ULL);
        if (!out.mc1->agrees || !out.mc2->agrees) {
          out.mc_status = McStatus::kDisagrees;
        } else if (out.mc1->rare_event || out.mc2->rare_event) {
          out.mc_status = McStatus::kRareEvent;
        } else {
          out.mc_status = McStatus::kConfirmed;
        }
      }
      out.pair = std::move(pair);
      return out;
    }
  }
  if (out.pair) out.pair->ratio_report = ratio_report(*out.pair, opt.eps_grid);
  return out;
}

}  // namespace dipcheck
