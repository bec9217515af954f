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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include "dipcheck/automaton.hpp"
#include "dipcheck/error.hpp"
#include "dipcheck/laplace.hpp"
#include "dipcheck/path.hpp"
#include "dipcheck/pep.hpp"
#include "dipcheck/rational.hpp"

namespace dipcheck {

namespace detail {

template <typename Real>
Real to_bound(double v) {
  if (v == kInf) return std::numeric_limits<Real>::infinity();
  if (v == -kInf) return -std::numeric_limits<Real>::infinity();
  return Real(v);
}

inline void require_eps(double eps) {
  if (!(eps > 0) || !std::isfinite(eps)) {
    throw Error(ErrorCode::kNonPositiveEpsilon, "epsilon must be positive and finite");
  }
}

[[noreturn]] inline void degenerate(const DipAutomaton& a, const PathStep& s,
                                    const char* which) {
  throw Error(ErrorCode::kDegenerateScale,
              "state '" + a.state(s.state).id + "' has " + which +
                  " = 0 but the step needs that sample");
}

}  // namespace detail

// The function x -> pathprob(eps, x, p) over the initial register value x,
// built back to front. Each step multiplies by its guard probability (and
// output-interval mass), or for assignment steps integrates the remaining
// path probability against the sample density.
template <typename Real>
PiecewiseExpPoly<Real> pathprob_function(const Path& p, double eps) {
  using Pep = PiecewiseExpPoly<Real>;
  detail::require_eps(eps);
  const DipAutomaton& a = p.automaton();
  const Real e(eps);
  Pep g = Pep::constant(Real(1));

  for (std::size_t n = p.size(); n-- > 0;) {
    const PathStep& s = p[n];
    const TransitionDecl& t = a.transition(s.transition);
    const StateParams& params = a.state(s.state).params;
    const Real input = s.input ? Real(*s.input) : Real(0);

    Real lo = -Pep::inf();
    Real hi = Pep::inf();
    Real aux_mass(1);
    const bool emits_sample = t.output.outputs(RealVar::kSample);
    if (emits_sample) {
      lo = detail::to_bound<Real>(s.observed.lo);
      hi = detail::to_bound<Real>(s.observed.hi);
    } else if (t.output.outputs(RealVar::kSampleAux)) {
      if (params.d_aux == 0) detail::degenerate(a, s, "d_aux");
      const LaplaceDist<Real> aux{to_real<Real>(params.d_aux) * e,
                                  to_real<Real>(params.mu_aux) + input};
      const Real ahi = detail::to_bound<Real>(s.observed.hi);
      const Real alo = detail::to_bound<Real>(s.observed.lo);
      aux_mass = laplace_cdf(aux, ahi) - laplace_cdf(aux, alo);
    }

    const bool needs_sample = emits_sample || t.assign || t.guard != Guard::kTrue;
    if (!needs_sample) {
      if (aux_mass != 1) g = g.scaled(aux_mass);
      continue;
    }
    if (params.d == 0) detail::degenerate(a, s, "d");
    const Real k = to_real<Real>(params.d) * e;
    const Real nu = to_real<Real>(params.mu) + input;

    if (!t.assign) {
      if (t.guard == Guard::kTrue) {
        const LaplaceDist<Real> dist{k, nu};
        g = g.scaled(aux_mass * (laplace_cdf(dist, hi) - laplace_cdf(dist, lo)));
        continue;
      }
      Pep density = Pep::laplace_pdf(k, nu);
      if (emits_sample) density = density.restricted(lo, hi);
      // Ge: Pr[s >= x], Lt: Pr[s < x], both with s inside the interval.
      const Pep guard = t.guard == Guard::kGe ? density.upper() : density.lower();
      g = (guard * g).scaled(aux_mass);
      continue;
    }

    // Assignment: the sample becomes the register for the rest of the path.
    Pep h = Pep::laplace_pdf(k, nu) * g;
    if (emits_sample) h = h.restricted(lo, hi);
    if (t.guard == Guard::kTrue) {
      g = Pep::constant(h.total() * aux_mass);
    } else {
      g = (t.guard == Guard::kGe ? h.upper() : h.lower()).scaled(aux_mass);
    }
  }
  return g;
}

template <typename Real = double>
Real pathprob_exact_as(const Path& p, double eps, double x0) {
  return pathprob_function<Real>(p, eps)(Real(x0));
}

struct ProbResult {
  double value = 0;
  // Monte Carlo only.
  bool monte_carlo = false;
  double std_error = 0;
  std::uint64_t samples = 0;
  std::uint64_t hits = 0;
  std::uint64_t seed = 0;
};

// Exact evaluation in extended precision, reported as a double.
inline ProbResult pathprob_exact(const Path& p, double eps, double x0 = 0) {
  ProbResult r;
  r.value = static_cast<double>(pathprob_exact_as<long double>(p, eps, x0));
  return r;
}

namespace detail {

// Runs one simulation of the automaton along p's inputs; true when every
// step takes p's transition and lands in p's output intervals.
template <typename Rng>
bool simulate_once(const Path& p, double eps, double x0, Rng& rng) {
  const DipAutomaton& a = p.automaton();
  double r = x0;
  for (const PathStep& s : p.steps()) {
    const TransitionDecl& t = a.transition(s.transition);
    const StateParams& params = a.state(s.state).params;
    const double input = s.input ? *s.input : 0.0;
    const bool emits_sample = t.output.outputs(RealVar::kSample);

    // Decide which transition is enabled from the sampled value.
    const std::size_t on_true = a.delta(s.state, Guard::kTrue);
    const bool needs_sample = on_true == DipAutomaton::npos || emits_sample || t.assign;
    double sv = 0;
    if (needs_sample) {
      if (params.d == 0) degenerate(a, s, "d");
      sv = sample(LaplaceDist<double>{to_double(params.d) * eps,
                                      to_double(params.mu) + input},
                  rng);
    }
    std::size_t taken = on_true;
    if (taken == DipAutomaton::npos) {
      taken = sv >= r ? a.delta(s.state, Guard::kGe) : a.delta(s.state, Guard::kLt);
    }
    if (taken != s.transition) return false;

    if (emits_sample && !(s.observed.lo < sv && sv < s.observed.hi)) return false;
    if (t.output.outputs(RealVar::kSampleAux)) {
      if (params.d_aux == 0) degenerate(a, s, "d_aux");
      const double aux = sample(LaplaceDist<double>{to_double(params.d_aux) * eps,
                                                    to_double(params.mu_aux) + input},
                                rng);
      if (!(s.observed.lo < aux && aux < s.observed.hi)) return false;
    }
    if (t.assign) r = sv;
  }
  return true;
}

}  // namespace detail

// Trials are split into fixed-size chunks, chunk c seeded with seed + c, so
// the estimate does not depend on how many workers share the chunks.
inline ProbResult pathprob_mc(const Path& p, double eps, double x0, std::uint64_t n,
                              std::uint64_t seed, unsigned workers = 1) {
  detail::require_eps(eps);
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "sample count must be positive");
  constexpr std::uint64_t kChunk = 1u << 16;
  const std::uint64_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<std::uint64_t> hits(chunks, 0);

  auto run_chunk = [&](std::uint64_t c) {
    std::mt19937_64 rng(seed + c);
    const std::uint64_t begin = c * kChunk;
    const std::uint64_t end = std::min(n, begin + kChunk);
    std::uint64_t h = 0;
    for (std::uint64_t i = begin; i < end; ++i) {
      if (detail::simulate_once(p, eps, x0, rng)) ++h;
    }
    hits[c] = h;
  };

  if (workers <= 1 || chunks == 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::uint64_t c = w; c < chunks; c += workers) run_chunk(c);
      });
    }
    for (auto& th : pool) th.join();
  }

  ProbResult r;
  r.monte_carlo = true;
  r.samples = n;
  r.seed = seed;
  for (auto h : hits) r.hits += h;
  r.value = static_cast<double>(r.hits) / static_cast<double>(n);
  r.std_error = std::sqrt(r.value * (1 - r.value) / static_cast<double>(n));
  return r;
}

// Exact values this small are rare events for n trials: the estimate is
// mostly zero hits and says little.
inline bool is_rare_event(double exact, std::uint64_t n) {
  return exact < 10.0 / static_cast<double>(n);
}

// Pr[ge branch] + Pr[lt branch] from state q with register x and the given
// input, real outputs taken over the whole line. Should be 1.
inline double branch_partition_check(const DipAutomaton& a, double eps, double x,
                                     std::size_t q, double input = 0) {
  const std::size_t ge = a.delta(q, Guard::kGe);
  const std::size_t lt = a.delta(q, Guard::kLt);
  if (ge == DipAutomaton::npos || lt == DipAutomaton::npos) {
    throw Error(ErrorCode::kInvalidArgument,
                "state '" + a.state(q).id + "' does not branch on ge/lt");
  }
  double total = 0;
  for (std::size_t t : {ge, lt}) {
    const auto& out = a.transition(t).output;
    const Observed o = out.is_symbol() ? Observed::symbol(out.sym()) : Observed::real(out.var());
    std::optional<double> in;
    if (a.is_input(q)) in = input;
    const Path p = check_path(a, q, {RawStep{in, o}});
    total += pathprob_exact(p, eps, x).value;
  }
  return total;
}

}  // namespace dipcheck
