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
#include <cstdint>
#include <random>

#include "dipcheck/error.hpp"

namespace dipcheck {

// Laplace distribution with rate k: pdf (k/2) exp(-k |x - mu|).
template <typename Real = double>
struct LaplaceDist {
  Real k;
  Real mu;
};

namespace detail {

template <typename Real>
void require_rate(const LaplaceDist<Real>& d) {
  if (!(d.k > 0)) throw Error(ErrorCode::kNonPositiveRate, "Laplace rate must be positive");
}

template <typename Real>
Real sgn(const Real& x) {
  return x > 0 ? Real(1) : (x < 0 ? Real(-1) : Real(0));
}

}  // namespace detail

template <typename Real>
Real laplace_pdf(const LaplaceDist<Real>& d, const Real& x) {
  using std::abs;
  using std::exp;
  detail::require_rate(d);
  return d.k / 2 * exp(-d.k * abs(x - d.mu));
}

template <typename Real>
Real laplace_cdf(const LaplaceDist<Real>& d, const Real& c) {
  using std::abs;
  using std::expm1;
  detail::require_rate(d);
  const Real z = c - d.mu;
  // 1 - e^{-k|z|} written as -expm1 keeps precision near the mean.
  return (1 + detail::sgn(z) * -expm1(-d.k * abs(z))) / 2;
}

// Pr[X1 <= X2] for independent Laplace variables.
//
// With D = |mu2 - mu1| the tail Pr[X2 - X1 < -D] is
//   (k2^2 e^{-k1 D} - k1^2 e^{-k2 D}) / (2 (k2^2 - k1^2))        if k1 != k2
//   e^{-k D} (1 + k D / 2) / 2                                   if k1 == k2
// The first form is evaluated as
//   e^{-a D} (1 - a^2/(a+b) * expm1(-sD)/s) / 2,  a = min k, b = max k, s = b-a
// which stays accurate as k1 -> k2 and cannot overflow.
template <typename Real>
Real prob_le(const LaplaceDist<Real>& x1, const LaplaceDist<Real>& x2) {
  using std::abs;
  using std::exp;
  using std::expm1;
  detail::require_rate(x1);
  detail::require_rate(x2);
  const Real delta = x2.mu - x1.mu;
  const Real D = abs(delta);
  Real tail;
  if (x1.k == x2.k) {
    tail = exp(-x1.k * D) * (1 + x1.k * D / 2) / 2;
  } else {
    const Real a = x1.k < x2.k ? x1.k : x2.k;
    const Real b = x1.k < x2.k ? x2.k : x1.k;
    const Real s = b - a;
    tail = exp(-a * D) * (1 - a * a / (a + b) * (expm1(-s * D) / s)) / 2;
  }
  return (1 + detail::sgn(delta) * (1 - 2 * tail)) / 2;
}

// Inverse-CDF draw. u is uniform on the open interval (0, 1), built from the
// top 53 bits of one 64-bit output.
template <typename Rng>
double sample(const LaplaceDist<double>& d, Rng& rng) {
  detail::require_rate(d);
  const std::uint64_t bits = rng() >> 11;
  const double u = (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  const double c = u - 0.5;
  const double mag = -std::log1p(-2 * std::abs(c)) / d.k;
  return c < 0 ? d.mu - mag : d.mu + mag;
}

}  // namespace dipcheck
