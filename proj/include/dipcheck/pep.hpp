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
#include <iterator>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dipcheck/error.hpp"

namespace dipcheck {

// coeff * y^degree * exp(rate * y), where y = x - anchor of the owning piece.
template <typename Real>
struct ExpPolyTerm {
  Real coeff;
  int degree = 0;
  Real rate;
};

// Piecewise sums of exponential-polynomial terms on the real line.
//
// Breakpoints b_1 < ... < b_m split the line into m+1 open pieces. Every
// piece carries its own anchor: the finite endpoint for the two tails and
// the midpoint for interior pieces, so exponents stay small where the piece
// lives. Values exactly at a breakpoint are taken from the right piece;
// nothing downstream depends on them since they have measure zero.
template <typename Real>
class PiecewiseExpPoly {
 public:
  using Term = ExpPolyTerm<Real>;

  struct Piece {
    Real anchor;
    std::vector<Term> terms;
  };

  static Real inf() { return std::numeric_limits<Real>::infinity(); }

  // Rates closer than this (relative) are treated as equal.
  static Real rate_tolerance() { return Real(1e-12); }

  PiecewiseExpPoly() : pieces_(1, Piece{Real(0), {}}) {}

  static PiecewiseExpPoly constant(const Real& c) {
    PiecewiseExpPoly p;
    if (c != 0) p.pieces_[0].terms.push_back({c, 0, Real(0)});
    return p;
  }

  // (k/2) exp(-k |x - mu|)
  static PiecewiseExpPoly laplace_pdf(const Real& k, const Real& mu) {
    PiecewiseExpPoly p = with_breaks({mu});
    p.pieces_[0].terms.push_back({k / 2, 0, k});
    p.pieces_[1].terms.push_back({k / 2, 0, -k});
    return p;
  }

  // Pr[X <= x] for X ~ Lap(k, mu).
  static PiecewiseExpPoly laplace_cdf(const Real& k, const Real& mu) {
    PiecewiseExpPoly p = with_breaks({mu});
    p.pieces_[0].terms.push_back({Real(1) / 2, 0, k});
    p.pieces_[1].terms.push_back({Real(1), 0, Real(0)});
    p.pieces_[1].terms.push_back({Real(-1) / 2, 0, -k});
    return p;
  }

  const std::vector<Real>& breaks() const { return breaks_; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  std::size_t num_terms() const {
    std::size_t n = 0;
    for (const auto& p : pieces_) n += p.terms.size();
    return n;
  }
  bool is_zero() const { return num_terms() == 0; }

  Real left_end(std::size_t i) const { return i == 0 ? -inf() : breaks_[i - 1]; }
  Real right_end(std::size_t i) const {
    return i == breaks_.size() ? inf() : breaks_[i];
  }

  std::size_t piece_index(const Real& x) const {
    return static_cast<std::size_t>(
        std::upper_bound(breaks_.begin(), breaks_.end(), x) - breaks_.begin());
  }

  Real operator()(const Real& x) const {
    const Piece& p = pieces_[piece_index(x)];
    return eval_terms(p.terms, x - p.anchor);
  }

  PiecewiseExpPoly operator+(const PiecewiseExpPoly& o) const {
    const auto merged = merge_breaks(breaks_, o.breaks_);
    PiecewiseExpPoly a = refined(merged);
    const PiecewiseExpPoly b = o.refined(merged);
    for (std::size_t i = 0; i < a.pieces_.size(); ++i) {
      auto& t = a.pieces_[i].terms;
      t.insert(t.end(), b.pieces_[i].terms.begin(), b.pieces_[i].terms.end());
      normalize(t);
    }
    return a;
  }

  PiecewiseExpPoly operator*(const PiecewiseExpPoly& o) const {
    const auto merged = merge_breaks(breaks_, o.breaks_);
    PiecewiseExpPoly a = refined(merged);
    const PiecewiseExpPoly b = o.refined(merged);
    for (std::size_t i = 0; i < a.pieces_.size(); ++i) {
      std::vector<Term> product;
      product.reserve(a.pieces_[i].terms.size() * b.pieces_[i].terms.size());
      for (const Term& s : a.pieces_[i].terms) {
        for (const Term& t : b.pieces_[i].terms) {
          product.push_back({s.coeff * t.coeff, s.degree + t.degree,
                             add_rates(s.rate, t.rate)});
        }
      }
      normalize(product);
      a.pieces_[i].terms = std::move(product);
    }
    return a;
  }

  PiecewiseExpPoly scaled(const Real& c) const {
    PiecewiseExpPoly out = *this;
    for (auto& p : out.pieces_) {
      if (c == 0) {
        p.terms.clear();
        continue;
      }
      for (auto& t : p.terms) t.coeff *= c;
    }
    return out;
  }

  // x -> f(x + c)
  PiecewiseExpPoly shifted(const Real& c) const {
    PiecewiseExpPoly out = *this;
    for (auto& b : out.breaks_) b -= c;
    for (auto& p : out.pieces_) p.anchor -= c;
    return out;
  }

  // f on (lo, hi), zero elsewhere. Infinite bounds leave that side alone.
  PiecewiseExpPoly restricted(const Real& lo, const Real& hi) const {
    if (!(lo < hi)) {
      throw Error(ErrorCode::kBadInterval, "restriction interval is empty");
    }
    std::vector<Real> extra;
    if (lo > -inf()) extra.push_back(lo);
    if (hi < inf()) extra.push_back(hi);
    PiecewiseExpPoly out = refined(merge_breaks(breaks_, extra));
    for (std::size_t i = 0; i < out.pieces_.size(); ++i) {
      if (out.right_end(i) <= lo || out.left_end(i) >= hi) out.pieces_[i].terms.clear();
    }
    return out;
  }

  // Definite integral over (lo, hi); either bound may be infinite.
  Real integral(const Real& lo, const Real& hi) const {
    if (!(lo < hi)) return Real(0);
    Real total(0);
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const Real u = std::max(lo, left_end(i));
      const Real v = std::min(hi, right_end(i));
      if (!(u < v) || pieces_[i].terms.empty()) continue;
      const auto prim = antiderivative(pieces_[i].terms);
      const Real& a = pieces_[i].anchor;
      total += prim_at(prim, v, a, pieces_[i].terms) -
               prim_at(prim, u, a, pieces_[i].terms);
    }
    return total;
  }

  Real total() const { return integral(-inf(), inf()); }

  // x -> integral of f over (-inf, x)
  PiecewiseExpPoly lower() const {
    PiecewiseExpPoly out = *this;
    Real carry(0);
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const Piece& p = pieces_[i];
      auto prim = antiderivative(p.terms);
      const Real left = left_end(i);
      // carry holds F(left); shift the primitive so it agrees there.
      const Real base = carry - prim_at(prim, left, p.anchor, p.terms);
      if (base != 0) prim.push_back({base, 0, Real(0)});
      normalize(prim);
      if (i + 1 < pieces_.size()) {
        carry = eval_terms(prim, right_end(i) - p.anchor);
      }
      out.pieces_[i].terms = std::move(prim);
    }
    return out;
  }

  // x -> integral of f over (x, inf)
  PiecewiseExpPoly upper() const {
    PiecewiseExpPoly out = *this;
    Real carry(0);
    for (std::size_t n = pieces_.size(); n-- > 0;) {
      const Piece& p = pieces_[n];
      auto prim = antiderivative(p.terms);
      for (auto& t : prim) t.coeff = -t.coeff;
      const Real right = right_end(n);
      // G(x) = G(right) + P(right) - P(x); prim already holds -P.
      const Real base = carry - prim_at(prim, right, p.anchor, p.terms);
      if (base != 0) prim.push_back({base, 0, Real(0)});
      normalize(prim);
      if (n > 0) carry = eval_terms(prim, left_end(n) - p.anchor);
      out.pieces_[n].terms = std::move(prim);
    }
    return out;
  }

  std::string to_string() const {
    std::ostringstream os;
    os.precision(6);
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      os << "(" << left_end(i) << ", " << right_end(i) << "): ";
      if (pieces_[i].terms.empty()) os << "0";
      bool first = true;
      for (const Term& t : pieces_[i].terms) {
        if (!first) os << " + ";
        first = false;
        os << t.coeff;
        if (t.degree > 0) os << "*y^" << t.degree;
        if (t.rate != 0) os << "*exp(" << t.rate << "*y)";
      }
      os << "   [y = x - " << pieces_[i].anchor << "]\n";
    }
    return os.str();
  }

 private:
  static PiecewiseExpPoly with_breaks(std::vector<Real> breaks) {
    PiecewiseExpPoly p;
    p.breaks_ = std::move(breaks);
    p.pieces_.assign(p.breaks_.size() + 1, Piece{Real(0), {}});
    for (std::size_t i = 0; i < p.pieces_.size(); ++i) {
      p.pieces_[i].anchor = p.anchor_for(i);
    }
    return p;
  }

  Real anchor_for(std::size_t i) const {
    if (breaks_.empty()) return Real(0);
    if (i == 0) return breaks_.front();
    if (i == breaks_.size()) return breaks_.back();
    return (breaks_[i - 1] + breaks_[i]) / 2;
  }

  static std::vector<Real> merge_breaks(const std::vector<Real>& a,
                                        const std::vector<Real>& b) {
    std::vector<Real> out;
    out.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  static Real add_rates(const Real& r1, const Real& r2) {
    using std::abs;
    const Real r = r1 + r2;
    if (abs(r) <= rate_tolerance() * (abs(r1) + abs(r2))) return Real(0);
    return r;
  }

  static bool same_rate(const Real& r1, const Real& r2) {
    using std::abs;
    if (r1 == r2) return true;
    return abs(r1 - r2) <= rate_tolerance() * std::max(abs(r1), abs(r2));
  }

  // Sorts by (rate, degree), folds equal keys and drops exact zeros.
  static void normalize(std::vector<Term>& terms) {
    std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
      return a.rate < b.rate || (a.rate == b.rate && a.degree < b.degree);
    });
    std::vector<Term> out;
    out.reserve(terms.size());
    std::size_t i = 0;
    while (i < terms.size()) {
      // Rates in one tolerance group share the first member's value.
      std::size_t j = i;
      while (j < terms.size() && same_rate(terms[i].rate, terms[j].rate)) ++j;
      std::sort(terms.begin() + static_cast<std::ptrdiff_t>(i),
                terms.begin() + static_cast<std::ptrdiff_t>(j),
                [](const Term& a, const Term& b) { return a.degree < b.degree; });
      for (std::size_t k = i; k < j;) {
        Term acc = terms[k];
        acc.rate = terms[i].rate;
        std::size_t m = k + 1;
        while (m < j && terms[m].degree == acc.degree) acc.coeff += terms[m++].coeff;
        if (acc.coeff != 0) out.push_back(acc);
        k = m;
      }
      i = j;
    }
    terms = std::move(out);
  }

  static Real eval_terms(const std::vector<Term>& terms, const Real& y) {
    using std::exp;
    using std::pow;
    Real sum(0);
    for (const Term& t : terms) {
      Real v = t.coeff;
      if (t.degree > 0) v *= pow(y, t.degree);
      if (t.rate != 0) v *= exp(t.rate * y);
      sum += v;
    }
    return sum;
  }

  // Primitive of each term in the same anchor frame:
  //   rate 0:  c y^{m+1} / (m+1)
  //   rate b:  c e^{by} sum_j (-1)^j m!/(m-j)! y^{m-j} / b^{j+1}
  static std::vector<Term> antiderivative(const std::vector<Term>& terms) {
    std::vector<Term> out;
    for (const Term& t : terms) {
      if (t.rate == 0) {
        out.push_back({t.coeff / (t.degree + 1), t.degree + 1, Real(0)});
        continue;
      }
      Real c = t.coeff / t.rate;
      for (int j = 0; j <= t.degree; ++j) {
        out.push_back({c, t.degree - j, t.rate});
        c = -c * Real(t.degree - j) / t.rate;
      }
    }
    normalize(out);
    return out;
  }

  // Value of a primitive at x, which may be infinite. At -inf every term of
  // the integrand must decay (positive rate), at +inf negative rate; the
  // primitive then vanishes there.
  static Real prim_at(const std::vector<Term>& prim, const Real& x, const Real& anchor,
                      const std::vector<Term>& integrand) {
    if (x == -inf() || x == inf()) {
      const bool left = x == -inf();
      for (const Term& t : integrand) {
        if (left ? !(t.rate > 0) : !(t.rate < 0)) {
          throw Error(ErrorCode::kDivergentTail,
                      left ? "integrand does not decay at -infinity"
                           : "integrand does not decay at +infinity");
        }
      }
      return Real(0);
    }
    return eval_terms(prim, x - anchor);
  }

  // Same function over a finer set of breakpoints (a superset of breaks_).
  PiecewiseExpPoly refined(const std::vector<Real>& breaks) const {
    if (breaks.size() == breaks_.size()) return *this;
    PiecewiseExpPoly out = with_breaks(breaks);
    for (std::size_t i = 0; i < out.pieces_.size(); ++i) {
      // Any interior point of the new piece identifies the old one.
      std::size_t src;
      if (i == 0) {
        src = 0;
      } else {
        src = piece_index(out.breaks_[i - 1]);
      }
      const Piece& from = pieces_[src];
      out.pieces_[i].terms = reanchor(from.terms, out.pieces_[i].anchor - from.anchor);
    }
    return out;
  }

  // Terms in y' = y - delta: c (y'+delta)^m e^{b(y'+delta)} expanded.
  static std::vector<Term> reanchor(const std::vector<Term>& terms, const Real& delta) {
    using std::exp;
    if (delta == 0 || terms.empty()) return terms;
    std::vector<Term> out;
    for (const Term& t : terms) {
      const Real scale = t.rate == 0 ? t.coeff : t.coeff * exp(t.rate * delta);
      // binomial(m, j) delta^{m-j}, built from j = m downwards
      Real c = scale;
      for (int j = t.degree; j >= 0; --j) {
        out.push_back({c, j, t.rate});
        c = c * Real(j) / Real(t.degree - j + 1) * delta;
      }
    }
    normalize(out);
    return out;
  }

  std::vector<Real> breaks_;
  std::vector<Piece> pieces_;
};

}  // namespace dipcheck
