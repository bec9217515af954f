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

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>

namespace dipcheck {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Parses "p/q", "-p/q" or an integer string. No decimal points, no
// whitespace: parameters stay exact end to end.
inline std::optional<Rational> parse_rational(std::string_view text) {
  auto parse_int = [](std::string_view s, bool allow_sign) -> std::optional<BigInt> {
    if (s.empty()) return std::nullopt;
    bool negative = false;
    if (allow_sign && (s.front() == '-' || s.front() == '+')) {
      negative = s.front() == '-';
      s.remove_prefix(1);
    }
    if (s.empty()) return std::nullopt;
    BigInt value = 0;
    for (char c : s) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
      value = value * 10 + (c - '0');
    }
    return negative ? BigInt(-value) : value;
  };

  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    auto n = parse_int(text, true);
    if (!n) return std::nullopt;
    return Rational(*n);
  }
  auto num = parse_int(text.substr(0, slash), true);
  auto den = parse_int(text.substr(slash + 1), false);
  if (!num || !den || *den == 0) return std::nullopt;
  return Rational(*num, *den);
}

// Canonical text: "p/q" in lowest terms, or "p" when the denominator is 1.
inline std::string to_string(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

inline double to_double(const Rational& r) {
  return r.convert_to<double>();
}

// Nearest value of a floating type; multiprecision types go through text.
template <typename Real>
Real to_real(const Rational& r) {
  if constexpr (std::is_floating_point_v<Real>) {
    return r.convert_to<Real>();
  } else {
    return Real(boost::multiprecision::numerator(r).str()) /
           Real(boost::multiprecision::denominator(r).str());
  }
}

}  // namespace dipcheck
