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

#include <cmath>
#include <functional>
#include <optional>

#include <gtest/gtest.h>

#include "dipcheck/automaton.hpp"
#include "dipcheck/path.hpp"

namespace dipcheck {
namespace {

RawStep sym(std::optional<double> in, std::string s) { return {in, Observed::symbol(std::move(s))}; }

std::vector<RawStep> svt_steps(double x, double y) {
  return {sym(std::nullopt, "bot"), sym(x, "bot"), sym(y, "top")};
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIoError;
}

TEST(Path, SvtExamplePath) {
  const auto a = builtin("svt");
  const Path p = check_path(a, svt_steps(0, 1));
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(a.state(p[0].state).id, "q0");
  EXPECT_EQ(a.state(p[1].state).id, "q1");
  EXPECT_EQ(a.state(p[2].state).id, "q1");
  EXPECT_EQ(a.transition(p[2].transition).guard, Guard::kGe);
  EXPECT_EQ(p.inseq(), (std::vector<std::optional<double>>{std::nullopt, 0.0, 1.0}));
}

TEST(Path, Errors) {
  const auto a = builtin("svt");
  EXPECT_EQ(code_of([&] { check_path(a, {sym(0.0, "bot")}); }), ErrorCode::kInputKindMismatch);
  EXPECT_EQ(code_of([&] { check_path(a, {sym(std::nullopt, "bot"), sym(std::nullopt, "bot")}); }),
            ErrorCode::kInputKindMismatch);
  EXPECT_EQ(code_of([&] { check_path(a, {sym(std::nullopt, "top")}); }),
            ErrorCode::kNoSuchTransition);
  // q2 has no outgoing transitions.
  EXPECT_EQ(code_of([&] {
              auto s = svt_steps(0, 1);
              s.push_back(sym(0.0, "bot"));
              check_path(a, s);
            }),
            ErrorCode::kNoSuchTransition);
  EXPECT_EQ(code_of([&] {
              check_path(a, {sym(std::nullopt, "bot"), sym(std::nan(""), "bot")});
            }),
            ErrorCode::kInvalidArgument);

  const auto ns = builtin("numeric_sparse");
  std::vector<RawStep> bad{sym(std::nullopt, "bot"),
                           {0.0, Observed::real(RealVar::kSampleAux, 3, 3)}};
  EXPECT_EQ(code_of([&] { check_path(ns, bad); }), ErrorCode::kBadInterval);
  bad[1].observed = Observed::real(RealVar::kSample, 0, 1);
  EXPECT_EQ(code_of([&] { check_path(ns, bad); }), ErrorCode::kNoSuchTransition);
}

TEST(Path, EmptyPath) {
  const auto a = builtin("svt");
  EXPECT_TRUE(check_path(a, std::vector<RawStep>{}).empty());
}

TEST(Path, Adjacency) {
  using Seq = std::vector<std::optional<double>>;
  EXPECT_TRUE(adjacent(Seq{0.0, 1.0}, Seq{1.0, 1.0}));
  EXPECT_FALSE(adjacent(Seq{0.0}, Seq{2.0}));
  EXPECT_TRUE(adjacent(Seq{std::nullopt, 0.0}, Seq{std::nullopt, -1.0}));
  EXPECT_FALSE(adjacent(Seq{std::nullopt}, Seq{0.0}));
  EXPECT_FALSE(adjacent(Seq{0.0}, Seq{0.0, 0.0}));
  EXPECT_FALSE(adjacent(Seq{0.0}, Seq{1.001}));
  // Rounding slack for inputs computed from rationals.
  EXPECT_TRUE(adjacent(Seq{1.0 / 3}, Seq{1.0 / 3 + 1 + 1e-15}));
}

TEST(Path, Equivalence) {
  const auto a = builtin("svt");
  const Path p1 = check_path(a, svt_steps(0, 1));
  const Path p2 = check_path(a, svt_steps(1, 1));
  EXPECT_TRUE(adjacent(p1.inseq(), p2.inseq()));
  EXPECT_TRUE(equivalent(p1, p2));
  const Path p3 = check_path(a, {sym(std::nullopt, "bot"), sym(0.0, "top")});
  EXPECT_FALSE(equivalent(p1, p3));

  const auto ns = builtin("numeric_sparse");
  auto steps = [](double lo) {
    return std::vector<RawStep>{sym(std::nullopt, "bot"),
                                {0.0, Observed::real(RealVar::kSampleAux, lo, kInf)}};
  };
  EXPECT_TRUE(equivalent(check_path(ns, steps(0)), check_path(ns, steps(0))));
  EXPECT_FALSE(equivalent(check_path(ns, steps(0)), check_path(ns, steps(1))));
}

TEST(Path, DocumentRoundTrip) {
  const auto ns = builtin("numeric_sparse");
  const Path p = check_path(ns, {sym(std::nullopt, "bot"), sym(0.5, "bot"),
                                 {-1.0, Observed::real(RealVar::kSampleAux, -kInf, 2)}});
  const PathDocument d = to_document(p, "numeric_sparse", 0);
  const std::string text = to_json(d).dump();
  const PathDocument back = parse_path_document(text);
  EXPECT_EQ(back.automaton, "numeric_sparse");
  const Path q = check_path(ns, back);
  EXPECT_EQ(q.inseq(), p.inseq());
  EXPECT_TRUE(equivalent(p, q));
  EXPECT_NE(text.find("\"-inf\""), std::string::npos);
}

TEST(Path, DocumentDefaults) {
  const auto d = parse_path_document(R"({"automaton": "numeric_sparse", "steps": [
      {"input": null, "observed": {"sym": "bot"}},
      {"input": 0, "observed": {"var": "sample_aux"}}]})");
  EXPECT_EQ(d.x0, 0);
  ASSERT_EQ(d.steps.size(), 2u);
  EXPECT_EQ(d.steps[1].observed.lo, -kInf);
  EXPECT_EQ(d.steps[1].observed.hi, kInf);
}

TEST(Path, DocumentStart) {
  const auto a = builtin("svt");
  const auto d = parse_path_document(R"({"automaton": "svt", "start": "q1", "x0": 0.5,
      "steps": [{"input": 0, "observed": {"sym": "top"}}]})");
  const Path p = check_path(a, d);
  EXPECT_EQ(a.state(p.start()).id, "q1");
  EXPECT_EQ(d.x0, 0.5);
  const auto bad = parse_path_document(R"({"automaton": "svt", "start": "nope", "steps": []})");
  EXPECT_EQ(code_of([&] { check_path(a, bad); }), ErrorCode::kDanglingReference);
}

TEST(Path, DocumentSchemaErrors) {
  EXPECT_EQ(code_of([] { parse_path_document(R"({"steps": []})"); }), ErrorCode::kSchemaError);
  EXPECT_EQ(code_of([] { parse_path_document(R"({"automaton": "svt", "steps": [], "x": 1})"); }),
            ErrorCode::kSchemaError);
  EXPECT_EQ(code_of([] {
              parse_path_document(R"({"automaton": "svt", "steps": [
                  {"input": "zero", "observed": {"sym": "bot"}}]})");
            }),
            ErrorCode::kSchemaError);
  EXPECT_EQ(code_of([] {
              parse_path_document(R"({"automaton": "svt", "steps": [
                  {"input": 0, "observed": {"var": "noise"}}]})");
            }),
            ErrorCode::kSchemaError);
  EXPECT_EQ(code_of([] {
              parse_path_document(R"({"automaton": "svt", "steps": [
                  {"input": 0, "observed": {"var": "sample", "lo": "low"}}]})");
            }),
            ErrorCode::kSchemaError);
  EXPECT_EQ(code_of([] { parse_path_document("{"); }), ErrorCode::kSyntaxError);
}

}  // namespace
}  // namespace dipcheck
