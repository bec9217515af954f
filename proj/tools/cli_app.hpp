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

// The dipcheck command line, callable in-process for tests.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dipcheck/dipcheck.hpp"

namespace dipcheck::cli {

using json_util::Json;

enum ExitCode : int { kOk = 0, kFound = 1, kUsage = 2 };

struct Options {
  std::string format = "human";
  std::string automaton;
  std::string path;
  std::string name;
  std::vector<std::string> eps;
  std::optional<double> x0;
  std::uint64_t n = 1000000;
  std::optional<std::string> seed;
  std::optional<std::size_t> ell;
  std::string d = "1";
  std::size_t ell_max = 64;
  std::string recipe = "unit";
  unsigned workers = 1;
};

// "2", "1/2" or a decimal such as "0.25", kept exact.
inline std::optional<Rational> parse_exact(const std::string& text) {
  if (auto r = parse_rational(text)) return r;
  const auto dot = text.find('.');
  if (dot == std::string::npos) return std::nullopt;
  const std::string frac = text.substr(dot + 1);
  if (frac.empty() || frac.find_first_not_of("0123456789") != std::string::npos) {
    return std::nullopt;
  }
  std::string whole = text.substr(0, dot);
  const bool negative = !whole.empty() && whole[0] == '-';
  if (whole == "" || whole == "-" || whole == "+") whole += "0";
  auto w = parse_rational(whole);
  auto f = parse_rational(frac);
  if (!w || !f) return std::nullopt;
  Rational scale = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
  const Rational part = *f / scale;
  return negative ? Rational(*w - part) : Rational(*w + part);
}

inline std::vector<double> parse_eps(const std::vector<std::string>& texts,
                                     std::vector<double> fallback) {
  if (texts.empty()) return fallback;
  std::vector<double> out;
  for (const auto& t : texts) {
    const auto r = parse_exact(t);
    if (!r || *r <= 0) {
      throw Error(ErrorCode::kNonPositiveEpsilon, "--eps '" + t + "' is not a positive number");
    }
    out.push_back(to_double(*r));
  }
  return out;
}

inline std::uint64_t resolve_seed(const std::optional<std::string>& flag) {
  std::string text;
  if (flag) {
    text = *flag;
  } else if (const char* env = std::getenv("DIPCHECK_SEED")) {
    text = env;
  } else {
    return 1;
  }
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "seed '" + text + "' is not a non-negative integer");
  }
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, "seed '" + text + "' is out of range");
  }
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

// Adds the e^{d eps} threshold to each row of a pair's ratio table.
inline void add_thresholds(Json& pair, const Rational& d) {
  for (auto& row : pair["ratio_report"]) {
    row["threshold"] = std::exp(to_double(d) * row["eps"].get<double>());
  }
}

// Renders one command's result in the selected format.
class Emitter {
 public:
  Emitter(const Options& opt, CommandEcho echo, std::ostream& out, std::ostream& err)
      : structured_(opt.format == "structured"), echo_(std::move(echo)), out_(out), err_(err) {}

  bool structured() const { return structured_; }
  std::ostream& text() { return out_; }

  void emit(const DipAutomaton* a, std::optional<std::uint64_t> seed, const std::string& status,
            Json result) {
    if (!structured_) return;
    Json j = report_envelope(echo_, a, seed);
    j["status"] = status;
    j["result"] = std::move(result);
    out_ << j.dump(2) << "\n";
  }

  int fail(const Error& e) {
    if (structured_) {
      Json j = report_envelope(echo_, nullptr, std::nullopt);
      j["status"] = "error";
      j["error"] = error_to_json(e);
      out_ << j.dump(2) << "\n";
    } else {
      err_ << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    }
    return kUsage;
  }

 private:
  bool structured_;
  CommandEcho echo_;
  std::ostream& out_;
  std::ostream& err_;
};

inline int cmd_validate(const Options& o, Emitter& em) {
  RawAutomaton raw;
  if (std::ifstream(o.automaton).good()) {
    raw = parse_automaton(json_util::read_file(o.automaton));
  } else if (is_builtin(o.automaton)) {
    raw = builtin_raw(o.automaton);
  } else {
    return em.fail(Error(ErrorCode::kIoError, "'" + o.automaton + "' is not a readable file"));
  }
  ValidationResult r = validate(raw);
  if (!r.ok()) throw ValidationError(std::move(r.errors));
  const DipAutomaton& a = *r.automaton;
  em.emit(&a, std::nullopt, "valid",
          {{"states", a.num_states()}, {"transitions", a.num_transitions()}});
  if (!em.structured()) {
    em.text() << a.name() << ": valid (" << a.num_states() << " states, " << a.num_transitions()
              << " transitions)\n";
  }
  return kOk;
}

inline int cmd_check(const Options& o, Emitter& em) {
  const DipAutomaton a = load_automaton(o.automaton);
  const Verdict v = check_well_formed(a);
  Json result = to_json(a, v);
  if (v.well_formed()) result["weight_all_paths"] = to_string(weight(a, WeightScope::kAllPaths));
  em.emit(&a, std::nullopt, v.well_formed() ? "well_formed" : "violation", result);
  if (!em.structured()) {
    if (v.well_formed()) {
      em.text() << a.name() << ": well-formed, weight " << to_string(v.weight())
                << " (over all paths " << result["weight_all_paths"].get<std::string>()
                << ")\n";
    } else {
      em.text() << a.name() << ": not well-formed: " << describe_witness(a, v.witness())
                << "\n";
    }
  }
  return v.well_formed() ? kOk : kFound;
}

inline int cmd_weight(const Options& o, Emitter& em) {
  const DipAutomaton a = load_automaton(o.automaton);
  const Verdict v = check_well_formed(a);
  const Rational w = weight(a);
  const Rational all = weight(a, WeightScope::kAllPaths);
  em.emit(&a, std::nullopt, "ok",
          {{"well_formed", v.well_formed()},
           {"weight", to_string(w)},
           {"weight_all_paths", to_string(all)},
           {"transitions", cost_table_to_json(a)}});
  if (!em.structured()) {
    for (const auto& c : cost_table(a)) {
      em.text() << "  " << describe_transition(a, c.transition) << "  cost "
                << to_string(c.cost) << (c.critical ? "  (critical)" : "") << "\n";
    }
    em.text() << a.name() << ": weight " << to_string(w) << " (over all paths "
              << to_string(all) << ")";
    if (!v.well_formed()) em.text() << "; not well-formed, so this is not a privacy bound";
    em.text() << "\n";
  }
  return kOk;
}

inline int cmd_witness(const Options& o, Emitter& em) {
  const DipAutomaton a = load_automaton(o.automaton);
  const auto d = parse_exact(o.d);
  if (!d || *d <= 0) throw Error(ErrorCode::kInvalidArgument, "--d must be positive");
  if (o.recipe != "unit" && o.recipe != "half") {
    throw Error(ErrorCode::kInvalidArgument, "--recipe must be unit or half");
  }
  WitnessOptions wopt;
  wopt.recipe = o.recipe == "half" ? ShiftRecipe::kHalf : ShiftRecipe::kUnit;
  const std::vector<double> eps = parse_eps(o.eps, {1, 2, 4, 8});
  const std::uint64_t seed = resolve_seed(o.seed);

  const Verdict v = check_well_formed(a);
  if (v.well_formed()) {
    em.emit(&a, seed, "well_formed",
            {{"note", std::string(to_string(ErrorCode::kAutomatonIsWellFormed))},
             {"weight", to_string(v.weight())}});
    if (!em.structured()) {
      em.text() << a.name() << ": well-formed (weight " << to_string(v.weight())
                << "); nothing to refute\n";
    }
    return kOk;
  }

  if (o.ell) {
    WitnessPair p = gen_witness_pair(a, v.witness(), *o.ell, wopt);
    p.ratio_report = ratio_report(p, eps);
    bool exceeds = false;
    for (const auto& r : p.ratio_report) exceeds |= r.ratio > std::exp(to_double(*d) * r.eps);
    Json pair = to_json(p, o.automaton);
    add_thresholds(pair, *d);
    em.emit(&a, std::nullopt, exceeds ? "refuted" : "not_exceeded",
            {{"d", to_string(*d)}, {"pair", pair}});
    if (!em.structured()) {
      em.text() << a.name() << ": " << to_string(p.kind) << " pair, l = " << p.ell << "\n"
                << "  rho1 inputs: " << describe_inputs(p.rho1) << "\n"
                << "  rho2 inputs: " << describe_inputs(p.rho2) << "\n";
      for (const auto& r : p.ratio_report) {
        em.text() << "  eps " << fmt(r.eps) << ": ratio " << fmt(r.ratio) << " vs e^(d eps) "
                  << fmt(std::exp(to_double(*d) * r.eps)) << "\n";
      }
    }
    return exceeds ? kFound : kOk;
  }

  RefuteOptions ropt;
  ropt.eps_grid = eps;
  ropt.ell_max = o.ell_max;
  ropt.mc_samples = o.n;
  ropt.seed = seed;
  ropt.workers = o.workers;
  ropt.witness = wopt;
  const Refutation r = refute(a, *d, ropt);
  Json result = to_json(a, r, o.automaton);
  result["d"] = to_string(*d);
  if (result.contains("pair")) add_thresholds(result["pair"], *d);
  em.emit(&a, seed, r.found ? "refuted" : "inconclusive", result);
  if (!em.structured()) {
    em.text() << a.name() << ": " << describe_witness(a, r.witness) << "\n";
    if (r.found) {
      em.text() << "refuted d = " << to_string(*d) << ": l = " << r.ell << ", eps = "
                << fmt(r.eps) << ", ratio " << fmt(r.ratio) << " > " << fmt(r.threshold)
                << "\n  p1 = " << fmt(r.p1) << ", p2 = " << fmt(r.p2)
                << "\n  rho1 inputs: " << describe_inputs(r.pair->rho1)
                << "\n  rho2 inputs: " << describe_inputs(r.pair->rho2)
                << "\n  simulation check: " << to_string(r.mc_status) << " (n = " << o.n
                << ", seed = " << seed << ")\n";
    } else {
      em.text() << "inconclusive for d = " << to_string(*d) << " up to l = " << o.ell_max
                << "; best ratio " << fmt(r.ratio) << " at l = " << r.ell << ", eps = "
                << fmt(r.eps) << "\n";
    }
  }
  return r.found ? kFound : kOk;
}

inline Path load_path(const DipAutomaton& a, const Options& o, double& x0) {
  const PathDocument doc = parse_path_document(json_util::read_file(o.path));
  x0 = o.x0 ? *o.x0 : doc.x0;
  if (!std::isfinite(x0)) throw Error(ErrorCode::kInvalidArgument, "x0 must be finite");
  return check_path(a, doc);
}

inline int cmd_prob(const Options& o, Emitter& em) {
  const DipAutomaton a = load_automaton(o.automaton);
  double x0 = 0;
  const Path p = load_path(a, o, x0);
  Json values = Json::array();
  for (double e : parse_eps(o.eps, {1})) {
    const ProbResult r = pathprob_exact(p, e, x0);
    Json j = to_json(r);
    j["eps"] = e;
    values.push_back(j);
    if (!em.structured()) em.text() << "eps " << fmt(e) << ": " << fmt(r.value) << "\n";
  }
  em.emit(&a, std::nullopt, "ok", {{"x0", x0}, {"length", p.size()}, {"values", values}});
  return kOk;
}

inline int cmd_simulate(const Options& o, Emitter& em) {
  const DipAutomaton a = load_automaton(o.automaton);
  double x0 = 0;
  const Path p = load_path(a, o, x0);
  const std::uint64_t seed = resolve_seed(o.seed);
  if (o.n == 0) throw Error(ErrorCode::kInvalidArgument, "--n must be positive");
  Json values = Json::array();
  for (double e : parse_eps(o.eps, {1})) {
    const ProbResult mc = pathprob_mc(p, e, x0, o.n, seed, o.workers);
    const double exact = pathprob_exact(p, e, x0).value;
    Json j = to_json(mc);
    j["eps"] = e;
    j["exact"] = exact;
    j["rare_event"] = is_rare_event(exact, o.n);
    values.push_back(j);
    if (!em.structured()) {
      em.text() << "eps " << fmt(e) << ": estimate " << fmt(mc.value) << " +- "
                << fmt(mc.std_error) << " (n = " << o.n << ", seed = " << seed << "), exact "
                << fmt(exact) << (is_rare_event(exact, o.n) ? "  [rare event]" : "") << "\n";
    }
  }
  em.emit(&a, seed, "ok", {{"x0", x0}, {"length", p.size()}, {"values", values}});
  return kOk;
}

inline int cmd_demo(const Options& o, Emitter& em) {
  std::vector<std::string> names(kBuiltinNames.begin(), kBuiltinNames.end());
  if (!o.name.empty()) names = {o.name};
  Json rows = Json::array();
  for (const auto& n : names) {
    const DipAutomaton a = builtin(n);
    const Verdict v = check_well_formed(a);
    Json row = to_json(a, v);
    row["name"] = n;
    row["hash"] = automaton_hash(a);
    rows.push_back(row);
    if (!em.structured()) {
      em.text() << std::left << std::setw(20) << n;
      if (v.well_formed()) {
        em.text() << "well-formed, weight " << to_string(v.weight()) << "\n";
      } else {
        em.text() << "not well-formed: " << to_string(v.witness().kind) << "\n";
      }
      if (!o.name.empty()) {
        em.text() << serialize(a);
        if (!v.well_formed()) em.text() << describe_witness(a, v.witness()) << "\n";
      }
    }
  }
  em.emit(nullptr, std::nullopt, "ok", {{"automata", rows}});
  return kOk;
}

// Runs one invocation; args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Checks differential privacy of DiP automata", "dipcheck"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  Options o;

  auto add_format = [&](CLI::App* c) {
    c->add_option("--format", o.format, "Report format")
        ->check(CLI::IsMember({"human", "structured"}));
  };
  auto add_automaton = [&](CLI::App* c) {
    c->add_option("automaton", o.automaton, "Automaton file or built-in name")->required();
  };
  auto add_path = [&](CLI::App* c) {
    c->add_option("path", o.path, "Path document")->required();
    c->add_option("--eps", o.eps, "Privacy parameter; repeatable");
    c->add_option("--x0", o.x0, "Initial register value (default: the document's)");
  };
  auto add_seed = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "Random seed (default: $DIPCHECK_SEED, else 1)");
    c->add_option("--n", o.n, "Monte Carlo sample count");
    c->add_option("--workers", o.workers, "Simulation threads")->check(CLI::Range(1u, 256u));
  };

  auto* validate_cmd = app.add_subcommand("validate", "Check an automaton document");
  auto* check_cmd = app.add_subcommand("check", "Decide well-formedness");
  auto* weight_cmd = app.add_subcommand("weight", "Transition costs and weight");
  auto* witness_cmd = app.add_subcommand("witness", "Build a violating path pair");
  auto* prob_cmd = app.add_subcommand("prob", "Exact path probability");
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo path probability");
  auto* demo_cmd = app.add_subcommand("demo", "Verdicts for the built-in automata");
  for (auto* c : {validate_cmd, check_cmd, weight_cmd, witness_cmd, prob_cmd, simulate_cmd,
                  demo_cmd}) {
    add_format(c);
  }
  for (auto* c : {validate_cmd, check_cmd, weight_cmd, witness_cmd, prob_cmd, simulate_cmd}) {
    add_automaton(c);
  }
  add_path(prob_cmd);
  add_path(simulate_cmd);
  add_seed(simulate_cmd);
  add_seed(witness_cmd);
  witness_cmd->add_option("--d", o.d, "Privacy multiple to refute");
  witness_cmd->add_option("--ell", o.ell, "Fixed repetition count; skips the search")
      ->check(CLI::PositiveNumber);
  witness_cmd->add_option("--ell-max", o.ell_max, "Largest repetition count searched")
      ->check(CLI::PositiveNumber);
  witness_cmd->add_option("--eps", o.eps, "Privacy parameter grid; repeatable");
  witness_cmd->add_option("--recipe", o.recipe, "Violating-path input shift: unit or half");
  demo_cmd->add_option("name", o.name, "Show one built-in in detail")
      ->check(CLI::IsMember(std::vector<std::string>(kBuiltinNames.begin(), kBuiltinNames.end())));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help(app.get_subcommands().empty() ? "" : app.get_subcommands().front()->get_name());
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error [usage]: " << e.what() << "\n";
    return kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  Emitter em(o, CommandEcho{sub->get_name(), std::vector<std::string>(args.begin() + 1, args.end())},
             out, err);
  try {
    if (sub == validate_cmd) return cmd_validate(o, em);
    if (sub == check_cmd) return cmd_check(o, em);
    if (sub == weight_cmd) return cmd_weight(o, em);
    if (sub == witness_cmd) return cmd_witness(o, em);
    if (sub == prob_cmd) return cmd_prob(o, em);
    if (sub == simulate_cmd) return cmd_simulate(o, em);
    return cmd_demo(o, em);
  } catch (const Error& e) {
    return em.fail(e);
  }
}

}  // namespace dipcheck::cli
