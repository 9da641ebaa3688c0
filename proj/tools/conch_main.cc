// conch: consistency checking for recorded concurrent traces.
//
// Subcommands:
//   check-sc TRACE     sequential consistency (exit 0 yes, 1 no)
//   check-lin TRACE    linearizability
//   check-ec TRACE     eventual consistency (order-based and knowledge-based)
//   eval TRACE         evaluate a formula at a position of the trace
//   theorems           exhaustive cross-checks between the formulations
//   generate           emit trace corpora for experiments
//
// Exit codes: 0 consistent/true/pass, 1 inconsistent/false/fail,
// 2 budget exhausted before an answer, 3 usage or parse error.
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "conch/checkers.hh"
#include "conch/errors.hh"
#include "conch/logic.hh"
#include "conch/reference.hh"
#include "conch/speclang.hh"
#include "conch/trace.hh"
#include "conch/trace_io.hh"

namespace {

constexpr int kExitConsistent = 0;
constexpr int kExitInconsistent = 1;
constexpr int kExitBudget = 2;
constexpr int kExitUsage = 3;

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream os;
    os << std::cin.rdbuf();
    return os.str();
  }
  std::ifstream in(path);
  if (!in) throw conch::ConfigError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct GlobalArgs {
  std::uint64_t budget_nodes = conch::Budget{}.max_nodes;
  std::uint64_t budget_ms = 0;  // 0 = no time limit
  std::string spec_flag = "register";
  bool spec_flag_given = false;

  conch::Budget budget() const {
    conch::Budget b;
    b.max_nodes = budget_nodes;
    if (budget_ms > 0) b.max_time = std::chrono::milliseconds(budget_ms);
    return b;
  }
};

// The header's spec= is the default; an explicit --spec wins.
std::shared_ptr<const conch::SpecOracle> pick_spec(
    const GlobalArgs& g, const conch::TraceDocument& doc) {
  std::string name = g.spec_flag;
  if (!g.spec_flag_given && !doc.spec_name.empty()) name = doc.spec_name;
  return conch::make_spec(name);
}

void print_stats(const conch::SearchStats& stats) {
  std::cerr << "explored " << stats.nodes << " nodes, " << stats.witnesses
            << " complete candidates\n";
}

int report_verdict(const conch::Verdict& v, const std::string& spec_name,
                   std::size_t trace_events) {
  print_stats(v.stats);
  if (v.consistent) {
    std::cout << "consistent\n";
    if (v.witness) std::cout << conch::print_trace(*v.witness, spec_name);
    if (v.certificate) {
      std::cout << conch::print_certificate(*v.certificate, trace_events);
    }
    return kExitConsistent;
  }
  std::cout << "inconsistent\n";
  return kExitInconsistent;
}

int run_validate_only(const std::string& artifact_path, const conch::Trace& e,
                      const std::string& kind,
                      std::shared_ptr<const conch::SpecOracle> spec) {
  std::string text = read_input(artifact_path);
  bool ok = false;
  if (conch::looks_like_certificate(text)) {
    if (kind != "ec") {
      std::cerr << "certificates only apply to check-ec\n";
      return kExitUsage;
    }
    auto cert = conch::parse_certificate(text);
    ok = conch::revalidate_certificate(e, cert.certificate);
  } else {
    conch::Trace w = conch::parse_trace(text).trace;
    if (kind == "sc") {
      ok = conch::revalidate_witness_sc(e, *spec, w);
    } else if (kind == "lin") {
      ok = conch::revalidate_witness_lin(e, *spec, w);
    } else {
      ok = conch::revalidate_witness_ec(e, w);
    }
  }
  std::cout << (ok ? "valid\n" : "invalid\n");
  return ok ? kExitConsistent : kExitInconsistent;
}

int cmd_check(const std::string& kind, const std::string& trace_path,
              const std::string& validate_path, const std::string& ec_mode,
              const GlobalArgs& g) {
  auto doc = conch::parse_trace(read_input(trace_path));
  auto spec = pick_spec(g, doc);
  if (!validate_path.empty()) {
    return run_validate_only(validate_path, doc.trace, kind, spec);
  }
  conch::CheckOptions options;
  options.budget = g.budget();
  std::size_t n = doc.trace.size();
  if (kind == "sc") {
    return report_verdict(conch::check_sc(doc.trace, *spec, options),
                          spec->name(), n);
  }
  if (kind == "lin") {
    // Fused call events carry no separate return/invocation ordering, so
    // they are split before the real-time constraint is computed.
    conch::Trace split = conch::split_calls(doc.trace);
    return report_verdict(conch::check_lin(split, *spec, options),
                          spec->name(), split.size());
  }
  // Eventual consistency. The knowledge-based answer is the definition;
  // the order-based one is reported next to it when both are requested.
  std::optional<conch::Verdict> axiomatic;
  std::optional<conch::Verdict> epistemic;
  if (ec_mode == "axiomatic" || ec_mode == "both") {
    axiomatic = conch::check_ec_axiomatic(doc.trace, options);
  }
  if (ec_mode == "epistemic" || ec_mode == "both") {
    epistemic = conch::check_ec_epistemic(doc.trace, options);
  }
  if (axiomatic && epistemic &&
      axiomatic->consistent != epistemic->consistent) {
    std::cerr << "note: order-based and knowledge-based answers disagree"
              << " (possible only when the trace repeats an action)\n";
  }
  const conch::Verdict& primary = epistemic ? *epistemic : *axiomatic;
  if (axiomatic && epistemic) {
    std::cerr << "order-based: "
              << (axiomatic->consistent ? "consistent" : "inconsistent")
              << "\n";
  }
  int code = report_verdict(primary, "", n);
  if (axiomatic && axiomatic->certificate && epistemic) {
    std::cout << conch::print_certificate(*axiomatic->certificate, n);
  }
  return code;
}

int cmd_eval(const std::string& trace_path, const std::string& formula_text,
             std::int64_t at, const std::string& semantics,
             const std::string& env_policy, const GlobalArgs& g) {
  auto doc = conch::parse_trace(read_input(trace_path));
  auto spec = pick_spec(g, doc);
  conch::Formula f = conch::parse_formula(formula_text);
  conch::EvalOptions options;
  options.budget = g.budget();
  options.until = semantics == "past-until"
                      ? conch::UntilSemantics::PastAnchored
                      : conch::UntilSemantics::Future;
  options.env = env_policy == "ec-forwarding" ? conch::EnvPolicy::EcForwarding
                                              : conch::EnvPolicy::None;
  std::size_t i = at < 0 ? doc.trace.size() : static_cast<std::size_t>(at);
  if (i > doc.trace.size()) {
    std::cerr << "--at " << i << " exceeds trace length " << doc.trace.size()
              << "\n";
    return kExitUsage;
  }
  conch::Evaluator ev(conch::default_bindings(spec), options);
  bool value = ev.eval(doc.trace, i, f);
  std::cout << (value ? "true" : "false") << "\n";
  return value ? kExitConsistent : kExitInconsistent;
}

void print_suite(const conch::SuiteReport& r) {
  std::cout << r.name << ": " << (r.passed() ? "pass" : "FAIL") << " ("
            << r.instances << " instances, " << r.failures << " failures, "
            << r.skipped << " skipped)\n";
  for (const auto& s : r.samples) std::cout << "  failing: " << s << "\n";
}

int cmd_theorems(const std::string& suite, std::size_t max_events,
                 std::size_t samples, std::uint64_t seed, std::size_t jobs) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  bool ok = true;
  if (suite == "sc-equivalence") {
    auto r = conch::run_sc_equivalence(max_events, jobs);
    print_suite(r);
    ok = r.passed();
  } else if (suite == "lin-equivalence") {
    auto r = conch::run_lin_equivalence(max_events, jobs);
    print_suite(r);
    ok = r.passed();
  } else if (suite == "ec-equivalence") {
    auto r = conch::run_ec_equivalence(max_events, jobs);
    print_suite(r.overall);
    print_suite(r.distinct_actions);
    std::cout << "disagreements, all on repeated-action histories: "
              << r.disagreements_on_repeated_actions << " (order-based only "
              << r.axiomatic_only << ", knowledge-based only "
              << r.epistemic_only << ")\n";
    // The formulations provably coincide only when no action repeats, so
    // the gate is the distinct-action suite.
    ok = r.distinct_actions.passed() &&
         r.overall.failures == r.disagreements_on_repeated_actions;
  } else if (suite == "axioms") {
    auto r = conch::run_axiom_suite(samples, seed, jobs);
    print_suite(r.truth);
    print_suite(r.positive);
    print_suite(r.negative_no_observer);
    std::cout << "negative introspection failures with observer: "
              << r.negative_observer_failures << "\n";
    std::cout << "overlapping-calls fixture exhibits the failure: "
              << (r.overlapping_calls_failure_found ? "yes" : "NO") << "\n";
    ok = r.truth.passed() && r.positive.passed() &&
         r.negative_no_observer.passed() && r.overlapping_calls_failure_found;
  } else if (suite == "detection") {
    auto r = conch::run_detection_suite(samples, seed, jobs);
    print_suite(r.sc_positive);
    print_suite(r.sc_negative);
    print_suite(r.sc_checker_match);
    print_suite(r.lin_negative);
    print_suite(r.lin_checker_match);
    std::cout << "linearizability positive-detection failures: "
              << r.lin_positive_failures << "\n";
    std::cout << "overlapping-calls fixture is consistent but unknown: "
              << (r.overlapping_calls_undetected_lin ? "yes" : "NO") << "\n";
    ok = r.sc_positive.passed() && r.sc_negative.passed() &&
         r.sc_checker_match.passed() && r.lin_negative.passed() &&
         r.lin_checker_match.passed() && r.overlapping_calls_undetected_lin;
  } else {
    std::cerr << "unknown suite '" << suite << "'\n";
    return kExitUsage;
  }
  return ok ? kExitConsistent : kExitInconsistent;
}

int cmd_generate(const std::string& kind, std::size_t count,
                 std::size_t max_events, std::uint64_t seed, bool exhaustive,
                 const std::string& out_dir) {
  std::vector<conch::Trace> corpus;
  if (exhaustive) {
    conch::TraceFamily::Kind k;
    if (kind == "register-calls") {
      k = conch::TraceFamily::Kind::RegisterCalls;
    } else if (kind == "register-split") {
      k = conch::TraceFamily::Kind::RegisterSplit;
    } else {
      k = conch::TraceFamily::Kind::EventuallyConsistent;
    }
    conch::TraceFamily family(k, max_events);
    for (std::uint64_t i = 0; i < family.size(); ++i) {
      if (auto t = family.at(i)) corpus.push_back(std::move(*t));
    }
  } else if (kind == "ec") {
    corpus = conch::random_ec_traces(count, max_events, seed);
  } else if (kind == "register-split") {
    corpus = conch::random_register_split_traces(count, max_events, seed);
  } else {
    std::cerr << "random generation supports register-split and ec\n";
    return kExitUsage;
  }
  if (out_dir.empty()) {
    for (const auto& t : corpus) std::cout << conch::print_trace(t) << "\n";
  } else {
    std::filesystem::create_directories(out_dir);
    std::size_t n = 0;
    for (const auto& t : corpus) {
      std::ostringstream name;
      name << out_dir << "/" << kind << "-" << n++ << ".trace";
      std::ofstream out(name.str());
      out << conch::print_trace(t);
    }
    std::cerr << "wrote " << corpus.size() << " traces to " << out_dir
              << "\n";
  }
  return kExitConsistent;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"consistency checking for recorded concurrent traces"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--budget-nodes", g.budget_nodes,
                 "abort searches after this many explored nodes");
  app.add_option("--budget-ms", g.budget_ms,
                 "abort searches after this many milliseconds");
  auto* spec_opt =
      app.add_option("--spec", g.spec_flag, "operation spec: register or none")
          ->check(CLI::IsMember({"register", "none"}));

  std::string trace_path = "-";
  std::string validate_path;
  std::string ec_mode = "both";
  std::string formula_text;
  std::int64_t at = -1;
  std::string semantics = "future-until";
  std::string env_policy = "none";
  std::string suite = "sc-equivalence";
  std::size_t max_events = 6;
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
  std::size_t jobs = 0;
  std::string gen_kind = "register-split";
  std::size_t count = 100;
  bool exhaustive = false;
  std::string out_dir;

  auto add_trace_arg = [&](CLI::App* sub) {
    sub->add_option("trace", trace_path, "trace file, or - for stdin");
  };

  auto* sc = app.add_subcommand("check-sc", "sequential consistency");
  add_trace_arg(sc);
  sc->add_option("--validate-only", validate_path,
                 "re-check a previously emitted witness instead of searching");

  auto* lin = app.add_subcommand("check-lin", "linearizability");
  add_trace_arg(lin);
  lin->add_option("--validate-only", validate_path,
                  "re-check a previously emitted witness instead of searching");

  auto* ec = app.add_subcommand("check-ec", "eventual consistency");
  add_trace_arg(ec);
  ec->add_option("--mode", ec_mode, "axiomatic, epistemic, or both")
      ->check(CLI::IsMember({"axiomatic", "epistemic", "both"}));
  ec->add_option("--validate-only", validate_path,
                 "re-check an emitted witness or certificate");

  auto* ev = app.add_subcommand("eval", "evaluate a formula on a trace");
  add_trace_arg(ev);
  ev->add_option("--formula", formula_text, "formula text")->required();
  ev->add_option("--at", at, "position to evaluate at (default: trace end)");
  ev->add_option("--semantics", semantics, "until semantics")
      ->check(CLI::IsMember({"past-until", "future-until"}));
  ev->add_option("--env-policy", env_policy,
                 "environment insertions inside knowledge operators")
      ->check(CLI::IsMember({"none", "ec-forwarding"}));

  auto* th = app.add_subcommand("theorems", "exhaustive cross-check suites");
  th->add_option("--suite", suite,
                 "sc-equivalence, lin-equivalence, ec-equivalence, axioms, "
                 "or detection")
      ->required();
  th->add_option("--max-events", max_events, "trace length bound");
  th->add_option("--samples", samples, "random corpus size");
  th->add_option("--seed", seed, "random corpus seed");
  th->add_option("--jobs", jobs, "worker threads (0 = hardware)");

  auto* gen = app.add_subcommand("generate", "emit trace corpora");
  gen->add_option("--kind", gen_kind, "register-calls, register-split, or ec")
      ->check(CLI::IsMember({"register-calls", "register-split", "ec"}));
  gen->add_option("--count", count, "number of random traces");
  gen->add_option("--max-events", max_events, "trace length bound");
  gen->add_option("--seed", seed, "random seed");
  gen->add_flag("--exhaustive", exhaustive, "emit the whole family instead");
  gen->add_option("--out-dir", out_dir, "write one file per trace here");

  CLI11_PARSE(app, argc, argv);
  g.spec_flag_given = spec_opt->count() > 0;

  try {
    if (sc->parsed()) return cmd_check("sc", trace_path, validate_path, "", g);
    if (lin->parsed()) {
      return cmd_check("lin", trace_path, validate_path, "", g);
    }
    if (ec->parsed()) {
      return cmd_check("ec", trace_path, validate_path, ec_mode, g);
    }
    if (ev->parsed()) {
      return cmd_eval(trace_path, formula_text, at, semantics, env_policy, g);
    }
    if (th->parsed()) return cmd_theorems(suite, max_events, samples, seed, jobs);
    if (gen->parsed()) {
      return cmd_generate(gen_kind, count, max_events, seed, exhaustive,
                          out_dir);
    }
  } catch (const conch::BudgetError& err) {
    std::cerr << "budget exhausted: " << err.what() << "\n";
    return kExitBudget;
  } catch (const conch::ParseError& err) {
    std::cerr << "parse error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const conch::Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
