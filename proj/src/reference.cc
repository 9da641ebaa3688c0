#include "conch/reference.hh"

#include <algorithm>
#include <random>
#include <thread>
#include <utility>

#include "conch/checkers.hh"
#include "conch/errors.hh"
#include "conch/logic.hh"

namespace conch {

namespace {

std::string one_line(const Trace& t) {
  std::string out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out += "; ";
    out += event_line(t[i]);
  }
  return out.empty() ? "(empty)" : out;
}

std::vector<Trace> projections_of(const Trace& e) {
  std::vector<Trace> out;
  for (const Agent& t : threads_of(e)) out.push_back(project(e, t));
  return out;
}

bool same_projections(const std::vector<Trace>& want, const Trace& candidate,
                      const std::vector<Agent>& threads) {
  for (std::size_t k = 0; k < threads.size(); ++k) {
    if (project(candidate, threads[k]) != want[k]) return false;
  }
  return true;
}

}  // namespace

bool sc_by_permutations(const Trace& e, const SpecOracle& spec) {
  std::vector<Agent> threads = threads_of(e);
  std::vector<Trace> want = projections_of(e);
  std::vector<Event> events = e.events();
  std::sort(events.begin(), events.end());
  do {
    Trace candidate(events);
    if (!same_projections(want, candidate, threads)) continue;
    if (spec_member(spec, candidate)) return true;
  } while (std::next_permutation(events.begin(), events.end()));
  return false;
}

bool lin_by_permutations(const Trace& e, const SpecOracle& spec) {
  if (auto dup = find_duplicate_event(e)) {
    throw PreconditionError("trace has a repeated event: " +
                            event_line(*dup));
  }
  std::vector<Agent> threads = threads_of(e);
  std::vector<Trace> want = projections_of(e);
  // Pairs that the position bijection must keep ordered. With unique
  // events the bijection is fixed by event value.
  std::vector<std::pair<Event, Event>> pairs;
  for (std::size_t j = 0; j < e.size(); ++j) {
    if (!is_ret(e[j])) continue;
    for (std::size_t k = j + 1; k < e.size(); ++k) {
      if (is_inv(e[k])) pairs.push_back({e[j], e[k]});
    }
  }
  std::vector<Event> events = e.events();
  std::sort(events.begin(), events.end());
  do {
    Trace candidate(events);
    if (!same_projections(want, candidate, threads)) continue;
    bool ordered = true;
    for (const auto& [r, in] : pairs) {
      if (*pos(r, candidate) > *pos(in, candidate)) {
        ordered = false;
        break;
      }
    }
    if (!ordered) continue;
    if (spec_member(spec, candidate)) return true;
  } while (std::next_permutation(events.begin(), events.end()));
  return false;
}

namespace {

constexpr const char* kThreadNames[2] = {"t1", "t2"};

Event call_symbol(std::size_t s) {
  const std::string t = kThreadNames[s / 4];
  switch (s % 4) {
    case 0: return events::call(t, "ld", Value{std::int64_t{0}});
    case 1: return events::call(t, "ld", Value{std::int64_t{1}});
    case 2: return events::call(t, "st", Value{std::int64_t{0}});
    default: return events::call(t, "st", Value{std::int64_t{1}});
  }
}

Event split_symbol(std::size_t s) {
  const std::string t = kThreadNames[s / 6];
  switch (s % 6) {
    case 0: return events::inv(t, "ld");
    case 1: return events::ret(t, "ld", Value{std::int64_t{0}});
    case 2: return events::ret(t, "ld", Value{std::int64_t{1}});
    case 3: return events::inv(t, "st", Value{std::int64_t{0}});
    case 4: return events::inv(t, "st", Value{std::int64_t{1}});
    default: return events::ret(t, "st", Value{true});
  }
}

// EC symbols carry no revision; ids are assigned afterwards by counting
// commits per thread.
struct EcSymbol {
  std::size_t thread;
  std::size_t op;  // 0: qu 0, 1: qu 1, 2: up :=0, 3: up :=1, 4: com
};

Trace assemble_ec(const std::vector<EcSymbol>& symbols) {
  std::vector<Event> out;
  RevisionId rev[2] = {0, 0};
  for (const EcSymbol& s : symbols) {
    const std::string t = kThreadNames[s.thread];
    RevisionId r = rev[s.thread];
    switch (s.op) {
      case 0: out.push_back(events::query(t, r, "x", Value{std::int64_t{0}})); break;
      case 1: out.push_back(events::query(t, r, "x", Value{std::int64_t{1}})); break;
      case 2: out.push_back(events::update(t, r, "x", 0)); break;
      case 3: out.push_back(events::update(t, r, "x", 1)); break;
      default:
        out.push_back(events::commit(t, r));
        ++rev[s.thread];
        break;
    }
  }
  return Trace(out);
}

std::size_t alphabet_for(TraceFamily::Kind kind) {
  switch (kind) {
    case TraceFamily::Kind::RegisterCalls: return 8;
    case TraceFamily::Kind::RegisterSplit: return 12;
    case TraceFamily::Kind::EventuallyConsistent: return 10;
  }
  return 0;
}

}  // namespace

TraceFamily::TraceFamily(Kind kind, std::size_t max_events)
    : kind_(kind), max_events_(max_events), alphabet_(alphabet_for(kind)) {
  size_ = 0;
  std::uint64_t block = 1;
  for (std::size_t n = 0; n <= max_events_; ++n) {
    size_ += block;
    block *= alphabet_;
  }
}

std::optional<Trace> TraceFamily::at(std::uint64_t index) const {
  if (index >= size_) {
    throw PreconditionError("trace index out of range");
  }
  std::size_t n = 0;
  std::uint64_t block = 1;
  while (index >= block) {
    index -= block;
    block *= alphabet_;
    ++n;
  }
  std::vector<std::size_t> digits(n);
  for (std::size_t k = n; k-- > 0;) {
    digits[k] = index % alphabet_;
    index /= alphabet_;
  }
  if (kind_ == Kind::EventuallyConsistent) {
    std::vector<EcSymbol> symbols;
    for (std::size_t d : digits) symbols.push_back({d / 5, d % 5});
    return assemble_ec(symbols);
  }
  std::vector<Event> out;
  for (std::size_t d : digits) {
    out.push_back(kind_ == Kind::RegisterCalls ? call_symbol(d)
                                               : split_symbol(d));
  }
  Trace t(out);
  if (kind_ == Kind::RegisterSplit && find_duplicate_event(t)) {
    return std::nullopt;
  }
  return t;
}

bool has_distinct_actions(const Trace& e) {
  std::set<Action> seen;
  for (const Event& ev : e) {
    if (is_forward(ev)) continue;
    if (!seen.insert(ev.action).second) return false;
  }
  return true;
}

std::vector<Trace> random_register_split_traces(std::size_t count,
                                                std::size_t max_events,
                                                std::uint64_t seed) {
  TraceFamily family(TraceFamily::Kind::RegisterSplit, max_events);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> dist(0, family.size() - 1);
  std::vector<Trace> out;
  while (out.size() < count) {
    if (auto t = family.at(dist(rng))) out.push_back(std::move(*t));
  }
  return out;
}

std::vector<Trace> random_ec_traces(std::size_t count, std::size_t max_events,
                                    std::uint64_t seed) {
  TraceFamily family(TraceFamily::Kind::EventuallyConsistent, max_events);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> dist(0, family.size() - 1);
  std::vector<Trace> out;
  while (out.size() < count) {
    if (auto t = family.at(dist(rng))) out.push_back(std::move(*t));
  }
  return out;
}

namespace {

// Each worker walks a strided slice of the index space and accumulates
// into its own Acc; results are merged in worker order, and failure
// samples are re-sorted by instance index so reports are deterministic.
template <class Acc, class Body>
Acc parallel_accumulate(std::uint64_t count, std::size_t jobs,
                        const Body& body) {
  jobs = std::max<std::size_t>(1, jobs);
  std::vector<Acc> accs(jobs);
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      for (std::uint64_t i = w; i < count; i += jobs) body(i, accs[w]);
    });
  }
  for (auto& th : workers) th.join();
  Acc total;
  for (auto& a : accs) total.merge(std::move(a));
  total.finish();
  return total;
}

constexpr std::size_t kMaxSamples = 5;

struct SampleSet {
  std::vector<std::pair<std::uint64_t, std::string>> items;

  void add(std::uint64_t index, std::string text) {
    items.push_back({index, std::move(text)});
    if (items.size() > 4 * kMaxSamples) trim();
  }
  void trim() {
    std::sort(items.begin(), items.end());
    if (items.size() > kMaxSamples) items.resize(kMaxSamples);
  }
  void merge(SampleSet&& other) {
    for (auto& it : other.items) items.push_back(std::move(it));
    trim();
  }
  std::vector<std::string> texts() {
    trim();
    std::vector<std::string> out;
    for (auto& [i, s] : items) out.push_back(std::move(s));
    return out;
  }
};

struct EquivalenceAcc {
  std::uint64_t instances = 0;
  std::uint64_t failures = 0;
  std::uint64_t skipped = 0;
  SampleSet samples;

  void merge(EquivalenceAcc&& o) {
    instances += o.instances;
    failures += o.failures;
    skipped += o.skipped;
    samples.merge(std::move(o.samples));
  }
  void finish() {}

  SuiteReport report(std::string name) {
    SuiteReport r;
    r.name = std::move(name);
    r.instances = instances;
    r.failures = failures;
    r.skipped = skipped;
    r.samples = samples.texts();
    return r;
  }
};

}  // namespace

SuiteReport run_sc_equivalence(std::size_t max_events, std::size_t jobs) {
  TraceFamily family(TraceFamily::Kind::RegisterCalls, max_events);
  RegisterSpec spec;
  auto spec_ptr = make_spec("register");
  auto acc = parallel_accumulate<EquivalenceAcc>(
      family.size(), jobs, [&](std::uint64_t i, EquivalenceAcc& a) {
        auto t = family.at(i);
        if (!t) return;
        ++a.instances;
        try {
          bool searched = check_sc(*t, spec).consistent;
          bool brute = sc_by_permutations(*t, spec);
          Formula f = Formula::lnot(Formula::knows(
              GroupSpec::everyone(false),
              Formula::lnot(Formula::atom("correct"))));
          bool formula = eval(*t, t->size(), f, default_bindings(spec_ptr));
          if (searched != brute || searched != formula) {
            ++a.failures;
            a.samples.add(i, one_line(*t) + " | search=" +
                                 std::to_string(searched) +
                                 " permutations=" + std::to_string(brute) +
                                 " formula=" + std::to_string(formula));
          }
        } catch (const BudgetError&) {
          ++a.skipped;
        }
      });
  return acc.report("sc-equivalence");
}

SuiteReport run_lin_equivalence(std::size_t max_events, std::size_t jobs) {
  TraceFamily family(TraceFamily::Kind::RegisterSplit, max_events);
  RegisterSpec spec;
  auto acc = parallel_accumulate<EquivalenceAcc>(
      family.size(), jobs, [&](std::uint64_t i, EquivalenceAcc& a) {
        auto t = family.at(i);
        if (!t) return;
        ++a.instances;
        try {
          bool searched = check_lin(*t, spec).consistent;
          bool brute = lin_by_permutations(*t, spec);
          if (searched != brute) {
            ++a.failures;
            a.samples.add(i, one_line(*t) + " | search=" +
                                 std::to_string(searched) +
                                 " bijection=" + std::to_string(brute));
          }
        } catch (const BudgetError&) {
          ++a.skipped;
        }
      });
  return acc.report("lin-equivalence");
}

namespace {

struct EcAcc {
  EquivalenceAcc overall;
  EquivalenceAcc distinct;
  std::uint64_t repeated_disagreements = 0;
  std::uint64_t axiomatic_only = 0;
  std::uint64_t epistemic_only = 0;

  void merge(EcAcc&& o) {
    overall.merge(std::move(o.overall));
    distinct.merge(std::move(o.distinct));
    repeated_disagreements += o.repeated_disagreements;
    axiomatic_only += o.axiomatic_only;
    epistemic_only += o.epistemic_only;
  }
  void finish() {}
};

}  // namespace

EcEquivalenceReport run_ec_equivalence(std::size_t max_events,
                                       std::size_t jobs) {
  TraceFamily family(TraceFamily::Kind::EventuallyConsistent, max_events);
  auto acc = parallel_accumulate<EcAcc>(
      family.size(), jobs, [&](std::uint64_t i, EcAcc& a) {
        auto t = family.at(i);
        if (!t) return;
        bool distinct = has_distinct_actions(*t);
        ++a.overall.instances;
        if (distinct) ++a.distinct.instances;
        try {
          bool axiomatic = check_ec_axiomatic(*t).consistent;
          bool epistemic = check_ec_epistemic(*t).consistent;
          if (axiomatic == epistemic) return;
          ++a.overall.failures;
          a.overall.samples.add(
              i, one_line(*t) + " | axiomatic=" + std::to_string(axiomatic) +
                     " epistemic=" + std::to_string(epistemic));
          if (axiomatic) ++a.axiomatic_only;
          if (epistemic) ++a.epistemic_only;
          if (distinct) {
            ++a.distinct.failures;
            a.distinct.samples.add(i, one_line(*t));
          } else {
            ++a.repeated_disagreements;
          }
        } catch (const BudgetError&) {
          ++a.overall.skipped;
          if (distinct) ++a.distinct.skipped;
        }
      });
  EcEquivalenceReport report;
  report.overall = acc.overall.report("ec-equivalence");
  report.distinct_actions = acc.distinct.report("ec-equivalence-distinct");
  report.disagreements_on_repeated_actions = acc.repeated_disagreements;
  report.axiomatic_only = acc.axiomatic_only;
  report.epistemic_only = acc.epistemic_only;
  return report;
}

namespace {

Trace overlapping_calls() {
  return Trace({
      events::inv("t2", "ld"),
      events::inv("t1", "st", Value{std::int64_t{1}}),
      events::ret("t2", "ld", Value{std::int64_t{1}}),
      events::ret("t1", "st", Value{true}),
  });
}

struct AxiomAcc {
  EquivalenceAcc truth;
  EquivalenceAcc positive;
  EquivalenceAcc negative_no_obs;
  std::uint64_t negative_obs_failures = 0;
  bool fixture_failure = false;

  void merge(AxiomAcc&& o) {
    truth.merge(std::move(o.truth));
    positive.merge(std::move(o.positive));
    negative_no_obs.merge(std::move(o.negative_no_obs));
    negative_obs_failures += o.negative_obs_failures;
    fixture_failure = fixture_failure || o.fixture_failure;
  }
  void finish() {}
};

struct DetectionAcc {
  EquivalenceAcc sc_positive;
  EquivalenceAcc sc_negative;
  EquivalenceAcc sc_checker;
  EquivalenceAcc lin_negative;
  EquivalenceAcc lin_checker;
  std::uint64_t lin_positive_failures = 0;
  bool fixture_undetected = false;

  void merge(DetectionAcc&& o) {
    sc_positive.merge(std::move(o.sc_positive));
    sc_negative.merge(std::move(o.sc_negative));
    sc_checker.merge(std::move(o.sc_checker));
    lin_negative.merge(std::move(o.lin_negative));
    lin_checker.merge(std::move(o.lin_checker));
    lin_positive_failures += o.lin_positive_failures;
    fixture_undetected = fixture_undetected || o.fixture_undetected;
  }
  void finish() {}
};

void tally(EquivalenceAcc& acc, bool ok, std::uint64_t index,
           const Trace& t, const char* what) {
  ++acc.instances;
  if (!ok) {
    ++acc.failures;
    acc.samples.add(index, std::string(what) + ": " + one_line(t));
  }
}

}  // namespace

AxiomSuiteReport run_axiom_suite(std::size_t samples, std::uint64_t seed,
                                 std::size_t jobs) {
  std::vector<Trace> corpus =
      random_register_split_traces(samples, 6, seed);
  corpus.push_back(overlapping_calls());
  auto spec = make_spec("register");
  AtomBinding atoms = default_bindings(spec);
  Formula body = Formula::lnot(Formula::atom("correct"));
  auto acc = parallel_accumulate<AxiomAcc>(
      corpus.size(), jobs, [&](std::uint64_t i, AxiomAcc& a) {
        const Trace& t = corpus[i];
        try {
          for (bool obs : {false, true}) {
            GroupSpec g = GroupSpec::everyone(obs);
            tally(a.truth, axiom_check(t, g, body, Axiom::Truth, atoms), i, t,
                  obs ? "with observer" : "no observer");
            tally(a.positive,
                  axiom_check(t, g, body, Axiom::PositiveIntrospection, atoms),
                  i, t, obs ? "with observer" : "no observer");
            bool neg = axiom_check(t, g, body, Axiom::NegativeIntrospection,
                                   atoms);
            if (!obs) {
              tally(a.negative_no_obs, neg, i, t, "no observer");
            } else if (!neg) {
              ++a.negative_obs_failures;
              if (i + 1 == corpus.size()) a.fixture_failure = true;
            }
          }
        } catch (const BudgetError&) {
          ++a.truth.skipped;
        }
      });
  AxiomSuiteReport report;
  report.truth = acc.truth.report("axiom-truth");
  report.positive = acc.positive.report("axiom-positive-introspection");
  report.negative_no_observer =
      acc.negative_no_obs.report("axiom-negative-introspection-no-observer");
  report.negative_observer_failures = acc.negative_obs_failures;
  report.overlapping_calls_failure_found = acc.fixture_failure;
  return report;
}

DetectionSuiteReport run_detection_suite(std::size_t samples,
                                         std::uint64_t seed,
                                         std::size_t jobs) {
  std::vector<Trace> corpus =
      random_register_split_traces(samples, 6, seed);
  corpus.push_back(overlapping_calls());
  auto spec = make_spec("register");
  auto acc = parallel_accumulate<DetectionAcc>(
      corpus.size(), jobs, [&](std::uint64_t i, DetectionAcc& a) {
        const Trace& t = corpus[i];
        try {
          DetectionReport sc = detect_sc(t, spec);
          tally(a.sc_positive, sc.positive_detection, i, t, "sc positive");
          tally(a.sc_negative, sc.negative_detection, i, t, "sc negative");
          tally(a.sc_checker, sc.checker_matches_formula, i, t, "sc checker");
          DetectionReport lin = detect_lin(t, spec);
          tally(a.lin_negative, lin.negative_detection, i, t, "lin negative");
          tally(a.lin_checker, lin.checker_matches_formula, i, t,
                "lin checker");
          if (!lin.positive_detection) ++a.lin_positive_failures;
          if (i + 1 == corpus.size() && lin.holds && !lin.knows_holds) {
            a.fixture_undetected = true;
          }
        } catch (const BudgetError&) {
          ++a.sc_positive.skipped;
        }
      });
  DetectionSuiteReport report;
  report.sc_positive = acc.sc_positive.report("detect-sc-positive");
  report.sc_negative = acc.sc_negative.report("detect-sc-negative");
  report.sc_checker_match = acc.sc_checker.report("detect-sc-checker");
  report.lin_negative = acc.lin_negative.report("detect-lin-negative");
  report.lin_checker_match = acc.lin_checker.report("detect-lin-checker");
  report.lin_positive_failures = acc.lin_positive_failures;
  report.overlapping_calls_undetected_lin = acc.fixture_undetected;
  return report;
}

}  // namespace conch
