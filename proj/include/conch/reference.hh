// Brute-force deciders and trace corpora used to cross-check the search
// implementations, plus the suite runners behind the theorems command.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "conch/speclang.hh"
#include "conch/trace.hh"

namespace conch {

// Tries every permutation of the events, keeping those with unchanged
// per-thread projections, and asks the spec directly.
bool sc_by_permutations(const Trace& e, const SpecOracle& spec);

// As above, but the permutation must additionally map every pair
// "return before invocation" to positions in the same order. Requires
// unique events so the position bijection is determined by value.
bool lin_by_permutations(const Trace& e, const SpecOracle& spec);

// An indexable enumeration of traces; at() decodes an index and returns
// nothing when the index falls on a filtered-out string, so workers can
// partition the index space without materializing the corpus.
class TraceFamily {
 public:
  enum class Kind {
    RegisterCalls,   // 2 threads, ld/st call events over values {0,1}
    RegisterSplit,   // 2 threads, inv/ret events, unique-event strings only
    EventuallyConsistent,  // 2 threads, 1 variable, values {0,1}, revision
                           // ids assigned by per-thread commit count
  };

  TraceFamily(Kind kind, std::size_t max_events);

  std::uint64_t size() const { return size_; }
  std::optional<Trace> at(std::uint64_t index) const;

  Kind kind() const { return kind_; }
  std::size_t max_events() const { return max_events_; }

 private:
  Kind kind_;
  std::size_t max_events_;
  std::size_t alphabet_;
  std::uint64_t size_;
};

// No query, update or commit action occurs twice in the trace, whether on
// the same thread or across threads. Logs are action sequences, so a
// repeated action lets a presented log stand for more than one set of
// events; the two eventual-consistency formulations provably coincide
// only without that ambiguity.
bool has_distinct_actions(const Trace& e);

// Seeded random corpora. Register traces are unique-event split traces;
// EC traces are well-formed two-thread revision histories.
std::vector<Trace> random_register_split_traces(std::size_t count,
                                                std::size_t max_events,
                                                std::uint64_t seed);
std::vector<Trace> random_ec_traces(std::size_t count, std::size_t max_events,
                                    std::uint64_t seed);

struct SuiteReport {
  std::string name;
  std::uint64_t instances = 0;
  std::uint64_t failures = 0;
  std::uint64_t skipped = 0;  // budget exhaustion
  std::vector<std::string> samples;  // first few failing instances

  bool passed() const { return failures == 0 && skipped == 0; }
};

// check_sc against the permutation oracle and against the knowledge
// formula, exhaustively over RegisterCalls(max_events).
SuiteReport run_sc_equivalence(std::size_t max_events, std::size_t jobs);

// check_lin against the bijection oracle, exhaustively over
// RegisterSplit(max_events).
SuiteReport run_lin_equivalence(std::size_t max_events, std::size_t jobs);

struct EcEquivalenceReport {
  SuiteReport overall;           // every instance
  SuiteReport distinct_actions;  // instances without repeated actions
  std::uint64_t disagreements_on_repeated_actions = 0;
  std::uint64_t axiomatic_only = 0;  // axiomatic consistent, epistemic not
  std::uint64_t epistemic_only = 0;  // epistemic consistent, axiomatic not
};

// check_ec_axiomatic against check_ec_epistemic, exhaustively over
// EventuallyConsistent(max_events).
EcEquivalenceReport run_ec_equivalence(std::size_t max_events,
                                       std::size_t jobs);

// Axiom instances with the spec-violation body over a random register
// corpus plus the fixed overlapping-calls fixture. Truth and positive
// introspection must hold with and without the observer; negative
// introspection must hold without the observer and is reported, not
// asserted, with it.
struct AxiomSuiteReport {
  SuiteReport truth;
  SuiteReport positive;
  SuiteReport negative_no_observer;
  std::uint64_t negative_observer_failures = 0;
  bool overlapping_calls_failure_found = false;
};

AxiomSuiteReport run_axiom_suite(std::size_t samples, std::uint64_t seed,
                                 std::size_t jobs);

// Detection biconditionals over the same corpus: both hold for the
// thread-only variant, the negative one holds for the observer variant,
// and the fixed overlapping-calls fixture realizes consistent-but-unknown.
struct DetectionSuiteReport {
  SuiteReport sc_positive;
  SuiteReport sc_negative;
  SuiteReport sc_checker_match;
  SuiteReport lin_negative;
  SuiteReport lin_checker_match;
  std::uint64_t lin_positive_failures = 0;
  bool overlapping_calls_undetected_lin = false;
};

DetectionSuiteReport run_detection_suite(std::size_t samples,
                                         std::uint64_t seed,
                                         std::size_t jobs);

}  // namespace conch
