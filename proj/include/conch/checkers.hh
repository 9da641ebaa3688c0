// Consistency deciders over recorded traces, each returning a re-checkable
// artifact: an equivalent witness trace for the search-based formulations,
// or a visibility/arbitration certificate for the order-based one.
#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "conch/logic.hh"
#include "conch/search.hh"
#include "conch/speclang.hh"
#include "conch/trace.hh"

namespace conch {

// Event-level order relations, as 1-based trace positions. Positions refer
// to the first occurrence of each distinct non-forward event.
struct OrderCertificate {
  std::vector<std::pair<std::size_t, std::size_t>> visibility;
  std::vector<std::pair<std::size_t, std::size_t>> arbitration;
};

struct Verdict {
  bool consistent = false;
  std::optional<Trace> witness;
  std::optional<OrderCertificate> certificate;
  SearchStats stats;
};

struct CheckOptions {
  Budget budget;
  // Explore branches in reverse order; verdicts must not change.
  bool reversed_choice_order = false;
};

// Some reordering of the trace, preserving per-thread projections, is
// accepted by the spec.
Verdict check_sc(const Trace& e, const SpecOracle& spec,
                 CheckOptions options = {});

// As check_sc, but reorderings must also keep every return that completed
// before an invocation in front of it. Requires unique events.
Verdict check_lin(const Trace& e, const SpecOracle& spec,
                  CheckOptions options = {});

// Order-based eventual consistency: searches for visibility and arbitration
// orders satisfying the six order conditions.
Verdict check_ec_axiomatic(const Trace& e, CheckOptions options = {});

// Knowledge-based eventual consistency: searches for a reordering, with
// optional environment forwards inserted, on which every query is justified
// by a valid log and the network conditions hold.
Verdict check_ec_epistemic(const Trace& e, CheckOptions options = {});

// Independent re-checks of returned artifacts, written against the raw
// definitions rather than the search code paths.
bool revalidate_witness_sc(const Trace& e, const SpecOracle& spec,
                           const Trace& w);
bool revalidate_witness_lin(const Trace& e, const SpecOracle& spec,
                            const Trace& w);
bool revalidate_witness_ec(const Trace& e, const Trace& w);
bool revalidate_certificate(const Trace& e, const OrderCertificate& c);

// Runs a checker next to the knowledge formulas about its verdict. The
// consistency formula is "the group does not know the spec is violated";
// detection asks whether the group knows the formula itself, or knows its
// negation, at the end of the trace.
struct DetectionReport {
  bool consistent = false;       // search verdict
  bool holds = false;            // consistency formula
  bool knows_holds = false;      // group knows the formula
  bool knows_violation = false;  // group knows its negation
  bool checker_matches_formula = false;  // consistent == holds
  bool positive_detection = false;       // holds == knows_holds
  bool negative_detection = false;       // !holds == knows_violation
};

DetectionReport detect_sc(const Trace& e,
                          std::shared_ptr<const SpecOracle> spec,
                          CheckOptions options = {});
DetectionReport detect_lin(const Trace& e,
                           std::shared_ptr<const SpecOracle> spec,
                           CheckOptions options = {});

}  // namespace conch
