#include "conch/checkers.hh"

#include <gtest/gtest.h>

#include <algorithm>

#include "conch/errors.hh"
#include "fixtures.hh"

namespace conch {
namespace {

namespace ev = events;

TEST(CheckSc, ReorderableHistoryHasTheSequentialWitness) {
  Verdict v = check_sc(fix::sc_reorderable(), *fix::register_spec());
  ASSERT_TRUE(v.consistent);
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_EQ(*v.witness, fix::sc_witness());
  EXPECT_TRUE(revalidate_witness_sc(fix::sc_reorderable(),
                                    *fix::register_spec(), *v.witness));
  EXPECT_GT(v.stats.nodes, 0u);
}

TEST(CheckSc, ImpossibleLoadValue) {
  Verdict v = check_sc(fix::sc_impossible(), *fix::register_spec());
  EXPECT_FALSE(v.consistent);
  EXPECT_FALSE(v.witness.has_value());
}

TEST(CheckSc, EmptyTrace) {
  Verdict v = check_sc(Trace{}, *fix::register_spec());
  ASSERT_TRUE(v.consistent);
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_TRUE(v.witness->empty());
}

TEST(CheckSc, AcceptAllSpecNeverRejects) {
  Verdict v = check_sc(fix::sc_impossible(), *make_spec("none"));
  EXPECT_TRUE(v.consistent);
}

TEST(CheckLin, OverlappingCallsLinearize) {
  Verdict v = check_lin(fix::lin_overlapping(), *fix::register_spec());
  ASSERT_TRUE(v.consistent);
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_EQ(*v.witness, fix::lin_sequential());
  EXPECT_TRUE(revalidate_witness_lin(fix::lin_overlapping(),
                                     *fix::register_spec(), *v.witness));
}

TEST(CheckLin, CompletedLoadBlocksTheStore) {
  EXPECT_FALSE(check_lin(fix::lin_blocked(), *fix::register_spec()).consistent);
  // The same trace is sequentially consistent: threads alone cannot tell.
  EXPECT_TRUE(check_sc(fix::lin_blocked(), *fix::register_spec()).consistent);
}

TEST(CheckLin, RequiresUniqueEvents) {
  Trace dup({ev::inv("t2", "ld"), ev::ret("t2", "ld", Value{std::int64_t{0}}),
             ev::inv("t2", "ld"), ev::ret("t2", "ld", Value{std::int64_t{0}})});
  EXPECT_THROW(check_lin(dup, *fix::register_spec()), PreconditionError);
}

TEST(CheckLin, ConsistentImpliesScOnFixtures) {
  for (const Trace& e : {fix::lin_overlapping(), fix::lin_sequential()}) {
    if (check_lin(e, *fix::register_spec()).consistent) {
      EXPECT_TRUE(check_sc(e, *fix::register_spec()).consistent);
    }
  }
}

TEST(CheckEcAxiomatic, OrdersExistForTheUndeliveredHistory) {
  Verdict v = check_ec_axiomatic(fix::ec_plain());
  ASSERT_TRUE(v.consistent);
  ASSERT_TRUE(v.certificate.has_value());
  EXPECT_TRUE(revalidate_certificate(fix::ec_plain(), *v.certificate));
  EXPECT_FALSE(v.certificate->arbitration.empty());
}

TEST(CheckEcAxiomatic, EmptyTrace) {
  Verdict v = check_ec_axiomatic(Trace{});
  ASSERT_TRUE(v.consistent);
  ASSERT_TRUE(v.certificate.has_value());
  EXPECT_TRUE(v.certificate->visibility.empty());
  EXPECT_TRUE(v.certificate->arbitration.empty());
}

TEST(CheckEcAxiomatic, UnattainableQueryResult) {
  EXPECT_FALSE(check_ec_axiomatic(fix::ec_unsatisfiable()).consistent);
}

TEST(CheckEcAxiomatic, ForwardEventsInTheInputAreIgnored) {
  EXPECT_TRUE(check_ec_axiomatic(fix::ec_forwarded()).consistent);
}

TEST(CheckEcAxiomatic, RejectsNonStoreTraces) {
  EXPECT_THROW(check_ec_axiomatic(fix::lin_blocked()), PreconditionError);
  Trace undisciplined({ev::commit("t1", 0), ev::update("t1", 0, "x", 1)});
  EXPECT_THROW(check_ec_axiomatic(undisciplined), PreconditionError);
}

TEST(CheckEcEpistemic, DeliveriesMakeTheHistoryExplainable) {
  Verdict v = check_ec_epistemic(fix::ec_plain());
  ASSERT_TRUE(v.consistent);
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_TRUE(std::any_of(v.witness->begin(), v.witness->end(),
                          [](const Event& x) { return is_forward(x); }));
  EXPECT_TRUE(revalidate_witness_ec(fix::ec_plain(), *v.witness));
  EXPECT_TRUE(correct_evc(*v.witness));
}

TEST(CheckEcEpistemic, EmptyAndUnattainable) {
  EXPECT_TRUE(check_ec_epistemic(Trace{}).consistent);
  EXPECT_FALSE(check_ec_epistemic(fix::ec_unsatisfiable()).consistent);
}

TEST(CheckEcEpistemic, AgreesWithAxiomaticOnTheFixtures) {
  for (const Trace& e : {fix::ec_plain(), fix::ec_forwarded(),
                         fix::ec_unsatisfiable()}) {
    EXPECT_EQ(check_ec_epistemic(e).consistent,
              check_ec_axiomatic(e).consistent);
  }
}

TEST(Revalidation, RejectsTamperedWitnesses) {
  // The source itself is not a sequential explanation of itself here.
  EXPECT_FALSE(revalidate_witness_sc(fix::sc_reorderable(),
                                     *fix::register_spec(),
                                     fix::sc_reorderable()));
  // A witness from a different history has the wrong projections.
  EXPECT_FALSE(revalidate_witness_sc(fix::sc_reorderable(),
                                     *fix::register_spec(),
                                     fix::sc_impossible()));
  // Linearizability also needs the completed-return order kept.
  EXPECT_FALSE(revalidate_witness_lin(fix::lin_blocked(),
                                      *fix::register_spec(),
                                      fix::lin_sequential()));
  // Undelivered queries leave the replicated-store predicate false.
  EXPECT_FALSE(revalidate_witness_ec(fix::ec_plain(), fix::ec_plain()));
}

TEST(Revalidation, RejectsTamperedCertificates) {
  Verdict v = check_ec_axiomatic(fix::ec_plain());
  ASSERT_TRUE(v.consistent && v.certificate);
  OrderCertificate no_arb = *v.certificate;
  no_arb.arbitration.clear();
  EXPECT_FALSE(revalidate_certificate(fix::ec_plain(), no_arb));
  OrderCertificate flipped = *v.certificate;
  ASSERT_FALSE(flipped.visibility.empty());
  std::swap(flipped.visibility.front().first,
            flipped.visibility.front().second);
  EXPECT_FALSE(revalidate_certificate(fix::ec_plain(), flipped));
}

TEST(Budgets, SearchesStopWithoutAnAnswer) {
  CheckOptions tiny;
  tiny.budget.max_nodes = 1;
  EXPECT_THROW(check_sc(fix::sc_reorderable(), *fix::register_spec(), tiny),
               BudgetError);
  EXPECT_THROW(check_ec_epistemic(fix::ec_plain(), tiny), BudgetError);
}

TEST(Budgets, ReversedChoiceOrderKeepsVerdicts) {
  CheckOptions rev;
  rev.reversed_choice_order = true;
  EXPECT_EQ(check_sc(fix::sc_reorderable(), *fix::register_spec(), rev).consistent,
            true);
  EXPECT_EQ(check_sc(fix::sc_impossible(), *fix::register_spec(), rev).consistent,
            false);
  EXPECT_EQ(check_lin(fix::lin_overlapping(), *fix::register_spec(), rev)
                .consistent,
            true);
  EXPECT_EQ(check_lin(fix::lin_blocked(), *fix::register_spec(), rev).consistent,
            false);
  EXPECT_EQ(check_ec_epistemic(fix::ec_plain(), rev).consistent, true);
  EXPECT_EQ(check_ec_axiomatic(fix::ec_unsatisfiable(), rev).consistent, false);
}

TEST(DetectSc, BothDirectionsAreKnowable) {
  DetectionReport in = detect_sc(fix::sc_reorderable(), fix::register_spec());
  EXPECT_TRUE(in.consistent);
  EXPECT_TRUE(in.holds);
  EXPECT_TRUE(in.knows_holds);
  EXPECT_FALSE(in.knows_violation);
  EXPECT_TRUE(in.checker_matches_formula);
  EXPECT_TRUE(in.positive_detection);
  EXPECT_TRUE(in.negative_detection);

  DetectionReport out = detect_sc(fix::sc_impossible(), fix::register_spec());
  EXPECT_FALSE(out.consistent);
  EXPECT_FALSE(out.holds);
  EXPECT_FALSE(out.knows_holds);
  EXPECT_TRUE(out.knows_violation);
  EXPECT_TRUE(out.checker_matches_formula);
  EXPECT_TRUE(out.positive_detection);
  EXPECT_TRUE(out.negative_detection);

  DetectionReport none = detect_sc(Trace{}, fix::register_spec());
  EXPECT_TRUE(none.holds);
  EXPECT_TRUE(none.knows_holds);
}

TEST(DetectLin, ViolationsAreKnowableButSuccessIsNot) {
  DetectionReport ok = detect_lin(fix::lin_overlapping(), fix::register_spec());
  EXPECT_TRUE(ok.consistent);
  EXPECT_TRUE(ok.holds);
  EXPECT_FALSE(ok.knows_holds);  // an unlinearizable arrangement is reachable
  EXPECT_FALSE(ok.knows_violation);
  EXPECT_TRUE(ok.checker_matches_formula);
  EXPECT_FALSE(ok.positive_detection);
  EXPECT_TRUE(ok.negative_detection);

  DetectionReport bad = detect_lin(fix::lin_blocked(), fix::register_spec());
  EXPECT_FALSE(bad.consistent);
  EXPECT_FALSE(bad.holds);
  EXPECT_TRUE(bad.knows_violation);
  EXPECT_TRUE(bad.checker_matches_formula);
  EXPECT_TRUE(bad.negative_detection);

  DetectionReport none = detect_lin(Trace{}, fix::register_spec());
  EXPECT_TRUE(none.holds);
  EXPECT_TRUE(none.knows_holds);
}

}  // namespace
}  // namespace conch
