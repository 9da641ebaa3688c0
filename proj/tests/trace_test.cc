#include "conch/trace.hh"

#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hh"

namespace conch {
namespace {

namespace ev = events;

TEST(Project, KeepsOnlyThatThreadsEvents) {
  Trace e1 = fix::sc_reorderable();
  Trace p = project(e1, Agent::thread("t1"));
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0], ev::call("t1", "st", Value{std::int64_t{1}}));
}

TEST(Project, EmptyTrace) {
  EXPECT_TRUE(project(Trace{}, Agent::thread("t1")).empty());
}

TEST(Project, ErasesEnvironmentEvents) {
  Trace e5 = fix::ec_forwarded();
  Trace p = project(e5, Agent::thread("t2"));
  Trace want({ev::query("t2", 0, "x", Value{std::int64_t{0}}),
              ev::commit("t2", 0),
              ev::query("t2", 1, "x", Value{std::int64_t{1}})});
  EXPECT_EQ(p, want);
}

TEST(Project, Idempotent) {
  for (const Trace& e : {fix::sc_reorderable(), fix::ec_forwarded(),
                         fix::lin_overlapping()}) {
    for (const Agent& t : threads_of(e)) {
      EXPECT_EQ(project(project(e, t), t), project(e, t));
    }
  }
}

TEST(Prefix, FirstTwoEvents) {
  Trace e1 = fix::sc_reorderable();
  Trace p = prefix(e1, 2);
  Trace want({ev::call("t2", "ld", Value{std::int64_t{0}}),
              ev::call("t2", "ld", Value{std::int64_t{1}})});
  EXPECT_EQ(p, want);
}

TEST(Prefix, ZeroIsEmptyAndFullIsIdentity) {
  Trace e5 = fix::ec_forwarded();
  EXPECT_TRUE(prefix(e5, 0).empty());
  EXPECT_EQ(prefix(e5, e5.size()), e5);
}

TEST(Pos, FirstOccurrenceOneBased) {
  Trace e1 = fix::sc_reorderable();
  EXPECT_EQ(pos(ev::call("t1", "st", Value{std::int64_t{1}}), e1),
            std::optional<std::size_t>(3));
}

TEST(Pos, AbsentEvents) {
  EXPECT_FALSE(pos(ev::call("t1", "st", Value{std::int64_t{1}}), Trace{}));
  EXPECT_FALSE(
      pos(ev::call("t2", "ld", Value{std::int64_t{2}}), fix::sc_reorderable()));
}

TEST(ObsView, CompletedReturnBeforeInvocation) {
  auto view = obs_view(fix::lin_blocked());
  ASSERT_EQ(view.size(), 1u);
  Event r = ev::ret("t2", "ld", Value{std::int64_t{1}});
  Event in = ev::inv("t1", "st", Value{std::int64_t{1}});
  EXPECT_TRUE(view.count({r, in}));
}

TEST(ObsView, OverlappingCallsGiveEmptyView) {
  EXPECT_TRUE(obs_view(fix::lin_overlapping()).empty());
}

TEST(ObsView, SequentialHistory) {
  auto view = obs_view(fix::lin_sequential());
  ASSERT_EQ(view.size(), 1u);
  Event r = ev::ret("t1", "st", Value{true});
  Event in = ev::inv("t2", "ld");
  EXPECT_TRUE(view.count({r, in}));
}

TEST(ObsView, MonotoneInTheIndex) {
  Trace e = fix::lin_sequential();
  for (std::size_t i = 0; i <= e.size(); ++i) {
    for (std::size_t j = i; j <= e.size(); ++j) {
      auto small = obs_view(e, i);
      auto large = obs_view(e, j);
      for (const auto& p : small) EXPECT_TRUE(large.count(p));
    }
  }
}

TEST(ActSeq, StripsAgents) {
  Trace single({ev::call("t1", "st", Value{std::int64_t{1}})});
  auto actions = act_seq(single);
  ASSERT_EQ(actions.size(), 1u);
  EXPECT_EQ(actions[0], single[0].action);
  EXPECT_TRUE(act_seq(Trace{}).empty());
}

TEST(ActSeq, KeepsListedOrder) {
  Trace e5 = fix::ec_forwarded();
  auto actions = act_seq(e5);
  ASSERT_EQ(actions.size(), 9u);
  for (std::size_t k = 0; k < actions.size(); ++k) {
    EXPECT_EQ(actions[k], e5[k].action);
  }
}

TEST(IsSubsequence, Basics) {
  using A = std::vector<Action>;
  Action x = ev::commit("t1", 0).action;
  Action y = ev::commit("t1", 1).action;
  Action z = ev::commit("t1", 2).action;
  EXPECT_TRUE(is_subsequence(A{}, A{x, y, z}));
  EXPECT_TRUE(is_subsequence(A{x, z}, A{x, y, z}));
  EXPECT_FALSE(is_subsequence(A{z, x}, A{x, y, z}));
}

TEST(IsSubsequence, ReflexiveAndTransitiveOnSamples) {
  auto a = act_seq(fix::ec_forwarded());
  std::vector<Action> mid(a.begin() + 2, a.end());
  std::vector<Action> small = {a[3], a[8]};
  EXPECT_TRUE(is_subsequence(a, a));
  EXPECT_TRUE(is_subsequence(mid, a));
  EXPECT_TRUE(is_subsequence(small, mid));
  EXPECT_TRUE(is_subsequence(small, a));
}

TEST(Shapes, ForwardRequiresEnvAgent) {
  Event bad{Agent::thread("t1"), ForwardAction{"t1", "t2", 0}};
  EXPECT_TRUE(event_shape_error(bad).has_value());
  Event good = ev::forward("t1", "t2", 0);
  EXPECT_FALSE(event_shape_error(good).has_value());
}

TEST(Shapes, StoreActionsRequireThreadAgents) {
  Event bad{Agent::env(), QueryAction{0, "x", Value{std::int64_t{0}}}};
  EXPECT_TRUE(event_shape_error(bad).has_value());
  EXPECT_TRUE(validate_shapes(Trace({bad})).has_value());
  EXPECT_FALSE(validate_shapes(fix::ec_forwarded()).has_value());
}

TEST(RevisionDiscipline, AcceptsTheFixtures) {
  EXPECT_FALSE(validate_revision_discipline(fix::ec_plain()).has_value());
  EXPECT_FALSE(validate_revision_discipline(fix::ec_forwarded()).has_value());
  EXPECT_FALSE(
      validate_revision_discipline(fix::ec_unsatisfiable()).has_value());
}

TEST(RevisionDiscipline, RejectsActionAfterItsCommit) {
  Trace bad({ev::commit("t1", 0), ev::update("t1", 0, "x", 1)});
  auto err = find_revision_discipline_violation(bad);
  ASSERT_TRUE(err.has_value());
  EXPECT_EQ(err->event_index, 1u);
}

TEST(RevisionDiscipline, RejectsRecommittedRevision) {
  Trace bad({ev::commit("t1", 0), ev::commit("t1", 0)});
  EXPECT_TRUE(validate_revision_discipline(bad).has_value());
  // The same id on another thread is a different revision.
  Trace ok({ev::commit("t1", 0), ev::commit("t2", 0)});
  EXPECT_FALSE(validate_revision_discipline(ok).has_value());
}

TEST(DuplicateEvents, FoundAndAbsent) {
  EXPECT_FALSE(find_duplicate_event(fix::lin_overlapping()).has_value());
  Trace dup({ev::inv("t2", "ld"), ev::inv("t2", "ld")});
  auto d = find_duplicate_event(dup);
  ASSERT_TRUE(d.has_value());
  EXPECT_EQ(*d, ev::inv("t2", "ld"));
}

TEST(SplitCalls, LoadAndStoreConventions) {
  Trace split = split_calls(fix::sc_witness());
  Trace want({ev::inv("t2", "ld"), ev::ret("t2", "ld", Value{std::int64_t{0}}),
              ev::inv("t1", "st", Value{std::int64_t{1}}),
              ev::ret("t1", "st", Value{true}), ev::inv("t2", "ld"),
              ev::ret("t2", "ld", Value{std::int64_t{1}})});
  EXPECT_EQ(split, want);
  // Already-split traces pass through unchanged.
  EXPECT_EQ(split_calls(fix::lin_overlapping()), fix::lin_overlapping());
}

TEST(StateModel, MissingVariablesReadZero) {
  State s0;
  EXPECT_EQ(eval_query(s0, "x"), Value{std::int64_t{0}});
  State s1 = apply_update(s0, Assignment{"x", 1});
  EXPECT_EQ(eval_query(s1, "x"), Value{std::int64_t{1}});
  EXPECT_EQ(eval_query(s1, "y"), Value{std::int64_t{0}});
  State s2 = apply_update(s1, Assignment{"x", 0});
  EXPECT_EQ(eval_query(s2, "x"), Value{std::int64_t{0}});
}

TEST(Printing, EventLines) {
  EXPECT_EQ(event_line(ev::inv("t2", "ld")), "t2 ld-inv");
  EXPECT_EQ(event_line(ev::ret("t2", "ld", Value{std::int64_t{1}})),
            "t2 ld-ret 1");
  EXPECT_EQ(event_line(ev::ret("t1", "st", Value{true})), "t1 st-ret true");
  EXPECT_EQ(event_line(ev::call("t2", "ld", Value{std::int64_t{0}})),
            "t2 ld 0");
  EXPECT_EQ(event_line(ev::query("t2", 0, "x", Value{std::int64_t{0}})),
            "t2 qu 0 x 0");
  EXPECT_EQ(event_line(ev::update("t1", 1, "x", 1)), "t1 up 1 x 1");
  EXPECT_EQ(event_line(ev::commit("t1", 0)), "t1 com 0");
  EXPECT_EQ(event_line(ev::forward("t1", "t2", 0)), "env fwd t1 t2 0");
}

TEST(Printing, StreamOperators) {
  std::ostringstream os;
  os << fix::ec_unsatisfiable();
  EXPECT_NE(os.str().find("t1 up 0 x 0"), std::string::npos);
  EXPECT_NE(os.str().find("t1 qu 1 x 5"), std::string::npos);
}

TEST(ThreadsOf, SortedDistinctThreads) {
  auto ts = threads_of(fix::ec_forwarded());
  ASSERT_EQ(ts.size(), 2u);
  EXPECT_EQ(ts[0], Agent::thread("t1"));
  EXPECT_EQ(ts[1], Agent::thread("t2"));
  EXPECT_TRUE(threads_of(Trace{}).empty());
}

TEST(ThreadPartition, ProjectionsCoverAllThreadEvents) {
  for (const Trace& e : {fix::sc_reorderable(), fix::ec_forwarded()}) {
    std::size_t total = 0;
    for (const Agent& t : threads_of(e)) total += project(e, t).size();
    std::size_t thread_events = 0;
    for (const Event& x : e) thread_events += x.agent.is_thread() ? 1 : 0;
    EXPECT_EQ(total, thread_events);
  }
}

}  // namespace
}  // namespace conch
