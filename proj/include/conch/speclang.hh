#ifndef CONCH_SPECLANG_HH_
#define CONCH_SPECLANG_HH_

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "conch/trace.hh"

// Correctness specifications. Sequential specifications are incremental
// oracles folded over a trace; the replicated-store predicates characterize
// eventually consistent behaviour through per-thread knowledge logs.

namespace conch {

// Oracle state is a canonical string encoding chosen by each oracle, so
// searches can use it directly as a memoization key.
using SpecState = std::string;

class SpecOracle {
 public:
  virtual ~SpecOracle() = default;
  virtual SpecState initial() const = 0;
  // Successor state, or nullopt when the event is rejected.
  virtual std::optional<SpecState> step(const SpecState& s,
                                        const Event& e) const = 0;
  virtual bool accepting(const SpecState& s) const = 0;
  virtual std::string name() const = 0;
};

// e is in the specification: no step rejects and the final state accepts.
bool spec_member(const SpecOracle& spec, const Trace& e);

// Single integer register, initially 0. Accepts alternating invocation/return
// histories (fused calls count as both halves at once): a completed load
// returns the current value, a completed store installs its argument. One
// call may still be pending at the end of the history.
class RegisterSpec final : public SpecOracle {
 public:
  SpecState initial() const override;
  std::optional<SpecState> step(const SpecState& s,
                                const Event& e) const override;
  bool accepting(const SpecState& s) const override;
  std::string name() const override { return "register"; }
};

// Accepts every trace.
class AcceptAllSpec final : public SpecOracle {
 public:
  SpecState initial() const override { return {}; }
  std::optional<SpecState> step(const SpecState& s,
                                const Event&) const override {
    return s;
  }
  bool accepting(const SpecState&) const override { return true; }
  std::string name() const override { return "none"; }
};

std::shared_ptr<const SpecOracle> make_spec(const std::string& name);

// ---- Replicated-store predicates ----

// A log is a sequence of actions a thread can justify a query result with.
using Log = std::vector<Action>;

// Actions thread t knows after the first i events: its own actions plus,
// recursively, everything a sender knew at the commit of a revision that was
// forwarded to t. Forwards of uncommitted revisions deliver nothing.
std::set<Action> k_log(const Trace& e, std::size_t i, const Agent& t);

// Incremental form of k_log for search loops: feed events one at a time.
class KnowledgeState {
 public:
  void step(const Event& ev);
  const std::set<Action>& known(const Agent& thread) const;
  // Snapshot taken when `thread` committed `rev`, if it has.
  const std::set<Action>* snapshot(const Agent& thread, RevisionId rev) const;

 private:
  std::map<Agent, std::set<Action>> known_;
  std::map<std::pair<Agent, RevisionId>, std::set<Action>> snapshots_;
};

// L embeds order-preservingly into the actions of the first i events.
bool log_consistent(const Trace& e, std::size_t i, const Log& l);

// set(L) equals what t knows at i, and L is consistent.
bool valid_log(const Trace& e, std::size_t i, const Agent& t, const Log& l);

// The actions of the first i events restricted to t's knowledge, in trace
// order. Its action set is exactly k_log(e, i, t).
Log canonical_log(const Trace& e, std::size_t i, const Agent& t);

// Folds the distinct updates of l, ordered by first occurrence, over the
// all-zeros state.
State log_state(const Log& l);

// r is what querying `var` yields after folding l.
bool log_result(const std::string& var, const Log& l, const Value& r);

// Some valid log of t at i justifies result r for `var`. The canonical log
// is tried first; when it misses, all embeddable logs over t's knowledge are
// enumerated (their only freedom is which occurrence of a repeated action
// they keep).
bool exists_result_log(const Trace& e, std::size_t i, const Agent& t,
                       const std::string& var, const Value& r);

// Per thread, once a revision has started, only that revision's actions may
// follow until its commit; without a commit the revision runs to the end of
// the thread. A projection property: interleaving with other threads never
// changes it.
bool atomic_revisions_ok(const Trace& e);

// Every forward is strictly preceded by the matching commit of its sender.
bool forwards_after_commit_ok(const Trace& e);

// Both of the above. Eventual delivery imposes nothing on finite traces.
bool network_ok(const Trace& e);

// Every recorded query result is justified by some valid log of the querying
// thread at the query's position, and the network conditions hold.
bool correct_evc(const Trace& e);

}  // namespace conch

#endif  // CONCH_SPECLANG_HH_
