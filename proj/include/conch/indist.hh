#ifndef CONCH_INDIST_HH_
#define CONCH_INDIST_HH_

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "conch/search.hh"
#include "conch/trace.hh"

// What groups of agents can and cannot tell apart. Threads compare their own
// projections; the observer compares completed-return/invocation views, a
// one-directional refinement. The witness enumerator materializes the traces
// a group cannot distinguish from a source, within a bounded universe.

namespace conch {

struct AgentGroup {
  std::set<Agent> threads;  // thread agents only
  bool include_observer = false;

  static AgentGroup all_threads(const Trace& e, bool observer = false);
};

// Thread t sees the same history in (e, i) and (f, j).
bool thread_indist(const Trace& e, std::size_t i, const Trace& f,
                   std::size_t j, const Agent& t);

// Everything the observer saw in (e, i) it also sees in (f, j). A preorder,
// not symmetric.
bool obs_leq(const Trace& e, std::size_t i, const Trace& f, std::size_t j);

// Conjunction of thread indistinguishability over g.threads, refined by
// obs_leq(e, i, f, j) when the group includes the observer.
bool group_indist(const Trace& e, std::size_t i, const Trace& f,
                  std::size_t j, const AgentGroup& g);

// The traces a group cannot rule out, built from a source trace: every
// arrangement of the source's thread events that preserves the projection of
// each group member, optionally extended with environment events drawn from
// `env_candidates` (each inserted at most once, at most `max_env_insertions`
// in total). Events of threads outside the group move freely; environment
// events of the source itself are invisible to threads and are not carried
// over. With the observer in the group, arrangements must keep every
// completed return that preceded an invocation in the source ahead of that
// invocation.
struct WitnessUniverse {
  Trace source;
  AgentGroup group;
  std::vector<Event> env_candidates;
  std::size_t max_env_insertions = 0;
};

WitnessUniverse universe_of(const Trace& source, const AgentGroup& group);

// Pull-style enumeration without duplicates; next() returns nullopt once
// exhausted. Work is charged to the meter, which throws BudgetError when a
// bound trips.
class WitnessStream {
 public:
  WitnessStream(WitnessUniverse u, std::shared_ptr<BudgetMeter> meter);
  ~WitnessStream();
  WitnessStream(WitnessStream&&) noexcept;
  WitnessStream& operator=(WitnessStream&&) noexcept;

  std::optional<Trace> next();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Convenience collector used by tests and small checks.
std::vector<Trace> enumerate_witnesses(const WitnessUniverse& u,
                                       Budget budget = {});

}  // namespace conch

#endif  // CONCH_INDIST_HH_
