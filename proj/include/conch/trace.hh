#ifndef CONCH_TRACE_HH_
#define CONCH_TRACE_HH_

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

// Event and trace model shared by every checker in the toolkit. A trace is a
// finite sequence of events; an event pairs an agent (a named thread or the
// environment) with an action. Query helpers that report positions use
// 1-based indices; absence is an empty optional.

namespace conch {

using Value = std::variant<std::int64_t, bool>;
using RevisionId = std::int64_t;

std::string to_string(const Value& v);

// Store state for the key-value model. Missing variables read as zero.
using State = std::map<std::string, std::int64_t>;

struct Assignment {
  std::string var;
  std::int64_t value = 0;
  auto operator<=>(const Assignment&) const = default;
};

State apply_update(State s, const Assignment& u);
Value eval_query(const State& s, const std::string& var);

struct Agent {
  enum class Kind { Thread, Env };
  Kind kind = Kind::Thread;
  std::string name;  // empty for the environment

  static Agent thread(std::string n) { return {Kind::Thread, std::move(n)}; }
  static Agent env() { return {Kind::Env, {}}; }
  bool is_thread() const { return kind == Kind::Thread; }
  auto operator<=>(const Agent&) const = default;
};

// Invocation and return halves of a method call.
struct InvAction {
  std::string method;
  std::optional<Value> arg;
  auto operator<=>(const InvAction&) const = default;
};

struct RetAction {
  std::string method;
  std::optional<Value> result;
  auto operator<=>(const RetAction&) const = default;
};

// A call whose invocation and return are recorded as one indivisible event.
struct CallAction {
  std::string method;
  std::optional<Value> value;
  auto operator<=>(const CallAction&) const = default;
};

// Replicated-store actions. A revision groups the queries and updates a
// thread performs up to the commit that seals them.
struct QueryAction {
  RevisionId rev = 0;
  std::string var;
  Value result;
  auto operator<=>(const QueryAction&) const = default;
};

struct UpdateAction {
  RevisionId rev = 0;
  Assignment update;
  auto operator<=>(const UpdateAction&) const = default;
};

struct CommitAction {
  RevisionId rev = 0;
  auto operator<=>(const CommitAction&) const = default;
};

// Delivery of one thread's committed revision to another. Only the
// environment performs these.
struct ForwardAction {
  std::string from;
  std::string to;
  RevisionId rev = 0;
  auto operator<=>(const ForwardAction&) const = default;
};

using Action = std::variant<InvAction, RetAction, CallAction, QueryAction,
                            UpdateAction, CommitAction, ForwardAction>;

struct Event {
  Agent agent;
  Action action;
  auto operator<=>(const Event&) const = default;
};

class Trace {
 public:
  Trace() = default;
  explicit Trace(std::vector<Event> events) : events_(std::move(events)) {}

  const std::vector<Event>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  const Event& operator[](std::size_t index0) const { return events_[index0]; }
  auto begin() const { return events_.begin(); }
  auto end() const { return events_.end(); }
  auto operator<=>(const Trace&) const = default;

 private:
  std::vector<Event> events_;
};

namespace events {
Event inv(const std::string& t, std::string method,
          std::optional<Value> arg = {});
Event ret(const std::string& t, std::string method,
          std::optional<Value> result = {});
Event call(const std::string& t, std::string method,
           std::optional<Value> value = {});
Event query(const std::string& t, RevisionId rev, std::string var,
            Value result);
Event update(const std::string& t, RevisionId rev, std::string var,
             std::int64_t value);
Event commit(const std::string& t, RevisionId rev);
Event forward(const std::string& from, const std::string& to, RevisionId rev);
}  // namespace events

bool is_inv(const Event& e);
bool is_ret(const Event& e);
bool is_call(const Event& e);
bool is_query(const Event& e);
bool is_update(const Event& e);
bool is_commit(const Event& e);
bool is_forward(const Event& e);

// Revision id carried by a query, update, or commit.
std::optional<RevisionId> revision_of(const Action& a);

// Agent/action compatibility: forwards belong to the environment, everything
// else to threads. Returns a description of the first problem found.
std::optional<std::string> event_shape_error(const Event& e);
std::optional<std::string> validate_shapes(const Trace& e);

// Per-thread revision discipline for replicated-store traces: queries and
// updates of a revision precede its commit, and a thread commits a revision
// id at most once. Returns a message naming the offending 1-based position.
std::optional<std::string> validate_revision_discipline(const Trace& e);

struct DisciplineViolation {
  std::size_t event_index;  // 0-based
  std::string message;
};
std::optional<DisciplineViolation> find_revision_discipline_violation(
    const Trace& e);

// Subsequence of e consisting of t's own events. t must be a thread.
Trace project(const Trace& e, const Agent& t);

// First `count` events, count <= size.
Trace prefix(const Trace& e, std::size_t count);

// 1-based position of the first occurrence of ev in e.
std::optional<std::size_t> pos(const Event& ev, const Trace& e);

// Completed-return/invocation pairs an outside observer can see in the first
// `upto` events: all (r, i) with r a return event, i an invocation event and
// pos(r) < pos(i) <= upto.
std::set<std::pair<Event, Event>> obs_view(const Trace& e, std::size_t upto);
std::set<std::pair<Event, Event>> obs_view(const Trace& e);

// Actions of e in trace order, agents erased.
std::vector<Action> act_seq(const Trace& e);

// Order-preserving embedding test.
bool is_subsequence(const std::vector<Action>& candidate,
                    const std::vector<Action>& within);

// Distinct thread agents of e, sorted.
std::vector<Agent> threads_of(const Trace& e);

std::optional<Event> find_duplicate_event(const Trace& e);

// Expands fused call events into adjacent invocation/return pairs. Loads
// return the recorded value from an argument-free invocation; stores take
// the value as argument and return true; other methods carry the value on
// both halves.
Trace split_calls(const Trace& e);

// Canonical one-line rendering used by the trace file format.
std::string event_line(const Event& e);

std::ostream& operator<<(std::ostream& os, const Event& e);
std::ostream& operator<<(std::ostream& os, const Trace& e);

}  // namespace conch

#endif  // CONCH_TRACE_HH_
