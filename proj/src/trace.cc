#include "conch/trace.hh"

#include <algorithm>
#include <sstream>

#include "conch/errors.hh"

namespace conch {

std::string to_string(const Value& v) {
  if (std::holds_alternative<bool>(v)) {
    return std::get<bool>(v) ? "true" : "false";
  }
  return std::to_string(std::get<std::int64_t>(v));
}

State apply_update(State s, const Assignment& u) {
  s[u.var] = u.value;
  return s;
}

Value eval_query(const State& s, const std::string& var) {
  auto it = s.find(var);
  return Value{it == s.end() ? std::int64_t{0} : it->second};
}

namespace events {

Event inv(const std::string& t, std::string method, std::optional<Value> arg) {
  return {Agent::thread(t), InvAction{std::move(method), std::move(arg)}};
}

Event ret(const std::string& t, std::string method,
          std::optional<Value> result) {
  return {Agent::thread(t), RetAction{std::move(method), std::move(result)}};
}

Event call(const std::string& t, std::string method,
           std::optional<Value> value) {
  return {Agent::thread(t), CallAction{std::move(method), std::move(value)}};
}

Event query(const std::string& t, RevisionId rev, std::string var,
            Value result) {
  return {Agent::thread(t), QueryAction{rev, std::move(var), result}};
}

Event update(const std::string& t, RevisionId rev, std::string var,
             std::int64_t value) {
  return {Agent::thread(t), UpdateAction{rev, {std::move(var), value}}};
}

Event commit(const std::string& t, RevisionId rev) {
  return {Agent::thread(t), CommitAction{rev}};
}

Event forward(const std::string& from, const std::string& to,
              RevisionId rev) {
  return {Agent::env(), ForwardAction{from, to, rev}};
}

}  // namespace events

bool is_inv(const Event& e) {
  return std::holds_alternative<InvAction>(e.action);
}
bool is_ret(const Event& e) {
  return std::holds_alternative<RetAction>(e.action);
}
bool is_call(const Event& e) {
  return std::holds_alternative<CallAction>(e.action);
}
bool is_query(const Event& e) {
  return std::holds_alternative<QueryAction>(e.action);
}
bool is_update(const Event& e) {
  return std::holds_alternative<UpdateAction>(e.action);
}
bool is_commit(const Event& e) {
  return std::holds_alternative<CommitAction>(e.action);
}
bool is_forward(const Event& e) {
  return std::holds_alternative<ForwardAction>(e.action);
}

std::optional<RevisionId> revision_of(const Action& a) {
  if (const auto* q = std::get_if<QueryAction>(&a)) return q->rev;
  if (const auto* u = std::get_if<UpdateAction>(&a)) return u->rev;
  if (const auto* c = std::get_if<CommitAction>(&a)) return c->rev;
  return std::nullopt;
}

std::optional<std::string> event_shape_error(const Event& e) {
  const bool fwd = std::holds_alternative<ForwardAction>(e.action);
  if (fwd && e.agent.is_thread()) {
    return "forward actions belong to the environment agent";
  }
  if (!fwd && !e.agent.is_thread()) {
    return "only forward actions may carry the environment agent";
  }
  return std::nullopt;
}

std::optional<std::string> validate_shapes(const Trace& e) {
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (auto err = event_shape_error(e[i])) {
      return "event " + std::to_string(i + 1) + ": " + *err;
    }
  }
  return std::nullopt;
}

std::optional<DisciplineViolation> find_revision_discipline_violation(
    const Trace& e) {
  // Committed revision ids per thread; a commit seals the id for good.
  std::map<Agent, std::set<RevisionId>> committed;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const Event& ev = e[i];
    if (is_forward(ev)) continue;
    auto rev = revision_of(ev.action);
    if (!rev) continue;
    auto& done = committed[ev.agent];
    if (is_commit(ev)) {
      if (done.count(*rev)) {
        return DisciplineViolation{
            i, "event " + std::to_string(i + 1) + ": thread '" +
                   ev.agent.name + "' commits revision " +
                   std::to_string(*rev) + " twice"};
      }
      done.insert(*rev);
    } else if (done.count(*rev)) {
      return DisciplineViolation{
          i, "event " + std::to_string(i + 1) + ": thread '" + ev.agent.name +
                 "' touches revision " + std::to_string(*rev) +
                 " after committing it"};
    }
  }
  return std::nullopt;
}

std::optional<std::string> validate_revision_discipline(const Trace& e) {
  if (auto v = find_revision_discipline_violation(e)) return v->message;
  return std::nullopt;
}

Trace project(const Trace& e, const Agent& t) {
  if (!t.is_thread()) {
    throw PreconditionError("project requires a thread agent");
  }
  std::vector<Event> kept;
  for (const Event& ev : e) {
    if (ev.agent == t) kept.push_back(ev);
  }
  return Trace(std::move(kept));
}

Trace prefix(const Trace& e, std::size_t count) {
  if (count > e.size()) {
    throw PreconditionError("prefix length exceeds trace length");
  }
  return Trace(
      std::vector<Event>(e.events().begin(), e.events().begin() + count));
}

std::optional<std::size_t> pos(const Event& ev, const Trace& e) {
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] == ev) return i + 1;
  }
  return std::nullopt;
}

std::set<std::pair<Event, Event>> obs_view(const Trace& e, std::size_t upto) {
  if (upto > e.size()) {
    throw PreconditionError("observation bound exceeds trace length");
  }
  // First occurrences decide positions, so duplicates collapse.
  std::map<Event, std::size_t> ret_pos;
  std::map<Event, std::size_t> inv_pos;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (is_ret(e[i])) ret_pos.emplace(e[i], i + 1);
    if (is_inv(e[i])) inv_pos.emplace(e[i], i + 1);
  }
  std::set<std::pair<Event, Event>> out;
  for (const auto& [r, rp] : ret_pos) {
    for (const auto& [in, ip] : inv_pos) {
      if (rp < ip && ip <= upto) out.emplace(r, in);
    }
  }
  return out;
}

std::set<std::pair<Event, Event>> obs_view(const Trace& e) {
  return obs_view(e, e.size());
}

std::vector<Action> act_seq(const Trace& e) {
  std::vector<Action> out;
  out.reserve(e.size());
  for (const Event& ev : e) out.push_back(ev.action);
  return out;
}

bool is_subsequence(const std::vector<Action>& candidate,
                    const std::vector<Action>& within) {
  std::size_t i = 0;
  for (const Action& a : within) {
    if (i < candidate.size() && candidate[i] == a) ++i;
  }
  return i == candidate.size();
}

std::vector<Agent> threads_of(const Trace& e) {
  std::set<Agent> seen;
  for (const Event& ev : e) {
    if (ev.agent.is_thread()) seen.insert(ev.agent);
  }
  return {seen.begin(), seen.end()};
}

std::optional<Event> find_duplicate_event(const Trace& e) {
  std::set<Event> seen;
  for (const Event& ev : e) {
    if (!seen.insert(ev).second) return ev;
  }
  return std::nullopt;
}

Trace split_calls(const Trace& e) {
  std::vector<Event> out;
  out.reserve(e.size());
  for (const Event& ev : e) {
    const auto* c = std::get_if<CallAction>(&ev.action);
    if (c == nullptr) {
      out.push_back(ev);
      continue;
    }
    if (c->method == "ld") {
      out.push_back({ev.agent, InvAction{c->method, std::nullopt}});
      out.push_back({ev.agent, RetAction{c->method, c->value}});
    } else if (c->method == "st") {
      out.push_back({ev.agent, InvAction{c->method, c->value}});
      out.push_back({ev.agent, RetAction{c->method, Value{true}}});
    } else {
      out.push_back({ev.agent, InvAction{c->method, c->value}});
      out.push_back({ev.agent, RetAction{c->method, c->value}});
    }
  }
  return Trace(std::move(out));
}

namespace {

std::string opt_value_suffix(const std::optional<Value>& v) {
  return v ? " " + to_string(*v) : "";
}

}  // namespace

std::string event_line(const Event& e) {
  std::ostringstream os;
  if (e.agent.is_thread()) {
    os << e.agent.name;
  } else {
    os << "env";
  }
  struct Printer {
    std::ostringstream& os;
    void operator()(const InvAction& a) {
      os << ' ' << a.method << "-inv" << opt_value_suffix(a.arg);
    }
    void operator()(const RetAction& a) {
      os << ' ' << a.method << "-ret" << opt_value_suffix(a.result);
    }
    void operator()(const CallAction& a) {
      os << ' ' << a.method << opt_value_suffix(a.value);
    }
    void operator()(const QueryAction& a) {
      os << " qu " << a.rev << ' ' << a.var << ' ' << to_string(a.result);
    }
    void operator()(const UpdateAction& a) {
      os << " up " << a.rev << ' ' << a.update.var << ' ' << a.update.value;
    }
    void operator()(const CommitAction& a) { os << " com " << a.rev; }
    void operator()(const ForwardAction& a) {
      os << " fwd " << a.from << ' ' << a.to << ' ' << a.rev;
    }
  } printer{os};
  std::visit(printer, e.action);
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const Event& e) {
  return os << event_line(e);
}

std::ostream& operator<<(std::ostream& os, const Trace& e) {
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (i > 0) os << "; ";
    os << e[i];
  }
  return os;
}

}  // namespace conch
