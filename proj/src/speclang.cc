#include "conch/speclang.hh"

#include <algorithm>
#include <sstream>

#include "conch/errors.hh"

namespace conch {

bool spec_member(const SpecOracle& spec, const Trace& e) {
  SpecState s = spec.initial();
  for (const Event& ev : e) {
    auto next = spec.step(s, ev);
    if (!next) return false;
    s = std::move(*next);
  }
  return spec.accepting(s);
}

namespace {

struct RegState {
  std::int64_t value = 0;
  bool pending = false;
  std::string agent;
  std::string method;
  std::optional<Value> arg;
};

std::string encode(const RegState& s) {
  std::ostringstream os;
  os << s.value;
  if (s.pending) {
    os << '|' << s.agent << '|' << s.method << '|';
    os << (s.arg ? to_string(*s.arg) : std::string("-"));
  }
  return os.str();
}

RegState decode(const SpecState& raw) {
  RegState s;
  auto bar = raw.find('|');
  s.value = std::stoll(raw.substr(0, bar));
  if (bar == std::string::npos) return s;
  s.pending = true;
  auto rest = raw.substr(bar + 1);
  auto b2 = rest.find('|');
  s.agent = rest.substr(0, b2);
  rest = rest.substr(b2 + 1);
  auto b3 = rest.find('|');
  s.method = rest.substr(0, b3);
  auto argtok = rest.substr(b3 + 1);
  if (argtok == "-") {
    s.arg = std::nullopt;
  } else if (argtok == "true" || argtok == "false") {
    s.arg = Value{argtok == "true"};
  } else {
    s.arg = Value{std::stoll(argtok)};
  }
  return s;
}

const std::int64_t* as_int(const std::optional<Value>& v) {
  if (!v) return nullptr;
  return std::get_if<std::int64_t>(&*v);
}

}  // namespace

SpecState RegisterSpec::initial() const { return encode(RegState{}); }

std::optional<SpecState> RegisterSpec::step(const SpecState& raw,
                                            const Event& e) const {
  if (!e.agent.is_thread()) return std::nullopt;
  RegState s = decode(raw);

  if (const auto* c = std::get_if<CallAction>(&e.action)) {
    if (s.pending) return std::nullopt;
    const std::int64_t* v = as_int(c->value);
    if (c->method == "ld") {
      if (v == nullptr || *v != s.value) return std::nullopt;
      return encode(s);
    }
    if (c->method == "st") {
      if (v == nullptr) return std::nullopt;
      s.value = *v;
      return encode(s);
    }
    return std::nullopt;
  }

  if (const auto* in = std::get_if<InvAction>(&e.action)) {
    if (s.pending) return std::nullopt;
    if (in->method != "ld" && in->method != "st") return std::nullopt;
    s.pending = true;
    s.agent = e.agent.name;
    s.method = in->method;
    s.arg = in->arg;
    return encode(s);
  }

  if (const auto* r = std::get_if<RetAction>(&e.action)) {
    if (!s.pending || s.agent != e.agent.name || s.method != r->method) {
      return std::nullopt;
    }
    if (r->method == "ld") {
      const std::int64_t* v = as_int(r->result);
      if (v == nullptr || *v != s.value) return std::nullopt;
    } else {
      const std::int64_t* a = as_int(s.arg);
      if (a == nullptr) return std::nullopt;
      s.value = *a;
    }
    s.pending = false;
    s.agent.clear();
    s.method.clear();
    s.arg.reset();
    return encode(s);
  }

  return std::nullopt;
}

bool RegisterSpec::accepting(const SpecState&) const {
  // A trailing pending invocation is a call still in flight, not a violation.
  return true;
}

std::shared_ptr<const SpecOracle> make_spec(const std::string& name) {
  if (name == "register") return std::make_shared<RegisterSpec>();
  if (name == "none") return std::make_shared<AcceptAllSpec>();
  throw ConfigError("unknown specification '" + name + "'");
}

void KnowledgeState::step(const Event& ev) {
  if (ev.agent.is_thread()) {
    auto& mine = known_[ev.agent];
    mine.insert(ev.action);
    if (const auto* c = std::get_if<CommitAction>(&ev.action)) {
      snapshots_[{ev.agent, c->rev}] = mine;
    }
    return;
  }
  const auto& f = std::get<ForwardAction>(ev.action);
  if (const auto* snap = snapshot(Agent::thread(f.from), f.rev)) {
    known_[Agent::thread(f.to)].insert(snap->begin(), snap->end());
  }
}

const std::set<Action>& KnowledgeState::known(const Agent& thread) const {
  static const std::set<Action> empty;
  auto it = known_.find(thread);
  return it == known_.end() ? empty : it->second;
}

const std::set<Action>* KnowledgeState::snapshot(const Agent& thread,
                                                 RevisionId rev) const {
  auto it = snapshots_.find({thread, rev});
  return it == snapshots_.end() ? nullptr : &it->second;
}

std::set<Action> k_log(const Trace& e, std::size_t i, const Agent& t) {
  if (i > e.size()) {
    throw PreconditionError("knowledge index exceeds trace length");
  }
  KnowledgeState ks;
  for (std::size_t p = 0; p < i; ++p) ks.step(e[p]);
  return ks.known(t);
}

bool log_consistent(const Trace& e, std::size_t i, const Log& l) {
  return is_subsequence(l, act_seq(prefix(e, i)));
}

bool valid_log(const Trace& e, std::size_t i, const Agent& t, const Log& l) {
  std::set<Action> present(l.begin(), l.end());
  return present == k_log(e, i, t) && log_consistent(e, i, l);
}

Log canonical_log(const Trace& e, std::size_t i, const Agent& t) {
  std::set<Action> know = k_log(e, i, t);
  Log out;
  for (std::size_t p = 0; p < i; ++p) {
    if (know.count(e[p].action)) out.push_back(e[p].action);
  }
  return out;
}

State log_state(const Log& l) {
  State s;
  std::set<Action> seen;
  for (const Action& a : l) {
    if (!seen.insert(a).second) continue;
    if (const auto* u = std::get_if<UpdateAction>(&a)) {
      s = apply_update(std::move(s), u->update);
    }
  }
  return s;
}

bool log_result(const std::string& var, const Log& l, const Value& r) {
  return eval_query(log_state(l), var) == r;
}

bool exists_result_log(const Trace& e, std::size_t i, const Agent& t,
                       const std::string& var, const Value& r) {
  std::set<Action> know = k_log(e, i, t);
  Log canonical;
  std::vector<std::size_t> positions;  // 0-based, actions t knows
  for (std::size_t p = 0; p < i; ++p) {
    if (know.count(e[p].action)) {
      canonical.push_back(e[p].action);
      positions.push_back(p);
    }
  }
  if (log_result(var, canonical, r)) return true;
  if (positions.size() == know.size()) {
    // Every known action occurs exactly once, so the canonical log was the
    // only valid one.
    return false;
  }
  if (positions.size() > 20) {
    throw BudgetError("too many log embeddings to enumerate",
                      positions.size());
  }
  // Repeated actions give a valid log a choice of which occurrences to keep;
  // the choice can reorder first occurrences of distinct updates.
  const std::size_t n = positions.size();
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    Log l;
    std::set<Action> covered;
    for (std::size_t b = 0; b < n; ++b) {
      if (mask & (std::uint64_t{1} << b)) {
        l.push_back(e[positions[b]].action);
        covered.insert(l.back());
      }
    }
    if (covered.size() != know.size()) continue;
    if (log_result(var, l, r)) return true;
  }
  return false;
}

bool atomic_revisions_ok(const Trace& e) {
  // A revision's queries, updates and commit travel as one bundle: no
  // other event may sit strictly between two events of the same revision,
  // and nothing of the revision may follow its commit.
  std::map<std::pair<Agent, RevisionId>, std::pair<std::size_t, std::size_t>>
      span;
  std::set<std::pair<Agent, RevisionId>> committed;
  for (std::size_t i = 0; i < e.size(); ++i) {
    auto rev = revision_of(e[i].action);
    if (!rev) continue;
    auto key = std::make_pair(e[i].agent, *rev);
    if (committed.count(key)) return false;
    auto [it, fresh] = span.emplace(key, std::make_pair(i, i));
    if (!fresh) it->second.second = i;
    if (is_commit(e[i])) committed.insert(key);
  }
  for (const auto& [key, extent] : span) {
    for (std::size_t i = extent.first + 1; i < extent.second; ++i) {
      auto rev = revision_of(e[i].action);
      if (!rev || e[i].agent != key.first || *rev != key.second) return false;
    }
  }
  return true;
}

bool forwards_after_commit_ok(const Trace& e) {
  std::set<std::pair<Agent, RevisionId>> committed;
  for (const Event& ev : e) {
    if (is_commit(ev)) {
      committed.insert({ev.agent, *revision_of(ev.action)});
    } else if (const auto* f = std::get_if<ForwardAction>(&ev.action)) {
      if (!committed.count({Agent::thread(f->from), f->rev})) return false;
    }
  }
  return true;
}

bool network_ok(const Trace& e) {
  return atomic_revisions_ok(e) && forwards_after_commit_ok(e);
}

bool correct_evc(const Trace& e) {
  if (!network_ok(e)) return false;
  for (std::size_t p = 0; p < e.size(); ++p) {
    const auto* q = std::get_if<QueryAction>(&e[p].action);
    if (q == nullptr) continue;
    if (!exists_result_log(e, p + 1, e[p].agent, q->var, q->result)) {
      return false;
    }
  }
  return true;
}

}  // namespace conch
