#include "conch/logic.hh"

#include <algorithm>

#include "conch/errors.hh"
#include "conch/indist.hh"

namespace conch {

std::string to_string(Sort s) {
  switch (s) {
    case Sort::Thread: return "Thread";
    case Sort::Query: return "Query";
    case Sort::Value: return "Value";
    case Sort::Revision: return "Revision";
    case Sort::Update: return "Update";
    case Sort::Action: return "Action";
    case Sort::Log: return "Log";
  }
  return "?";
}

std::optional<Sort> sort_from_string(const std::string& s) {
  if (s == "Thread") return Sort::Thread;
  if (s == "Query") return Sort::Query;
  if (s == "Value") return Sort::Value;
  if (s == "Revision") return Sort::Revision;
  if (s == "Update") return Sort::Update;
  if (s == "Action") return Sort::Action;
  if (s == "Log") return Sort::Log;
  return std::nullopt;
}

namespace {

Sort sort_of(const TermValue& v) {
  struct Visitor {
    Sort operator()(const Agent&) const { return Sort::Thread; }
    Sort operator()(const std::string&) const { return Sort::Query; }
    Sort operator()(const Value&) const { return Sort::Value; }
    Sort operator()(const RevisionId&) const { return Sort::Revision; }
    Sort operator()(const Assignment&) const { return Sort::Update; }
    Sort operator()(const Action&) const { return Sort::Action; }
    Sort operator()(const Log&) const { return Sort::Log; }
  };
  return std::visit(Visitor{}, v);
}

std::string action_text(const Action& a) {
  bool fwd = std::holds_alternative<ForwardAction>(a);
  Event ev{fwd ? Agent::env() : Agent::thread("_"), a};
  std::string line = event_line(ev);
  auto sp = line.find(' ');
  return line.substr(sp + 1);
}

}  // namespace

std::string to_string(const TermValue& v) {
  struct Visitor {
    std::string operator()(const Agent& a) const { return a.name; }
    std::string operator()(const std::string& q) const { return q; }
    std::string operator()(const Value& x) const { return to_string(x); }
    std::string operator()(const RevisionId& r) const {
      return std::to_string(r);
    }
    std::string operator()(const Assignment& u) const {
      return u.var + ":=" + std::to_string(u.value);
    }
    std::string operator()(const Action& a) const {
      return "(" + action_text(a) + ")";
    }
    std::string operator()(const Log& l) const {
      std::string out = "[";
      for (std::size_t k = 0; k < l.size(); ++k) {
        if (k) out += ", ";
        out += action_text(l[k]);
      }
      return out + "]";
    }
  };
  return std::visit(Visitor{}, v);
}

Term Term::variable(std::string name) {
  return Term{Kind::Var, std::move(name), {}};
}

Term Term::constant(TermValue v) { return Term{Kind::Const, {}, std::move(v)}; }

GroupSpec GroupSpec::everyone(bool observer) {
  return GroupSpec{true, {}, observer};
}

GroupSpec GroupSpec::of(std::set<Agent> threads, bool observer) {
  return GroupSpec{false, std::move(threads), observer};
}

AgentGroup resolve_group(const GroupSpec& g, const Trace& source) {
  if (g.all_threads) return AgentGroup::all_threads(source, g.observer);
  AgentGroup out;
  out.threads = g.threads;
  out.include_observer = g.observer;
  return out;
}

namespace {

Formula::NodePtr make_node(Formula::Node n) {
  return std::make_shared<const Formula::Node>(std::move(n));
}

}  // namespace

Formula Formula::atom(std::string pred, std::vector<Term> args) {
  Node n;
  n.kind = Kind::Atom;
  n.pred = std::move(pred);
  n.args = std::move(args);
  return Formula(make_node(std::move(n)));
}

Formula Formula::land(Formula a, Formula b) {
  Node n;
  n.kind = Kind::And;
  n.lhs = std::move(a.node_);
  n.rhs = std::move(b.node_);
  return Formula(make_node(std::move(n)));
}

Formula Formula::lnot(Formula a) {
  Node n;
  n.kind = Kind::Not;
  n.lhs = std::move(a.node_);
  return Formula(make_node(std::move(n)));
}

Formula Formula::since(Formula a, Formula b) {
  Node n;
  n.kind = Kind::Since;
  n.lhs = std::move(a.node_);
  n.rhs = std::move(b.node_);
  return Formula(make_node(std::move(n)));
}

Formula Formula::until(Formula a, Formula b) {
  Node n;
  n.kind = Kind::Until;
  n.lhs = std::move(a.node_);
  n.rhs = std::move(b.node_);
  return Formula(make_node(std::move(n)));
}

Formula Formula::forall(std::string var, Sort sort, Formula body) {
  Node n;
  n.kind = Kind::Forall;
  n.var = std::move(var);
  n.sort = sort;
  n.lhs = std::move(body.node_);
  return Formula(make_node(std::move(n)));
}

Formula Formula::knows(GroupSpec g, Formula body) {
  Node n;
  n.kind = Kind::Knows;
  n.group = std::move(g);
  n.lhs = std::move(body.node_);
  return Formula(make_node(std::move(n)));
}

Formula Formula::top() { return atom("top"); }

Formula Formula::lor(Formula a, Formula b) {
  return lnot(land(lnot(std::move(a)), lnot(std::move(b))));
}

Formula Formula::implies(Formula a, Formula b) {
  return lor(lnot(std::move(a)), std::move(b));
}

Formula Formula::once(Formula a) { return since(top(), std::move(a)); }

Formula Formula::sofar(Formula a) { return lnot(once(lnot(std::move(a)))); }

Formula Formula::eventually(Formula a) { return until(top(), std::move(a)); }

Formula Formula::always(Formula a) {
  return lnot(eventually(lnot(std::move(a))));
}

Formula Formula::wuntil(Formula a, Formula b) {
  Formula hold = always(a);
  return lor(until(std::move(a), std::move(b)), std::move(hold));
}

Formula Formula::exists(std::string var, Sort sort, Formula body) {
  return lnot(forall(std::move(var), sort, lnot(std::move(body))));
}

std::vector<Event> forwarding_candidates(const Trace& source) {
  std::set<std::pair<Agent, RevisionId>> committed;
  for (const Event& ev : source) {
    if (is_commit(ev)) {
      committed.insert({ev.agent, std::get<CommitAction>(ev.action).rev});
    }
  }
  std::vector<Event> out;
  for (const auto& [t, rev] : committed) {
    for (const Agent& other : threads_of(source)) {
      if (other == t) continue;
      out.push_back(events::forward(t.name, other.name, rev));
    }
  }
  return out;
}

AtomBinding default_bindings(std::shared_ptr<const SpecOracle> spec) {
  using Args = std::vector<TermValue>;
  AtomBinding b;

  b["top"] = AtomRule{
      {{}}, [](const Trace&, std::size_t, const Args&) { return true; }};

  b["correct"] =
      AtomRule{{{}}, [spec](const Trace& e, std::size_t i, const Args&) {
                 return spec_member(*spec, prefix(e, i));
               }};

  b["query"] = AtomRule{
      {{Sort::Thread, Sort::Query, Sort::Value},
       {Sort::Thread, Sort::Query, Sort::Value, Sort::Revision}},
      [](const Trace& e, std::size_t i, const Args& a) {
        if (i == 0) return false;
        const Event& ev = e[i - 1];
        if (!is_query(ev) || ev.agent != std::get<Agent>(a[0])) return false;
        const auto& qu = std::get<QueryAction>(ev.action);
        if (qu.var != std::get<std::string>(a[1])) return false;
        if (qu.result != std::get<Value>(a[2])) return false;
        return a.size() < 4 || qu.rev == std::get<RevisionId>(a[3]);
      }};

  b["update"] = AtomRule{
      {{Sort::Thread, Sort::Update},
       {Sort::Thread, Sort::Update, Sort::Revision}},
      [](const Trace& e, std::size_t i, const Args& a) {
        if (i == 0) return false;
        const Event& ev = e[i - 1];
        if (!is_update(ev) || ev.agent != std::get<Agent>(a[0])) return false;
        const auto& up = std::get<UpdateAction>(ev.action);
        if (up.update != std::get<Assignment>(a[1])) return false;
        return a.size() < 3 || up.rev == std::get<RevisionId>(a[2]);
      }};

  b["commit"] = AtomRule{{{Sort::Thread, Sort::Revision}},
                         [](const Trace& e, std::size_t i, const Args& a) {
                           if (i == 0) return false;
                           const Event& ev = e[i - 1];
                           return is_commit(ev) &&
                                  ev.agent == std::get<Agent>(a[0]) &&
                                  std::get<CommitAction>(ev.action).rev ==
                                      std::get<RevisionId>(a[1]);
                         }};

  b["forward"] = AtomRule{
      {{Sort::Thread, Sort::Thread, Sort::Revision}},
      [](const Trace& e, std::size_t i, const Args& a) {
        if (i == 0) return false;
        const Event& ev = e[i - 1];
        if (!is_forward(ev)) return false;
        const auto& fw = std::get<ForwardAction>(ev.action);
        return fw.from == std::get<Agent>(a[0]).name &&
               fw.to == std::get<Agent>(a[1]).name &&
               fw.rev == std::get<RevisionId>(a[2]);
      }};

  b["klog"] = AtomRule{{{Sort::Thread, Sort::Action}},
                       [](const Trace& e, std::size_t i, const Args& a) {
                         auto known =
                             k_log(e, i, std::get<Agent>(a[0]));
                         return known.count(std::get<Action>(a[1])) > 0;
                       }};

  b["in"] = AtomRule{{{Sort::Action, Sort::Log}},
                     [](const Trace&, std::size_t, const Args& a) {
                       const auto& l = std::get<Log>(a[1]);
                       return std::find(l.begin(), l.end(),
                                        std::get<Action>(a[0])) != l.end();
                     }};

  b["consistent"] = AtomRule{{{Sort::Log}},
                             [](const Trace& e, std::size_t i, const Args& a) {
                               return log_consistent(e, i, std::get<Log>(a[0]));
                             }};

  b["validlog"] = AtomRule{{{Sort::Log, Sort::Thread}},
                           [](const Trace& e, std::size_t i, const Args& a) {
                             return valid_log(e, i, std::get<Agent>(a[1]),
                                              std::get<Log>(a[0]));
                           }};

  b["result"] = AtomRule{{{Sort::Query, Sort::Log, Sort::Value}},
                         [](const Trace&, std::size_t, const Args& a) {
                           return log_result(std::get<std::string>(a[0]),
                                             std::get<Log>(a[1]),
                                             std::get<Value>(a[2]));
                         }};

  // Decision procedure for "some valid log for t yields r on q".
  b["justified"] =
      AtomRule{{{Sort::Thread, Sort::Query, Sort::Value}},
               [](const Trace& e, std::size_t i, const Args& a) {
                 return exists_result_log(e, i, std::get<Agent>(a[0]),
                                          std::get<std::string>(a[1]),
                                          std::get<Value>(a[2]));
               }};

  b["correctevc"] =
      AtomRule{{{}}, [](const Trace& e, std::size_t i, const Args&) {
                 return correct_evc(prefix(e, i));
               }};

  return b;
}

struct Evaluator::Env {
  std::map<std::string, TermValue> bound;
};

Evaluator::Evaluator(AtomBinding atoms, EvalOptions options)
    : atoms_(std::move(atoms)),
      options_(options),
      meter_(std::make_shared<BudgetMeter>(options.budget)) {}

const SearchStats& Evaluator::stats() const { return meter_->stats(); }

bool Evaluator::eval(const Trace& e, std::size_t i, const Formula& f) const {
  if (i > e.size()) {
    throw PreconditionError("index " + std::to_string(i) +
                            " exceeds trace length " +
                            std::to_string(e.size()));
  }
  return eval_rec(e, i, f.node(), Env{});
}

std::vector<TermValue> Evaluator::domain_of(Sort s, const Trace& e) const {
  std::vector<TermValue> out;
  switch (s) {
    case Sort::Thread: {
      for (const Agent& t : threads_of(e)) out.push_back(t);
      return out;
    }
    case Sort::Query: {
      std::set<std::string> vars;
      for (const Event& ev : e) {
        if (is_query(ev)) vars.insert(std::get<QueryAction>(ev.action).var);
        if (is_update(ev)) {
          vars.insert(std::get<UpdateAction>(ev.action).update.var);
        }
      }
      for (const auto& v : vars) out.push_back(v);
      return out;
    }
    case Sort::Value: {
      std::set<Value> vals;
      for (const Event& ev : e) {
        if (is_query(ev)) vals.insert(std::get<QueryAction>(ev.action).result);
        if (is_update(ev)) {
          vals.insert(Value{std::get<UpdateAction>(ev.action).update.value});
        }
        if (auto* in = std::get_if<InvAction>(&ev.action)) {
          if (in->arg) vals.insert(*in->arg);
        }
        if (auto* rt = std::get_if<RetAction>(&ev.action)) {
          if (rt->result) vals.insert(*rt->result);
        }
        if (auto* c = std::get_if<CallAction>(&ev.action)) {
          if (c->value) vals.insert(*c->value);
        }
      }
      for (const auto& v : vals) out.push_back(v);
      return out;
    }
    case Sort::Revision: {
      std::set<RevisionId> revs;
      for (const Event& ev : e) {
        if (auto r = revision_of(ev.action)) revs.insert(*r);
      }
      for (auto r : revs) out.push_back(r);
      return out;
    }
    case Sort::Update: {
      std::set<Assignment> ups;
      for (const Event& ev : e) {
        if (is_update(ev)) ups.insert(std::get<UpdateAction>(ev.action).update);
      }
      for (const auto& u : ups) out.push_back(u);
      return out;
    }
    case Sort::Action: {
      std::set<Action> acts;
      for (const Event& ev : e) acts.insert(ev.action);
      for (const auto& a : acts) out.push_back(a);
      return out;
    }
    case Sort::Log:
      throw ConfigError("sort Log has no finite quantification domain");
  }
  return out;
}

bool Evaluator::eval_rec(const Trace& e, std::size_t i, const Formula::Node& n,
                         const Env& env) const {
  meter_->tick_node();
  switch (n.kind) {
    case Formula::Kind::Atom: {
      auto it = atoms_.find(n.pred);
      if (it == atoms_.end()) {
        throw ConfigError("unbound predicate: " + n.pred);
      }
      std::vector<TermValue> args;
      args.reserve(n.args.size());
      for (const Term& t : n.args) {
        if (t.kind == Term::Kind::Const) {
          args.push_back(t.value);
        } else {
          auto bt = env.bound.find(t.var);
          if (bt == env.bound.end()) {
            throw PreconditionError("unbound variable: " + t.var);
          }
          args.push_back(bt->second);
        }
      }
      const AtomRule& rule = it->second;
      bool arity_ok = false;
      for (const auto& sig : rule.signatures) {
        if (sig.size() != args.size()) continue;
        arity_ok = true;
        for (std::size_t k = 0; k < sig.size(); ++k) {
          if (sort_of(args[k]) != sig[k]) {
            throw PreconditionError("atom " + n.pred + ": argument " +
                                    std::to_string(k + 1) + " has sort " +
                                    to_string(sort_of(args[k])) +
                                    ", expected " + to_string(sig[k]));
          }
        }
        break;
      }
      if (!arity_ok) {
        throw ConfigError("atom " + n.pred + " does not take " +
                          std::to_string(args.size()) + " arguments");
      }
      return rule.fn(e, i, args);
    }
    case Formula::Kind::And:
      return eval_rec(e, i, *n.lhs, env) && eval_rec(e, i, *n.rhs, env);
    case Formula::Kind::Not:
      return !eval_rec(e, i, *n.lhs, env);
    case Formula::Kind::Since: {
      for (std::size_t j = i; j >= 1; --j) {
        if (eval_rec(e, j, *n.rhs, env)) {
          bool hold = true;
          for (std::size_t k = j + 1; k <= i; ++k) {
            if (!eval_rec(e, k, *n.lhs, env)) {
              hold = false;
              break;
            }
          }
          if (hold) return true;
        }
      }
      return false;
    }
    case Formula::Kind::Until: {
      if (options_.until == UntilSemantics::PastAnchored) {
        for (std::size_t j = 1; j <= i; ++j) {
          if (eval_rec(e, j, *n.rhs, env)) {
            bool hold = true;
            for (std::size_t k = 1; k < j; ++k) {
              if (!eval_rec(e, k, *n.lhs, env)) {
                hold = false;
                break;
              }
            }
            if (hold) return true;
          }
        }
        return false;
      }
      for (std::size_t j = std::max<std::size_t>(i, 1); j <= e.size(); ++j) {
        if (eval_rec(e, j, *n.rhs, env)) {
          bool hold = true;
          for (std::size_t k = std::max<std::size_t>(i, 1); k < j; ++k) {
            if (!eval_rec(e, k, *n.lhs, env)) {
              hold = false;
              break;
            }
          }
          if (hold) return true;
        }
      }
      return false;
    }
    case Formula::Kind::Forall: {
      for (TermValue& v : domain_of(n.sort, e)) {
        Env inner = env;
        inner.bound[n.var] = std::move(v);
        if (!eval_rec(e, i, *n.lhs, inner)) return false;
      }
      return true;
    }
    case Formula::Kind::Knows: {
      Trace src = prefix(e, i);
      WitnessUniverse u = universe_of(src, resolve_group(n.group, src));
      if (options_.env == EnvPolicy::EcForwarding) {
        u.env_candidates = forwarding_candidates(src);
        u.max_env_insertions = u.env_candidates.size();
      }
      WitnessStream stream(std::move(u), meter_);
      while (auto w = stream.next()) {
        meter_->tick_witness();
        if (!eval_rec(*w, w->size(), *n.lhs, env)) return false;
      }
      return true;
    }
  }
  throw Error("unreachable formula kind");
}

bool eval(const Trace& e, std::size_t i, const Formula& f,
          const AtomBinding& atoms, EvalOptions options) {
  return Evaluator(atoms, options).eval(e, i, f);
}

std::string to_string(Axiom a) {
  switch (a) {
    case Axiom::Truth: return "Truth";
    case Axiom::PositiveIntrospection: return "PositiveIntrospection";
    case Axiom::NegativeIntrospection: return "NegativeIntrospection";
  }
  return "?";
}

bool axiom_check(const Trace& e, const GroupSpec& g, const Formula& f,
                 Axiom axiom, const AtomBinding& atoms, EvalOptions options) {
  Formula knows = Formula::knows(g, f);
  Formula instance = Formula::top();
  switch (axiom) {
    case Axiom::Truth:
      instance = Formula::implies(knows, f);
      break;
    case Axiom::PositiveIntrospection:
      instance = Formula::implies(knows, Formula::knows(g, knows));
      break;
    case Axiom::NegativeIntrospection:
      instance = Formula::implies(Formula::lnot(knows),
                                  Formula::knows(g, Formula::lnot(knows)));
      break;
  }
  return eval(e, e.size(), instance, atoms, options);
}

}  // namespace conch
