// Temporal-epistemic formulas over finite traces.
//
// Formulas are closed at evaluation entry. Quantifiers range over finite
// domains extracted from the trace under evaluation (threads, query names,
// values, revision ids, updates, actions appearing in it). Knowledge
// evaluates its body on every witness of the current prefix, each at its
// own final index.
//
// Positions are 1-based; index 0 means "before any event" (atoms that
// inspect the event at the current position are false there, atoms over
// the prefix see the empty prefix).
#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "conch/indist.hh"
#include "conch/search.hh"
#include "conch/speclang.hh"
#include "conch/trace.hh"

namespace conch {

enum class Sort { Thread, Query, Value, Revision, Update, Action, Log };

std::string to_string(Sort s);
std::optional<Sort> sort_from_string(const std::string& s);

// Ground values a term can denote. Query names are plain strings.
using TermValue =
    std::variant<Agent, std::string, Value, RevisionId, Assignment, Action, Log>;

std::string to_string(const TermValue& v);

struct Term {
  enum class Kind { Var, Const };
  Kind kind;
  std::string var;  // Kind::Var
  TermValue value;  // Kind::Const

  static Term variable(std::string name);
  static Term constant(TermValue v);
};

// Which agents a knowledge operator quantifies over. all_threads resolves
// to every thread of the trace the operator is evaluated on.
struct GroupSpec {
  bool all_threads = true;
  std::set<Agent> threads;
  bool observer = false;

  static GroupSpec everyone(bool observer = false);
  static GroupSpec of(std::set<Agent> threads, bool observer = false);
};

AgentGroup resolve_group(const GroupSpec& g, const Trace& source);

class Formula {
 public:
  enum class Kind { Atom, And, Not, Since, Until, Forall, Knows };

  struct Node;
  using NodePtr = std::shared_ptr<const Node>;
  struct Node {
    Kind kind;
    // Atom
    std::string pred;
    std::vector<Term> args;
    // And / Since / Until: lhs, rhs; Not / Forall / Knows: lhs
    NodePtr lhs;
    NodePtr rhs;
    // Forall
    std::string var;
    Sort sort = Sort::Thread;
    // Knows
    GroupSpec group;
  };

  static Formula atom(std::string pred, std::vector<Term> args = {});
  static Formula land(Formula a, Formula b);
  static Formula lnot(Formula a);
  static Formula since(Formula a, Formula b);
  static Formula until(Formula a, Formula b);
  static Formula forall(std::string var, Sort sort, Formula body);
  static Formula knows(GroupSpec g, Formula body);

  // Derived forms, desugared structurally.
  static Formula top();
  static Formula lor(Formula a, Formula b);
  static Formula implies(Formula a, Formula b);
  static Formula once(Formula a);        // sometime in the past, including now
  static Formula sofar(Formula a);       // at every position up to now
  static Formula eventually(Formula a);  // reading depends on UntilSemantics
  static Formula always(Formula a);
  static Formula wuntil(Formula a, Formula b);
  static Formula exists(std::string var, Sort sort, Formula body);

  const Node& node() const { return *node_; }
  std::string to_text() const;

 private:
  explicit Formula(NodePtr n) : node_(std::move(n)) {}
  NodePtr node_;
};

// Until comes in two readings: past-anchored, mirroring Since, and
// future-directed, which is what the derived eventually/always operators
// need. Both are provided; Future is the default.
enum class UntilSemantics { PastAnchored, Future };

// What the environment may insert into knowledge universes. EcForwarding
// offers one fwd(t, t', r) per committed (t, r) and other thread t'.
enum class EnvPolicy { None, EcForwarding };

std::vector<Event> forwarding_candidates(const Trace& source);

struct AtomRule {
  // Accepted argument sort lists, one per arity.
  std::vector<std::vector<Sort>> signatures;
  std::function<bool(const Trace&, std::size_t, const std::vector<TermValue>&)>
      fn;
};

using AtomBinding = std::map<std::string, AtomRule>;

// Bindings: top, correct (membership of the current prefix in spec),
// query(t,q,r[,id]), update(t,u[,id]), commit(t,id), forward(t,t',id),
// klog(t,a), justified(t,q,r), correctevc, and the log-valued atoms
// in(a,L), consistent(L), validlog(L,t), result(q,L,r).
AtomBinding default_bindings(std::shared_ptr<const SpecOracle> spec);

struct EvalOptions {
  UntilSemantics until = UntilSemantics::Future;
  EnvPolicy env = EnvPolicy::None;
  Budget budget;
};

class Evaluator {
 public:
  Evaluator(AtomBinding atoms, EvalOptions options = {});

  bool eval(const Trace& e, std::size_t i, const Formula& f) const;

  const SearchStats& stats() const;

 private:
  struct Env;
  bool eval_rec(const Trace& e, std::size_t i, const Formula::Node& n,
                const Env& env) const;
  std::vector<TermValue> domain_of(Sort s, const Trace& e) const;

  AtomBinding atoms_;
  EvalOptions options_;
  std::shared_ptr<BudgetMeter> meter_;
};

bool eval(const Trace& e, std::size_t i, const Formula& f,
          const AtomBinding& atoms, EvalOptions options = {});

enum class Axiom { Truth, PositiveIntrospection, NegativeIntrospection };

std::string to_string(Axiom a);

// Evaluates the axiom instance for group g and body f at the end of e.
bool axiom_check(const Trace& e, const GroupSpec& g, const Formula& f,
                 Axiom axiom, const AtomBinding& atoms,
                 EvalOptions options = {});

// Prefix notation parser for the CLI, documented in the README. Throws
// ParseError on malformed input, ConfigError on unknown atoms.
Formula parse_formula(const std::string& text);

}  // namespace conch
