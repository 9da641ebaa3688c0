// Prefix-notation formula text. Examples:
//   (not (knows (threads) (not correct)))
//   (forall t Thread (forall q Query (forall r Value
//     (sofar (implies (query t q r) (justified t q r))))))
//   (knows (group t1 t2 obs) (not correct))
//   (once (klog t2 (act up 0 x 1)))
// Identifiers bound by an enclosing forall/exists are variables; anything
// else is a constant of the sort the atom expects at that position. The
// token "obs" is reserved inside group lists.
#include <cctype>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "conch/errors.hh"
#include "conch/logic.hh"

namespace conch {

namespace {

struct Tok {
  enum class Kind { LParen, RParen, Word };
  Kind kind;
  std::string text;
};

std::vector<Tok> tokenize(const std::string& text) {
  std::vector<Tok> out;
  std::size_t p = 0;
  while (p < text.size()) {
    char c = text[p];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++p;
    } else if (c == '(') {
      out.push_back({Tok::Kind::LParen, "("});
      ++p;
    } else if (c == ')') {
      out.push_back({Tok::Kind::RParen, ")"});
      ++p;
    } else {
      std::size_t start = p;
      while (p < text.size() && text[p] != '(' && text[p] != ')' &&
             !std::isspace(static_cast<unsigned char>(text[p]))) {
        ++p;
      }
      out.push_back({Tok::Kind::Word, text.substr(start, p - start)});
    }
  }
  return out;
}

[[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, 1); }

struct Parser {
  std::vector<Tok> toks;
  std::size_t pos = 0;
  std::vector<std::string> scope;

  bool at_end() const { return pos >= toks.size(); }

  const Tok& peek() const {
    if (at_end()) fail("unexpected end of formula");
    return toks[pos];
  }

  Tok take() {
    Tok t = peek();
    ++pos;
    return t;
  }

  std::string take_word(const std::string& what) {
    Tok t = take();
    if (t.kind != Tok::Kind::Word) fail("expected " + what);
    return t.text;
  }

  void expect_rparen(const std::string& ctx) {
    if (take().kind != Tok::Kind::RParen) {
      fail("expected ')' after " + ctx);
    }
  }

  bool in_scope(const std::string& name) const {
    for (const auto& v : scope) {
      if (v == name) return true;
    }
    return false;
  }

  static bool parse_int(const std::string& w, std::int64_t& out) {
    if (w.empty()) return false;
    std::size_t k = (w[0] == '-') ? 1 : 0;
    if (k == w.size()) return false;
    for (std::size_t p = k; p < w.size(); ++p) {
      if (!std::isdigit(static_cast<unsigned char>(w[p]))) return false;
    }
    out = std::stoll(w);
    return true;
  }

  // Same value spelling as trace files, so printed formulas reparse.
  static std::optional<Value> parse_value_word(const std::string& w) {
    if (w == "true") return Value{true};
    if (w == "false") return Value{false};
    std::int64_t n;
    if (parse_int(w, n)) return Value{n};
    return std::nullopt;
  }

  std::optional<Value> parse_optional_value_arg() {
    if (peek().kind != Tok::Kind::Word) return std::nullopt;
    auto v = parse_value_word(peek().text);
    if (v) ++pos;
    return v;
  }

  Action parse_action_body() {
    std::string head = take_word("an action kind");
    if (head == "qu") {
      std::int64_t rev = 0;
      if (!parse_int(take_word("a revision"), rev)) fail("bad revision");
      std::string var = take_word("a variable name");
      auto val = parse_value_word(take_word("a value"));
      if (!val) fail("bad query result value");
      return QueryAction{rev, var, *val};
    }
    if (head == "up") {
      std::int64_t rev = 0, n = 0;
      if (!parse_int(take_word("a revision"), rev)) fail("bad revision");
      std::string var = take_word("a variable name");
      if (!parse_int(take_word("an integer"), n)) fail("bad update value");
      return UpdateAction{rev, Assignment{var, n}};
    }
    if (head == "com") {
      std::int64_t rev = 0;
      if (!parse_int(take_word("a revision"), rev)) fail("bad revision");
      return CommitAction{rev};
    }
    if (head == "fwd") {
      std::string from = take_word("a thread name");
      std::string to = take_word("a thread name");
      std::int64_t rev = 0;
      if (!parse_int(take_word("a revision"), rev)) fail("bad revision");
      return ForwardAction{from, to, rev};
    }
    // Register shapes: m-inv, m-ret or a whole call, with optional value.
    if (head.size() > 4 && head.substr(head.size() - 4) == "-inv") {
      return InvAction{head.substr(0, head.size() - 4),
                       parse_optional_value_arg()};
    }
    if (head.size() > 4 && head.substr(head.size() - 4) == "-ret") {
      return RetAction{head.substr(0, head.size() - 4),
                       parse_optional_value_arg()};
    }
    return CallAction{head, parse_optional_value_arg()};
  }

  Term parse_arg(Sort expected) {
    const Tok& t = peek();
    if (t.kind == Tok::Kind::LParen) {
      ++pos;
      if (take_word("'act'") != "act") fail("only (act ...) lists may appear as arguments");
      if (expected != Sort::Action) fail("(act ...) used where a " + to_string(expected) + " was expected");
      Action a = parse_action_body();
      expect_rparen("action literal");
      return Term::constant(TermValue{a});
    }
    std::string w = take_word("an argument");
    if (in_scope(w)) return Term::variable(w);
    switch (expected) {
      case Sort::Thread:
        return Term::constant(TermValue{Agent::thread(w)});
      case Sort::Query:
        return Term::constant(TermValue{w});
      case Sort::Value: {
        auto v = parse_value_word(w);
        if (!v) fail("'" + w + "' is not a value literal or bound variable");
        return Term::constant(TermValue{*v});
      }
      case Sort::Revision: {
        std::int64_t n;
        if (!parse_int(w, n)) {
          fail("'" + w + "' is not a revision literal or bound variable");
        }
        return Term::constant(TermValue{RevisionId{n}});
      }
      case Sort::Update: {
        auto sep = w.find(":=");
        std::int64_t n;
        if (sep == std::string::npos || !parse_int(w.substr(sep + 2), n)) {
          fail("'" + w + "' is not an update literal (var:=int) or bound variable");
        }
        return Term::constant(TermValue{Assignment{w.substr(0, sep), n}});
      }
      case Sort::Action:
        fail("'" + w + "' is not a bound variable; action literals are written (act ...)");
      case Sort::Log:
        fail("log arguments cannot be written in formula text");
    }
    fail("unreachable");
  }

  GroupSpec parse_group() {
    if (take().kind != Tok::Kind::LParen) {
      fail("expected a group: (threads [obs]) or (group name... [obs])");
    }
    std::string head = take_word("'threads' or 'group'");
    bool all = head == "threads";
    if (!all && head != "group") fail("expected 'threads' or 'group'");
    std::set<Agent> named;
    bool obs = false;
    while (peek().kind == Tok::Kind::Word) {
      std::string w = take_word("a thread name");
      if (w == "obs") {
        obs = true;
        break;
      }
      if (all) fail("(threads) takes no thread names, only obs");
      named.insert(Agent::thread(w));
    }
    expect_rparen("group");
    if (all) return GroupSpec::everyone(obs);
    if (named.empty()) fail("(group ...) needs at least one thread name");
    return GroupSpec::of(std::move(named), obs);
  }

  Formula parse_quantifier(bool universal) {
    std::string var = take_word("a variable name");
    std::string sort_word = take_word("a sort");
    auto sort = sort_from_string(sort_word);
    if (!sort) fail("unknown sort '" + sort_word + "'");
    if (*sort == Sort::Log) fail("sort Log cannot be quantified");
    scope.push_back(var);
    Formula body = parse_one();
    scope.pop_back();
    expect_rparen("quantifier");
    return universal ? Formula::forall(var, *sort, std::move(body))
                     : Formula::exists(var, *sort, std::move(body));
  }

  Formula parse_atom_tail(const std::string& pred) {
    static const std::map<std::string, std::vector<std::vector<Sort>>> sigs = {
        {"top", {{}}},
        {"correct", {{}}},
        {"correctevc", {{}}},
        {"query",
         {{Sort::Thread, Sort::Query, Sort::Value},
          {Sort::Thread, Sort::Query, Sort::Value, Sort::Revision}}},
        {"update",
         {{Sort::Thread, Sort::Update},
          {Sort::Thread, Sort::Update, Sort::Revision}}},
        {"commit", {{Sort::Thread, Sort::Revision}}},
        {"forward", {{Sort::Thread, Sort::Thread, Sort::Revision}}},
        {"klog", {{Sort::Thread, Sort::Action}}},
        {"justified", {{Sort::Thread, Sort::Query, Sort::Value}}},
    };
    auto it = sigs.find(pred);
    if (it == sigs.end()) {
      fail("unknown operator or atom '" + pred + "'");
    }
    // Count argument tokens ahead to pick an arity; a nested (act ...)
    // list counts as one argument.
    std::size_t save = pos;
    std::size_t count = 0;
    while (true) {
      const Tok& t = peek();
      if (t.kind == Tok::Kind::RParen) break;
      ++count;
      if (t.kind == Tok::Kind::LParen) {
        int d = 1;
        ++pos;
        while (d > 0) {
          if (peek().kind == Tok::Kind::LParen) ++d;
          if (peek().kind == Tok::Kind::RParen) --d;
          ++pos;
        }
      } else {
        ++pos;
      }
    }
    pos = save;
    const std::vector<Sort>* sig = nullptr;
    for (const auto& s : it->second) {
      if (s.size() == count) sig = &s;
    }
    if (!sig) {
      fail("atom '" + pred + "' does not take " + std::to_string(count) +
           " arguments");
    }
    std::vector<Term> args;
    for (Sort s : *sig) args.push_back(parse_arg(s));
    expect_rparen("atom '" + pred + "'");
    return Formula::atom(pred, std::move(args));
  }

  Formula parse_one() {
    Tok t = take();
    if (t.kind == Tok::Kind::Word) {
      // Bare word: 0-ary atom.
      if (t.text == "top") return Formula::top();
      if (t.text == "correct" || t.text == "correctevc") {
        return Formula::atom(t.text);
      }
      fail("expected a formula, got '" + t.text + "'");
    }
    if (t.kind != Tok::Kind::LParen) fail("expected a formula");
    std::string head = take_word("an operator or atom");
    if (head == "and" || head == "or" || head == "implies" ||
        head == "since" || head == "until" || head == "wuntil") {
      Formula a = parse_one();
      Formula b = parse_one();
      expect_rparen("(" + head + " ...)");
      if (head == "and") return Formula::land(std::move(a), std::move(b));
      if (head == "or") return Formula::lor(std::move(a), std::move(b));
      if (head == "implies") {
        return Formula::implies(std::move(a), std::move(b));
      }
      if (head == "since") return Formula::since(std::move(a), std::move(b));
      if (head == "until") return Formula::until(std::move(a), std::move(b));
      return Formula::wuntil(std::move(a), std::move(b));
    }
    if (head == "not" || head == "once" || head == "sofar" ||
        head == "eventually" || head == "always") {
      Formula a = parse_one();
      expect_rparen("(" + head + " ...)");
      if (head == "not") return Formula::lnot(std::move(a));
      if (head == "once") return Formula::once(std::move(a));
      if (head == "sofar") return Formula::sofar(std::move(a));
      if (head == "eventually") return Formula::eventually(std::move(a));
      return Formula::always(std::move(a));
    }
    if (head == "forall") return parse_quantifier(true);
    if (head == "exists") return parse_quantifier(false);
    if (head == "knows") {
      GroupSpec g = parse_group();
      Formula body = parse_one();
      expect_rparen("(knows ...)");
      return Formula::knows(std::move(g), std::move(body));
    }
    return parse_atom_tail(head);
  }
};

std::string action_to_text(const Action& a) {
  bool fwd = std::holds_alternative<ForwardAction>(a);
  Event ev{fwd ? Agent::env() : Agent::thread("_"), a};
  std::string line = event_line(ev);
  return line.substr(line.find(' ') + 1);
}

std::string term_to_text(const Term& t) {
  if (t.kind == Term::Kind::Var) return t.var;
  if (std::holds_alternative<Action>(t.value)) {
    return "(act " + action_to_text(std::get<Action>(t.value)) + ")";
  }
  return to_string(t.value);
}

std::string group_to_text(const GroupSpec& g) {
  std::string out;
  if (g.all_threads) {
    out = "(threads";
  } else {
    out = "(group";
    for (const Agent& t : g.threads) out += " " + t.name;
  }
  if (g.observer) out += " obs";
  return out + ")";
}

std::string node_to_text(const Formula::Node& n) {
  switch (n.kind) {
    case Formula::Kind::Atom: {
      if (n.args.empty()) return n.pred;
      std::string out = "(" + n.pred;
      for (const Term& t : n.args) out += " " + term_to_text(t);
      return out + ")";
    }
    case Formula::Kind::And:
      return "(and " + node_to_text(*n.lhs) + " " + node_to_text(*n.rhs) + ")";
    case Formula::Kind::Not:
      return "(not " + node_to_text(*n.lhs) + ")";
    case Formula::Kind::Since:
      return "(since " + node_to_text(*n.lhs) + " " + node_to_text(*n.rhs) +
             ")";
    case Formula::Kind::Until:
      return "(until " + node_to_text(*n.lhs) + " " + node_to_text(*n.rhs) +
             ")";
    case Formula::Kind::Forall:
      return "(forall " + n.var + " " + to_string(n.sort) + " " +
             node_to_text(*n.lhs) + ")";
    case Formula::Kind::Knows:
      return "(knows " + group_to_text(n.group) + " " + node_to_text(*n.lhs) +
             ")";
  }
  return "?";
}

}  // namespace

std::string Formula::to_text() const { return node_to_text(node()); }

Formula parse_formula(const std::string& text) {
  Parser p{tokenize(text)};
  if (p.toks.empty()) fail("empty formula");
  Formula f = p.parse_one();
  if (!p.at_end()) fail("trailing input after formula");
  return f;
}

}  // namespace conch
