#include "conch/checkers.hh"

#include <algorithm>
#include <map>
#include <set>
#include <string>

#include "conch/errors.hh"
#include "conch/indist.hh"

namespace conch {

namespace {

std::vector<std::vector<Event>> thread_queues(const Trace& e) {
  std::vector<std::vector<Event>> queues;
  for (const Agent& t : threads_of(e)) {
    queues.push_back(project(e, t).events());
  }
  return queues;
}

// Interleaving search shared by the register checkers: pick the next event
// from some thread queue, folding the spec as we go. Dead (counts, state)
// pairs are memoized; under the observer constraint the set of already
// emitted events is a function of the counts, so the memo stays sound.
struct MergeSearch {
  const SpecOracle& spec;
  std::vector<std::vector<Event>> queues;
  bool observer = false;
  bool reversed = false;
  BudgetMeter meter;

  std::vector<std::size_t> idx;
  std::vector<Event> path;
  std::set<Event> emitted;
  std::map<Event, std::vector<Event>> required_before;
  std::set<std::pair<std::vector<std::size_t>, SpecState>> dead;

  MergeSearch(const SpecOracle& s, const Trace& e, bool obs,
              const CheckOptions& options)
      : spec(s),
        queues(thread_queues(e)),
        observer(obs),
        reversed(options.reversed_choice_order),
        meter(options.budget) {
    idx.assign(queues.size(), 0);
    if (observer) {
      for (const auto& [r, in] : obs_view(e)) required_before[in].push_back(r);
    }
  }

  bool inv_allowed(const Event& ev) const {
    if (!observer || !is_inv(ev)) return true;
    auto it = required_before.find(ev);
    if (it == required_before.end()) return true;
    for (const Event& r : it->second) {
      if (!emitted.count(r)) return false;
    }
    return true;
  }

  bool dfs(const SpecState& st) {
    meter.tick_node();
    bool exhausted = true;
    for (std::size_t q = 0; q < queues.size(); ++q) {
      if (idx[q] < queues[q].size()) exhausted = false;
    }
    if (exhausted) {
      meter.tick_witness();
      return spec.accepting(st);
    }
    auto key = std::make_pair(idx, st);
    if (dead.count(key)) return false;
    for (std::size_t n = 0; n < queues.size(); ++n) {
      std::size_t q = reversed ? queues.size() - 1 - n : n;
      if (idx[q] >= queues[q].size()) continue;
      const Event& ev = queues[q][idx[q]];
      if (!inv_allowed(ev)) continue;
      auto next = spec.step(st, ev);
      if (!next) continue;
      ++idx[q];
      path.push_back(ev);
      emitted.insert(ev);
      if (dfs(*next)) return true;
      emitted.erase(ev);
      path.pop_back();
      --idx[q];
    }
    dead.insert(std::move(key));
    return false;
  }
};

Verdict run_merge_search(const Trace& e, const SpecOracle& spec, bool observer,
                         const CheckOptions& options) {
  MergeSearch search(spec, e, observer, options);
  Verdict v;
  v.consistent = search.dfs(spec.initial());
  if (v.consistent) v.witness = Trace(search.path);
  v.stats = search.meter.stats();
  return v;
}

void require_ec_trace(const Trace& e, const char* who) {
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (is_inv(e[i]) || is_ret(e[i]) || is_call(e[i])) {
      throw PreconditionError(
          std::string(who) +
          " takes query/update/commit/forward traces; event " +
          std::to_string(i + 1) + " is a method call");
    }
  }
  if (auto err = validate_revision_discipline(e)) {
    throw PreconditionError(std::string(who) + ": " + *err);
  }
}

}  // namespace

Verdict check_sc(const Trace& e, const SpecOracle& spec,
                 CheckOptions options) {
  return run_merge_search(e, spec, false, options);
}

Verdict check_lin(const Trace& e, const SpecOracle& spec,
                  CheckOptions options) {
  if (auto dup = find_duplicate_event(e)) {
    throw PreconditionError("trace has a repeated event: " +
                            event_line(*dup));
  }
  return run_merge_search(e, spec, true, options);
}

namespace {

// A revision class: the events one thread performed under one revision id,
// first occurrences only, in program order.
struct RevClass {
  Agent thread;
  RevisionId rev = 0;
  std::vector<std::size_t> events;  // canonical 1-based positions
  bool committed = false;
};

struct EcInstance {
  std::vector<RevClass> classes;
  std::map<std::size_t, std::size_t> class_of;       // 1-based pos -> class id
  std::vector<std::vector<std::size_t>> chains;      // per-thread class ids
  std::vector<std::size_t> queries;                  // query positions
};

// Builds classes and per-thread chains over the set of events: a repeated
// line denotes the same event, represented by its first position. Returns
// false when some thread leaves a revision and comes back to it: no
// arbitration can keep both orders while treating the revision as one
// block.
bool build_ec_instance(const Trace& e, EcInstance& out) {
  std::map<std::pair<Agent, RevisionId>, std::size_t> class_ids;
  std::map<Agent, std::size_t> chain_of_thread;
  std::map<Event, std::size_t> canon;
  for (const Agent& t : threads_of(e)) {
    chain_of_thread.emplace(t, out.chains.size());
    out.chains.emplace_back();
  }
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (is_forward(e[i])) continue;
    auto rev = revision_of(e[i].action);
    if (!rev) continue;
    if (!canon.emplace(e[i], i + 1).second) continue;
    std::size_t pos = i + 1;
    auto key = std::make_pair(e[i].agent, *rev);
    auto& chain = out.chains[chain_of_thread.at(e[i].agent)];
    std::size_t cid;
    auto it = class_ids.find(key);
    if (it == class_ids.end()) {
      cid = out.classes.size();
      class_ids.emplace(key, cid);
      out.classes.push_back(RevClass{e[i].agent, *rev, {}, false});
      chain.push_back(cid);
    } else {
      cid = it->second;
      if (chain.empty() || chain.back() != cid) return false;
    }
    out.classes[cid].events.push_back(pos);
    out.class_of[pos] = cid;
    if (is_commit(e[i])) out.classes[cid].committed = true;
    if (is_query(e[i])) out.queries.push_back(pos);
  }
  return true;
}

struct EcSearch {
  const Trace& e;
  EcInstance inst;
  BudgetMeter meter;

  std::vector<std::size_t> arb;          // class ids in arbitration order
  std::vector<std::size_t> arb_rank;     // class id -> position in arb
  std::vector<std::size_t> chain_idx;

  explicit EcSearch(const Trace& trace, const CheckOptions& options)
      : e(trace), meter(options.budget) {}

  const Event& at(std::size_t canon_pos) const { return e[canon_pos - 1]; }

  // Applies the updates among the given canonical positions, ordered by
  // (arbitration rank of class, program order inside the class).
  bool query_result_matches(const std::vector<std::size_t>& visible,
                            std::size_t query_pos) const {
    std::vector<std::size_t> ordered = visible;
    std::sort(ordered.begin(), ordered.end(),
              [&](std::size_t a, std::size_t b) {
                std::size_t ca = inst.class_of.at(a);
                std::size_t cb = inst.class_of.at(b);
                if (ca != cb) return arb_rank[ca] < arb_rank[cb];
                return a < b;
              });
    State s;
    for (std::size_t p : ordered) {
      if (is_update(at(p))) {
        s = apply_update(std::move(s),
                         std::get<UpdateAction>(at(p).action).update);
      }
    }
    const auto& qu = std::get<QueryAction>(at(query_pos).action);
    return eval_query(s, qu.var) == qu.result;
  }

  // vis_cross[c'][c] for cross-thread class visibility; same-thread pairs
  // follow the chains and are always included.
  bool queries_ok(const std::vector<std::vector<bool>>& vis_cross) const {
    for (std::size_t qp : inst.queries) {
      std::size_t qc = inst.class_of.at(qp);
      std::vector<std::size_t> visible;
      for (std::size_t c = 0; c < inst.classes.size(); ++c) {
        if (c == qc) continue;
        bool in_view = vis_cross[c][qc] ||
                       (inst.classes[c].thread == inst.classes[qc].thread &&
                        arb_rank[c] < arb_rank[qc]);
        if (!in_view) continue;
        for (std::size_t p : inst.classes[c].events) visible.push_back(p);
      }
      for (std::size_t p : inst.classes[qc].events) {
        if (p < qp) visible.push_back(p);
      }
      if (!query_result_matches(visible, qp)) return false;
    }
    return true;
  }

  bool transitive(const std::vector<std::vector<bool>>& reach) const {
    std::size_t k = inst.classes.size();
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) {
        if (!reach[a][b]) continue;
        for (std::size_t c = 0; c < k; ++c) {
          if (reach[b][c] && !reach[a][c]) return false;
        }
      }
    }
    return true;
  }

  bool search_visibility(OrderCertificate& cert) {
    std::size_t k = inst.classes.size();
    // Same-thread class pairs are ordered by the chains; arbitration already
    // extends them.
    std::vector<std::vector<bool>> base(k, std::vector<bool>(k, false));
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) {
        if (a != b && inst.classes[a].thread == inst.classes[b].thread &&
            arb_rank[a] < arb_rank[b]) {
          base[a][b] = true;
        }
      }
    }
    std::vector<std::pair<std::size_t, std::size_t>> optional_pairs;
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) {
        if (a == b || inst.classes[a].thread == inst.classes[b].thread) {
          continue;
        }
        if (arb_rank[a] < arb_rank[b] && inst.classes[a].committed) {
          optional_pairs.push_back({a, b});
        }
      }
    }
    if (optional_pairs.size() > 24) {
      throw BudgetError("too many cross-thread class pairs to enumerate",
                        optional_pairs.size());
    }
    for (std::uint64_t mask = 0; mask < (1ULL << optional_pairs.size());
         ++mask) {
      meter.tick_node();
      auto vis = base;
      for (std::size_t p = 0; p < optional_pairs.size(); ++p) {
        if (mask & (1ULL << p)) {
          vis[optional_pairs[p].first][optional_pairs[p].second] = true;
        }
      }
      if (!transitive(vis)) continue;
      if (!queries_ok(vis)) continue;
      emit_certificate(vis, cert);
      return true;
    }
    return false;
  }

  void emit_certificate(const std::vector<std::vector<bool>>& vis,
                        OrderCertificate& cert) const {
    std::size_t k = inst.classes.size();
    for (std::size_t a = 0; a < k; ++a) {
      const auto& ea = inst.classes[a].events;
      for (std::size_t b = 0; b < k; ++b) {
        if (a == b) continue;
        bool related = vis[a][b];
        for (std::size_t pa : ea) {
          for (std::size_t pb : inst.classes[b].events) {
            if (arb_rank[a] < arb_rank[b]) {
              cert.arbitration.push_back({pa, pb});
            }
            if (related) cert.visibility.push_back({pa, pb});
          }
        }
      }
      for (std::size_t x = 0; x < ea.size(); ++x) {
        for (std::size_t y = x + 1; y < ea.size(); ++y) {
          cert.visibility.push_back({ea[x], ea[y]});
          cert.arbitration.push_back({ea[x], ea[y]});
        }
      }
    }
    std::sort(cert.visibility.begin(), cert.visibility.end());
    std::sort(cert.arbitration.begin(), cert.arbitration.end());
  }

  bool search_arbitration(OrderCertificate& cert) {
    meter.tick_node();
    if (arb.size() == inst.classes.size()) {
      arb_rank.assign(inst.classes.size(), 0);
      for (std::size_t r = 0; r < arb.size(); ++r) arb_rank[arb[r]] = r;
      return search_visibility(cert);
    }
    for (std::size_t t = 0; t < inst.chains.size(); ++t) {
      if (chain_idx[t] >= inst.chains[t].size()) continue;
      arb.push_back(inst.chains[t][chain_idx[t]]);
      ++chain_idx[t];
      if (search_arbitration(cert)) return true;
      --chain_idx[t];
      arb.pop_back();
    }
    return false;
  }
};

}  // namespace

Verdict check_ec_axiomatic(const Trace& e, CheckOptions options) {
  require_ec_trace(e, "check_ec_axiomatic");
  Verdict v;
  EcSearch search(e, options);
  if (!build_ec_instance(e, search.inst)) {
    v.stats = search.meter.stats();
    return v;
  }
  search.chain_idx.assign(search.inst.chains.size(), 0);
  OrderCertificate cert;
  if (search.search_arbitration(cert)) {
    v.consistent = true;
    v.certificate = std::move(cert);
  }
  v.stats = search.meter.stats();
  return v;
}

namespace {

// Reordering search with optional forward insertions. A query must be
// justified the moment it is placed; its prefix never changes afterwards,
// so failing queries prune the branch. Forwards are only placed after the
// matching commit, and every candidate is used at most once.
struct EcEpistemicSearch {
  std::vector<std::vector<Event>> queues;
  std::vector<Event> candidates;
  std::vector<bool> cand_used;
  BudgetMeter meter;
  bool reversed;

  std::vector<std::size_t> idx;
  std::vector<Event> path;

  EcEpistemicSearch(const Trace& e, const CheckOptions& options)
      : queues(thread_queues(e)),
        meter(options.budget),
        reversed(options.reversed_choice_order) {
    candidates = forwarding_candidates(e);
    cand_used.assign(candidates.size(), false);
    idx.assign(queues.size(), 0);
  }

  bool commit_placed(const ForwardAction& fw) const {
    for (const Event& ev : path) {
      if (is_commit(ev) && ev.agent.name == fw.from &&
          std::get<CommitAction>(ev.action).rev == fw.rev) {
        return true;
      }
    }
    return false;
  }

  bool place(const Event& ev) {
    path.push_back(ev);
    if (is_query(ev)) {
      Trace sofar(path);
      const auto& qu = std::get<QueryAction>(ev.action);
      if (!exists_result_log(sofar, sofar.size(), ev.agent, qu.var,
                             qu.result)) {
        path.pop_back();
        return false;
      }
    }
    return true;
  }

  // The open revision span, if any. After a query or update, the owning
  // thread's next event is still part of the same bundle (its body or its
  // commit), so until the owner runs out of events only the owner may move
  // and no forward may land. A trailing uncommitted revision ends with its
  // owner's queue and stops pinning the trace.
  std::optional<Agent> open_thread() const {
    if (path.empty()) return std::nullopt;
    const Event& last = path.back();
    if (!is_query(last) && !is_update(last)) return std::nullopt;
    for (std::size_t q = 0; q < queues.size(); ++q) {
      if (!queues[q].empty() && queues[q].front().agent == last.agent &&
          idx[q] < queues[q].size()) {
        return last.agent;
      }
    }
    return std::nullopt;
  }

  bool dfs() {
    meter.tick_node();
    bool exhausted = true;
    for (std::size_t q = 0; q < queues.size(); ++q) {
      if (idx[q] < queues[q].size()) exhausted = false;
    }
    if (exhausted) {
      meter.tick_witness();
      return true;
    }
    std::optional<Agent> open = open_thread();
    for (std::size_t n = 0; n < queues.size(); ++n) {
      std::size_t q = reversed ? queues.size() - 1 - n : n;
      if (idx[q] >= queues[q].size()) continue;
      const Event ev = queues[q][idx[q]];
      if (open && ev.agent != *open) continue;
      ++idx[q];
      if (place(ev)) {
        if (dfs()) return true;
        path.pop_back();
      }
      --idx[q];
    }
    if (open) return false;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      std::size_t ci = reversed ? candidates.size() - 1 - c : c;
      if (cand_used[ci]) continue;
      const auto& fw = std::get<ForwardAction>(candidates[ci].action);
      if (!commit_placed(fw)) continue;
      cand_used[ci] = true;
      path.push_back(candidates[ci]);
      if (dfs()) return true;
      path.pop_back();
      cand_used[ci] = false;
    }
    return false;
  }
};

}  // namespace

Verdict check_ec_epistemic(const Trace& e, CheckOptions options) {
  require_ec_trace(e, "check_ec_epistemic");
  Verdict v;
  EcEpistemicSearch search(e, options);
  if (search.dfs()) {
    Trace w(search.path);
    if (!correct_evc(w)) {
      throw Error("internal: search produced a witness that fails recheck");
    }
    v.consistent = true;
    v.witness = std::move(w);
  }
  v.stats = search.meter.stats();
  return v;
}

bool revalidate_witness_sc(const Trace& e, const SpecOracle& spec,
                           const Trace& w) {
  if (threads_of(e) != threads_of(w)) return false;
  for (const Event& ev : w) {
    if (!ev.agent.is_thread()) return false;
  }
  for (const Agent& t : threads_of(e)) {
    if (project(e, t) != project(w, t)) return false;
  }
  return spec_member(spec, w);
}

bool revalidate_witness_lin(const Trace& e, const SpecOracle& spec,
                            const Trace& w) {
  if (find_duplicate_event(w)) return false;
  if (!revalidate_witness_sc(e, spec, w)) return false;
  auto source_view = obs_view(e);
  auto witness_view = obs_view(w);
  return std::includes(witness_view.begin(), witness_view.end(),
                       source_view.begin(), source_view.end());
}

bool revalidate_witness_ec(const Trace& e, const Trace& w) {
  if (threads_of(e) != threads_of(w)) return false;
  for (const Event& ev : w) {
    if (!ev.agent.is_thread() && !is_forward(ev)) return false;
  }
  for (const Agent& t : threads_of(e)) {
    if (project(e, t) != project(w, t)) return false;
  }
  return correct_evc(w);
}

namespace {

struct RawOrders {
  std::set<std::pair<std::size_t, std::size_t>> vis;
  std::set<std::pair<std::size_t, std::size_t>> arb;
};

}  // namespace

bool revalidate_certificate(const Trace& e, const OrderCertificate& c) {
  // The orders live on the set of non-forward events; a repeated line is
  // the event at its first position.
  std::set<std::size_t> positions;
  std::set<Event> seen;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (is_forward(e[i])) continue;
    if (!seen.insert(e[i]).second) continue;
    positions.insert(i + 1);
  }

  RawOrders o{{c.visibility.begin(), c.visibility.end()},
              {c.arbitration.begin(), c.arbitration.end()}};
  auto in_domain = [&](const std::pair<std::size_t, std::size_t>& pr) {
    return positions.count(pr.first) && positions.count(pr.second) &&
           pr.first != pr.second;
  };
  for (const auto& pr : o.vis) {
    if (!in_domain(pr)) return false;
  }
  for (const auto& pr : o.arb) {
    if (!in_domain(pr)) return false;
  }

  // Arbitration: a strict total order.
  for (std::size_t a : positions) {
    for (std::size_t b : positions) {
      if (a == b) continue;
      if (o.arb.count({a, b}) == o.arb.count({b, a})) return false;
    }
  }
  auto is_transitive = [&](const std::set<std::pair<std::size_t, std::size_t>>&
                               rel) {
    for (const auto& [a, b] : rel) {
      for (std::size_t c2 : positions) {
        if (c2 != a && rel.count({b, c2}) && !rel.count({a, c2})) return false;
      }
    }
    return true;
  };
  if (!is_transitive(o.arb) || !is_transitive(o.vis)) return false;

  // Arbitration extends visibility.
  for (const auto& pr : o.vis) {
    if (!o.arb.count(pr)) return false;
  }

  // Program order below visibility.
  for (const Agent& t : threads_of(e)) {
    std::vector<std::size_t> order;
    for (std::size_t p : positions) {
      if (e[p - 1].agent == t) order.push_back(p);
    }
    for (std::size_t x = 0; x < order.size(); ++x) {
      for (std::size_t y = x + 1; y < order.size(); ++y) {
        if (!o.vis.count({order[x], order[y]})) return false;
      }
    }
  }

  // Both orders factor over revision classes.
  auto class_key = [&](std::size_t p) {
    const Event& ev = e[p - 1];
    auto rev = revision_of(ev.action);
    return std::make_pair(ev.agent, rev ? *rev : RevisionId{-1});
  };
  auto factors = [&](const std::set<std::pair<std::size_t, std::size_t>>&
                         rel) {
    for (std::size_t a : positions) {
      for (std::size_t b : positions) {
        if (a == b || class_key(a) == class_key(b)) continue;
        for (std::size_t a2 : positions) {
          if (class_key(a2) != class_key(a) || class_key(a2) == class_key(b)) {
            continue;
          }
          if (rel.count({a, b}) != rel.count({a2, b})) return false;
          if (rel.count({b, a}) != rel.count({b, a2})) return false;
        }
      }
    }
    return true;
  };
  if (!factors(o.vis) || !factors(o.arb)) return false;

  // Uncommitted revisions stay local to their thread.
  std::set<std::pair<Agent, RevisionId>> committed;
  for (const Event& ev : e) {
    if (is_commit(ev)) {
      committed.insert({ev.agent, std::get<CommitAction>(ev.action).rev});
    }
  }
  for (const auto& [a, b] : o.vis) {
    const Event& src = e[a - 1];
    const Event& dst = e[b - 1];
    auto rev = revision_of(src.action);
    if (rev && !committed.count({src.agent, *rev}) && src.agent != dst.agent) {
      return false;
    }
  }

  // Every query applies exactly its visible updates in arbitration order.
  for (std::size_t p : positions) {
    const Event& ev = e[p - 1];
    if (!is_query(ev)) continue;
    std::vector<std::size_t> visible;
    for (std::size_t a : positions) {
      if (o.vis.count({a, p})) visible.push_back(a);
    }
    std::sort(visible.begin(), visible.end(),
              [&](std::size_t x, std::size_t y) {
                return o.arb.count({x, y}) > 0;
              });
    State s;
    for (std::size_t a : visible) {
      if (is_update(e[a - 1])) {
        s = apply_update(std::move(s),
                         std::get<UpdateAction>(e[a - 1].action).update);
      }
    }
    const auto& qu = std::get<QueryAction>(ev.action);
    if (eval_query(s, qu.var) != qu.result) return false;
  }
  return true;
}

namespace {

DetectionReport run_detection(const Trace& e,
                              std::shared_ptr<const SpecOracle> spec,
                              bool observer, const CheckOptions& options) {
  Verdict v = observer ? check_lin(e, *spec, options)
                       : check_sc(e, *spec, options);
  GroupSpec g = GroupSpec::everyone(observer);
  Formula holds = Formula::lnot(
      Formula::knows(g, Formula::lnot(Formula::atom("correct"))));
  EvalOptions eo;
  eo.budget = options.budget;
  Evaluator ev(default_bindings(std::move(spec)), eo);
  DetectionReport report;
  report.consistent = v.consistent;
  report.holds = ev.eval(e, e.size(), holds);
  report.knows_holds = ev.eval(e, e.size(), Formula::knows(g, holds));
  report.knows_violation =
      ev.eval(e, e.size(), Formula::knows(g, Formula::lnot(holds)));
  report.checker_matches_formula = report.consistent == report.holds;
  report.positive_detection = report.holds == report.knows_holds;
  report.negative_detection = !report.holds == report.knows_violation;
  return report;
}

}  // namespace

DetectionReport detect_sc(const Trace& e,
                          std::shared_ptr<const SpecOracle> spec,
                          CheckOptions options) {
  return run_detection(e, std::move(spec), false, options);
}

DetectionReport detect_lin(const Trace& e,
                           std::shared_ptr<const SpecOracle> spec,
                           CheckOptions options) {
  return run_detection(e, std::move(spec), true, options);
}

}  // namespace conch
