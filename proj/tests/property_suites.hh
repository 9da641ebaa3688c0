// Randomized invariant suites shared by the property and acceptance
// binaries. Every suite is deterministic in (cases, seed) and returns
// counts instead of asserting, so callers decide how to report.
#pragma once

#include <algorithm>
#include <cstdint>
#include <future>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "conch/checkers.hh"
#include "conch/indist.hh"
#include "conch/reference.hh"
#include "conch/speclang.hh"
#include "conch/trace.hh"
#include "conch/trace_io.hh"
#include "fixtures.hh"

namespace props {

struct PropertyReport {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::vector<std::string> notes;

  bool passed(std::size_t floor) const {
    return failures == 0 && cases >= floor;
  }
};

inline void record_failure(PropertyReport& r, const conch::Trace& e,
                           const std::string& what) {
  ++r.failures;
  if (r.notes.size() < 3) {
    std::ostringstream os;
    os << what << "\n" << conch::print_trace(e);
    r.notes.push_back(os.str());
  }
}

// Re-interleaves e uniformly among the arrangements that keep every agent's
// own subsequence, which is exactly what group indistinguishability fixes.
inline conch::Trace shuffle_merge(const conch::Trace& e,
                                  std::mt19937_64& rng) {
  std::map<conch::Agent, std::vector<conch::Event>> queues;
  std::vector<conch::Agent> keys;
  for (const conch::Event& x : e) {
    auto [it, fresh] = queues.try_emplace(x.agent);
    if (fresh) keys.push_back(x.agent);
    it->second.push_back(x);
  }
  std::vector<std::size_t> head(keys.size(), 0);
  std::vector<conch::Event> out;
  out.reserve(e.size());
  while (out.size() < e.size()) {
    std::vector<std::size_t> open;
    for (std::size_t k = 0; k < keys.size(); ++k) {
      if (head[k] < queues[keys[k]].size()) open.push_back(k);
    }
    std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
    std::size_t k = open[pick(rng)];
    out.push_back(queues[keys[k]][head[k]++]);
  }
  return conch::Trace(std::move(out));
}

inline PropertyReport prop_indist_equivalence(std::size_t cases,
                                              std::uint64_t seed) {
  PropertyReport r{"group indistinguishability is an equivalence"};
  auto corpus = conch::random_register_split_traces(cases, 8, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  for (const conch::Trace& a : corpus) {
    ++r.cases;
    auto g = conch::AgentGroup::all_threads(a);
    conch::Trace b = shuffle_merge(a, rng);
    conch::Trace c = shuffle_merge(a, rng);
    bool ok =
        conch::group_indist(a, a.size(), a, a.size(), g) &&  // reflexive
        conch::group_indist(a, a.size(), b, b.size(), g) &&
        conch::group_indist(b, b.size(), a, a.size(), g) &&  // symmetric
        conch::group_indist(b, b.size(), c, c.size(), g) &&
        conch::group_indist(a, a.size(), c, c.size(), g);    // transitive
    if (ok && !a.empty()) {
      std::vector<conch::Event> d(a.begin(), a.end());
      d.push_back(conch::events::ret(d.front().agent.name, "zz"));
      conch::Trace defaced(std::move(d));
      ok = !conch::group_indist(a, a.size(), defaced, defaced.size(), g);
    }
    if (!ok) record_failure(r, a, "equivalence law violated");
  }
  return r;
}

inline PropertyReport prop_obs_preorder(std::size_t cases,
                                        std::uint64_t seed) {
  PropertyReport r{"observer refinement is a preorder"};
  // Fixed asymmetry exhibit: the overlapping-call history refines the
  // blocked one, never the other way around.
  {
    const conch::Trace lo = fix::lin_overlapping();
    const conch::Trace lb = fix::lin_blocked();
    if (!conch::obs_leq(lo, lo.size(), lb, lb.size()) ||
        conch::obs_leq(lb, lb.size(), lo, lo.size())) {
      record_failure(r, lb, "expected one-directional refinement");
    }
  }
  auto corpus = conch::random_register_split_traces(cases, 10, seed);
  std::mt19937_64 rng(seed ^ 0xdeadbeefcafef00dull);
  for (const conch::Trace& e : corpus) {
    ++r.cases;
    std::uniform_int_distribution<std::size_t> d(0, e.size());
    std::size_t i = d(rng), j = d(rng), k = d(rng);
    if (i > j) std::swap(i, j);
    if (j > k) std::swap(j, k);
    if (i > j) std::swap(i, j);
    conch::Trace p = conch::prefix(e, i);
    bool ok = conch::obs_leq(e, e.size(), e, e.size()) &&  // reflexive
              conch::obs_leq(e, i, e, j) &&                // prefix-monotone
              conch::obs_leq(e, j, e, k) &&
              conch::obs_leq(e, i, e, k) &&                // transitive
              conch::obs_leq(p, i, e, i) &&  // a prefix carries the same view
              conch::obs_leq(e, i, p, i);
    if (!ok) record_failure(r, e, "preorder law violated");
  }
  return r;
}

inline PropertyReport prop_witness_counts(std::size_t cases,
                                          std::uint64_t seed) {
  PropertyReport r{"witness counts match the multinomial"};
  std::mt19937_64 rng(seed ^ 0x0123456789abcdefull);
  std::int64_t uniq = 0;
  for (std::size_t n = 0; n < cases; ++n) {
    ++r.cases;
    std::size_t nthreads = 1 + rng() % 3;
    std::vector<conch::Event> src;
    std::uint64_t expected = 1;
    std::size_t placed = 0;
    for (std::size_t t = 0; t < nthreads; ++t) {
      std::size_t count = 1 + rng() % 3;
      // choose(placed + count, count) more merges after adding this thread
      for (std::size_t s = 1; s <= count; ++s) {
        expected = expected * (placed + s) / s;
      }
      placed += count;
      std::string name = "t" + std::to_string(t + 1);
      for (std::size_t s = 0; s < count; ++s) {
        src.push_back(
            conch::events::call(name, "op", conch::Value{std::int64_t{uniq++}}));
      }
    }
    conch::Trace e(std::move(src));
    auto universe =
        conch::universe_of(e, conch::AgentGroup::all_threads(e));
    std::vector<conch::Trace> all = conch::enumerate_witnesses(universe);
    std::set<conch::Trace> dedup(all.begin(), all.end());
    if (all.size() != expected || dedup.size() != expected) {
      record_failure(r, e, "count " + std::to_string(all.size()) +
                            " expected " + std::to_string(expected));
    }
  }
  return r;
}

inline PropertyReport prop_klog_monotone(std::size_t cases,
                                         std::uint64_t seed) {
  PropertyReport r{"individual logs grow monotonically"};
  auto corpus = conch::random_ec_traces(cases, 10, seed);
  for (const conch::Trace& e : corpus) {
    ++r.cases;
    // The generator promises legal deliveries; it does not serialize
    // revision blocks, so only the forwarding discipline is a given.
    bool ok = conch::forwards_after_commit_ok(e);
    for (const conch::Agent& t : conch::threads_of(e)) {
      std::set<conch::Action> prev;
      for (std::size_t i = 1; ok && i <= e.size(); ++i) {
        std::set<conch::Action> cur = conch::k_log(e, i, t);
        ok = std::includes(cur.begin(), cur.end(), prev.begin(), prev.end());
        if (ok && e[i - 1].agent == t) ok = cur.count(e[i - 1].action) > 0;
        prev = std::move(cur);
      }
    }
    if (!ok) record_failure(r, e, "log shrank or lost an own action");
  }
  return r;
}

// Single-thread revision history in which every action is distinct, so the
// canonical log is the only valid one among all subsequences.
inline conch::Trace distinct_action_history(std::mt19937_64& rng,
                                            std::int64_t& uniq) {
  std::vector<conch::Event> out;
  std::size_t revs = 1 + rng() % 3;
  for (conch::RevisionId rev = 0; rev < static_cast<conch::RevisionId>(revs);
       ++rev) {
    if (out.size() + 2 > 8) break;
    std::size_t acts = 1 + rng() % 2;
    for (std::size_t s = 0; s < acts && out.size() + 1 < 8; ++s) {
      if (rng() % 2) {
        out.push_back(conch::events::update("t1", rev, "x", ++uniq));
      } else {
        out.push_back(
            conch::events::query("t1", rev, "x", conch::Value{++uniq}));
      }
    }
    out.push_back(conch::events::commit("t1", rev));
  }
  return conch::Trace(std::move(out));
}

inline PropertyReport prop_log_uniqueness(std::size_t cases,
                                          std::uint64_t seed) {
  PropertyReport r{"exactly one subsequence is a valid log"};
  std::mt19937_64 rng(seed ^ 0x5bd1e995bd1e995ull);
  std::int64_t uniq = 0;
  const conch::Agent t1 = conch::Agent::thread("t1");
  for (std::size_t n = 0; n < cases; ++n) {
    ++r.cases;
    conch::Trace e = distinct_action_history(rng, uniq);
    std::uniform_int_distribution<std::size_t> d(0, e.size());
    std::size_t i = d(rng);
    std::vector<conch::Action> acts = conch::act_seq(conch::prefix(e, i));
    conch::Log canonical = conch::canonical_log(e, i, t1);
    std::size_t valid = 0;
    bool canonical_seen = false;
    for (std::uint64_t mask = 0; mask < (1ull << i); ++mask) {
      conch::Log l;
      for (std::size_t b = 0; b < i; ++b) {
        if (mask & (1ull << b)) l.push_back(acts[b]);
      }
      if (conch::valid_log(e, i, t1, l)) {
        ++valid;
        canonical_seen = canonical_seen || l == canonical;
      }
    }
    if (valid != 1 || !canonical_seen) {
      record_failure(r, e, "valid logs at cut " + std::to_string(i) + ": " +
                            std::to_string(valid));
    }
  }
  return r;
}

inline PropertyReport prop_lin_implies_sc(std::size_t cases,
                                          std::uint64_t seed) {
  PropertyReport r{"linearizable histories are sequentially consistent"};
  auto corpus = conch::random_register_split_traces(cases, 8, seed);
  auto spec = conch::make_spec("register");
  std::size_t linearizable = 0;
  for (const conch::Trace& e : corpus) {
    ++r.cases;
    if (!conch::check_lin(e, *spec).consistent) continue;
    ++linearizable;
    if (!conch::check_sc(e, *spec).consistent) {
      record_failure(r, e, "linearizable but not sequentially consistent");
    }
  }
  r.notes.push_back(std::to_string(linearizable) + " of " +
                    std::to_string(r.cases) + " were linearizable");
  return r;
}

inline PropertyReport prop_revalidation(std::size_t cases,
                                        std::uint64_t seed) {
  PropertyReport r{"emitted witnesses and certificates revalidate"};
  auto spec = conch::make_spec("register");
  std::size_t n_sc = cases * 2 / 5, n_lin = cases * 2 / 5;
  std::size_t n_ax = cases * 3 / 20;
  std::size_t n_epi = cases - n_sc - n_lin - n_ax;

  for (const conch::Trace& e :
       conch::random_register_split_traces(n_sc, 8, seed)) {
    ++r.cases;
    auto v = conch::check_sc(e, *spec);
    if (!v.consistent) continue;
    if (!conch::revalidate_witness_sc(e, *spec, *v.witness)) {
      record_failure(r, e, "sequential witness rejected");
    }
  }
  for (const conch::Trace& e :
       conch::random_register_split_traces(n_lin, 8, seed + 1)) {
    ++r.cases;
    auto v = conch::check_lin(e, *spec);
    if (!v.consistent) continue;
    if (!conch::revalidate_witness_lin(e, *spec, *v.witness)) {
      record_failure(r, e, "linearization witness rejected");
    }
  }
  for (const conch::Trace& e : conch::random_ec_traces(n_ax, 7, seed + 2)) {
    ++r.cases;
    auto v = conch::check_ec_axiomatic(e);
    if (!v.consistent) continue;
    bool ok = conch::revalidate_certificate(e, *v.certificate);
    if (ok && !v.certificate->arbitration.empty()) {
      conch::OrderCertificate broken = *v.certificate;
      broken.arbitration.clear();
      ok = !conch::revalidate_certificate(e, broken);
    }
    if (!ok) record_failure(r, e, "order certificate rejected");
  }
  for (const conch::Trace& e : conch::random_ec_traces(n_epi, 6, seed + 3)) {
    ++r.cases;
    auto v = conch::check_ec_epistemic(e);
    if (!v.consistent) continue;
    if (!conch::revalidate_witness_ec(e, *v.witness)) {
      record_failure(r, e, "delivery witness rejected");
    }
  }
  return r;
}

inline PropertyReport prop_order_independence(std::size_t cases,
                                              std::uint64_t seed) {
  PropertyReport r{"verdicts do not depend on enumeration order"};
  auto spec = conch::make_spec("register");
  conch::CheckOptions fwd, rev;
  rev.reversed_choice_order = true;
  std::size_t n_sc = cases / 2, n_lin = cases * 3 / 10;
  std::size_t n_ax = cases / 10;
  std::size_t n_epi = cases - n_sc - n_lin - n_ax;

  for (const conch::Trace& e :
       conch::random_register_split_traces(n_sc, 8, seed)) {
    ++r.cases;
    if (conch::check_sc(e, *spec, fwd).consistent !=
        conch::check_sc(e, *spec, rev).consistent) {
      record_failure(r, e, "sequential-consistency verdict flipped");
    }
  }
  for (const conch::Trace& e :
       conch::random_register_split_traces(n_lin, 8, seed + 1)) {
    ++r.cases;
    if (conch::check_lin(e, *spec, fwd).consistent !=
        conch::check_lin(e, *spec, rev).consistent) {
      record_failure(r, e, "linearizability verdict flipped");
    }
  }
  for (const conch::Trace& e : conch::random_ec_traces(n_ax, 7, seed + 2)) {
    ++r.cases;
    if (conch::check_ec_axiomatic(e, fwd).consistent !=
        conch::check_ec_axiomatic(e, rev).consistent) {
      record_failure(r, e, "order-pair verdict flipped");
    }
  }
  for (const conch::Trace& e : conch::random_ec_traces(n_epi, 5, seed + 3)) {
    ++r.cases;
    if (conch::check_ec_epistemic(e, fwd).consistent !=
        conch::check_ec_epistemic(e, rev).consistent) {
      record_failure(r, e, "delivery-witness verdict flipped");
    }
  }
  return r;
}

inline std::vector<PropertyReport> run_property_suites(std::size_t per_suite,
                                                       std::uint64_t seed) {
  std::vector<std::future<PropertyReport>> futures;
  futures.push_back(std::async(std::launch::async, prop_indist_equivalence,
                               per_suite, seed));
  futures.push_back(
      std::async(std::launch::async, prop_obs_preorder, per_suite, seed + 1));
  futures.push_back(std::async(std::launch::async, prop_witness_counts,
                               per_suite, seed + 2));
  futures.push_back(
      std::async(std::launch::async, prop_klog_monotone, per_suite, seed + 3));
  futures.push_back(std::async(std::launch::async, prop_log_uniqueness,
                               per_suite, seed + 4));
  futures.push_back(std::async(std::launch::async, prop_lin_implies_sc,
                               per_suite, seed + 5));
  futures.push_back(
      std::async(std::launch::async, prop_revalidation, per_suite, seed + 6));
  futures.push_back(std::async(std::launch::async, prop_order_independence,
                               per_suite, seed + 7));
  std::vector<PropertyReport> out;
  out.reserve(futures.size());
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

}  // namespace props
