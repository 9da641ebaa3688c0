// Shared fixture traces. The register ones are two-thread histories of a
// single integer register initialized to 0; the replicated-store ones are
// two-thread revision histories over one variable x.
#pragma once

#include <memory>

#include "conch/speclang.hh"
#include "conch/trace.hh"

namespace fix {

using conch::Trace;
using conch::Value;
namespace ev = conch::events;

// ld(0), ld(1) on t2 with the st(1) recorded after both. Sequentially
// consistent: moving the store between the loads explains the history.
inline Trace sc_reorderable() {
  return Trace({ev::call("t2", "ld", Value{std::int64_t{0}}),
                ev::call("t2", "ld", Value{std::int64_t{1}}),
                ev::call("t1", "st", Value{std::int64_t{1}})});
}

// The sequential arrangement that explains sc_reorderable.
inline Trace sc_witness() {
  return Trace({ev::call("t2", "ld", Value{std::int64_t{0}}),
                ev::call("t1", "st", Value{std::int64_t{1}}),
                ev::call("t2", "ld", Value{std::int64_t{1}})});
}

// As sc_reorderable but the second load returns a never-stored value.
inline Trace sc_impossible() {
  return Trace({ev::call("t2", "ld", Value{std::int64_t{0}}),
                ev::call("t1", "st", Value{std::int64_t{1}}),
                ev::call("t2", "ld", Value{std::int64_t{2}})});
}

// t1 commits x:=0 then x:=1; t2 queries 0 then 1 without any delivery
// recorded. Not a correct replicated-store trace by itself, but some
// forwarding-extended rearrangement is.
inline Trace ec_plain() {
  return Trace({ev::update("t1", 0, "x", 0), ev::commit("t1", 0),
                ev::update("t1", 1, "x", 1), ev::commit("t1", 1),
                ev::query("t2", 0, "x", Value{std::int64_t{0}}),
                ev::commit("t2", 0),
                ev::query("t2", 1, "x", Value{std::int64_t{1}})});
}

// ec_plain with the deliveries made explicit; satisfies the correctness
// predicate as recorded.
inline Trace ec_forwarded() {
  return Trace({ev::update("t1", 0, "x", 0), ev::commit("t1", 0),
                ev::forward("t1", "t2", 0), ev::update("t1", 1, "x", 1),
                ev::commit("t1", 1),
                ev::query("t2", 0, "x", Value{std::int64_t{0}}),
                ev::commit("t2", 0), ev::forward("t1", "t2", 1),
                ev::query("t2", 1, "x", Value{std::int64_t{1}})});
}

// Load completes, returning 1, strictly before the store of 1 is invoked.
// Sequentially consistent but not linearizable.
inline Trace lin_blocked() {
  return Trace({ev::inv("t2", "ld"), ev::ret("t2", "ld", Value{std::int64_t{1}}),
                ev::inv("t1", "st", Value{std::int64_t{1}}),
                ev::ret("t1", "st", Value{true})});
}

// Load and store overlap in real time; linearizable via lin_sequential.
inline Trace lin_overlapping() {
  return Trace({ev::inv("t2", "ld"), ev::inv("t1", "st", Value{std::int64_t{1}}),
                ev::ret("t2", "ld", Value{std::int64_t{1}}),
                ev::ret("t1", "st", Value{true})});
}

// The sequential arrangement: store completes, then the load runs.
inline Trace lin_sequential() {
  return Trace({ev::inv("t1", "st", Value{std::int64_t{1}}),
                ev::ret("t1", "st", Value{true}), ev::inv("t2", "ld"),
                ev::ret("t2", "ld", Value{std::int64_t{1}})});
}

// Single-thread store history whose query result is unattainable.
inline Trace ec_unsatisfiable() {
  return Trace({ev::update("t1", 0, "x", 0), ev::commit("t1", 0),
                ev::query("t1", 1, "x", Value{std::int64_t{5}})});
}

inline std::shared_ptr<const conch::SpecOracle> register_spec() {
  return conch::make_spec("register");
}

}  // namespace fix
