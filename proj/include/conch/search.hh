#ifndef CONCH_SEARCH_HH_
#define CONCH_SEARCH_HH_

#include <chrono>
#include <cstdint>
#include <optional>

#include "conch/errors.hh"

namespace conch {

struct SearchStats {
  std::uint64_t nodes = 0;      // search states entered
  std::uint64_t witnesses = 0;  // full candidates produced or examined
};

struct Budget {
  std::uint64_t max_nodes = 50'000'000;
  std::optional<std::chrono::milliseconds> max_time;
};

// Counts search work and trips a BudgetError when a bound is exceeded.
// The time bound is checked once every few thousand nodes.
class BudgetMeter {
 public:
  explicit BudgetMeter(Budget budget = {})
      : budget_(budget), start_(std::chrono::steady_clock::now()) {}

  void tick_node() {
    if (++stats_.nodes > budget_.max_nodes) {
      throw BudgetError("search node budget exceeded", budget_.max_nodes);
    }
    if (budget_.max_time && (stats_.nodes & 0xfff) == 0) {
      auto elapsed = std::chrono::steady_clock::now() - start_;
      if (elapsed > *budget_.max_time) {
        throw BudgetError(
            "search time budget exceeded",
            static_cast<std::uint64_t>(budget_.max_time->count()));
      }
    }
  }

  void tick_witness() { ++stats_.witnesses; }

  const SearchStats& stats() const { return stats_; }

 private:
  Budget budget_;
  SearchStats stats_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace conch

#endif  // CONCH_SEARCH_HH_
