#include "conch/indist.hh"

#include <algorithm>

#include "conch/errors.hh"

namespace conch {

AgentGroup AgentGroup::all_threads(const Trace& e, bool observer) {
  AgentGroup g;
  for (const Agent& t : threads_of(e)) g.threads.insert(t);
  g.include_observer = observer;
  return g;
}

bool thread_indist(const Trace& e, std::size_t i, const Trace& f,
                   std::size_t j, const Agent& t) {
  return project(prefix(e, i), t) == project(prefix(f, j), t);
}

bool obs_leq(const Trace& e, std::size_t i, const Trace& f, std::size_t j) {
  auto mine = obs_view(e, i);
  auto theirs = obs_view(f, j);
  return std::includes(theirs.begin(), theirs.end(), mine.begin(), mine.end());
}

bool group_indist(const Trace& e, std::size_t i, const Trace& f,
                  std::size_t j, const AgentGroup& g) {
  for (const Agent& t : g.threads) {
    if (!t.is_thread()) {
      throw PreconditionError("agent groups may only contain threads");
    }
    if (!thread_indist(e, i, f, j, t)) return false;
  }
  if (g.include_observer && !obs_leq(e, i, f, j)) return false;
  return true;
}

WitnessUniverse universe_of(const Trace& source, const AgentGroup& group) {
  return WitnessUniverse{source, group, {}, 0};
}

struct WitnessStream::Impl {
  struct Choice {
    enum class K { Queue, Free, Cand };
    K kind;
    std::size_t index;  // queue or candidate index
    Event ev;
  };
  struct Frame {
    std::vector<Choice> choices;
    std::size_t next = 0;
  };

  std::vector<std::vector<Event>> queues;
  std::map<Event, int> free_left;
  std::vector<Event> candidates;
  std::size_t max_ins = 0;
  bool observer = false;
  std::map<Event, std::vector<Event>> required_before;

  std::vector<std::size_t> consumed;
  std::size_t queued_left = 0;
  std::size_t free_total = 0;
  std::vector<bool> cand_used;
  std::size_t ins_used = 0;
  std::map<Event, int> emitted;
  std::vector<Event> out;

  std::vector<Frame> frames;
  bool started = false;
  std::shared_ptr<BudgetMeter> meter;

  Impl(WitnessUniverse u, std::shared_ptr<BudgetMeter> m)
      : meter(std::move(m)) {
    const Trace& src = u.source;
    for (const Agent& t : u.group.threads) {
      if (!t.is_thread()) {
        throw PreconditionError("agent groups may only contain threads");
      }
    }
    for (const Agent& t : threads_of(src)) {
      Trace p = project(src, t);
      if (u.group.threads.count(t)) {
        queues.push_back(p.events());
        queued_left += p.size();
      } else {
        for (const Event& ev : p) {
          ++free_left[ev];
          ++free_total;
        }
      }
    }
    consumed.assign(queues.size(), 0);
    std::set<Event> cand_set(u.env_candidates.begin(), u.env_candidates.end());
    for (const Event& c : cand_set) {
      if (c.agent.is_thread()) {
        throw PreconditionError("insertion candidates must be env events");
      }
      candidates.push_back(c);
    }
    cand_used.assign(candidates.size(), false);
    max_ins = std::min(u.max_env_insertions, candidates.size());
    observer = u.group.include_observer;
    if (observer) {
      for (const auto& [r, in] : obs_view(src)) {
        required_before[in].push_back(r);
      }
    }
  }

  bool required_done() const { return queued_left == 0 && free_total == 0; }

  // An invocation may appear only after every return the source completed
  // before it; the constraint anchors to first occurrences.
  bool obs_allows(const Event& ev) const {
    if (!observer || !is_inv(ev) || emitted.count(ev)) return true;
    auto it = required_before.find(ev);
    if (it == required_before.end()) return true;
    for (const Event& r : it->second) {
      if (!emitted.count(r)) return false;
    }
    return true;
  }

  std::vector<Choice> legal_choices() const {
    std::vector<Choice> out_choices;
    for (std::size_t qi = 0; qi < queues.size(); ++qi) {
      if (consumed[qi] < queues[qi].size()) {
        const Event& head = queues[qi][consumed[qi]];
        if (obs_allows(head)) {
          out_choices.push_back({Choice::K::Queue, qi, head});
        }
      }
    }
    for (const auto& [ev, left] : free_left) {
      if (left > 0 && obs_allows(ev)) {
        out_choices.push_back({Choice::K::Free, 0, ev});
      }
    }
    if (ins_used < max_ins) {
      for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
        if (!cand_used[ci]) {
          out_choices.push_back({Choice::K::Cand, ci, candidates[ci]});
        }
      }
    }
    return out_choices;
  }

  void apply(const Choice& c) {
    switch (c.kind) {
      case Choice::K::Queue:
        ++consumed[c.index];
        --queued_left;
        break;
      case Choice::K::Free:
        --free_left[c.ev];
        --free_total;
        break;
      case Choice::K::Cand:
        cand_used[c.index] = true;
        ++ins_used;
        break;
    }
    out.push_back(c.ev);
    ++emitted[c.ev];
  }

  void undo(const Choice& c) {
    switch (c.kind) {
      case Choice::K::Queue:
        --consumed[c.index];
        ++queued_left;
        break;
      case Choice::K::Free:
        ++free_left[c.ev];
        ++free_total;
        break;
      case Choice::K::Cand:
        cand_used[c.index] = false;
        --ins_used;
        break;
    }
    out.pop_back();
    auto it = emitted.find(c.ev);
    if (--it->second == 0) emitted.erase(it);
  }

  std::optional<Trace> next() {
    if (!started) {
      started = true;
      meter->tick_node();
      frames.push_back({legal_choices(), 0});
      if (required_done()) {
        meter->tick_witness();
        return Trace(out);
      }
    }
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.next > 0) undo(f.choices[f.next - 1]);
      if (f.next >= f.choices.size()) {
        frames.pop_back();
        continue;
      }
      const Choice c = f.choices[f.next++];
      apply(c);
      meter->tick_node();
      frames.push_back({legal_choices(), 0});
      if (required_done()) {
        meter->tick_witness();
        return Trace(out);
      }
    }
    return std::nullopt;
  }
};

WitnessStream::WitnessStream(WitnessUniverse u,
                             std::shared_ptr<BudgetMeter> meter)
    : impl_(std::make_unique<Impl>(std::move(u), std::move(meter))) {}

WitnessStream::~WitnessStream() = default;
WitnessStream::WitnessStream(WitnessStream&&) noexcept = default;
WitnessStream& WitnessStream::operator=(WitnessStream&&) noexcept = default;

std::optional<Trace> WitnessStream::next() { return impl_->next(); }

std::vector<Trace> enumerate_witnesses(const WitnessUniverse& u,
                                       Budget budget) {
  auto meter = std::make_shared<BudgetMeter>(budget);
  WitnessStream stream(u, meter);
  std::vector<Trace> all;
  while (auto w = stream.next()) all.push_back(std::move(*w));
  return all;
}

}  // namespace conch
