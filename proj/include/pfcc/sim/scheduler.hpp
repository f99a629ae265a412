#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "pfcc/sim/machine.hpp"

namespace pfcc::sim {

struct ThreadSpec {
  std::string name;
  Process process = Process::Spy;
  std::vector<PageIndex> accesses;
};

struct ThreadOutcome {
  Tick completion = 0;
  // 0 for the first thread to finish, 1 for the next, ...
  std::size_t finish_rank = 0;
  std::size_t hard_faults = 0;
  std::size_t soft_faults = 0;
};

// One uninterrupted stretch of a thread on the core, [start, end). `blocked` when
// it ended in a hard fault rather than thread completion.
struct Dispatch {
  Tick start = 0;
  Tick end = 0;
  std::size_t thread = 0;
  bool blocked = false;
};

// Single core, run-to-block. A thread keeps the core through hits and soft faults;
// a hard fault parks it until its fetch lands and hands the core to the next
// runnable thread. Switching to a different thread than the one that last ran
// costs switch_cost ticks. Ready threads are served first come, first served, in
// spawn order initially.
class SingleCoreScheduler {
 public:
  explicit SingleCoreScheduler(Machine& machine) : machine_(machine) {}

  std::size_t spawn(ThreadSpec spec) {
    threads_.push_back({std::move(spec)});
    return threads_.size() - 1;
  }

  // Runs every spawned thread to completion; returns the tick the last one finished.
  Tick run(Tick start) {
    const auto& params = machine_.params();
    std::deque<std::size_t> ready;
    for (std::size_t i = 0; i < threads_.size(); ++i) ready.push_back(i);

    struct Parked {
      Tick until;
      std::size_t thread;
    };
    std::vector<Parked> parked;
    std::optional<std::size_t> last_ran;
    std::size_t finished = 0;
    Tick now = start;

    auto wake = [&] {
      std::ranges::stable_sort(parked, {}, &Parked::until);
      auto split = std::ranges::find_if(parked, [&](const Parked& p) { return p.until > now; });
      for (auto it = parked.begin(); it != split; ++it) ready.push_back(it->thread);
      parked.erase(parked.begin(), split);
    };

    while (finished < threads_.size()) {
      wake();
      if (ready.empty()) {
        now = std::ranges::min(parked, {}, &Parked::until).until;
        continue;
      }
      const auto id = ready.front();
      ready.pop_front();
      if (last_ran && *last_ran != id) now += params.switch_cost;
      last_ran = id;

      auto& t = threads_[id];
      const Tick slice_start = now;
      if (t.waiting) {
        machine_.finish_access(t.spec.process, t.spec.accesses[t.next], now);
        now += params.mem_latency;
        t.waiting = false;
        ++t.next;
      }
      while (t.next < t.spec.accesses.size()) {
        const auto r = machine_.touch(t.spec.process, t.spec.name, t.spec.accesses[t.next], now);
        if (r.kind == FaultKind::HardFault) {
          ++t.outcome.hard_faults;
          t.waiting = true;
          parked.push_back({r.data_ready, id});
          break;
        }
        if (r.kind == FaultKind::SoftFault) ++t.outcome.soft_faults;
        now = r.data_ready;
        ++t.next;
      }
      dispatches_.push_back({slice_start, now, id, t.waiting});
      if (!t.waiting) {
        t.outcome.completion = now;
        t.outcome.finish_rank = finished++;
      }
    }
    return now;
  }

  std::size_t thread_count() const { return threads_.size(); }
  const ThreadOutcome& outcome(std::size_t id) const { return threads_.at(id).outcome; }
  const std::vector<Dispatch>& dispatches() const { return dispatches_; }

 private:
  struct Thread {
    ThreadSpec spec;
    std::size_t next = 0;
    bool waiting = false;
    ThreadOutcome outcome{};
  };

  Machine& machine_;
  std::vector<Thread> threads_;
  std::vector<Dispatch> dispatches_;
};

}  // namespace pfcc::sim
