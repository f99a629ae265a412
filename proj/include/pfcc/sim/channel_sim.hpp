#pragma once

#include <algorithm>
#include <cstdint>

#include "pfcc/channel_config.hpp"
#include "pfcc/metrics.hpp"
#include "pfcc/protocol.hpp"
#include "pfcc/sim/machine.hpp"
#include "pfcc/sim/scheduler.hpp"

namespace pfcc::sim {

struct SpySlot {
  ObservedOrder order = ObservedOrder::Ambiguous;
  AccessTrace trace;
  ThreadOutcome t1;
  ThreadOutcome t2;
  Tick end = 0;
};

// Two spy threads on one core, t1 reading pair.p1 and t2 reading pair.p2, t1
// spawned first. The slot is ambiguous unless exactly one of them hard-faulted.
inline SpySlot run_spy_slot(Machine& machine, const PagePair& pair, Tick start) {
  const auto trace_begin = machine.trace().size();
  SingleCoreScheduler core(machine);
  const auto t1 = core.spawn({"t1", Process::Spy, {pair.p1}});
  const auto t2 = core.spawn({"t2", Process::Spy, {pair.p2}});

  SpySlot slot;
  slot.end = core.run(start);
  slot.t1 = core.outcome(t1);
  slot.t2 = core.outcome(t2);
  slot.trace.assign(machine.trace().begin() + static_cast<std::ptrdiff_t>(trace_begin), machine.trace().end());

  const bool t1_hard = slot.t1.hard_faults > 0;
  const bool t2_hard = slot.t2.hard_faults > 0;
  if (t1_hard != t2_hard)
    slot.order = slot.t1.finish_rank > slot.t2.finish_rank ? ObservedOrder::T1Last : ObservedOrder::T2Last;
  return slot;
}

struct SimRun {
  TransmissionReport report;
  AccessTrace trace;
  std::uint64_t sender_overruns = 0;
  std::uint64_t receiver_overruns = 0;
};

// Whole transmission on one simulated host. Slot k opens at k * sync_period; the
// trojan evicts the pair and reads encode_target, the spy probes guard_offset
// later.
//
// The trojan's read blocks, so a trojan still waiting on the previous slot's
// fetch starts late and the lag carries over. The spy launches its accessors at
// every receiver deadline; a previous slot still in flight at that point is
// counted as an overrun and left to finish in the background. Whichever side acts
// first in wall time is applied to the machine first.
inline SimRun run_channel_sim(const ChannelConfig& cfg, const SimParams& params, const Bits& payload,
                              std::uint64_t seed = 0) {
  validate(cfg);
  Machine machine(params, cfg.region_pages(), seed);
  const auto tick_ns = static_cast<Nanos::rep>(params.tick_ns);
  const Tick period = std::max<Tick>(1, static_cast<Tick>(cfg.sync_period.count() / tick_ns));
  const Tick guard = static_cast<Tick>(cfg.guard_offset.count() / tick_ns);

  SimRun run;
  Tick sender_free = 0;
  Tick spy_free = 0;
  std::vector<SlotRecord> records;
  records.reserve(payload.size());

  for (SlotIndex k = 0; k < payload.size(); ++k) {
    const auto pair = page_pair_for_slot(cfg, k);
    const Tick slot_start = k * period;
    const Tick send_at = std::max(slot_start, sender_free);
    const Tick probe_at = slot_start + guard;
    run.sender_overruns += send_at > slot_start;
    run.receiver_overruns += spy_free > probe_at;

    auto send = [&] {
      machine.evict({pair.p1, pair.p2}, send_at);
      const auto r = machine.touch(Process::Trojan, "trojan", encode_target(payload[k] != 0, pair), send_at);
      sender_free = r.kind == FaultKind::HardFault ? r.data_ready + params.mem_latency : r.data_ready;
    };

    SpySlot spy;
    if (probe_at < send_at) {
      spy = run_spy_slot(machine, pair, probe_at);
      send();
    } else {
      send();
      spy = run_spy_slot(machine, pair, probe_at);
    }
    spy_free = spy.end;
    records.push_back({k, pair, spy.order, decode_from_order(spy.order)});
  }

  run.trace = machine.take_trace();
  std::ranges::stable_sort(run.trace, {}, &AccessRecord::tick);
  const auto elapsed = cfg.sync_period * static_cast<Nanos::rep>(payload.size());
  run.report = make_report(payload, std::move(records), elapsed, seed);
  return run;
}

}  // namespace pfcc::sim
