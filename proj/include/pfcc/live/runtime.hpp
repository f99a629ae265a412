#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <vector>

#include "pfcc/channel_config.hpp"
#include "pfcc/live/observation.hpp"
#include "pfcc/live/platform.hpp"
#include "pfcc/live/region.hpp"
#include "pfcc/metrics.hpp"
#include "pfcc/protocol.hpp"

namespace pfcc::live {

enum class EvictionCheck { Confirmed, StillResident, Unverified };

constexpr std::string_view to_string(EvictionCheck c) {
  switch (c) {
    case EvictionCheck::Confirmed: return "confirmed";
    case EvictionCheck::StillResident: return "still_resident";
    case EvictionCheck::Unverified: return "unverified";
  }
  return "?";
}

struct EvictOutcome {
  bool advice_ok = true;
  int error = 0;
  EvictionCheck check = EvictionCheck::Unverified;
};

// Drops our own page-table entries first: the page cache keeps a page that is
// still mapped somewhere, and the trojan's previous read mapped one of these.
inline EvictOutcome evict_pair(const SharedRegion& region, const PagePair& pair) {
  EvictOutcome out;
  region.release_mapping(pair.p1);
  region.release_mapping(pair.p2);
  for (const auto page : {pair.p1, pair.p2}) {
    if (const int err = region.advise_evict(page); err != 0) {
      out.advice_ok = false;
      out.error = err;
    }
  }
  const auto r1 = region.resident(pair.p1);
  const auto r2 = region.resident(pair.p2);
  if (!r1 || !r2) {
    out.check = EvictionCheck::Unverified;
  } else {
    out.check = (*r1 || *r2) ? EvictionCheck::StillResident : EvictionCheck::Confirmed;
  }
  return out;
}

enum class Accessor { Trojan, T1, T2 };

constexpr std::string_view to_string(Accessor a) {
  switch (a) {
    case Accessor::Trojan: return "trojan";
    case Accessor::T1: return "t1";
    case Accessor::T2: return "t2";
  }
  return "?";
}

struct AccessEntry {
  SlotIndex slot = 0;
  Accessor who = Accessor::Trojan;
  PageIndex page = 0;
};

struct SenderSlot {
  SlotIndex slot = 0;
  PagePair pair;
  PageIndex target = 0;
  EvictOutcome eviction;
  bool overrun = false;
  bool sent = false;
};

struct SenderLog {
  std::vector<SenderSlot> slots;
  std::vector<AccessEntry> accesses;
  std::uint64_t overruns = 0;
  std::uint64_t unconfirmed = 0;
  std::uint64_t skipped = 0;
};

// Trojan loop. A slot whose advice call fails is skipped; a late slot still runs.
inline SenderLog trojan_send(const SharedRegion& region, const ChannelConfig& cfg, const Bits& payload, Nanos epoch) {
  validate(cfg);
  SenderLog log;
  if (payload.empty()) return log;
  region.advise_evict_all();
  log.slots.reserve(payload.size());

  for (SlotIndex k = 0; k < payload.size(); ++k) {
    SenderSlot s;
    s.slot = k;
    s.pair = page_pair_for_slot(cfg, k);
    s.target = encode_target(payload[k] != 0, s.pair);
    s.overrun = sleep_until(slot_deadline(cfg, epoch, k, Role::Sender));
    log.overruns += s.overrun;

    s.eviction = evict_pair(region, s.pair);
    if (s.eviction.advice_ok) {
      log.unconfirmed += s.eviction.check != EvictionCheck::Confirmed;
      region.read_page(s.target);
      log.accesses.push_back({k, Accessor::Trojan, s.target});
      s.sent = true;
    } else {
      ++log.skipped;
    }
    log.slots.push_back(s);
  }
  return log;
}

struct SpyOptions {
  std::optional<int> cpu;  // defaults to the first CPU in the current mask
  // Drop the spy's own mappings of the pair after each slot. Off by default: the
  // trojan's eviction is expected to clear them.
  bool release_mappings = false;
  std::uint64_t seed = 0;  // copied into the report
};

struct ReceiveResult {
  TransmissionReport report;
  std::vector<SlotObservation> observations;
  std::vector<AccessEntry> accesses;
  std::uint64_t overruns = 0;
  int cpu = -1;
};

// Spy loop. Pins the calling thread, so run it on a thread that may stay pinned.
// Decoding looks only at the ticket counter.
inline ReceiveResult spy_receive(const SharedRegion& region, const ChannelConfig& cfg, std::uint64_t n_bits,
                                 Nanos epoch, const std::optional<Bits>& expected = std::nullopt,
                                 const SpyOptions& options = {}) {
  validate(cfg);
  if (expected && expected->size() != n_bits)
    throw ConfigError("expected payload has " + std::to_string(expected->size()) + " bits, receiving " +
                      std::to_string(n_bits));
  ReceiveResult result;
  if (n_bits == 0) {
    result.report.seed = options.seed;
    return result;
  }

  const auto cpu = options.cpu ? options.cpu : first_allowed_cpu();
  if (!cpu || !pin_current_thread(*cpu))
    throw SetupError("cannot restrict the spy to a single CPU: " + errno_text(errno));
  result.cpu = *cpu;

  std::vector<SlotRecord> records;
  records.reserve(n_bits);
  result.observations.reserve(n_bits);
  for (SlotIndex k = 0; k < n_bits; ++k) {
    const auto pair = page_pair_for_slot(cfg, k);
    result.overruns += sleep_until(slot_deadline(cfg, epoch, k, Role::Receiver));

    std::atomic<std::uint64_t> ticket{0};
    SlotObservation obs;
    obs.slot = k;
    auto accessor = [&](PageIndex page, std::uint64_t& start, std::uint64_t& end) {
      start = ticket.fetch_add(1);
      region.read_page(page);
      end = ticket.fetch_add(1);
    };
    try {
      std::thread t1(accessor, pair.p1, std::ref(obs.t1_start), std::ref(obs.t1_end));
      std::thread t2(accessor, pair.p2, std::ref(obs.t2_start), std::ref(obs.t2_end));
      t1.join();
      t2.join();
    } catch (const std::system_error& e) {
      throw TransmissionAbort(std::string("accessor thread launch failed: ") + e.what());
    }
    result.accesses.push_back({k, Accessor::T1, pair.p1});
    result.accesses.push_back({k, Accessor::T2, pair.p2});

    const auto order = order_from_observation(obs);
    records.push_back({k, pair, order, decode_from_order(order)});
    result.observations.push_back(obs);
    if (options.release_mappings) {
      region.release_mapping(pair.p1);
      region.release_mapping(pair.p2);
    }
  }

  const auto modeled = cfg.sync_period * static_cast<Nanos::rep>(n_bits);
  const auto elapsed = std::max(realtime_now() - epoch, modeled);
  result.report = expected ? make_report(*expected, std::move(records), elapsed, options.seed)
                           : make_unreferenced_report(std::move(records), elapsed, options.seed);
  return result;
}

struct LiveRun {
  ReceiveResult receive;
  Nanos epoch{0};
};

// Runs trojan and spy on one host: the trojan in a forked child, the spy on a
// fresh thread of this process. Call with no other threads running.
inline LiveRun run_live_transmission(const std::filesystem::path& region_file, const ChannelConfig& cfg,
                                     const Bits& payload, const SpyOptions& options = {},
                                     Nanos lead = std::chrono::milliseconds(200)) {
  validate(cfg);
  // Open once up front so setup problems surface in the parent.
  { SharedRegion probe = SharedRegion::open(region_file, cfg); }

  LiveRun run;
  run.epoch = realtime_now() + lead;
  const pid_t child = ::fork();
  if (child < 0) throw SetupError("fork failed: " + errno_text(errno));
  if (child == 0) {
    int status = 0;
    try {
      const auto region = SharedRegion::open(region_file, cfg);
      const auto log = trojan_send(region, cfg, payload, run.epoch);
      status = log.skipped == 0 ? 0 : 4;
    } catch (...) {
      status = 3;
    }
    ::_exit(status);
  }

  std::exception_ptr failure;
  std::thread spy([&] {
    try {
      const auto region = SharedRegion::open(region_file, cfg);
      run.receive = spy_receive(region, cfg, payload.size(), run.epoch, payload, options);
    } catch (...) {
      failure = std::current_exception();
    }
  });
  spy.join();

  int status = 0;
  while (::waitpid(child, &status, 0) < 0 && errno == EINTR) {
  }
  if (failure) std::rethrow_exception(failure);
  if (!WIFEXITED(status) || WEXITSTATUS(status) == 3)
    throw TransmissionAbort("trojan process failed");
  if (WEXITSTATUS(status) == 4) throw TransmissionAbort("trojan skipped slots after failed eviction advice");
  return run;
}

}  // namespace pfcc::live
