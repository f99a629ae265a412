#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <optional>
#include <string>
#include <system_error>
#include <thread>

#include "pfcc/live/observation.hpp"
#include "pfcc/live/platform.hpp"
#include "pfcc/live/region.hpp"
#include "pfcc/live/runtime.hpp"

namespace pfcc::live {

struct BackendCapabilities {
  bool shared_readonly_mapping = false;
  bool cache_advice_eviction = false;
  bool cpu_affinity = false;
  bool switch_on_hard_fault = false;
  bool residency_probe = false;

  // The hard-fault switch and the residency probe are informational.
  bool ready() const { return shared_readonly_mapping && cache_advice_eviction && cpu_affinity; }

  std::string describe() const {
    auto line = [](const char* name, bool ok) { return std::string(name) + ": " + (ok ? "yes" : "no") + "\n"; };
    return line("shared_readonly_mapping", shared_readonly_mapping) +
           line("cache_advice_eviction", cache_advice_eviction) + line("cpu_affinity", cpu_affinity) +
           line("switch_on_hard_fault", switch_on_hard_fault) + line("residency_probe", residency_probe) +
           "ready: " + (ready() ? "yes" : "no") + "\n";
  }
};

namespace detail {

inline bool probe_affinity() {
  bool ok = false;
  try {
    std::thread t([&] {
      const auto cpu = first_allowed_cpu();
      ok = cpu && pin_current_thread(*cpu);
    });
    t.join();
  } catch (const std::system_error&) {
    return false;
  }
  return ok;
}

// One spy slot by hand: page 2 evicted, page 3 resident. On a host that switches
// away from a thread blocked on a hard fault, t1 finishes last.
inline bool probe_switch(const SharedRegion& region, bool can_verify) {
  int agree = 0;
  constexpr int kTrials = 3;
  for (int i = 0; i < kTrials; ++i) {
    region.read_page(3);
    region.release_mapping(2);
    region.release_mapping(3);
    region.advise_evict(2);
    if (can_verify && (region.resident(2).value_or(true) || !region.resident(3).value_or(false))) continue;

    std::atomic<std::uint64_t> ticket{0};
    SlotObservation obs;
    bool launched = true;
    std::thread spy([&] {
      const auto cpu = first_allowed_cpu();
      if (!cpu || !pin_current_thread(*cpu)) {
        launched = false;
        return;
      }
      auto accessor = [&](PageIndex page, std::uint64_t& start, std::uint64_t& end) {
        start = ticket.fetch_add(1);
        region.read_page(page);
        end = ticket.fetch_add(1);
      };
      std::thread t1(accessor, PageIndex{2}, std::ref(obs.t1_start), std::ref(obs.t1_end));
      std::thread t2(accessor, PageIndex{3}, std::ref(obs.t2_start), std::ref(obs.t2_end));
      t1.join();
      t2.join();
    });
    spy.join();
    if (!launched) return false;
    agree += order_from_observation(obs) == ObservedOrder::T1Last;
  }
  return agree * 2 > kTrials;
}

}  // namespace detail

// Each flag comes from a small experiment on a scratch file in `scratch_dir`.
// Nothing throws; a failed experiment leaves its flag false.
inline BackendCapabilities probe_capabilities(const std::filesystem::path& scratch_dir =
                                                  std::filesystem::temp_directory_path()) {
  BackendCapabilities caps;
  caps.cpu_affinity = detail::probe_affinity();

  const auto page_size = static_cast<std::uint64_t>(::sysconf(_SC_PAGESIZE));
  ChannelConfig cfg;
  cfg.page_size = page_size;
  cfg.region_size = 16 * page_size;
  cfg.page_gap = 4;
  cfg.pair_offset = 2;

  const auto scratch = scratch_dir / ("pfcc-probe-" + std::to_string(::getpid()) + ".bin");
  try {
    create_backing_file(scratch, cfg.region_size);
    const auto region = SharedRegion::open(scratch, cfg);
    region.read_page(0);
    region.read_page(1);
    caps.shared_readonly_mapping = true;

    const auto before = region.resident(0);
    caps.residency_probe = before.has_value() && *before;

    const auto outcome = evict_pair(region, PagePair{0, 1, 0});
    caps.cache_advice_eviction = outcome.advice_ok && (caps.residency_probe ? outcome.check == EvictionCheck::Confirmed
                                                                            : true);
    if (caps.cache_advice_eviction && caps.cpu_affinity)
      caps.switch_on_hard_fault = detail::probe_switch(region, caps.residency_probe);
  } catch (const std::exception&) {
  }
  std::error_code ec;
  std::filesystem::remove(scratch, ec);
  return caps;
}

}  // namespace pfcc::live
