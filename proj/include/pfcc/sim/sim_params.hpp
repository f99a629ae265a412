#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "pfcc/types.hpp"

namespace pfcc::sim {

using Tick = std::uint64_t;

enum class EvictionPolicy : std::uint8_t { Lru };

// How the simulated kernel treats a "don't need" hint.
//  Ideal:      the page is always dropped and every mapping of it is torn down.
//  SkipMapped: pages still mapped by some process are kept (Linux behaviour), so
//              pages the spy touched on an earlier wrap stay resident.
enum class AdviceMode : std::uint8_t { Ideal, SkipMapped };

struct SimParams {
  std::uint64_t cache_capacity = 1 << 16;
  Tick disk_latency = 1000;
  Tick mem_latency = 1;
  Tick switch_cost = 10;
  EvictionPolicy eviction_policy = EvictionPolicy::Lru;
  // Pages brought in per hard fault, starting at the faulting page. 0 behaves like 1.
  std::uint64_t readahead = 1;
  AdviceMode advice_mode = AdviceMode::Ideal;
  // Extra disk latency drawn uniformly from [0, disk_jitter] per fetch.
  Tick disk_jitter = 0;
  // Wall-clock length of one tick, used to place slots on the tick axis.
  std::uint64_t tick_ns = 1000;

  friend bool operator==(const SimParams&, const SimParams&) = default;
};

inline void validate(const SimParams& p) {
  auto fail = [](const std::string& what) { throw ConfigError("invalid sim params: " + what); };
  if (p.mem_latency < 1) fail("mem_latency must be >= 1");
  if (p.disk_latency <= p.mem_latency) fail("disk_latency must exceed mem_latency");
  if (p.cache_capacity < 2) fail("cache_capacity must be >= 2");
  if (p.tick_ns == 0) fail("tick_ns must be positive");
}

constexpr std::string_view to_string(AdviceMode mode) {
  return mode == AdviceMode::Ideal ? "ideal" : "skip_mapped";
}

constexpr std::string_view to_string(EvictionPolicy) { return "lru"; }

}  // namespace pfcc::sim
