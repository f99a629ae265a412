#pragma once

#include <chrono>
#include <cstdint>
#include <string>

#include "pfcc/types.hpp"

namespace pfcc {

using Nanos = std::chrono::nanoseconds;

inline constexpr std::uint64_t kMiB = 1024 * 1024;

constexpr std::uint64_t default_pair_offset(std::uint64_t page_gap) { return page_gap / 2; }
constexpr Nanos default_guard_offset(Nanos sync_period) { return sync_period / 2; }

// Every knob of the channel shared by sender, receiver and both backends.
// Distances are in pages, times in nanoseconds.
struct ChannelConfig {
  std::uint64_t page_size = 4096;
  std::uint64_t region_size = 32 * kMiB;
  std::uint64_t page_gap = 64;
  std::uint64_t pair_offset = default_pair_offset(64);
  PageIndex base_page = 0;
  Nanos sync_period = std::chrono::milliseconds(10);
  Nanos guard_offset = default_guard_offset(std::chrono::milliseconds(10));
  std::uint64_t payload_bits = 100;

  std::uint64_t region_pages() const { return page_size == 0 ? 0 : region_size / page_size; }

  friend bool operator==(const ChannelConfig&, const ChannelConfig&) = default;
};

// Throws ConfigError naming the first violated constraint.
inline void validate(const ChannelConfig& cfg) {
  auto fail = [](const std::string& what) { throw ConfigError("invalid channel config: " + what); };
  if (cfg.page_size == 0) fail("page_size must be positive");
  if (cfg.region_size == 0 || cfg.region_size % cfg.page_size != 0)
    fail("region_size must be a positive multiple of page_size");
  const auto pages = cfg.region_pages();
  if (cfg.page_gap == 0 || cfg.page_gap > pages) fail("page_gap must be in [1, region_pages]");
  if (cfg.pair_offset == 0 || cfg.pair_offset >= cfg.page_gap)
    fail("pair_offset must satisfy 0 < pair_offset < page_gap");
  if (cfg.base_page >= pages) fail("base_page must be below region_pages");
  if (cfg.sync_period <= Nanos::zero()) fail("sync_period must be positive");
  if (cfg.guard_offset <= Nanos::zero() || cfg.guard_offset >= cfg.sync_period)
    fail("guard_offset must satisfy 0 < guard_offset < sync_period");
}

}  // namespace pfcc
