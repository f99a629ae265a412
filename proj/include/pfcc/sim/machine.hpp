#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "pfcc/payload.hpp"
#include "pfcc/sim/lru_set.hpp"
#include "pfcc/sim/sim_params.hpp"
#include "pfcc/types.hpp"

namespace pfcc::sim {

enum class Process : std::uint8_t { Trojan = 0, Spy = 1 };
inline constexpr std::size_t kProcessCount = 2;

struct AccessRecord {
  Tick tick = 0;
  std::string thread;
  PageIndex page = 0;
  FaultKind kind = FaultKind::NoFault;

  friend bool operator==(const AccessRecord&, const AccessRecord&) = default;
};

using AccessTrace = std::vector<AccessRecord>;

// `tick,thread,page,fault_kind`, one line per access.
inline void write_trace(std::ostream& out, std::span<const AccessRecord> trace) {
  for (const auto& r : trace) out << r.tick << ',' << r.thread << ',' << r.page << ',' << to_string(r.kind) << '\n';
}

constexpr FaultKind classify(bool in_cache, bool mapped) {
  if (!in_cache) return FaultKind::HardFault;
  return mapped ? FaultKind::NoFault : FaultKind::SoftFault;
}

struct TouchResult {
  FaultKind kind = FaultKind::NoFault;
  // For hits: when the access completes. For hard faults: when the fetch lands.
  Tick data_ready = 0;
};

// Page cache, per-process page tables and the disk queue of one simulated host.
//
// Fetches land lazily: a page whose fetch is ready by the time it is next looked
// at is inserted into the cache at that point. Queries at any tick therefore see
// a consistent view for that page without a global event queue.
class Machine {
 public:
  Machine(SimParams params, std::uint64_t region_pages, std::uint64_t seed = 0)
      : params_(params), region_pages_(region_pages), seed_(seed), cache_(checked(params).cache_capacity) {
    if (region_pages_ == 0) throw ConfigError("simulated region must have at least one page");
  }

  const SimParams& params() const { return params_; }
  std::uint64_t region_pages() const { return region_pages_; }

  FaultKind classify_access(Process process, PageIndex page, Tick now) const {
    bool in_cache = cache_.contains(page);
    bool is_mapped = mapped(process, page);
    if (!in_cache) {
      auto it = inflight_.find(page);
      if (it != inflight_.end() && it->second.ready <= now) {
        in_cache = true;
        is_mapped = is_mapped || it->second.waiters[index(process)];
      }
    }
    return classify(in_cache, is_mapped);
  }

  Residency residency(PageIndex page, Tick now) const {
    if (cache_.contains(page)) return Residency::Resident;
    auto it = inflight_.find(page);
    return it != inflight_.end() && it->second.ready <= now ? Residency::Resident : Residency::Evicted;
  }

  bool mapped(Process process, PageIndex page) const { return mappings_[index(process)].contains(page); }

  // Cache-advice eviction. Returns how many of the listed pages were dropped.
  std::size_t evict(std::span<const PageIndex> pages, Tick now) {
    std::size_t dropped = 0;
    for (auto page : pages) {
      land(page, now);
      if (!cache_.contains(page)) continue;
      if (params_.advice_mode == AdviceMode::SkipMapped && mapped_anywhere(page)) continue;
      drop(page);
      ++dropped;
    }
    return dropped;
  }

  std::size_t evict(std::initializer_list<PageIndex> pages, Tick now) {
    return evict(std::span<const PageIndex>(pages.begin(), pages.size()), now);
  }

  // Issues one read by `thread` of `process`. Hits map the page and complete after
  // mem_latency. A miss starts (or joins) a disk fetch; the caller decides what the
  // core does meanwhile and calls finish_access once the data is there.
  TouchResult touch(Process process, std::string_view thread, PageIndex page, Tick now) {
    land(page, now);
    const auto kind = classify_access(process, page, now);
    trace_.push_back({now, std::string(thread), page, kind});
    if (kind != FaultKind::HardFault) {
      cache_.touch(page);
      mappings_[index(process)].insert(page);
      return {kind, now + params_.mem_latency};
    }

    auto it = inflight_.find(page);
    if (it != inflight_.end()) {
      it->second.waiters[index(process)] = true;
      return {kind, it->second.ready};
    }
    const Tick ready = now + params_.disk_latency + jitter(page);
    auto& fetch = inflight_[page];
    fetch.ready = ready;
    fetch.waiters[index(process)] = true;
    const auto extra = std::max<std::uint64_t>(params_.readahead, 1) - 1;
    for (PageIndex q = page + 1; q <= page + extra && q < region_pages_; ++q) {
      if (!cache_.contains(q) && !inflight_.contains(q)) inflight_[q].ready = ready;
    }
    return {kind, ready};
  }

  // Completes a hard-faulted access once its data has arrived.
  void finish_access(Process process, PageIndex page, Tick now) {
    land(page, now);
    if (!cache_.contains(page)) insert(page);
    cache_.touch(page);
    mappings_[index(process)].insert(page);
  }

  // Test and setup helper: place a page in the cache without mapping it anywhere.
  void make_resident(PageIndex page) {
    inflight_.erase(page);
    insert(page);
  }

  void unmap(Process process, PageIndex page) { mappings_[index(process)].erase(page); }

  std::size_t cache_size() const { return cache_.size(); }
  std::vector<PageIndex> cached_pages() const { return cache_.keys(); }
  std::size_t inflight_count() const { return inflight_.size(); }

  const AccessTrace& trace() const { return trace_; }
  AccessTrace take_trace() { return std::exchange(trace_, {}); }

 private:
  struct Fetch {
    Tick ready = 0;
    std::array<bool, kProcessCount> waiters{};
  };

  static const SimParams& checked(const SimParams& p) {
    validate(p);
    return p;
  }

  static constexpr std::size_t index(Process p) { return static_cast<std::size_t>(p); }

  bool mapped_anywhere(PageIndex page) const {
    return std::ranges::any_of(mappings_, [&](const auto& m) { return m.contains(page); });
  }

  void land(PageIndex page, Tick now) {
    auto it = inflight_.find(page);
    if (it == inflight_.end() || it->second.ready > now) return;
    const auto waiters = it->second.waiters;
    inflight_.erase(it);
    insert(page);
    for (std::size_t p = 0; p < kProcessCount; ++p) {
      if (waiters[p]) mappings_[p].insert(page);
    }
  }

  void insert(PageIndex page) {
    if (auto victim = cache_.insert(page)) {
      for (auto& m : mappings_) m.erase(*victim);
    }
  }

  void drop(PageIndex page) {
    cache_.erase(page);
    for (auto& m : mappings_) m.erase(page);
  }

  Tick jitter(PageIndex page) {
    if (params_.disk_jitter == 0) return 0;
    const auto n = fetch_count_[page]++;
    return derive_seed(seed_, page, n) % (params_.disk_jitter + 1);
  }

  SimParams params_;
  std::uint64_t region_pages_;
  std::uint64_t seed_;
  LruSet<PageIndex> cache_;
  std::array<std::unordered_set<PageIndex>, kProcessCount> mappings_;
  std::unordered_map<PageIndex, Fetch> inflight_;
  std::unordered_map<PageIndex, std::uint64_t> fetch_count_;
  AccessTrace trace_;
};

}  // namespace pfcc::sim
