#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "pfcc/harness/config_file.hpp"
#include "pfcc/live/capabilities.hpp"
#include "pfcc/live/runtime.hpp"
#include "pfcc/metrics.hpp"
#include "pfcc/payload.hpp"
#include "pfcc/sim/channel_sim.hpp"

namespace pfcc::harness {

enum class SweepVariable { PayloadBits, PageGap, RegionSize, BitRate };
enum class Backend { Sim, Live };

constexpr std::string_view to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::PayloadBits: return "payload_bits";
    case SweepVariable::PageGap: return "page_gap";
    case SweepVariable::RegionSize: return "region_size";
    case SweepVariable::BitRate: return "bit_rate";
  }
  return "?";
}

inline SweepVariable parse_sweep_variable(std::string_view text) {
  for (auto v : {SweepVariable::PayloadBits, SweepVariable::PageGap, SweepVariable::RegionSize, SweepVariable::BitRate})
    if (text == to_string(v)) return v;
  throw ConfigError("unknown sweep variable '" + std::string(text) + "'");
}

inline Backend parse_backend(std::string_view text) {
  if (text == "sim") return Backend::Sim;
  if (text == "live") return Backend::Live;
  throw ConfigError("backend must be sim or live, got '" + std::string(text) + "'");
}

// region_size values are bytes; bit_rate values are bits per second.
inline std::vector<std::uint64_t> default_values(SweepVariable v) {
  switch (v) {
    case SweepVariable::PayloadBits: return {20, 50, 100, 200, 300, 400, 500};
    case SweepVariable::PageGap: return {4, 8, 16, 32, 64, 128, 256};
    case SweepVariable::RegionSize: return {1 * kMiB, 2 * kMiB, 4 * kMiB, 8 * kMiB, 16 * kMiB, 32 * kMiB};
    case SweepVariable::BitRate: return {10, 20, 50, 100, 200, 500, 1000};
  }
  return {};
}

struct SweepSpec {
  SweepVariable variable = SweepVariable::PayloadBits;
  std::vector<std::uint64_t> values;
  std::uint64_t repetitions = 1;
  Settings settings;
  Backend backend = Backend::Sim;
  std::uint64_t seed = 1;
  std::filesystem::path region_file;  // live only
  live::SpyOptions spy;               // live only
  unsigned threads = 0;               // sim only; 0 picks the hardware count
};

struct SweepRow {
  SweepVariable variable = SweepVariable::PayloadBits;
  std::uint64_t value = 0;
  std::uint64_t repetition = 0;
  std::uint64_t seed = 0;
  ChannelConfig config;
  double ber = 0.0;
  double bandwidth_bps = 0.0;
  std::uint64_t indeterminate_slots = 0;
};

struct ValueSummary {
  std::uint64_t value = 0;
  double mean_ber = 0.0;
  double mean_bandwidth_bps = 0.0;
};

struct SweepResult {
  SweepVariable variable = SweepVariable::PayloadBits;
  std::vector<SweepRow> rows;  // value-major, then repetition
  std::vector<ValueSummary> means;
};

// Channel configuration of one sweep cell.
inline ChannelConfig cell_config(const SweepSpec& spec, std::uint64_t value) {
  ChannelSettings ch = spec.settings.channel;
  switch (spec.variable) {
    case SweepVariable::PayloadBits: ch.base.payload_bits = value; break;
    case SweepVariable::PageGap: ch.base.page_gap = value; break;
    case SweepVariable::RegionSize: ch.base.region_size = value; break;
    case SweepVariable::BitRate:
      if (value == 0 || value > 1'000'000'000) throw ConfigError("bit_rate must be in [1, 1e9] bits/s");
      ch.base.sync_period = Nanos(1'000'000'000 / static_cast<Nanos::rep>(value));
      break;
  }
  const auto cfg = ch.resolve();
  validate(cfg);
  if (cfg.payload_bits == 0) throw ConfigError("payload_bits must be positive");
  return cfg;
}

inline std::uint64_t cell_seed(std::uint64_t base, std::size_t value_index, std::uint64_t repetition) {
  return derive_seed(base, value_index, repetition);
}

namespace detail {

inline SweepRow summarize(const SweepSpec& spec, std::uint64_t value, std::uint64_t rep, std::uint64_t seed,
                          const ChannelConfig& cfg, const TransmissionReport& report) {
  return {spec.variable, value, rep, seed, cfg, report.ber, report.bandwidth_bps, report.indeterminate_slots};
}

inline void compute_means(SweepResult& result, const std::vector<std::uint64_t>& values, std::uint64_t reps) {
  for (std::size_t v = 0; v < values.size(); ++v) {
    ValueSummary s{values[v], 0.0, 0.0};
    for (std::uint64_t r = 0; r < reps; ++r) {
      const auto& row = result.rows[v * reps + r];
      s.mean_ber += row.ber;
      s.mean_bandwidth_bps += row.bandwidth_bps;
    }
    s.mean_ber /= static_cast<double>(reps);
    s.mean_bandwidth_bps /= static_cast<double>(reps);
    result.means.push_back(s);
  }
}

}  // namespace detail

// Runs every (value, repetition) cell. Sim cells run in parallel and land in a
// fixed order, so the result depends only on the spec. Live cells run one after
// another against spec.region_file, after a capability probe.
inline SweepResult run_sweep(const SweepSpec& spec) {
  if (spec.values.empty()) throw ConfigError("sweep needs at least one value");
  if (spec.repetitions == 0) throw ConfigError("sweep needs at least one repetition");
  sim::validate(spec.settings.sim);

  struct Cell {
    std::size_t index;
    std::uint64_t value;
    std::uint64_t rep;
    std::uint64_t seed;
    ChannelConfig cfg;
  };
  std::vector<Cell> cells;
  for (std::size_t v = 0; v < spec.values.size(); ++v) {
    const auto cfg = cell_config(spec, spec.values[v]);
    for (std::uint64_t r = 0; r < spec.repetitions; ++r)
      cells.push_back({cells.size(), spec.values[v], r, cell_seed(spec.seed, v, r), cfg});
  }

  SweepResult result;
  result.variable = spec.variable;
  result.rows.resize(cells.size());

  if (spec.backend == Backend::Live) {
    if (spec.region_file.empty()) throw ConfigError("live sweep needs a region file");
    const auto caps = live::probe_capabilities();
    if (!caps.ready()) throw SetupError("live backend unavailable:\n" + caps.describe());
    for (const auto& c : cells) {
      const auto payload = random_payload(c.seed, c.cfg.payload_bits);
      auto options = spec.spy;
      options.seed = c.seed;
      const auto run = live::run_live_transmission(spec.region_file, c.cfg, payload, options);
      result.rows[c.index] = detail::summarize(spec, c.value, c.rep, c.seed, c.cfg, run.receive.report);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      for (std::size_t i = next++; i < cells.size(); i = next++) {
        try {
          const auto& c = cells[i];
          const auto payload = random_payload(c.seed, c.cfg.payload_bits);
          const auto run = sim::run_channel_sim(c.cfg, spec.settings.sim, payload, c.seed);
          result.rows[i] = detail::summarize(spec, c.value, c.rep, c.seed, c.cfg, run.report);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    const unsigned hw = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
    const auto n_threads = std::min<std::size_t>(hw, cells.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  detail::compute_means(result, spec.values, spec.repetitions);
  return result;
}

struct Calibration {
  SweepResult sweep;
  std::uint64_t best_page_gap = 0;
};

// Page-gap sweep; picks the gap with the lowest mean BER, the larger gap on a tie.
inline Calibration calibrate_page_gap(SweepSpec spec) {
  spec.variable = SweepVariable::PageGap;
  if (spec.values.empty()) spec.values = default_values(SweepVariable::PageGap);
  Calibration cal{run_sweep(spec), 0};
  const ValueSummary* best = nullptr;
  for (const auto& s : cal.sweep.means) {
    if (!best || s.mean_ber < best->mean_ber || (s.mean_ber == best->mean_ber && s.value > best->value)) best = &s;
  }
  cal.best_page_gap = best->value;
  return cal;
}

}  // namespace pfcc::harness
