// Acceptance checks. One PASS/FAIL/SKIP line per criterion; exit status is the
// number of failures. The live check needs --live (or PFCC_LIVE=1) and a host
// where the capability probe succeeds.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pfcc/harness/report.hpp"
#include "pfcc/harness/sweep.hpp"
#include "pfcc/live/capabilities.hpp"
#include "pfcc/live/runtime.hpp"
#include "pfcc/metrics.hpp"
#include "pfcc/payload.hpp"
#include "pfcc/protocol.hpp"
#include "pfcc/sim/channel_sim.hpp"

namespace fs = std::filesystem;
using namespace pfcc;
using namespace std::chrono_literals;

namespace {

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
  Verdict verdict;
  std::string detail;
};

Outcome pass(std::string d) { return {Verdict::Pass, std::move(d)}; }
Outcome fail(std::string d) { return {Verdict::Fail, std::move(d)}; }

std::string join(const std::vector<double>& xs) {
  std::string s;
  for (auto x : xs) s += (s.empty() ? "" : " ") + harness::fixed(x, 3);
  return s;
}

const std::vector<std::uint64_t> kGaps{4, 8, 16, 32, 64, 128, 256};

Outcome round_trip() {
  const auto start = std::chrono::steady_clock::now();
  sim::SimParams params;
  params.disk_latency = 1000;
  params.mem_latency = 1;
  params.switch_cost = 10;
  const auto payload = random_payload(2024, 1000);
  for (auto gap : kGaps) {
    ChannelConfig cfg;
    cfg.page_gap = gap;
    cfg.pair_offset = default_pair_offset(gap);
    const auto run = sim::run_channel_sim(cfg, params, payload, 2024);
    if (run.report.ber != 0.0) return fail("M=" + std::to_string(gap) + " ber " + harness::fixed(run.report.ber, 4));
  }
  const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (ms >= 1000.0) return fail("took " + harness::fixed(ms, 1) + " ms");
  return pass("1000 bits, 7 page gaps, ber 0, " + harness::fixed(ms, 1) + " ms");
}

Outcome residency_order() {
  const PagePair pair{100, 132, 0};
  int cases = 0;
  for (sim::Tick disk : {10, 100, 1000}) {
    for (sim::Tick sw : {0, 1, 10}) {
      for (bool p1_resident : {false, true}) {
        for (bool p2_resident : {false, true}) {
          sim::SimParams params;
          params.disk_latency = disk;
          params.switch_cost = sw;
          sim::Machine machine(params, 1024);
          if (p1_resident) machine.make_resident(pair.p1);
          if (p2_resident) machine.make_resident(pair.p2);
          const auto got = sim::run_spy_slot(machine, pair, 0).order;
          // The thread reading the evicted page blocks and finishes last.
          ObservedOrder want = ObservedOrder::Ambiguous;
          if (!p1_resident && p2_resident) want = ObservedOrder::T1Last;
          if (p1_resident && !p2_resident) want = ObservedOrder::T2Last;
          ++cases;
          if (got != want) {
            std::ostringstream msg;
            msg << "disk=" << disk << " switch=" << sw << " p1 " << (p1_resident ? "R" : "E") << " p2 "
                << (p2_resident ? "R" : "E") << ": got " << to_string(got) << ", want " << to_string(want);
            return fail(msg.str());
          }
        }
      }
    }
  }
  return pass(std::to_string(cases) + " cases exact");
}

Outcome schedule() {
  ChannelConfig cfg;  // 32 MiB of 4 KiB pages
  if (cfg.region_pages() != 8192) return fail("region is not 8192 pages");
  std::uint64_t checked = 0;
  for (auto gap : kGaps) {
    cfg.page_gap = gap;
    cfg.pair_offset = default_pair_offset(gap);
    PageIndex p1 = cfg.base_page;
    for (SlotIndex k = 0; k < 10'000; ++k) {
      PageIndex p2 = p1 + cfg.pair_offset;
      if (p2 >= cfg.region_pages()) p2 -= cfg.region_pages();
      const auto got = page_pair_for_slot(cfg, k);
      if (got.p1 != p1 || got.p2 != p2 || got.slot != k)
        return fail("M=" + std::to_string(gap) + " k=" + std::to_string(k));
      ++checked;
      p1 += gap;
      if (p1 >= cfg.region_pages()) p1 -= cfg.region_pages();
    }
  }
  return pass(std::to_string(checked) + " slots exact");
}

Outcome region_trend() {
  const auto regions = harness::default_values(harness::SweepVariable::RegionSize);
  std::vector<double> mean(regions.size(), 0.0);
  constexpr int kSeeds = 5;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    harness::SweepSpec spec;
    spec.variable = harness::SweepVariable::RegionSize;
    spec.values = regions;
    spec.seed = static_cast<std::uint64_t>(seed);
    spec.settings.channel.base.payload_bits = 100;
    spec.settings.sim.advice_mode = sim::AdviceMode::SkipMapped;
    spec.settings.sim.disk_jitter = 200;
    const auto result = harness::run_sweep(spec);
    for (std::size_t i = 0; i < regions.size(); ++i) {
      mean[i] += result.means[i].mean_ber / kSeeds;
      if (i > 0 && result.means[i].mean_ber > result.means[i - 1].mean_ber)
        return fail("seed " + std::to_string(seed) + " rises at " + std::to_string(regions[i] / kMiB) + " MiB");
    }
  }
  if (!(mean.back() < mean.front())) return fail("no decrease: " + join(mean));
  return pass("mean ber over 1..32 MiB: " + join(mean));
}

Outcome rate_trend() {
  harness::SweepSpec spec;
  spec.variable = harness::SweepVariable::BitRate;
  spec.values = harness::default_values(harness::SweepVariable::BitRate);  // sync_period 100 ms .. 1 ms
  spec.repetitions = 5;
  spec.seed = 7;
  spec.settings.channel.base.payload_bits = 100;
  spec.settings.sim.disk_latency = 4000;
  spec.settings.sim.disk_jitter = 8000;
  const auto result = harness::run_sweep(spec);
  std::vector<double> ber;
  for (const auto& m : result.means) ber.push_back(m.mean_ber);
  for (std::size_t i = 1; i < ber.size(); ++i)
    if (ber[i] < ber[i - 1]) return fail("ber falls as period shrinks: " + join(ber));
  return pass("mean ber at 10..1000 bps: " + join(ber));
}

Outcome metrics() {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> len(1, 300);
  std::uniform_int_distribution<std::int64_t> ns(1, 10'000'000'000);
  constexpr int kPairs = 100'000;
  for (int i = 0; i < kPairs; ++i) {
    const auto n = len(rng);
    Bits a(n), b(n);
    for (std::size_t j = 0; j < n; ++j) {
      a[j] = rng() & 1;
      b[j] = rng() & 1;
    }
    const Nanos elapsed(ns(rng));
    std::uint64_t errors = 0;
    for (std::size_t j = 0; j < n; ++j) errors += a[j] != b[j] ? 1 : 0;
    const auto m = compute_metrics(a, b, elapsed);
    const double ber = static_cast<double>(errors) / static_cast<double>(n);
    const double bw = static_cast<double>(n) * 1e9 / static_cast<double>(elapsed.count());
    if (m.errors != errors || m.ber != ber || m.bandwidth_bps != bw) return fail("pair " + std::to_string(i));
  }
  return pass(std::to_string(kPairs) + " pairs exact");
}

Outcome determinism() {
  harness::SweepSpec spec;
  spec.variable = harness::SweepVariable::PageGap;
  spec.values = kGaps;
  spec.repetitions = 3;
  spec.seed = 31337;
  spec.settings.sim.advice_mode = sim::AdviceMode::SkipMapped;
  spec.settings.sim.disk_jitter = 500;
  spec.settings.channel.base.region_size = 4 * kMiB;
  auto csv = [&] {
    std::ostringstream out;
    harness::write_csv(out, harness::run_sweep(spec));
    return out.str();
  };
  const auto first = csv();
  const auto second = csv();
  if (first != second) return fail("CSV differs between runs");
  return pass(std::to_string(first.size()) + " bytes identical");
}

Outcome live_check(bool enabled, const std::string& region_arg) {
  if (!enabled) return {Verdict::Skip, "manual check; run with --live"};
  const auto caps = live::probe_capabilities();
  if (!caps.ready() || !caps.switch_on_hard_fault) {
    std::string flags = caps.describe();
    std::replace(flags.begin(), flags.end(), '\n', ' ');
    return fail("capability probe: " + flags);
  }
  ChannelConfig cfg;
  cfg.sync_period = 20ms;
  cfg.guard_offset = 10ms;
  fs::path region = region_arg;
  const bool own_file = region.empty();
  if (own_file) {
    region = fs::temp_directory_path() / ("pfcc-acceptance-" + std::to_string(::getpid()) + ".bin");
    live::create_backing_file(region, cfg.region_size);
  }
  const auto payload = random_payload(42, 100);
  const auto run = live::run_live_transmission(region, cfg, payload);
  if (own_file) fs::remove(region);
  const auto& r = run.receive.report;
  const auto detail = "ber " + harness::fixed(r.ber, 3) + ", indeterminate " + std::to_string(r.indeterminate_slots) +
                      ", overruns " + std::to_string(run.receive.overruns);
  return r.ber <= 0.10 ? pass(detail) : fail(detail);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  bool live = std::getenv("PFCC_LIVE") != nullptr;
  std::string region_file;
  app.add_flag("--live", live, "also run the live-host check");
  app.add_option("--region-file", region_file, "32 MiB backing file for the live check (default: temporary)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"round_trip_ideal_sim", round_trip},
      {"residency_order_oracle", residency_order},
      {"schedule_oracle", schedule},
      {"region_size_trend", region_trend},
      {"bit_rate_trend", rate_trend},
      {"metrics_brute_force", metrics},
      {"sweep_determinism", determinism},
      {"live_round_trip", [&] { return live_check(live, region_file); }},
  };

  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const char* tag = o.verdict == Verdict::Pass ? "PASS" : o.verdict == Verdict::Fail ? "FAIL" : "SKIP";
    std::cout << '[' << tag << "] " << name << ": " << o.detail << std::endl;
    failures += o.verdict == Verdict::Fail;
  }
  return failures;
}
