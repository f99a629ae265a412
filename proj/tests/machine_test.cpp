#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "pfcc/sim/machine.hpp"

using namespace pfcc;
using namespace pfcc::sim;

namespace {

SimParams params_with(std::uint64_t capacity = 64) {
  SimParams p;
  p.cache_capacity = capacity;
  p.disk_latency = 100;
  p.mem_latency = 1;
  p.switch_cost = 10;
  return p;
}

}  // namespace

TEST(Classify, TruthTable) {
  EXPECT_EQ(classify(true, true), FaultKind::NoFault);
  EXPECT_EQ(classify(true, false), FaultKind::SoftFault);
  EXPECT_EQ(classify(false, false), FaultKind::HardFault);
  EXPECT_EQ(classify(false, true), FaultKind::HardFault);
}

TEST(Machine, ResidentMappedIsNoFault) {
  Machine m(params_with(), 32);
  m.make_resident(3);
  EXPECT_EQ(m.classify_access(Process::Spy, 3, 0), FaultKind::SoftFault);
  m.touch(Process::Spy, "t1", 3, 0);
  EXPECT_EQ(m.classify_access(Process::Spy, 3, 1), FaultKind::NoFault);
  EXPECT_EQ(m.classify_access(Process::Trojan, 3, 1), FaultKind::SoftFault);
}

TEST(Machine, AbsentPageIsHardFault) {
  Machine m(params_with(), 32);
  EXPECT_EQ(m.classify_access(Process::Spy, 5, 0), FaultKind::HardFault);
  m.make_resident(5);
  m.evict({5}, 0);
  EXPECT_EQ(m.classify_access(Process::Spy, 5, 0), FaultKind::HardFault);
}

TEST(Machine, EvictEmptySetChangesNothing) {
  Machine m(params_with(), 32);
  m.make_resident(1);
  m.make_resident(2);
  EXPECT_EQ(m.evict(std::span<const PageIndex>{}, 0), 0u);
  EXPECT_EQ(m.cached_pages(), (std::vector<PageIndex>{1, 2}));
}

TEST(Machine, EvictEverythingEmptiesCache) {
  Machine m(params_with(), 32);
  for (PageIndex p : {1, 2, 3}) m.make_resident(p);
  m.touch(Process::Spy, "t1", 2, 0);
  EXPECT_EQ(m.evict({1, 2, 3, 9}, 0), 3u);
  EXPECT_EQ(m.cache_size(), 0u);
  EXPECT_FALSE(m.mapped(Process::Spy, 2));
}

TEST(Machine, SkipMappedAdviceKeepsMappedPages) {
  auto p = params_with();
  p.advice_mode = AdviceMode::SkipMapped;
  Machine m(p, 32);
  m.make_resident(1);
  m.make_resident(2);
  m.touch(Process::Spy, "t1", 2, 0);
  EXPECT_EQ(m.evict({1, 2}, 0), 1u);
  EXPECT_EQ(m.residency(1, 0), Residency::Evicted);
  EXPECT_EQ(m.residency(2, 0), Residency::Resident);
  m.unmap(Process::Spy, 2);
  EXPECT_EQ(m.evict({2}, 0), 1u);
}

TEST(Machine, HitCompletesAfterMemLatency) {
  Machine m(params_with(), 32);
  m.make_resident(4);
  const auto r = m.touch(Process::Spy, "t1", 4, 50);
  EXPECT_EQ(r.kind, FaultKind::SoftFault);
  EXPECT_EQ(r.data_ready, 51u);
}

TEST(Machine, MissLandsAfterDiskLatency) {
  Machine m(params_with(), 32);
  const auto r = m.touch(Process::Trojan, "trojan", 4, 50);
  EXPECT_EQ(r.kind, FaultKind::HardFault);
  EXPECT_EQ(r.data_ready, 150u);
  EXPECT_EQ(m.residency(4, 149), Residency::Evicted);
  EXPECT_EQ(m.residency(4, 150), Residency::Resident);
  // The trojan's page lands mapped for the trojan only.
  EXPECT_EQ(m.classify_access(Process::Trojan, 4, 150), FaultKind::NoFault);
  EXPECT_EQ(m.classify_access(Process::Spy, 4, 150), FaultKind::SoftFault);
}

TEST(Machine, SecondReaderJoinsInflightFetch) {
  Machine m(params_with(), 32);
  m.touch(Process::Trojan, "trojan", 4, 0);
  const auto r = m.touch(Process::Spy, "t2", 4, 30);
  EXPECT_EQ(r.kind, FaultKind::HardFault);
  EXPECT_EQ(r.data_ready, 100u);
  EXPECT_EQ(m.inflight_count(), 1u);
}

TEST(Machine, ReadaheadBringsNeighbours) {
  auto p = params_with();
  p.readahead = 4;
  Machine m(p, 6);
  m.touch(Process::Spy, "t1", 3, 0);
  EXPECT_EQ(m.residency(4, 100), Residency::Resident);
  EXPECT_EQ(m.residency(5, 100), Residency::Resident);
  EXPECT_EQ(m.residency(2, 100), Residency::Evicted);
  EXPECT_EQ(m.inflight_count(), 3u);  // clamped at region end
  EXPECT_EQ(m.classify_access(Process::Spy, 4, 100), FaultKind::SoftFault);
}

TEST(Machine, ReadaheadZeroFetchesOnlyTheFaultingPage) {
  auto p = params_with();
  p.readahead = 0;
  Machine m(p, 8);
  m.touch(Process::Spy, "t1", 3, 0);
  EXPECT_EQ(m.inflight_count(), 1u);
}

TEST(Machine, JitterIsBoundedAndSeeded) {
  auto p = params_with();
  p.disk_jitter = 50;
  Machine a(p, 1024, 7);
  Machine b(p, 1024, 7);
  bool varied = false;
  for (PageIndex page = 0; page < 200; ++page) {
    const auto ra = a.touch(Process::Spy, "t", page, 0).data_ready;
    const auto rb = b.touch(Process::Spy, "t", page, 0).data_ready;
    EXPECT_EQ(ra, rb);
    EXPECT_GE(ra, 100u);
    EXPECT_LE(ra, 150u);
    varied |= ra != 100;
  }
  EXPECT_TRUE(varied);
}

TEST(Machine, CapacityNeverExceeded) {
  std::mt19937_64 rng(99);
  for (int round = 0; round < 50; ++round) {
    auto p = params_with(2 + rng() % 6);
    p.readahead = 1 + rng() % 3;
    p.advice_mode = rng() % 2 ? AdviceMode::Ideal : AdviceMode::SkipMapped;
    Machine m(p, 40, rng());
    Tick now = 0;
    for (int step = 0; step < 400; ++step) {
      now += rng() % 60;
      const PageIndex page = rng() % 40;
      const auto process = rng() % 2 ? Process::Spy : Process::Trojan;
      switch (rng() % 4) {
        case 0: m.evict({page}, now); break;
        case 1: m.finish_access(process, page, now); break;
        case 2: m.unmap(process, page); break;
        default: m.touch(process, "x", page, now); break;
      }
      ASSERT_LE(m.cache_size(), p.cache_capacity);
      for (PageIndex q = 0; q < 40; ++q) {
        // A mapping never outlives its page-cache entry.
        if (m.mapped(Process::Spy, q) || m.mapped(Process::Trojan, q)) {
          ASSERT_EQ(m.residency(q, now), Residency::Resident);
        }
      }
    }
  }
}

TEST(Machine, TraceExportFormat) {
  Machine m(params_with(), 32);
  m.make_resident(1);
  m.touch(Process::Spy, "t1", 1, 5);
  m.touch(Process::Spy, "t2", 2, 6);
  std::ostringstream out;
  write_trace(out, m.trace());
  EXPECT_EQ(out.str(), "5,t1,1,soft\n6,t2,2,hard\n");
}

TEST(Machine, RejectsInvalidParams) {
  auto p = params_with();
  p.disk_latency = 1;
  EXPECT_THROW(Machine(p, 8), ConfigError);
  p = params_with(1);
  EXPECT_THROW(Machine(p, 8), ConfigError);
  p = params_with();
  p.mem_latency = 0;
  EXPECT_THROW(Machine(p, 8), ConfigError);
  EXPECT_THROW(Machine(params_with(), 0), ConfigError);
}
