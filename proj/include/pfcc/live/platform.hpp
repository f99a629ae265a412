#pragma once

#include <sched.h>
#include <time.h>

#include <cerrno>
#include <optional>

#include "pfcc/channel_config.hpp"

namespace pfcc::live {

inline Nanos realtime_now() {
  timespec ts{};
  ::clock_gettime(CLOCK_REALTIME, &ts);
  return Nanos(static_cast<Nanos::rep>(ts.tv_sec) * 1'000'000'000 + ts.tv_nsec);
}

// Sleeps until an absolute wall-clock instant. Returns true if the instant had
// already passed on entry (a missed deadline).
inline bool sleep_until(Nanos deadline) {
  if (realtime_now() >= deadline) return true;
  timespec ts{};
  ts.tv_sec = static_cast<time_t>(deadline.count() / 1'000'000'000);
  ts.tv_nsec = static_cast<long>(deadline.count() % 1'000'000'000);
  while (::clock_nanosleep(CLOCK_REALTIME, TIMER_ABSTIME, &ts, nullptr) == EINTR) {
  }
  return false;
}

inline std::optional<int> first_allowed_cpu() {
#ifdef __linux__
  cpu_set_t set;
  CPU_ZERO(&set);
  if (::sched_getaffinity(0, sizeof(set), &set) != 0) return std::nullopt;
  for (int cpu = 0; cpu < CPU_SETSIZE; ++cpu) {
    if (CPU_ISSET(cpu, &set)) return cpu;
  }
#endif
  return std::nullopt;
}

// Restricts the calling thread to one CPU. Threads it creates afterwards inherit
// the mask.
inline bool pin_current_thread(int cpu) {
#ifdef __linux__
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(cpu, &set);
  return ::sched_setaffinity(0, sizeof(set), &set) == 0;
#else
  (void)cpu;
  return false;
#endif
}

}  // namespace pfcc::live
