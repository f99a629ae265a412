#pragma once

#include <array>
#include <cstdint>
#include <utility>

#include "pfcc/protocol.hpp"
#include "pfcc/types.hpp"

namespace pfcc::live {

// What the spy learns about one slot: four tickets drawn from a single shared
// counter, one before and one after each accessor's read. No clock is involved.
struct SlotObservation {
  SlotIndex slot = 0;
  std::uint64_t t1_start = 0;
  std::uint64_t t1_end = 0;
  std::uint64_t t2_start = 0;
  std::uint64_t t2_end = 0;

  bool well_formed() const {
    const bool ordered = t1_start < t1_end && t2_start < t2_end;
    const bool distinct = t1_start != t2_start && t1_start != t2_end && t1_end != t2_start && t1_end != t2_end;
    return ordered && distinct;
  }
};

// On one core an accessor that blocks on a hard fault hands the core to the other:
//   t1( t2( ) )        nested, only t1 blocked      -> T1Last
//   t1( ) t2( )        disjoint, t1 never blocked   -> T2Last
//   t1( t2( t1) t2)    crossed, both blocked        -> Ambiguous
// So the answer is whoever finished last, unless the two intervals cross.
inline ObservedOrder order_from_observation(const SlotObservation& obs) {
  if (!obs.well_formed()) return ObservedOrder::Ambiguous;
  using Interval = std::array<std::uint64_t, 2>;
  const Interval t1{obs.t1_start, obs.t1_end};
  const Interval t2{obs.t2_start, obs.t2_end};
  const auto& [early, late] = obs.t1_start < obs.t2_start ? std::pair{t1, t2} : std::pair{t2, t1};
  const bool crossed = late[0] < early[1] && early[1] < late[1];
  if (crossed) return ObservedOrder::Ambiguous;
  return obs.t1_end > obs.t2_end ? ObservedOrder::T1Last : ObservedOrder::T2Last;
}

inline SlotDecode decode_observation(const SlotObservation& obs) {
  return decode_from_order(order_from_observation(obs));
}

}  // namespace pfcc::live
