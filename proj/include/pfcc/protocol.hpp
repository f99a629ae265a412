#pragma once

#include "pfcc/channel_config.hpp"
#include "pfcc/types.hpp"

namespace pfcc {

// Pair k starts k page gaps after base_page and wraps at the end of the region.
// cfg is assumed to have passed validate().
inline PagePair page_pair_for_slot(const ChannelConfig& cfg, SlotIndex k) {
  const auto pages = cfg.region_pages();
  const auto stride = static_cast<unsigned __int128>(k) * cfg.page_gap;
  const auto p1 = static_cast<PageIndex>((cfg.base_page + stride) % pages);
  const auto p2 = static_cast<PageIndex>((p1 + cfg.pair_offset) % pages);
  return PagePair{p1, p2, k};
}

// The page the trojan reads to make it resident. The other page of the pair stays evicted.
constexpr PageIndex encode_target(bool bit, const PagePair& pair) { return bit ? pair.p2 : pair.p1; }

// t1 reads p1. If t1 finished last it took the hard fault, so p1 was evicted and the
// trojan touched p2: a one.
constexpr SlotDecode decode_from_order(ObservedOrder order) {
  switch (order) {
    case ObservedOrder::T1Last: return SlotDecode::One;
    case ObservedOrder::T2Last: return SlotDecode::Zero;
    case ObservedOrder::Ambiguous: return SlotDecode::Indeterminate;
  }
  return SlotDecode::Indeterminate;
}

// Absolute instant at which `role` acts in slot k. The sender acts at slot start,
// the receiver guard_offset later.
constexpr Nanos slot_deadline(const ChannelConfig& cfg, Nanos epoch, SlotIndex k, Role role) {
  auto deadline = epoch + cfg.sync_period * static_cast<Nanos::rep>(k);
  if (role == Role::Receiver) deadline += cfg.guard_offset;
  return deadline;
}

}  // namespace pfcc
