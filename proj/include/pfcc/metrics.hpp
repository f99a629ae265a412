#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pfcc/channel_config.hpp"
#include "pfcc/types.hpp"

namespace pfcc {

struct Metrics {
  std::uint64_t errors = 0;
  double ber = 0.0;
  double bandwidth_bps = 0.0;
};

inline Metrics compute_metrics(std::span<const std::uint8_t> sent, std::span<const std::uint8_t> received,
                               Nanos elapsed) {
  if (sent.size() != received.size())
    throw ConfigError("compute_metrics: sent and received lengths differ");
  if (sent.empty()) throw ConfigError("compute_metrics: empty payload");
  if (elapsed <= Nanos::zero()) throw ConfigError("compute_metrics: elapsed must be positive");

  Metrics m;
  for (std::size_t i = 0; i < sent.size(); ++i) m.errors += (sent[i] != 0) != (received[i] != 0);
  const auto n = static_cast<double>(sent.size());
  m.ber = static_cast<double>(m.errors) / n;
  m.bandwidth_bps = n * 1e9 / static_cast<double>(elapsed.count());
  return m;
}

struct SlotRecord {
  SlotIndex slot = 0;
  PagePair pair;
  ObservedOrder order = ObservedOrder::Ambiguous;
  SlotDecode decoded = SlotDecode::Indeterminate;
};

struct TransmissionReport {
  std::uint64_t seed = 0;
  Bits sent;
  // An indeterminate slot is stored as the complement of the sent bit, so it
  // always counts as an error.
  Bits received;
  std::vector<SlotRecord> per_slot;
  Nanos elapsed{0};
  double ber = 0.0;
  double bandwidth_bps = 0.0;
  std::uint64_t indeterminate_slots = 0;
};

// Bits as decoded, with indeterminate slots read as 0. Used when the sent payload is unknown.
inline Bits decoded_bits(std::span<const SlotRecord> records) {
  Bits bits;
  bits.reserve(records.size());
  for (const auto& r : records) bits.push_back(r.decoded == SlotDecode::One ? 1 : 0);
  return bits;
}

inline TransmissionReport make_report(Bits sent, std::vector<SlotRecord> records, Nanos elapsed,
                                      std::uint64_t seed) {
  if (sent.size() != records.size()) throw ConfigError("make_report: one slot record per sent bit required");
  TransmissionReport report;
  report.seed = seed;
  report.elapsed = elapsed;
  report.received.reserve(sent.size());
  for (std::size_t i = 0; i < sent.size(); ++i) {
    switch (records[i].decoded) {
      case SlotDecode::Zero: report.received.push_back(0); break;
      case SlotDecode::One: report.received.push_back(1); break;
      case SlotDecode::Indeterminate:
        report.received.push_back(sent[i] ? 0 : 1);
        ++report.indeterminate_slots;
        break;
    }
  }
  report.sent = std::move(sent);
  report.per_slot = std::move(records);
  if (!report.sent.empty()) {
    const auto m = compute_metrics(report.sent, report.received, elapsed);
    report.ber = m.ber;
    report.bandwidth_bps = m.bandwidth_bps;
  }
  return report;
}

// Receiver-side report when the sent payload is unknown: `sent` stays empty,
// `received` holds the decoded bits and ber is not computed.
inline TransmissionReport make_unreferenced_report(std::vector<SlotRecord> records, Nanos elapsed,
                                                   std::uint64_t seed) {
  TransmissionReport report;
  report.seed = seed;
  report.elapsed = elapsed;
  report.received = decoded_bits(records);
  for (const auto& r : records) report.indeterminate_slots += r.decoded == SlotDecode::Indeterminate;
  if (!records.empty() && elapsed > Nanos::zero())
    report.bandwidth_bps = static_cast<double>(records.size()) * 1e9 / static_cast<double>(elapsed.count());
  report.per_slot = std::move(records);
  return report;
}

inline bool has_reference(const TransmissionReport& report) { return !report.sent.empty(); }

}  // namespace pfcc
