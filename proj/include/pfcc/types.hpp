#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pfcc {

using PageIndex = std::uint64_t;
using SlotIndex = std::uint64_t;

// One entry per payload bit, each 0 or 1.
using Bits = std::vector<std::uint8_t>;

enum class Residency : std::uint8_t { Resident, Evicted };

enum class FaultKind : std::uint8_t { NoFault, SoftFault, HardFault };

// Which spy accessor finished last. This is the only thing the receiver decodes from.
enum class ObservedOrder : std::uint8_t { T1Last, T2Last, Ambiguous };

enum class SlotDecode : std::uint8_t { Zero, One, Indeterminate };

enum class Role : std::uint8_t { Sender, Receiver };

struct PagePair {
  PageIndex p1 = 0;
  PageIndex p2 = 0;
  SlotIndex slot = 0;

  friend bool operator==(const PagePair&, const PagePair&) = default;
};

// Bad parameters, unparsable input, misuse of an API. CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Host cannot provide what the channel needs (missing file, affinity denied...). Exit code 2.
class SetupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A transmission started but could not continue. Exit code 3.
class TransmissionAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr std::string_view to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::NoFault: return "none";
    case FaultKind::SoftFault: return "soft";
    case FaultKind::HardFault: return "hard";
  }
  return "?";
}

constexpr std::string_view to_string(ObservedOrder order) {
  switch (order) {
    case ObservedOrder::T1Last: return "t1_last";
    case ObservedOrder::T2Last: return "t2_last";
    case ObservedOrder::Ambiguous: return "ambiguous";
  }
  return "?";
}

constexpr std::string_view to_string(SlotDecode decode) {
  switch (decode) {
    case SlotDecode::Zero: return "0";
    case SlotDecode::One: return "1";
    case SlotDecode::Indeterminate: return "?";
  }
  return "?";
}

constexpr std::string_view to_string(Residency residency) {
  return residency == Residency::Resident ? "resident" : "evicted";
}

}  // namespace pfcc
