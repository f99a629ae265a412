#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "pfcc/types.hpp"

namespace pfcc {

// Seeded pseudo-random payload. mt19937_64 output is fixed by the standard,
// so the same seed gives the same bits on every platform.
inline Bits random_payload(std::uint64_t seed, std::uint64_t n_bits) {
  if (n_bits == 0) throw ConfigError("random_payload: n_bits must be positive");
  std::mt19937_64 engine(seed);
  Bits bits(n_bits);
  for (auto& b : bits) b = static_cast<std::uint8_t>(engine() >> 63);
  return bits;
}

// splitmix64 finalizer; used to give every sweep cell its own seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(mix_seed(base) ^ a) ^ b);
}

// "1011..." -> bits. Whitespace and '_' are ignored.
inline Bits bits_from_string(std::string_view text) {
  Bits bits;
  for (char c : text) {
    if (c == '0' || c == '1') {
      bits.push_back(static_cast<std::uint8_t>(c - '0'));
    } else if (c != ' ' && c != '_' && c != '\n' && c != '\t') {
      throw ConfigError("bit string contains '" + std::string(1, c) + "'");
    }
  }
  return bits;
}

inline std::string bits_to_string(const Bits& bits) {
  std::string out;
  out.reserve(bits.size());
  for (auto b : bits) out.push_back(b ? '1' : '0');
  return out;
}

// Hex digits, most significant bit of each nibble first. Optional 0x prefix.
inline Bits bits_from_hex(std::string_view hex) {
  if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
  Bits bits;
  bits.reserve(hex.size() * 4);
  for (char c : hex) {
    int v = -1;
    if (c >= '0' && c <= '9') v = c - '0';
    if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
    if (v < 0) throw ConfigError("payload hex contains '" + std::string(1, c) + "'");
    for (int shift = 3; shift >= 0; --shift) bits.push_back(static_cast<std::uint8_t>((v >> shift) & 1));
  }
  return bits;
}

// Pads the last nibble with zeros.
inline std::string bits_to_hex(const Bits& bits) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (std::size_t i = 0; i < bits.size(); i += 4) {
    int v = 0;
    for (std::size_t j = 0; j < 4; ++j) v = (v << 1) | (i + j < bits.size() ? bits[i + j] : 0);
    out.push_back(kDigits[v]);
  }
  return out;
}

}  // namespace pfcc
