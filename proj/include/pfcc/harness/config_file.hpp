#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <string_view>

#include "pfcc/channel_config.hpp"
#include "pfcc/sim/sim_params.hpp"
#include "pfcc/types.hpp"

namespace pfcc::harness {

// ChannelConfig whose derived fields stay open until resolve(), so a sweep that
// changes page_gap or sync_period gets matching defaults per cell.
struct ChannelSettings {
  ChannelConfig base;
  std::optional<std::uint64_t> pair_offset;
  std::optional<Nanos> guard_offset;

  ChannelConfig resolve() const {
    ChannelConfig cfg = base;
    cfg.pair_offset = pair_offset.value_or(default_pair_offset(cfg.page_gap));
    cfg.guard_offset = guard_offset.value_or(default_guard_offset(cfg.sync_period));
    return cfg;
  }
};

struct Settings {
  ChannelSettings channel;
  sim::SimParams sim;
  std::uint64_t seed = 1;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::ranges::transform(out, out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Leading unsigned integer and the unit text after it.
inline std::pair<std::uint64_t, std::string> split_number(std::string_view text, std::string_view what) {
  text = trim(text);
  std::uint64_t value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end == text.data())
    throw ConfigError("invalid " + std::string(what) + " '" + std::string(text) + "'");
  return {value, lower(trim(std::string_view(end, static_cast<std::size_t>(text.data() + text.size() - end))))};
}

inline std::uint64_t scaled(std::uint64_t value, std::uint64_t factor, std::string_view text) {
  if (factor != 0 && value > UINT64_MAX / factor) throw ConfigError("value '" + std::string(text) + "' overflows");
  return value * factor;
}

}  // namespace detail

inline std::uint64_t parse_uint(std::string_view text) {
  const auto [value, unit] = detail::split_number(text, "integer");
  if (!unit.empty()) throw ConfigError("invalid integer '" + std::string(text) + "'");
  return value;
}

// Byte counts: plain, or with a binary suffix K/KiB, M/MiB, G/GiB.
inline std::uint64_t parse_size(std::string_view text) {
  const auto [value, unit] = detail::split_number(text, "size");
  std::uint64_t factor = 0;
  if (unit.empty() || unit == "b") factor = 1;
  else if (unit == "k" || unit == "kib" || unit == "kb") factor = 1024;
  else if (unit == "m" || unit == "mib" || unit == "mb") factor = kMiB;
  else if (unit == "g" || unit == "gib" || unit == "gb") factor = 1024 * kMiB;
  else throw ConfigError("unknown size unit in '" + std::string(text) + "'");
  return detail::scaled(value, factor, text);
}

// Durations: ns, us, ms or s. A bare number is nanoseconds.
inline Nanos parse_duration(std::string_view text) {
  const auto [value, unit] = detail::split_number(text, "duration");
  std::uint64_t factor = 0;
  if (unit.empty() || unit == "ns") factor = 1;
  else if (unit == "us") factor = 1'000;
  else if (unit == "ms") factor = 1'000'000;
  else if (unit == "s") factor = 1'000'000'000;
  else throw ConfigError("unknown duration unit in '" + std::string(text) + "'");
  const auto ns = detail::scaled(value, factor, text);
  if (ns > static_cast<std::uint64_t>(INT64_MAX)) throw ConfigError("duration '" + std::string(text) + "' overflows");
  return Nanos(static_cast<Nanos::rep>(ns));
}

inline sim::AdviceMode parse_advice_mode(std::string_view text) {
  const auto t = detail::lower(detail::trim(text));
  if (t == "ideal") return sim::AdviceMode::Ideal;
  if (t == "skip_mapped") return sim::AdviceMode::SkipMapped;
  throw ConfigError("advice_mode must be ideal or skip_mapped, got '" + std::string(text) + "'");
}

inline void apply_setting(Settings& s, std::string_view key, std::string_view value) {
  key = detail::trim(key);
  auto& c = s.channel.base;
  auto& p = s.sim;
  if (key == "page_size") c.page_size = parse_size(value);
  else if (key == "region_size") c.region_size = parse_size(value);
  else if (key == "page_gap") c.page_gap = parse_uint(value);
  else if (key == "pair_offset") s.channel.pair_offset = parse_uint(value);
  else if (key == "base_page") c.base_page = parse_uint(value);
  else if (key == "sync_period") c.sync_period = parse_duration(value);
  else if (key == "guard_offset") s.channel.guard_offset = parse_duration(value);
  else if (key == "payload_bits") c.payload_bits = parse_uint(value);
  else if (key == "seed") s.seed = parse_uint(value);
  else if (key == "cache_capacity") p.cache_capacity = parse_uint(value);
  else if (key == "disk_latency") p.disk_latency = parse_uint(value);
  else if (key == "mem_latency") p.mem_latency = parse_uint(value);
  else if (key == "switch_cost") p.switch_cost = parse_uint(value);
  else if (key == "readahead") p.readahead = parse_uint(value);
  else if (key == "advice_mode") p.advice_mode = parse_advice_mode(value);
  else if (key == "disk_jitter") p.disk_jitter = parse_uint(value);
  else if (key == "tick_ns") p.tick_ns = parse_uint(value);
  else if (key == "eviction_policy") {
    if (detail::lower(detail::trim(value)) != "lru") throw ConfigError("eviction_policy supports only lru");
    p.eviction_policy = sim::EvictionPolicy::Lru;
  } else {
    throw ConfigError("unknown setting '" + std::string(key) + "'");
  }
}

// "key=value" as given on a command line.
inline void apply_assignment(Settings& s, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
  apply_setting(s, assignment.substr(0, eq), assignment.substr(eq + 1));
}

// Flat key=value lines. '#' starts a comment. Later keys override earlier ones.
inline Settings parse_config(std::istream& in, Settings settings = {}, const std::string& origin = "config") {
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = detail::trim(view);
    if (view.empty()) continue;
    try {
      apply_assignment(settings, view);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return settings;
}

inline Settings load_config_file(const std::filesystem::path& path, Settings settings = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  return parse_config(in, std::move(settings), path.string());
}

}  // namespace pfcc::harness
