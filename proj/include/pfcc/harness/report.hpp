#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include "pfcc/harness/sweep.hpp"
#include "pfcc/metrics.hpp"

namespace pfcc::harness {

inline constexpr std::string_view kCsvHeader =
    "variable,value,repetition,seed,payload_bits,page_gap,region_bytes,sync_period_ns,ber,bandwidth_bps,"
    "indeterminate_slots";

// Fixed precision keeps reruns byte-identical.
inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct CsvRow {
  std::string variable;
  std::string value;
  std::uint64_t repetition = 0;
  std::uint64_t seed = 0;
  ChannelConfig config;
  std::optional<double> ber;  // empty when the sent payload is unknown
  double bandwidth_bps = 0.0;
  std::optional<std::uint64_t> indeterminate_slots;
};

inline void write_csv_row(std::ostream& out, const CsvRow& r) {
  out << r.variable << ',' << r.value << ',' << r.repetition << ',' << r.seed << ',' << r.config.payload_bits << ','
      << r.config.page_gap << ',' << r.config.region_size << ',' << r.config.sync_period.count() << ','
      << (r.ber ? fixed(*r.ber, 6) : "") << ',' << fixed(r.bandwidth_bps, 3) << ','
      << (r.indeterminate_slots ? std::to_string(*r.indeterminate_slots) : "") << '\n';
}

inline void write_csv(std::ostream& out, const SweepResult& result) {
  out << kCsvHeader << '\n';
  for (const auto& row : result.rows) {
    write_csv_row(out, {std::string(to_string(row.variable)), std::to_string(row.value), row.repetition, row.seed,
                        row.config, row.ber, row.bandwidth_bps, row.indeterminate_slots});
  }
}

// One transmission outside a sweep, labelled "single".
inline CsvRow single_row(const ChannelConfig& cfg, const TransmissionReport& report) {
  CsvRow row{"single", "", 0, report.seed, cfg, std::nullopt, report.bandwidth_bps, report.indeterminate_slots};
  if (has_reference(report)) row.ber = report.ber;
  return row;
}

inline void write_summary(std::ostream& out, const SweepResult& result) {
  char line[128];
  std::snprintf(line, sizeof line, "%-14s %10s %16s\n", std::string(to_string(result.variable)).c_str(), "mean_ber",
                "mean_bw_bps");
  out << line;
  for (const auto& m : result.means) {
    std::snprintf(line, sizeof line, "%-14llu %10.4f %16.3f\n", static_cast<unsigned long long>(m.value), m.mean_ber,
                  m.mean_bandwidth_bps);
    out << line;
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SetupError("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw SetupError("write to " + path.string() + " failed");
}

// CSV at `path`, summary table next to it with a .summary.txt suffix.
inline void emit_report(const SweepResult& result, const std::filesystem::path& path) {
  std::ostringstream csv;
  write_csv(csv, result);
  write_text_file(path, csv.str());
  std::ostringstream summary;
  write_summary(summary, result);
  auto summary_path = path;
  summary_path += ".summary.txt";
  write_text_file(summary_path, summary.str());
}

}  // namespace pfcc::harness
