#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pfcc/harness/config_file.hpp"
#include "pfcc/harness/report.hpp"
#include "pfcc/harness/sweep.hpp"
#include "pfcc/live/capabilities.hpp"
#include "pfcc/live/runtime.hpp"
#include "pfcc/payload.hpp"
#include "pfcc/sim/channel_sim.hpp"

namespace fs = std::filesystem;
using namespace pfcc;
using namespace pfcc::harness;

namespace {

enum Exit { kOk = 0, kConfig = 1, kSetup = 2, kAbort = 3 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> sets;

  Settings settings() const {
    Settings s;
    if (!config.empty()) s = load_config_file(config, s);
    for (const auto& a : sets) apply_assignment(s, a);
    if (seed) s.seed = *seed;
    return s;
  }
};

struct PayloadArgs {
  std::string hex;
  std::string bits;

  std::optional<Bits> explicit_payload() const {
    if (!hex.empty()) return bits_from_hex(hex);
    if (!bits.empty()) return bits_from_string(bits);
    return std::nullopt;
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "key=value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "seed for payloads and the simulator");
  cmd->add_option("--out", c.out, "CSV output path (stdout if omitted)");
  cmd->add_option("--set", c.sets, "override one setting, key=value")->take_all();
}

void add_payload(CLI::App* cmd, PayloadArgs& p) {
  auto* hex = cmd->add_option("--payload-hex", p.hex, "payload as hex digits, MSB first");
  cmd->add_option("--bits", p.bits, "payload as a 0/1 string")->excludes(hex);
}

// Writes CSV text to --out, or stdout.
void emit(const Common& c, const std::string& csv) {
  if (c.out.empty()) {
    std::cout << csv;
  } else {
    write_text_file(c.out, csv);
  }
}

std::string single_csv(const ChannelConfig& cfg, const TransmissionReport& report) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  write_csv_row(out, single_row(cfg, report));
  return out.str();
}

std::string render_bits(const Bits& bits) {
  return bits.size() % 4 == 0 ? "0x" + bits_to_hex(bits) : bits_to_string(bits);
}

std::vector<std::uint64_t> parse_values(const std::string& text, SweepVariable variable) {
  std::vector<std::uint64_t> values;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    values.push_back(variable == SweepVariable::RegionSize ? parse_size(item) : parse_uint(item));
  }
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Page-fault ordering covert channel: simulator, live runtime and experiment driver"};
  app.require_subcommand(1);

  Common common;
  PayloadArgs payload_args;

  auto* simulate = app.add_subcommand("simulate", "one transmission on the simulator");
  add_common(simulate, common);
  add_payload(simulate, payload_args);
  std::string trace_path;
  simulate->add_option("--trace", trace_path, "write the access trace (tick,thread,page,kind) here");

  std::string region_file;
  std::int64_t epoch_ns = 0;
  auto* send = app.add_subcommand("send", "live trojan: encode a payload into page residency");
  add_common(send, common);
  add_payload(send, payload_args);
  send->add_option("--region-file", region_file, "shared backing file")->required();
  send->add_option("--epoch", epoch_ns, "slot 0 start, Unix time in ns")->required();

  live::SpyOptions spy_options;
  int cpu = -1;
  auto* receive = app.add_subcommand("receive", "live spy: decode from accessor completion order");
  add_common(receive, common);
  add_payload(receive, payload_args);
  receive->add_option("--region-file", region_file, "shared backing file")->required();
  receive->add_option("--epoch", epoch_ns, "slot 0 start, Unix time in ns")->required();
  receive->add_option("--cpu", cpu, "CPU to pin the spy to (default: first allowed)");
  receive->add_flag("--release-mappings", spy_options.release_mappings,
                    "drop the spy's own mappings of each pair after the slot");

  std::string variable_name = "payload_bits";
  std::string values_text;
  std::uint64_t repetitions = 1;
  std::string backend_name = "sim";
  unsigned threads = 0;
  auto add_sweep_options = [&](CLI::App* cmd) {
    add_common(cmd, common);
    cmd->add_option("--values", values_text, "comma-separated values (default grid if omitted)");
    cmd->add_option("--repetitions", repetitions, "repetitions per value");
    cmd->add_option("--backend", backend_name, "sim or live")->check(CLI::IsMember({"sim", "live"}));
    cmd->add_option("--region-file", region_file, "backing file for the live backend");
    cmd->add_option("--threads", threads, "worker threads for sim cells (0 = all cores)");
    cmd->add_flag("--release-mappings", spy_options.release_mappings, "live spy releases its mappings");
  };
  auto* sweep = app.add_subcommand("sweep", "vary one parameter and report BER and bandwidth");
  add_sweep_options(sweep);
  sweep->add_option("--variable", variable_name, "payload_bits, page_gap, region_size or bit_rate")
      ->check(CLI::IsMember({"payload_bits", "page_gap", "region_size", "bit_rate"}));

  auto* calibrate = app.add_subcommand("calibrate", "choose the page gap with the lowest BER");
  add_sweep_options(calibrate);

  std::string scratch_dir = fs::temp_directory_path().string();
  auto* probe = app.add_subcommand("probe", "check what the live backend needs from this host");
  probe->add_option("--scratch-dir", scratch_dir, "directory for the scratch file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*simulate) {
      auto s = common.settings();
      const auto given = payload_args.explicit_payload();
      if (given) s.channel.base.payload_bits = given->size();
      const auto cfg = s.channel.resolve();
      validate(cfg);
      const auto payload = given ? *given : random_payload(s.seed, cfg.payload_bits);
      const auto run = sim::run_channel_sim(cfg, s.sim, payload, s.seed);
      if (!trace_path.empty()) {
        std::ostringstream trace;
        sim::write_trace(trace, run.trace);
        write_text_file(trace_path, trace.str());
      }
      emit(common, single_csv(cfg, run.report));
      std::cerr << "bits " << payload.size() << "  ber " << fixed(run.report.ber, 4) << "  indeterminate "
                << run.report.indeterminate_slots << "  overruns " << run.sender_overruns << '/'
                << run.receiver_overruns << '\n';
      return kOk;
    }

    if (*send) {
      auto s = common.settings();
      const auto given = payload_args.explicit_payload();
      if (given) s.channel.base.payload_bits = given->size();
      const auto cfg = s.channel.resolve();
      validate(cfg);
      const auto payload = given ? *given : random_payload(s.seed, cfg.payload_bits);
      const auto region = live::SharedRegion::open(region_file, cfg);
      const auto log = live::trojan_send(region, cfg, payload, Nanos(epoch_ns));

      TransmissionReport report;
      report.seed = s.seed;
      report.elapsed = cfg.sync_period * static_cast<Nanos::rep>(payload.size());
      report.bandwidth_bps = static_cast<double>(payload.size()) * 1e9 / static_cast<double>(report.elapsed.count());
      auto row = single_row(cfg, report);
      row.indeterminate_slots.reset();
      std::ostringstream csv;
      csv << kCsvHeader << '\n';
      write_csv_row(csv, row);
      emit(common, csv.str());
      std::cerr << "sent " << render_bits(payload) << "  overruns " << log.overruns << "  unconfirmed evictions "
                << log.unconfirmed << "  skipped " << log.skipped << '\n';
      if (log.skipped > 0) throw TransmissionAbort("eviction advice failed on " + std::to_string(log.skipped) + " slots");
      return kOk;
    }

    if (*receive) {
      auto s = common.settings();
      const auto expected = payload_args.explicit_payload();
      if (expected) s.channel.base.payload_bits = expected->size();
      const auto cfg = s.channel.resolve();
      validate(cfg);
      if (cpu >= 0) spy_options.cpu = cpu;
      spy_options.seed = s.seed;
      const auto region = live::SharedRegion::open(region_file, cfg);
      const auto result = live::spy_receive(region, cfg, cfg.payload_bits, Nanos(epoch_ns), expected, spy_options);
      emit(common, single_csv(cfg, result.report));
      std::cerr << "received " << render_bits(result.report.per_slot.empty() ? Bits{} : decoded_bits(result.report.per_slot))
                << "  indeterminate " << result.report.indeterminate_slots << "  overruns " << result.overruns;
      if (expected) std::cerr << "  ber " << fixed(result.report.ber, 4);
      std::cerr << '\n';
      return kOk;
    }

    if (*sweep || *calibrate) {
      SweepSpec spec;
      spec.settings = common.settings();
      spec.seed = spec.settings.seed;
      spec.variable = *calibrate ? SweepVariable::PageGap : parse_sweep_variable(variable_name);
      spec.values = values_text.empty() ? default_values(spec.variable) : parse_values(values_text, spec.variable);
      if (*calibrate && calibrate->count("--repetitions") == 0) repetitions = 7;
      spec.repetitions = repetitions;
      spec.backend = parse_backend(backend_name);
      spec.region_file = region_file;
      spec.spy = spy_options;
      spec.threads = threads;

      SweepResult result;
      if (*calibrate) {
        const auto cal = calibrate_page_gap(spec);
        result = cal.sweep;
        std::cerr << "best page_gap " << cal.best_page_gap << '\n';
      } else {
        result = run_sweep(spec);
      }
      if (common.out.empty()) {
        write_csv(std::cout, result);
        write_summary(std::cerr, result);
      } else {
        emit_report(result, common.out);
        write_summary(std::cout, result);
      }
      return kOk;
    }

    if (*probe) {
      const auto caps = live::probe_capabilities(scratch_dir);
      std::cout << caps.describe();
      return caps.ready() ? kOk : kSetup;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const SetupError& e) {
    std::cerr << "setup error: " << e.what() << '\n';
    return kSetup;
  } catch (const TransmissionAbort& e) {
    std::cerr << "aborted: " << e.what() << '\n';
    return kAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kAbort;
  }
  return kOk;
}
