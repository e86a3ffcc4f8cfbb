// Command-line driver: run, batch, dump and list the built-in scenarios.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ipsim/errors.hpp"
#include "ipsim/run.hpp"
#include "ipsim/scenarios.hpp"

using namespace ipsim;

namespace {

struct Source {
  std::string config;
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
};

void add_source_options(CLI::App* cmd, Source& src) {
  cmd->add_option("--config", src.config, "Scenario config file");
  cmd->add_option("--scenario", src.scenario, "Built-in scenario name");
  cmd->add_option("--set", src.overrides, "Override section.key=value (repeatable)");
}

Scenario resolve(const Source& src) {
  if (src.config.empty() == src.scenario.empty())
    throw SimError(ErrorKind::ConfigError, "give exactly one of --config or --scenario");
  Scenario s = src.config.empty() ? build_scenario(src.scenario) : load_config(src.config);
  if (src.seed) s.seed = *src.seed;
  return apply_overrides(s, src.overrides);
}

// "A..B" or a single seed "A".
bool parse_seed_range(const std::string& text, std::uint64_t& first, std::uint64_t& last) {
  try {
    const auto dots = text.find("..");
    std::size_t used = 0;
    if (dots == std::string::npos) {
      first = last = std::stoull(text, &used);
      return used == text.size();
    }
    const std::string a = text.substr(0, dots), b = text.substr(dots + 2);
    first = std::stoull(a, &used);
    if (used != a.size()) return false;
    last = std::stoull(b, &used);
    return used == b.size();
  } catch (const std::exception&) {
    return false;
  }
}

int report_error(const SimError& e) {
  std::cerr << "ipsim: " << e.what() << '\n';
  return exit_code_for(e.kind());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-scale intelligent particle simulator"};
  app.require_subcommand(0, 1);
  bool list = false;
  app.add_flag("--list-scenarios", list, "Print the built-in scenario names");

  Source run_src;
  std::string run_out = "out";
  long run_stride = 0;
  std::uint64_t run_seed = 0;
  auto* run = app.add_subcommand("run", "Run one scenario");
  add_source_options(run, run_src);
  run->add_option("--out", run_out, "Output directory");
  auto* seed_opt = run->add_option("--seed", run_seed, "Seed for initial conditions");
  run->add_option("--stride", run_stride, "Write a frame every N steps")->check(CLI::PositiveNumber);

  Source batch_src;
  std::string batch_out = "out";
  long batch_stride = 0;
  std::string seeds;
  auto* batch = app.add_subcommand("batch", "Run one scenario over a seed range and aggregate");
  add_source_options(batch, batch_src);
  batch->add_option("--out", batch_out, "Output directory");
  batch->add_option("--seeds", seeds, "Seed range A..B")->required();
  batch->add_option("--stride", batch_stride, "Write a frame every N steps")->check(CLI::PositiveNumber);

  Source dump_src;
  std::string dump_path;
  std::uint64_t dump_seed = 0;
  auto* dump = app.add_subcommand("dump", "Print a scenario as a config file");
  add_source_options(dump, dump_src);
  auto* dump_seed_opt = dump->add_option("--seed", dump_seed, "Seed recorded in the config");
  dump->add_option("-o,--output", dump_path, "Write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (list) {
    for (const auto& n : scenario_names()) std::cout << n << '\n';
    return 0;
  }

  try {
    if (*run) {
      if (*seed_opt) run_src.seed = run_seed;
      const Scenario s = resolve(run_src);
      RunOptions o{run_out, run_stride, run_src.overrides};
      const RunReport r = run_to_directory(s, o);
      if (r.exit_code != 0) std::cerr << "ipsim: " << r.message << '\n';
      std::cout << "wrote " << r.manifest.string() << " (" << r.steps_completed << " steps)\n";
      return r.exit_code;
    }
    if (*batch) {
      std::uint64_t first = 0, last = 0;
      if (!parse_seed_range(seeds, first, last)) throw SimError(ErrorKind::ConfigError, "bad --seeds '" + seeds + "'");
      if (last < first) throw SimError(ErrorKind::ConfigError, "empty seed range '" + seeds + "'");
      const Scenario s = resolve(batch_src);
      RunOptions o{batch_out, batch_stride, batch_src.overrides};
      const BatchReport b = run_batch(s, first, last, o);
      if (b.exit_code != 0 && !b.runs.empty()) std::cerr << "ipsim: " << b.runs.back().message << '\n';
      std::cout << "completed " << b.runs.size() << " runs into " << batch_out << '\n';
      return b.exit_code;
    }
    if (*dump) {
      if (*dump_seed_opt) dump_src.seed = dump_seed;
      const std::string text = dump_config(resolve(dump_src));
      if (dump_path.empty()) {
        std::cout << text;
      } else {
        std::ofstream f(dump_path);
        if (!f) throw SimError(ErrorKind::ConfigError, "cannot write '" + dump_path + "'");
        f << text;
      }
      return 0;
    }
  } catch (const SimError& e) {
    return report_error(e);
  }
  std::cout << app.help();
  return 0;
}
