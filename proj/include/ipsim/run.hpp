#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ipsim/errors.hpp"
#include "ipsim/metrics.hpp"
#include "ipsim/scenarios.hpp"
#include "ipsim/simulation.hpp"

namespace ipsim {

/// Process exit status for an error kind: 2 configuration, 3 CFL violation,
/// 4 solver non-convergence, 5 separation failure, 1 anything else.
int exit_code_for(ErrorKind kind);

struct RunOptions {
  std::filesystem::path out_dir;
  long stride = 0;                     // 0 keeps the scenario's stride
  std::vector<std::string> overrides;  // recorded in the manifest
};

struct RunReport {
  int exit_code = 0;
  std::optional<ErrorKind> error;
  std::string message;
  long steps_completed = 0;
  std::optional<long> equilibrium_step;
  std::vector<MetricValue> final_metrics;
  AngleHistogram histogram;  // final state, empty for macro runs
  std::filesystem::path manifest;
};

/// Runs to completion or first error, writing frames, metrics.csv,
/// angles.csv (micro) and manifest.json into out_dir.
RunReport run_to_directory(const Scenario& scenario, const RunOptions& options);

struct BatchReport {
  int exit_code = 0;
  std::vector<RunReport> runs;  // in seed order
  AngleHistogram aggregate;
};

/// One run per seed in [first, last] under out_dir/seed_<n>, then the
/// seed-ordered sum of the angle histograms (aggregate_angles.csv) and the
/// final metrics of every run (batch_metrics.csv). Stops at the first
/// failing run; an empty range is a configuration error.
BatchReport run_batch(const Scenario& scenario, std::uint64_t first, std::uint64_t last, const RunOptions& options);

/// Rows i,j,x,y,rho[,rho2,...] with j outer.
void write_macro_frame(std::ostream& os, const std::vector<MacroPopulation>& pops);
/// Rows agent_id,x,y.
void write_micro_frame(std::ostream& os, const AgentSet& agents);
/// Rows bin_center_deg,count.
void write_histogram_csv(std::ostream& os, const AngleHistogram& hist);

}  // namespace ipsim
