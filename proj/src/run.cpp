#include "ipsim/run.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace ipsim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// JSON has no infinity; unbounded values are written as the string "inf".
json jnum(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json config_json(const SensingConfig& c) {
  return {{"alpha_c", jnum(c.alpha_c)}, {"alpha_r", jnum(c.alpha_r)}, {"R_r", jnum(c.R_r)},
          {"R_c_max", jnum(c.R_c_max)}, {"p", jnum(c.p)},             {"s", jnum(c.cohesion_area_bound())},
          {"F_c", jnum(c.F_c)},         {"F_r", jnum(c.F_r)},         {"body_size", jnum(c.body_size)}};
}

json parameters_json(const Scenario& s) {
  json pops = json::array();
  for (const auto& p : s.populations) {
    pops.push_back({{"name", p.name},
                    {"sensing", config_json(p.cfg)},
                    {"velocity", p.velocity == VelocityMode::Field ? "field" : "fixed"},
                    {"w", {p.w_fixed.x, p.w_fixed.y}},
                    {"repulsion", p.repulsion_source == RepulsionSource::Self ? "self" : "other"},
                    {"other", p.other},
                    {"absorbing", p.absorbing}});
  }
  return {{"scale", s.scale == Scale::Macro ? "macro" : "micro"},
          {"dt", s.schedule.dt},
          {"steps", s.schedule.steps},
          {"stride", s.schedule.stride},
          {"h", s.h},
          {"speed_bound", s.speed_bound},
          {"stop_at_equilibrium", s.schedule.stop_at_equilibrium},
          {"populations", pops}};
}

void write_metrics(std::ostream& os, long step, const std::vector<MetricValue>& values) {
  for (const auto& m : values) os << step << ',' << m.name << ',' << num(m.value) << '\n';
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError:
    case ErrorKind::UnknownScenario:
    case ErrorKind::InvalidArgument:
    case ErrorKind::InvalidDomain:
    case ErrorKind::UnknownSegment:
    case ErrorKind::GridMismatch:
      return 2;
    case ErrorKind::CflViolation:
      return 3;
    case ErrorKind::NonConvergence:
      return 4;
    case ErrorKind::SeparationFailure:
    case ErrorKind::SingularPair:
      return 5;
    default:
      return 1;
  }
}

void write_macro_frame(std::ostream& os, const std::vector<MacroPopulation>& pops) {
  if (pops.empty()) return;
  const GridSpec& g = pops.front().measure.spec();
  os << "i,j,x,y,rho";
  for (std::size_t k = 1; k < pops.size(); ++k) os << ",rho" << k + 1;
  os << '\n';
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const Vec2 c = g.center(i, j);
      os << i << ',' << j << ',' << num(c.x) << ',' << num(c.y);
      for (const auto& p : pops) os << ',' << num(p.measure.at(i, j));
      os << '\n';
    }
  }
}

void write_micro_frame(std::ostream& os, const AgentSet& agents) {
  os << "agent_id,x,y\n";
  for (std::size_t k = 0; k < agents.size(); ++k)
    os << k << ',' << num(agents.positions[k].x) << ',' << num(agents.positions[k].y) << '\n';
}

void write_histogram_csv(std::ostream& os, const AngleHistogram& hist) {
  os << "bin_center_deg,count\n";
  for (std::size_t b = 0; b < hist.counts.size(); ++b) os << num(hist.bin_center(b)) << ',' << hist.counts[b] << '\n';
}

RunReport run_to_directory(const Scenario& scenario, const RunOptions& options) {
  RunReport report;
  const fs::path dir = options.out_dir;
  fs::create_directories(dir / "frames");
  report.manifest = dir / "manifest.json";

  json manifest{{"scenario", scenario.name}, {"seed", scenario.seed}, {"overrides", options.overrides}};
  manifest["parameters"] = parameters_json(scenario);
  manifest["config"] = dump_config(scenario);
  manifest["metrics_file"] = "metrics.csv";
  json frames = json::array();

  std::ofstream metrics_csv(dir / "metrics.csv");
  metrics_csv << "step,metric_name,value\n";

  auto finish = [&](int code, std::optional<ErrorKind> kind, const std::string& msg) {
    report.exit_code = code;
    report.error = kind;
    report.message = msg;
    manifest["frames"] = frames;
    json status{{"exit_code", code}, {"steps_completed", report.steps_completed}};
    status["equilibrium_step"] = report.equilibrium_step ? json(*report.equilibrium_step) : json(nullptr);
    status["error"] = kind ? json{{"kind", to_string(*kind)}, {"message", msg}} : json(nullptr);
    manifest["status"] = status;
    std::ofstream(report.manifest) << manifest.dump(2) << '\n';
    return report;
  };

  std::optional<Simulation> sim;
  try {
    sim.emplace(scenario);
  } catch (const SimError& e) {
    return finish(exit_code_for(e.kind()), e.kind(), e.what());
  }

  const long stride = options.stride > 0 ? options.stride : scenario.schedule.stride;
  auto snapshot = [&] {
    const long n = sim->step_index();
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06ld.csv", n);
    {
      std::ofstream f(dir / "frames" / name);
      if (sim->is_macro()) write_macro_frame(f, sim->populations());
      else write_micro_frame(f, sim->agents());
    }
    json frame{{"step", n}, {"time", sim->time()}, {"file", std::string("frames/") + name}};
    if (sim->is_macro()) {
      json ledger = json::array();
      for (const auto& p : sim->populations())
        ledger.push_back({{"interior", p.measure.total_mass()},
                          {"injected", p.ledger.injected},
                          {"absorbed", p.ledger.absorbed},
                          {"initial", p.ledger.initial}});
      frame["mass_ledger"] = ledger;
    }
    frames.push_back(frame);
    write_metrics(metrics_csv, n, sim->metrics());
  };

  const bool wants_angles = std::find(scenario.metrics.names.begin(), scenario.metrics.names.end(),
                                      "angle_histogram") != scenario.metrics.names.end();
  auto write_angles = [&] {
    if (sim->is_macro() || !wants_angles) return;
    report.histogram = sim->angle_histogram();
    std::ofstream f(dir / "angles.csv");
    write_histogram_csv(f, report.histogram);
    manifest["histogram_file"] = "angles.csv";
  };

  long last_frame = -1;
  auto snapshot_once = [&] {
    if (last_frame == sim->step_index()) return;
    snapshot();
    last_frame = sim->step_index();
  };

  try {
    snapshot_once();
    while (!sim->finished()) {
      sim->step();
      report.steps_completed = sim->step_index();
      report.equilibrium_step = sim->equilibrium_step();
      if (sim->step_index() % stride == 0 || sim->finished()) snapshot_once();
    }
    report.final_metrics = sim->metrics();
    write_angles();
  } catch (const CflViolationError& e) {
    manifest["cfl"] = {{"max_speed", e.max_speed()}, {"admissible_dt", e.admissible_dt()}};
    report.final_metrics = sim->metrics();
    snapshot_once();
    write_angles();
    return finish(exit_code_for(e.kind()), e.kind(), e.what());
  } catch (const SimError& e) {
    report.final_metrics = sim->metrics();
    snapshot_once();
    write_angles();
    return finish(exit_code_for(e.kind()), e.kind(), e.what());
  }
  return finish(0, std::nullopt, "");
}

BatchReport run_batch(const Scenario& scenario, std::uint64_t first, std::uint64_t last, const RunOptions& options) {
  BatchReport batch;
  batch.aggregate = make_angle_histogram(scenario.metrics.angle_bin);
  if (last < first) {
    batch.exit_code = 2;
    return batch;
  }
  fs::create_directories(options.out_dir);
  std::ofstream combined(options.out_dir / "batch_metrics.csv");
  combined << "seed,metric_name,value\n";
  json runs = json::array();
  for (std::uint64_t seed = first;; ++seed) {
    Scenario s = scenario;
    s.seed = seed;
    RunOptions o = options;
    o.out_dir = options.out_dir / ("seed_" + std::to_string(seed));
    RunReport r = run_to_directory(s, o);
    for (const auto& m : r.final_metrics) combined << seed << ',' << m.name << ',' << num(m.value) << '\n';
    if (!r.histogram.counts.empty()) batch.aggregate += r.histogram;
    runs.push_back({{"seed", seed}, {"exit_code", r.exit_code}, {"manifest", o.out_dir.filename().string() + "/manifest.json"}});
    batch.runs.push_back(std::move(r));
    if (batch.runs.back().exit_code != 0) {
      batch.exit_code = batch.runs.back().exit_code;
      break;
    }
    if (seed == last) break;
  }
  {
    std::ofstream f(options.out_dir / "aggregate_angles.csv");
    write_histogram_csv(f, batch.aggregate);
  }
  json summary{{"scenario", scenario.name}, {"first_seed", first}, {"last_seed", last},
               {"exit_code", batch.exit_code}, {"runs", runs}, {"aggregate_file", "aggregate_angles.csv"},
               {"metrics_file", "batch_metrics.csv"}};
  std::ofstream(options.out_dir / "batch.json") << summary.dump(2) << '\n';
  return batch;
}

}  // namespace ipsim
