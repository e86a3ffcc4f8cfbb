#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ipsim/field.hpp"
#include "ipsim/geometry.hpp"
#include "ipsim/kernel.hpp"
#include "ipsim/macro_engine.hpp"

namespace ipsim {

enum class Scale { Macro, Micro };

/// Block of uniform initial density (macro). A cell receives the density
/// when its center lies inside the shape.
struct DensityPatch {
  enum class Shape { Rect, Disc };
  Shape shape = Shape::Rect;
  Rect rect;             // Shape::Rect
  Vec2 center;           // Shape::Disc
  double radius = 0.0;   // Shape::Disc
  double density = 1.0;
  friend bool operator==(const DensityPatch&, const DensityPatch&) = default;
};

/// Boundary injection. `jitter` > 0 draws per-cell amplitude weights
/// uniformly in [1 - jitter, 1 + jitter] from the run's seed.
struct InflowSpec {
  std::string segment;
  double density = 0.0;
  InflowWaveform waveform;
  double jitter = 0.0;
  friend bool operator==(const InflowSpec&, const InflowSpec&) = default;
};

/// Initial agent placement (micro): nx * ny sites centered on `center`,
/// each displaced uniformly by up to jitter * spacing per coordinate.
struct LatticeSpec {
  enum class Kind { Square, Hex };
  Kind kind = Kind::Square;
  int nx = 10;
  int ny = 10;
  double spacing = 1.0;
  Vec2 center{5.0, 5.0};
  double jitter = 0.1;
  friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

enum class VelocityMode { Field, Fixed };

struct PopulationSpec {
  std::string name;
  SensingConfig cfg;
  VelocityMode velocity = VelocityMode::Field;
  Vec2 w_fixed{1.0, 0.0};
  Vec2 axis{1.0, 0.0};  // micro sensing axis
  RepulsionSource repulsion_source = RepulsionSource::Self;
  std::size_t other = 0;
  bool absorbing = false;
  std::vector<DensityPatch> patches;   // macro
  std::vector<InflowSpec> inflows;     // macro
  LatticeSpec lattice;                 // micro
  friend bool operator==(const PopulationSpec&, const PopulationSpec&) = default;
};

struct Schedule {
  double dt = 0.01;
  long steps = 100;
  long stride = 10;                 // frame output every `stride` steps
  bool stop_at_equilibrium = false; // micro only
  double equilibrium_tol = 1e-6;    // in units of body size
  int equilibrium_window = 50;
  friend bool operator==(const Schedule&, const Schedule&) = default;
};

struct MetricOptions {
  std::vector<std::string> names;
  int lane_col_begin = 0;
  int lane_col_end = 0;
  Rect region;                       // region_density
  double component_threshold = 0.1;  // components
  int angle_neighbors = 6;
  double angle_bin = 5.0;
  friend bool operator==(const MetricOptions&, const MetricOptions&) = default;
};

/// Names accepted in MetricOptions::names.
const std::vector<std::string>& known_metrics();

struct Scenario {
  std::string name;
  Scale scale = Scale::Macro;
  std::uint64_t seed = 1;
  Domain domain;
  double h = 1.0 / 128.0;  // macro
  PotentialSolverOptions solver;
  double speed_bound = 1.0;  // declared bound on |v|; dt * speed_bound <= h
  std::vector<PopulationSpec> populations;
  Schedule schedule;
  MetricOptions metrics;

  /// Throws ConfigError (or the domain's InvalidDomain) when the scenario
  /// cannot be run.
  void validate() const;
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

const std::vector<std::string>& scenario_names();

/// Built-in scenario. Throws UnknownScenario.
Scenario build_scenario(const std::string& name, std::uint64_t seed = 1);

// ---------------------------------------------------------------------------
// Config files

/// Parsed `key = value` text grouped by `[section]`. Keys may repeat.
struct ConfigDoc {
  struct Entry {
    std::string key;
    std::string value;
  };
  struct Section {
    std::string name;
    std::vector<Entry> entries;
  };
  std::vector<Section> sections;

  static ConfigDoc parse(const std::string& text);
  Section* find(const std::string& name);
  /// Replaces every entry of `key` in `section` by a single one, creating
  /// the section if needed.
  void set(const std::string& section, const std::string& key, const std::string& value);
};

std::string dump_config(const Scenario& s);
Scenario scenario_from_doc(const ConfigDoc& doc);
Scenario parse_config(const std::string& text);
Scenario load_config(const std::string& path);

/// Applies "section.key=value" overrides; a bare key addresses [scenario].
/// Population sections are addressed as population.<index>.
Scenario apply_overrides(const Scenario& s, const std::vector<std::string>& overrides);

}  // namespace ipsim
