#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ipsim/agents.hpp"
#include "ipsim/macro_engine.hpp"
#include "ipsim/metrics.hpp"
#include "ipsim/micro_engine.hpp"
#include "ipsim/scenarios.hpp"

namespace ipsim {

struct MetricValue {
  std::string name;
  double value = 0.0;
};

/// Initial density of a population on the scenario grid.
GridMeasure initial_density(const PopulationSpec& pop, const GridTopology& topology);

/// Initial agents drawn from the lattice spec with the given seed.
AgentSet initial_agents(const PopulationSpec& pop, std::uint64_t seed);

/// Stepper for one scenario instance. Macro steps inject, push forward and
/// absorb, in that order; micro steps advance all agents synchronously.
class Simulation {
 public:
  explicit Simulation(Scenario scenario);

  const Scenario& scenario() const { return scenario_; }
  bool is_macro() const { return scenario_.scale == Scale::Macro; }
  long step_index() const { return step_; }
  double time() const { return static_cast<double>(step_) * scenario_.schedule.dt; }

  /// One step. Errors from the engines propagate unchanged.
  void step();
  /// True once the step budget is spent or, when requested, equilibrium is reached.
  bool finished() const;

  bool at_equilibrium() const { return equilibrium_step_.has_value(); }
  std::optional<long> equilibrium_step() const { return equilibrium_step_; }
  /// Largest per-agent displacement net of the external drift in the last step.
  double last_displacement() const { return last_displacement_; }

  const std::vector<MacroPopulation>& populations() const { return pops_; }
  const AgentSet& agents() const { return agents_; }
  const GridTopology* topology() const { return engine_ ? &engine_->topology() : nullptr; }
  const PotentialField* field() const { return field_.get(); }

  /// Scalar metrics listed in the scenario, evaluated on the current state.
  std::vector<MetricValue> metrics() const;
  /// Neighbor-bearing histogram of the current agents (micro only).
  AngleHistogram angle_histogram() const;

 private:
  Scenario scenario_;
  long step_ = 0;
  std::shared_ptr<const PotentialField> field_;
  std::unique_ptr<MacroEngine> engine_;
  std::vector<MacroPopulation> pops_;
  std::vector<std::vector<InflowProfile>> profiles_;  // resolved per population
  AgentSet agents_;
  ExternalVelocity micro_w_;
  std::optional<EquilibriumDetector> detector_;
  std::optional<long> equilibrium_step_;
  double last_displacement_ = 0.0;
};

}  // namespace ipsim
