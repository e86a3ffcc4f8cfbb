#pragma once

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ipsim/field.hpp"
#include "ipsim/grid.hpp"
#include "ipsim/kernel.hpp"

namespace ipsim {

/// On/off schedule of an inflow. Square waves are on while
/// fmod(t, period) < duty * period, evaluated at the start of a step.
struct InflowWaveform {
  enum class Kind { Constant, Square };
  Kind kind = Kind::Constant;
  double period = 1.0;
  double duty = 0.5;

  bool active(double t) const;
  friend bool operator==(const InflowWaveform&, const InflowWaveform&) = default;
};

/// Density added per step to the cells along an inflow segment. `weights`,
/// when non-empty, modulates the amplitude cell by cell along the segment.
struct InflowProfile {
  std::string segment;
  double density = 0.0;
  InflowWaveform waveform;
  std::vector<double> weights;
};

/// interior + absorbed - injected should equal initial.
struct MassLedger {
  double initial = 0.0;
  double injected = 0.0;
  double absorbed = 0.0;

  double imbalance(double interior) const { return interior + absorbed - injected - initial; }
  /// |imbalance| relative to the largest mass that entered the books.
  double relative_imbalance(double interior) const;
};

enum class RepulsionSource { Self, Other };

struct MacroPopulation {
  GridMeasure measure;
  ExternalVelocity external;
  SensingConfig cfg;
  RepulsionSource repulsion_source = RepulsionSource::Self;
  std::size_t other = 0;  // population index when repulsion_source == Other
  std::vector<InflowProfile> inflows;
  bool absorbing = false;
  MassLedger ledger;
};

/// Velocity after removing the components that would carry mass across a
/// wall or into an obstacle cell.
Vec2 project_velocity(const GridTopology& topology, int i, int j, Vec2 v);

struct PushResult {
  GridMeasure measure;
  double outflow = 0.0;  // mass carried across open boundary faces
};

/// One push-forward of `density` by the piecewise translation x -> x + v dt.
/// Velocities are projected first; no CFL check is made here.
PushResult push_forward(const GridMeasure& density, std::span<const Vec2> velocity, double dt,
                        const GridTopology& topology);

/// Adds the profile to the cells along its segment if the waveform is on at
/// time t. Returns the injected mass (also booked in the ledger).
/// Throws UnknownSegment unless the segment exists and is labeled inflow.
double inject_boundary(MacroPopulation& pop, const InflowProfile& profile, const Domain& domain,
                       double t);

/// Cells along an inflow segment, in order of increasing edge coordinate.
std::vector<std::size_t> inflow_cells(const Domain& domain, const GridSpec& grid,
                                      const std::string& segment);

/// Zeroes density in free cells with a target face and returns the removed
/// mass (also booked in the ledger).
double absorb_at_target(MacroPopulation& pop, const GridTopology& topology);

/// Evolves a set of coupled populations on one grid.
class MacroEngine {
 public:
  MacroEngine(const Domain& domain, const GridSpec& grid, const std::vector<MacroPopulation>& pops);

  /// v = w + nu at every cell holding mass; zero elsewhere. All populations
  /// are read, none is modified.
  std::vector<std::vector<Vec2>> velocities(const std::vector<MacroPopulation>& pops) const;

  /// Largest |v| over the cells holding mass, across populations.
  static double max_speed(const std::vector<MacroPopulation>& pops,
                          const std::vector<std::vector<Vec2>>& velocity);

  /// One explicit step from a common snapshot. Throws CflViolationError when
  /// dt * max|v| > h. Outflow across open faces is booked as absorbed.
  std::vector<MacroPopulation> step(const std::vector<MacroPopulation>& pops, double dt) const;

  const GridTopology& topology() const { return topology_; }
  const GridSpec& grid() const { return topology_.spec(); }

 private:
  GridTopology topology_;
  std::vector<MacroKernel> kernels_;
};

}  // namespace ipsim
