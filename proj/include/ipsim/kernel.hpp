#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "ipsim/agents.hpp"
#include "ipsim/geometry.hpp"
#include "ipsim/grid.hpp"

namespace ipsim {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// Interaction parameters shared by both scales.
///
/// Internally dimensionless: F_c scales a separation into a speed per unit
/// mass, F_r scales an inverse distance into a speed per unit mass. At the
/// microscopic scale mass is an agent count.
struct SensingConfig {
  double alpha_c = kTwoPi;   // cohesion span
  double alpha_r = kPi;      // repulsion span
  double R_r = 0.1;          // repulsion radius
  double R_c_max = 1.0;      // metric cut-off of the cohesion zone
  double p = kUnbounded;     // mass (macro) or agent count (micro) threshold
  double F_c = 0.0;          // >= 0
  double F_r = -1.0;         // <= 0
  double body_size = 0.0;    // micro only; omnidirectional repulsion radius

  /// Throws InvalidArgument on sign or range violations.
  void validate() const;
  /// Area bound s equivalent to R_c_max.
  double cohesion_area_bound() const { return 0.5 * alpha_c * R_c_max * R_c_max; }

  friend bool operator==(const SensingConfig&, const SensingConfig&) = default;
};

using Velocity = Vec2;

/// Radius of the cohesion zone. When `inclusive` is false the count
/// constraint binds and only mass strictly closer than `radius` belongs to
/// the zone; this is how ties at the limiting distance are excluded.
struct CohesionZone {
  double radius = 0.0;
  bool inclusive = true;
  bool contains_distance(double r) const { return inclusive ? r <= radius : r < radius; }
};

// ---------------------------------------------------------------------------
// Microscopic kernel

/// Zone for an observer at x; `others` must not contain the observer.
CohesionZone cohesion_zone_micro(Vec2 x, Vec2 axis, std::span<const Vec2> others,
                                 const SensingConfig& cfg);

/// min(R_c_max, distance to the (floor(p)+1)-th nearest other agent in the
/// cohesion cone); R_c_max when that agent does not exist or p is unbounded.
double cohesion_radius_micro(Vec2 x, Vec2 axis, std::span<const Vec2> others,
                             const SensingConfig& cfg);

/// Indices of the agents that enter agent j's cohesion sum.
std::vector<std::size_t> cohesion_neighbors(std::size_t j, const AgentSet& agents,
                                            const SensingConfig& cfg);

/// Cohesion plus repulsion felt by agent j. Repulsion acts from
/// S(x_j, R_r, alpha_r) and from the closed ball of radius body_size.
/// Throws SingularPair if another agent is closer than body_size / 10 (or
/// coincides with x_j).
Velocity intelligent_velocity_micro(std::size_t j, const AgentSet& agents, const SensingConfig& cfg);

// ---------------------------------------------------------------------------
// Macroscopic kernel

/// Cohesion zone at point x against a density (cells whose centers lie in the
/// cone, visited by increasing distance, mass accumulated until it would
/// exceed p).
CohesionZone cohesion_zone_macro(Vec2 x, const GridMeasure& density, Vec2 axis,
                                 const SensingConfig& cfg);

/// Midpoint-rule quadrature of the cohesion and repulsion integrals at x.
/// The cell containing x is left out of the repulsion sum.
Velocity intelligent_velocity_macro(Vec2 x, const GridMeasure& density, Vec2 axis,
                                    const SensingConfig& cfg);

/// Same, with cohesion read from one density and repulsion from another.
Velocity intelligent_velocity_macro(Vec2 x, const GridMeasure& cohesion_density,
                                    const GridMeasure& repulsion_density, Vec2 axis,
                                    const SensingConfig& cfg);

/// Stencil-based evaluator at cell centers. Offsets and their kernel weights
/// are precomputed once per (grid, config); results agree with
/// intelligent_velocity_macro at cell centers.
class MacroKernel {
 public:
  MacroKernel(const GridSpec& grid, const SensingConfig& cfg);

  Velocity evaluate(int i, int j, Vec2 axis, const GridMeasure& cohesion_density,
                    const GridMeasure& repulsion_density) const;

  const SensingConfig& config() const { return cfg_; }

 private:
  struct Offset {
    int di = 0, dj = 0;
    std::int64_t dist2 = 0;  // in cell units, exact
    double r = 0.0;
    Vec2 d;                  // world-space offset
  };

  GridSpec grid_;
  SensingConfig cfg_;
  std::vector<Offset> repulsion_;
  std::vector<Offset> cohesion_;  // sorted by dist2
};

}  // namespace ipsim
