#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ipsim/agents.hpp"
#include "ipsim/grid.hpp"

namespace ipsim {

/// Bearings of neighbor pairs, in degrees measured counter-clockwise from
/// the x axis. Bin b is centered on b * bin_width and covers
/// [b w - w/2, b w + w/2), wrapping at 360.
struct AngleHistogram {
  double bin_width = 5.0;
  std::vector<std::int64_t> counts;

  std::int64_t total() const;
  double bin_center(std::size_t b) const { return static_cast<double>(b) * bin_width; }
  std::size_t bin_of(double degrees) const;
  AngleHistogram& operator+=(const AngleHistogram& other);
  friend bool operator==(const AngleHistogram&, const AngleHistogram&) = default;
};

AngleHistogram make_angle_histogram(double bin_width = 5.0);

/// Bearings from every agent to each of its k nearest neighbors.
AngleHistogram angle_distribution(const AgentSet& agents, int k_neighbors = 6, double bin_width = 5.0);

struct CrystalScore {
  double six_neighbor_fraction = 0.0;  // over interior agents
  double nn_distance_cv = 0.0;         // over all agents
  std::size_t interior_count = 0;
};

/// Interior agents lie farther than the median nearest-neighbor distance
/// from the convex hull boundary; neighbors are counted within 1.5 times
/// that median. Throws DegenerateHull if all agents are collinear.
CrystalScore crystal_score(const AgentSet& agents);

struct Collinearity {
  double ratio = 1.0;        // share of variance on the principal axis, in [1/2, 1]
  double bearing_deg = 0.0;  // principal axis direction in [0, 180)
};

Collinearity collinearity(const AgentSet& agents);

struct LaneProfile {
  std::vector<double> profile;  // one value per grid row
  int alternation_count = 0;
};

/// Row profile of rho1 - rho2 averaged over columns [col_begin, col_end).
/// Values below 5 % of the profile's largest magnitude are ignored when
/// counting sign changes. Throws GridMismatch for differing grids.
LaneProfile lane_profile(const GridMeasure& rho1, const GridMeasure& rho2, int col_begin, int col_end);

struct WeightedSample {
  double x = 0.0;
  double weight = 1.0;
};

/// Exact W1 between two weighted point sets on the line, as the integral of
/// the absolute difference of their cumulative distributions. Throws
/// MassMismatch unless the total weights agree to 1e-9 relative, and
/// InvalidArgument for non-positive weights.
double wasserstein_1d(std::span<const WeightedSample> mu1, std::span<const WeightedSample> mu2);

/// W1 between two equal-size planar point clouds with unit weights, solved
/// as an optimal assignment (Hungarian method). Throws MassMismatch for
/// different sizes.
double wasserstein_2d_assignment(std::span<const Vec2> a, std::span<const Vec2> b);

/// Discrete L1 distance of two sampled densities on a common 1-D grid.
double l1_distance(std::span<const double> rho1, std::span<const double> rho2, double dx);

/// Number of 4-connected groups of cells with rho above
/// threshold_fraction * max rho.
int count_components(const GridMeasure& density, double threshold_fraction = 0.1);

/// Mean density over the cells whose centers lie in `region`.
double region_mean_density(const GridMeasure& density, const Rect& region);

/// Nearest-neighbor distance of every agent (brute force).
std::vector<double> nearest_neighbor_distances(const AgentSet& agents);

}  // namespace ipsim
