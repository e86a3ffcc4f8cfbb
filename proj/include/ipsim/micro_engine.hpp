#pragma once

#include <optional>

#include "ipsim/agents.hpp"
#include "ipsim/field.hpp"
#include "ipsim/kernel.hpp"

namespace ipsim {

inline constexpr int kMaxSeparationSweeps = 100;

/// Pushes every pair closer than ell apart symmetrically along the line
/// joining them, to distance exactly ell, sweeping pairs in index order until
/// none violates ell * (1 - 1e-9). Throws SeparationFailure after
/// kMaxSeparationSweeps sweeps.
AgentSet enforce_separation(AgentSet agents, double ell);

struct MicroStepResult {
  AgentSet agents;
  double max_displacement = 0.0;
  /// Same, measured in the frame moving with the external velocity.
  double max_relative_displacement = 0.0;
};

/// Synchronous explicit Euler step: all velocities w + nu are taken from the
/// input configuration, positions advance by v dt, then the body-size
/// separation is enforced. When `bounds` is given positions are clamped
/// into it after both phases.
MicroStepResult step_agents(const AgentSet& agents, const SensingConfig& cfg,
                            const ExternalVelocity& w, double dt,
                            const std::optional<Rect>& bounds = std::nullopt);

/// Minimum pairwise distance (infinity for N < 2).
double min_pair_distance(const AgentSet& agents);

/// Equilibrium detector: true once the largest per-agent displacement stays
/// below `threshold` for `window` consecutive steps.
class EquilibriumDetector {
 public:
  EquilibriumDetector(double threshold, int window) : threshold_(threshold), window_(window) {}
  bool update(double max_displacement);
  bool reached() const { return streak_ >= window_; }
  int streak() const { return streak_; }

 private:
  double threshold_;
  int window_;
  int streak_ = 0;
};

}  // namespace ipsim
