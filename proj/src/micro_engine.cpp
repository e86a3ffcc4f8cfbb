#include "ipsim/micro_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ipsim/errors.hpp"

namespace ipsim {

AgentSet enforce_separation(AgentSet agents, double ell) {
  if (!(ell >= 0.0)) throw SimError(ErrorKind::InvalidArgument, "body size must be non-negative");
  if (ell == 0.0) return agents;
  const double accept = ell * (1.0 - 1e-9);
  auto& x = agents.positions;
  const std::size_t n = x.size();
  for (int sweep = 0; sweep < kMaxSeparationSweeps; ++sweep) {
    bool violated = false;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        const Vec2 d = x[b] - x[a];
        const double r = norm(d);
        if (r >= accept) continue;
        violated = true;
        const Vec2 dir = r > 0.0 ? d / r : Vec2{1.0, 0.0};
        const Vec2 push = (0.5 * (ell - r)) * dir;
        x[a] -= push;
        x[b] += push;
      }
    }
    if (!violated) return agents;
  }
  if (min_pair_distance(agents) >= accept) return agents;
  std::ostringstream os;
  os << "pairs still closer than " << ell << " after " << kMaxSeparationSweeps << " sweeps";
  throw SimError(ErrorKind::SeparationFailure, os.str());
}

double min_pair_distance(const AgentSet& agents) {
  double best = std::numeric_limits<double>::infinity();
  const auto& x = agents.positions;
  for (std::size_t a = 0; a < x.size(); ++a) {
    for (std::size_t b = a + 1; b < x.size(); ++b) best = std::min(best, norm(x[b] - x[a]));
  }
  return best;
}

namespace {
void clamp_into(AgentSet& agents, const Rect& r) {
  for (auto& p : agents.positions) {
    p.x = std::clamp(p.x, r.x0, r.x1);
    p.y = std::clamp(p.y, r.y0, r.y1);
  }
}
}  // namespace

MicroStepResult step_agents(const AgentSet& agents, const SensingConfig& cfg,
                            const ExternalVelocity& w, double dt, const std::optional<Rect>& bounds) {
  const std::size_t n = agents.size();
  std::vector<Vec2> velocity(n), drift(n);
  for (std::size_t j = 0; j < n; ++j) {
    drift[j] = w.sample(agents.positions[j]);
    velocity[j] = drift[j] + intelligent_velocity_micro(j, agents, cfg);
  }
  AgentSet next = agents;
  for (std::size_t j = 0; j < n; ++j) next.positions[j] += dt * velocity[j];
  if (bounds) clamp_into(next, *bounds);
  next = enforce_separation(std::move(next), cfg.body_size);
  if (bounds) clamp_into(next, *bounds);

  MicroStepResult out{std::move(next), 0.0};
  for (std::size_t j = 0; j < n; ++j) {
    const Vec2 moved = out.agents.positions[j] - agents.positions[j];
    out.max_displacement = std::max(out.max_displacement, norm(moved));
    out.max_relative_displacement = std::max(out.max_relative_displacement, norm(moved - dt * drift[j]));
  }
  return out;
}

bool EquilibriumDetector::update(double max_displacement) {
  streak_ = max_displacement < threshold_ ? streak_ + 1 : 0;
  return reached();
}

}  // namespace ipsim
