#include "ipsim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ipsim/errors.hpp"

namespace ipsim {

GridMeasure initial_density(const PopulationSpec& pop, const GridTopology& topology) {
  const GridSpec& g = topology.spec();
  GridMeasure m(g, topology.obstacle_mask());
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (topology.is_obstacle(i, j)) continue;
      const Vec2 c = g.center(i, j);
      for (const auto& d : pop.patches) {
        const bool inside = d.shape == DensityPatch::Shape::Rect
                                ? d.rect.contains(c)
                                : norm2(c - d.center) <= d.radius * d.radius;
        if (inside) m.at(i, j) += d.density;
      }
    }
  }
  return m;
}

AgentSet initial_agents(const PopulationSpec& pop, std::uint64_t seed) {
  const LatticeSpec& L = pop.lattice;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-L.jitter, L.jitter);
  const bool hex = L.kind == LatticeSpec::Kind::Hex;
  const double row = hex ? std::sqrt(3.0) / 2.0 : 1.0;
  const double cx = 0.5 * (L.nx - 1 + (hex ? 0.5 : 0.0)), cy = 0.5 * (L.ny - 1) * row;
  std::vector<Vec2> pos;
  pos.reserve(static_cast<std::size_t>(L.nx) * static_cast<std::size_t>(L.ny));
  for (int j = 0; j < L.ny; ++j) {
    for (int i = 0; i < L.nx; ++i) {
      const double u = i + (hex && (j % 2) ? 0.5 : 0.0) - cx;
      const double v = j * row - cy;
      const double jx = L.jitter > 0.0 ? jitter(rng) : 0.0;
      const double jy = L.jitter > 0.0 ? jitter(rng) : 0.0;
      pos.push_back({L.center.x + (u + jx) * L.spacing, L.center.y + (v + jy) * L.spacing});
    }
  }
  return AgentSet(std::move(pos), pop.axis);
}

Simulation::Simulation(Scenario scenario) : scenario_(std::move(scenario)) {
  scenario_.validate();
  const Scenario& s = scenario_;
  const bool needs_field = std::any_of(s.populations.begin(), s.populations.end(),
                                       [](const PopulationSpec& p) { return p.velocity == VelocityMode::Field; });

  if (s.scale == Scale::Macro) {
    const GridSpec grid = grid_for(s.domain.bounds, s.h);
    if (needs_field) field_ = std::make_shared<const PotentialField>(solve_potential(s.domain, grid, s.solver));
    const GridTopology topo(s.domain, grid);
    std::mt19937_64 rng(s.seed);
    for (const auto& spec : s.populations) {
      MacroPopulation pop;
      pop.measure = initial_density(spec, topo);
      if (spec.velocity == VelocityMode::Field) pop.external.field = field_;
      pop.external.fixed = spec.w_fixed;
      pop.cfg = spec.cfg;
      pop.repulsion_source = spec.repulsion_source;
      pop.other = spec.other;
      pop.absorbing = spec.absorbing;
      pop.ledger.initial = pop.measure.total_mass();
      std::vector<InflowProfile> profiles;
      for (const auto& in : spec.inflows) {
        InflowProfile prof{in.segment, in.density, in.waveform, {}};
        if (in.jitter > 0.0) {
          std::uniform_real_distribution<double> U(1.0 - in.jitter, 1.0 + in.jitter);
          const auto cells = inflow_cells(s.domain, grid, in.segment);
          prof.weights.resize(cells.size());
          for (auto& wgt : prof.weights) wgt = U(rng);
        }
        profiles.push_back(std::move(prof));
      }
      profiles_.push_back(std::move(profiles));
      pops_.push_back(std::move(pop));
    }
    engine_ = std::make_unique<MacroEngine>(s.domain, grid, pops_);
  } else {
    const PopulationSpec& spec = s.populations.front();
    if (needs_field) {
      const GridSpec grid = grid_for(s.domain.bounds, s.h);
      field_ = std::make_shared<const PotentialField>(solve_potential(s.domain, grid, s.solver));
      micro_w_.field = field_;
    }
    micro_w_.fixed = spec.w_fixed;
    agents_ = enforce_separation(initial_agents(spec, s.seed), spec.cfg.body_size);
    detector_.emplace(s.schedule.equilibrium_tol * spec.cfg.body_size, s.schedule.equilibrium_window);
  }
}

bool Simulation::finished() const {
  if (step_ >= scenario_.schedule.steps) return true;
  return scenario_.schedule.stop_at_equilibrium && equilibrium_step_.has_value();
}

void Simulation::step() {
  const double dt = scenario_.schedule.dt;
  if (is_macro()) {
    const double t = time();
    for (std::size_t k = 0; k < pops_.size(); ++k)
      for (const auto& prof : profiles_[k]) inject_boundary(pops_[k], prof, scenario_.domain, t);
    pops_ = engine_->step(pops_, dt);
    for (auto& pop : pops_)
      if (pop.absorbing) absorb_at_target(pop, engine_->topology());
  } else {
    const auto& spec = scenario_.populations.front();
    MicroStepResult r = step_agents(agents_, spec.cfg, micro_w_, dt, scenario_.domain.bounds);
    agents_ = std::move(r.agents);
    last_displacement_ = r.max_relative_displacement;
    if (detector_->update(last_displacement_) && !equilibrium_step_) equilibrium_step_ = step_ + 1;
  }
  ++step_;
}

std::vector<MetricValue> Simulation::metrics() const {
  std::vector<MetricValue> out;
  const MetricOptions& m = scenario_.metrics;
  auto suffix = [](std::size_t k) { return "." + std::to_string(k); };
  for (const auto& name : m.names) {
    if (name == "mass") {
      for (std::size_t k = 0; k < pops_.size(); ++k) {
        const double interior = pops_[k].measure.total_mass();
        out.push_back({"mass" + suffix(k), interior});
        out.push_back({"injected" + suffix(k), pops_[k].ledger.injected});
        out.push_back({"absorbed" + suffix(k), pops_[k].ledger.absorbed});
        out.push_back({"ledger_imbalance" + suffix(k), pops_[k].ledger.relative_imbalance(interior)});
      }
    } else if (name == "max_density") {
      for (std::size_t k = 0; k < pops_.size(); ++k) out.push_back({"max_density" + suffix(k), pops_[k].measure.max_density()});
    } else if (name == "components") {
      for (std::size_t k = 0; k < pops_.size(); ++k)
        out.push_back({"components" + suffix(k), static_cast<double>(count_components(pops_[k].measure, m.component_threshold))});
    } else if (name == "lane_alternation") {
      const auto lp = lane_profile(pops_[0].measure, pops_[1].measure, m.lane_col_begin, m.lane_col_end);
      out.push_back({"lane_alternation", static_cast<double>(lp.alternation_count)});
    } else if (name == "region_density") {
      for (std::size_t k = 0; k < pops_.size(); ++k)
        out.push_back({"region_density" + suffix(k), region_mean_density(pops_[k].measure, m.region)});
    } else if (name == "crystal") {
      if (agents_.size() >= 3) {
        try {
          const CrystalScore c = crystal_score(agents_);
          out.push_back({"six_neighbor_fraction", c.six_neighbor_fraction});
          out.push_back({"nn_distance_cv", c.nn_distance_cv});
        } catch (const SimError& e) {
          if (e.kind() != ErrorKind::DegenerateHull) throw;
        }
      }
    } else if (name == "collinearity") {
      if (agents_.size() >= 3) {
        const Collinearity c = collinearity(agents_);
        out.push_back({"collinearity", c.ratio});
        out.push_back({"principal_bearing_deg", c.bearing_deg});
      }
    } else if (name == "displacement") {
      out.push_back({"max_displacement", last_displacement_});
    }
  }
  return out;
}

AngleHistogram Simulation::angle_histogram() const {
  const MetricOptions& m = scenario_.metrics;
  if (is_macro() || static_cast<int>(agents_.size()) <= m.angle_neighbors) return make_angle_histogram(m.angle_bin);
  return angle_distribution(agents_, m.angle_neighbors, m.angle_bin);
}

}  // namespace ipsim
