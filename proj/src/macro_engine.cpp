#include "ipsim/macro_engine.hpp"

#include <algorithm>
#include <cmath>

#include "ipsim/errors.hpp"

namespace ipsim {

bool InflowWaveform::active(double t) const {
  if (kind == Kind::Constant) return true;
  double phase = std::fmod(t, period);
  if (phase < 0.0) phase += period;
  // Absorb roundoff in t = n * dt so that step boundaries land where expected.
  const double eps = 1e-9 * period;
  if (period - phase <= eps) phase = 0.0;
  return phase + eps < duty * period;
}

double MassLedger::relative_imbalance(double interior) const {
  const double scale = std::max({initial, injected, interior, absorbed, 1e-300});
  return std::abs(imbalance(interior)) / scale;
}

Vec2 project_velocity(const GridTopology& topology, int i, int j, Vec2 v) {
  const auto& f = topology.faces(topology.spec().index(i, j));
  if (v.x > 0.0 && blocks_transport(f[East])) v.x = 0.0;
  if (v.x < 0.0 && blocks_transport(f[West])) v.x = 0.0;
  if (v.y > 0.0 && blocks_transport(f[North])) v.y = 0.0;
  if (v.y < 0.0 && blocks_transport(f[South])) v.y = 0.0;
  if (v.x != 0.0 && v.y != 0.0) {
    const int di = v.x > 0.0 ? 1 : -1, dj = v.y > 0.0 ? 1 : -1;
    const GridSpec& g = topology.spec();
    if (g.in_range(i + di, j + dj) && topology.is_obstacle(i + di, j + dj)) {
      // Corner of an obstacle: slide along the dominant direction.
      if (std::abs(v.x) >= std::abs(v.y)) {
        v.y = 0.0;
      } else {
        v.x = 0.0;
      }
    }
  }
  return v;
}

PushResult push_forward(const GridMeasure& density, std::span<const Vec2> velocity, double dt,
                        const GridTopology& topology) {
  const GridSpec& g = density.spec();
  if (velocity.size() != g.size() || !(topology.spec() == g)) {
    throw SimError(ErrorKind::GridMismatch, "velocity/topology do not match the density grid");
  }
  PushResult out{GridMeasure(g, density.obstacle_mask()), 0.0};
  std::vector<double>& next = out.measure.rho();
  const double h = g.h;
  const Rect local{0.0, 0.0, h, h};
  const double inv_area = 1.0 / g.cell_area();

  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      const double rho = density[k];
      if (rho == 0.0) continue;
      const Vec2 s = project_velocity(topology, i, j, velocity[k]) * dt;
      const int mx0 = static_cast<int>(std::floor(s.x / h));
      const int mx1 = static_cast<int>(std::ceil((s.x + h) / h)) - 1;
      const int my0 = static_cast<int>(std::floor(s.y / h));
      const int my1 = static_cast<int>(std::ceil((s.y + h) / h)) - 1;
      double kept = 0.0;
      for (int my = my0; my <= my1; ++my) {
        for (int mx = mx0; mx <= mx1; ++mx) {
          const Rect dest{mx * h, my * h, (mx + 1) * h, (my + 1) * h};
          const double area = cell_overlap_volume(dest, local, s);
          if (area <= 0.0) continue;
          const double mass_density = rho * area * inv_area;
          const int ni = i + mx, nj = j + my;
          if (!g.in_range(ni, nj)) {
            out.outflow += mass_density * g.cell_area();
          } else if (topology.is_obstacle(ni, nj)) {
            kept += mass_density;
          } else {
            next[g.index(ni, nj)] += mass_density;
          }
        }
      }
      next[k] += kept;
    }
  }
  return out;
}

std::vector<std::size_t> inflow_cells(const Domain& domain, const GridSpec& grid,
                                      const std::string& segment) {
  const BoundarySegment* seg = domain.find_segment(segment);
  if (!seg || seg->label != BoundaryLabel::Inflow) {
    throw SimError(ErrorKind::UnknownSegment, "'" + segment + "' is not an inflow segment");
  }
  std::vector<std::size_t> cells;
  const bool vertical = seg->edge == Edge::Left || seg->edge == Edge::Right;
  const int n = vertical ? grid.ny : grid.nx;
  for (int t = 0; t < n; ++t) {
    int i = 0, j = 0;
    switch (seg->edge) {
      case Edge::Left: i = 0; j = t; break;
      case Edge::Right: i = grid.nx - 1; j = t; break;
      case Edge::Bottom: i = t; j = 0; break;
      case Edge::Top: i = t; j = grid.ny - 1; break;
    }
    const Vec2 c = grid.center(i, j);
    const double along = vertical ? c.y : c.x;
    if (along >= seg->from && along <= seg->to && !domain.point_in_obstacle(c)) {
      cells.push_back(grid.index(i, j));
    }
  }
  return cells;
}

double inject_boundary(MacroPopulation& pop, const InflowProfile& profile, const Domain& domain,
                       double t) {
  const GridSpec& g = pop.measure.spec();
  const auto cells = inflow_cells(domain, g, profile.segment);
  if (!profile.waveform.active(t)) return 0.0;
  double added = 0.0;
  for (std::size_t n = 0; n < cells.size(); ++n) {
    const double w = profile.weights.empty() ? 1.0 : profile.weights[n % profile.weights.size()];
    const double d = profile.density * w;
    pop.measure[cells[n]] += d;
    added += d;
  }
  added *= g.cell_area();
  pop.ledger.injected += added;
  return added;
}

double absorb_at_target(MacroPopulation& pop, const GridTopology& topology) {
  double removed = 0.0;
  auto& rho = pop.measure.rho();
  for (std::size_t k = 0; k < rho.size(); ++k) {
    if (rho[k] != 0.0 && topology.target_adjacent(k)) {
      removed += rho[k];
      rho[k] = 0.0;
    }
  }
  removed *= pop.measure.spec().cell_area();
  pop.ledger.absorbed += removed;
  return removed;
}

MacroEngine::MacroEngine(const Domain& domain, const GridSpec& grid,
                         const std::vector<MacroPopulation>& pops)
    : topology_(domain, grid) {
  kernels_.reserve(pops.size());
  for (const auto& p : pops) {
    if (!(p.measure.spec() == grid)) throw SimError(ErrorKind::GridMismatch, "population grid differs");
    if (p.repulsion_source == RepulsionSource::Other && p.other >= pops.size()) {
      throw SimError(ErrorKind::InvalidArgument, "repulsion source index out of range");
    }
    kernels_.emplace_back(grid, p.cfg);
  }
}

std::vector<std::vector<Vec2>> MacroEngine::velocities(const std::vector<MacroPopulation>& pops) const {
  const GridSpec& g = grid();
  std::vector<std::vector<Vec2>> out(pops.size(), std::vector<Vec2>(g.size()));
  for (std::size_t n = 0; n < pops.size(); ++n) {
    const MacroPopulation& pop = pops[n];
    const GridMeasure& coh = pop.measure;
    const GridMeasure& rep =
        pop.repulsion_source == RepulsionSource::Self ? pop.measure : pops[pop.other].measure;
    const MacroKernel& kernel = kernels_[n];
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const std::size_t k = g.index(i, j);
        if (pop.measure[k] == 0.0 || topology_.is_obstacle(k)) continue;
        const Vec2 w = pop.external.at(k);
        const double wn = norm(w);
        const Vec2 axis = wn > 0.0 ? w / wn : Vec2{1.0, 0.0};
        out[n][k] = w + kernel.evaluate(i, j, axis, coh, rep);
      }
    }
  }
  return out;
}

double MacroEngine::max_speed(const std::vector<MacroPopulation>& pops,
                              const std::vector<std::vector<Vec2>>& velocity) {
  double vmax = 0.0;
  for (std::size_t n = 0; n < pops.size(); ++n) {
    for (std::size_t k = 0; k < velocity[n].size(); ++k) {
      if (pops[n].measure[k] != 0.0) vmax = std::max(vmax, norm(velocity[n][k]));
    }
  }
  return vmax;
}

std::vector<MacroPopulation> MacroEngine::step(const std::vector<MacroPopulation>& pops, double dt) const {
  const auto vel = velocities(pops);
  const double vmax = max_speed(pops, vel);
  const double h = grid().h;
  if (dt * vmax > h * (1.0 + 1e-12)) throw CflViolationError(vmax, dt, h);
  std::vector<MacroPopulation> next = pops;
  for (std::size_t n = 0; n < pops.size(); ++n) {
    PushResult r = push_forward(pops[n].measure, vel[n], dt, topology_);
    next[n].measure = std::move(r.measure);
    next[n].ledger.absorbed += r.outflow;
  }
  return next;
}

}  // namespace ipsim
