#include "ipsim/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ipsim/errors.hpp"

namespace ipsim {

void SensingConfig::validate() const {
  auto fail = [](const char* what) { throw SimError(ErrorKind::InvalidArgument, what); };
  if (!(alpha_c > 0.0 && alpha_c <= kTwoPi)) fail("alpha_c must lie in (0, 2pi]");
  if (!(alpha_r > 0.0 && alpha_r <= kTwoPi)) fail("alpha_r must lie in (0, 2pi]");
  if (!(R_r > 0.0)) fail("R_r must be positive");
  if (!(R_c_max > 0.0)) fail("R_c_max must be positive");
  if (!(p >= 0.0)) fail("p must be non-negative");
  if (!(F_c >= 0.0)) fail("F_c must be non-negative");
  if (!(F_r <= 0.0)) fail("F_r must be non-positive");
  if (!(body_size >= 0.0)) fail("body size must be non-negative");
  if (body_size > 0.0 && !(body_size < R_r)) fail("body size must be smaller than R_r");
}

namespace {

// Angular half of the sector test, with direction d and length r > 0.
inline bool in_cone(Vec2 d, double r, Vec2 axis, double cos_half, bool full) {
  return full || dot(d, axis) >= (cos_half - kAngularSlack) * r;
}

// Every micro distance goes through here so that an agent compared against a
// radius derived from its own distance sees the identical value.
inline double distance(Vec2 d) { return std::sqrt(norm2(d)); }

void check_axis(Vec2 axis, double angle) {
  if (angle < kTwoPi && std::abs(norm(axis) - 1.0) > 1e-12) {
    throw SimError(ErrorKind::InvalidArgument, "sensing axis must be a unit vector");
  }
}

// Zone against positions[k] for all k != skip.
CohesionZone micro_zone(Vec2 x, Vec2 axis, std::span<const Vec2> positions, std::size_t skip,
                        const SensingConfig& cfg, std::vector<double>& scratch) {
  if (!std::isfinite(cfg.p)) return {cfg.R_c_max, true};
  check_axis(axis, cfg.alpha_c);
  const double kcap = std::floor(cfg.p);
  const bool full = cfg.alpha_c >= kTwoPi;
  const double cos_half = std::cos(0.5 * cfg.alpha_c);
  scratch.clear();
  for (std::size_t k = 0; k < positions.size(); ++k) {
    if (k == skip) continue;
    const Vec2 d = positions[k] - x;
    const double r = distance(d);
    if (r == 0.0 || in_cone(d, r, axis, cos_half, full)) scratch.push_back(r);
  }
  if (static_cast<double>(scratch.size()) <= kcap) return {cfg.R_c_max, true};
  const auto nth = scratch.begin() + static_cast<std::ptrdiff_t>(kcap);
  std::nth_element(scratch.begin(), nth, scratch.end());
  const double limiting = *nth;
  if (limiting > cfg.R_c_max) return {cfg.R_c_max, true};
  return {limiting, false};
}

constexpr std::size_t kNoSkip = static_cast<std::size_t>(-1);

}  // namespace

CohesionZone cohesion_zone_micro(Vec2 x, Vec2 axis, std::span<const Vec2> others,
                                 const SensingConfig& cfg) {
  std::vector<double> scratch;
  return micro_zone(x, axis, others, kNoSkip, cfg, scratch);
}

double cohesion_radius_micro(Vec2 x, Vec2 axis, std::span<const Vec2> others,
                             const SensingConfig& cfg) {
  return cohesion_zone_micro(x, axis, others, cfg).radius;
}

std::vector<std::size_t> cohesion_neighbors(std::size_t j, const AgentSet& agents,
                                            const SensingConfig& cfg) {
  std::vector<double> scratch;
  const Vec2 x = agents.positions[j];
  const Vec2 axis = agents.axes[j];
  const CohesionZone zone = micro_zone(x, axis, agents.positions, j, cfg, scratch);
  const bool full = cfg.alpha_c >= kTwoPi;
  const double cos_half = std::cos(0.5 * cfg.alpha_c);
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < agents.size(); ++k) {
    if (k == j) continue;
    const Vec2 d = agents.positions[k] - x;
    const double r = distance(d);
    if (zone.contains_distance(r) && (r == 0.0 || in_cone(d, r, axis, cos_half, full))) {
      out.push_back(k);
    }
  }
  return out;
}

Velocity intelligent_velocity_micro(std::size_t j, const AgentSet& agents, const SensingConfig& cfg) {
  const Vec2 x = agents.positions[j];
  const Vec2 axis = agents.axes[j];
  check_axis(axis, std::min(cfg.alpha_c, cfg.alpha_r));
  thread_local std::vector<double> scratch;
  const CohesionZone zone =
      cfg.F_c != 0.0 ? micro_zone(x, axis, agents.positions, j, cfg, scratch) : CohesionZone{0.0, false};

  const bool full_c = cfg.alpha_c >= kTwoPi, full_r = cfg.alpha_r >= kTwoPi;
  const double cos_c = std::cos(0.5 * cfg.alpha_c), cos_r = std::cos(0.5 * cfg.alpha_r);
  const double ell = cfg.body_size;
  Vec2 cohesion, repulsion;
  for (std::size_t k = 0; k < agents.size(); ++k) {
    if (k == j) continue;
    const Vec2 d = agents.positions[k] - x;
    const double r2 = norm2(d);
    const double r = distance(d);
    if (r == 0.0 || r < 0.1 * ell) {
      std::ostringstream os;
      os << "agents " << j << " and " << k << " at distance " << r << " (body size " << ell << ")";
      throw SimError(ErrorKind::SingularPair, os.str());
    }
    if (cfg.F_c != 0.0 && zone.contains_distance(r) && in_cone(d, r, axis, cos_c, full_c)) {
      cohesion += d;
    }
    if (cfg.F_r != 0.0 &&
        ((r <= cfg.R_r && in_cone(d, r, axis, cos_r, full_r)) || (ell > 0.0 && r <= ell))) {
      repulsion += d / r2;
    }
  }
  return cfg.F_c * cohesion + cfg.F_r * repulsion;
}

// ---------------------------------------------------------------------------

namespace {

struct Candidate {
  double r;
  Vec2 d;
  double mass;
};

// Relative tolerance for treating two cell distances as tied.
constexpr double kTieTolerance = 1e-9;

std::array<int, 4> cell_window(const GridSpec& g, Vec2 x, double radius) {
  const double reach = std::min(radius, static_cast<double>(std::max(g.nx, g.ny)) * g.h * 2.0);
  const int i0 = std::max(0, static_cast<int>(std::floor((x.x - reach - g.origin.x) / g.h)) - 1);
  const int i1 = std::min(g.nx - 1, static_cast<int>(std::ceil((x.x + reach - g.origin.x) / g.h)) + 1);
  const int j0 = std::max(0, static_cast<int>(std::floor((x.y - reach - g.origin.y) / g.h)) - 1);
  const int j1 = std::min(g.ny - 1, static_cast<int>(std::ceil((x.y + reach - g.origin.y) / g.h)) + 1);
  return {i0, i1, j0, j1};
}

CohesionZone macro_zone(Vec2 x, const GridMeasure& density, Vec2 axis, const SensingConfig& cfg,
                        std::vector<Candidate>* members) {
  const GridSpec& g = density.spec();
  const bool full = cfg.alpha_c >= kTwoPi;
  const double cos_half = std::cos(0.5 * cfg.alpha_c);
  check_axis(axis, cfg.alpha_c);
  std::vector<Candidate> cand;
  const auto [i0, i1, j0, j1] = cell_window(g, x, cfg.R_c_max);
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      const Vec2 d = g.center(i, j) - x;
      const double r = norm(d);
      if (r > cfg.R_c_max) continue;
      if (r != 0.0 && !in_cone(d, r, axis, cos_half, full)) continue;
      cand.push_back({r, d, density.at(i, j) * g.cell_area()});
    }
  }
  if (!std::isfinite(cfg.p)) {
    if (members) *members = std::move(cand);
    return {cfg.R_c_max, true};
  }
  std::stable_sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) { return a.r < b.r; });
  double acc = 0.0;
  std::size_t taken = 0;
  CohesionZone zone{cfg.R_c_max, true};
  while (taken < cand.size()) {
    std::size_t end = taken;
    double group = 0.0;
    const double r0 = cand[taken].r;
    while (end < cand.size() && cand[end].r - r0 <= kTieTolerance * g.h) group += cand[end++].mass;
    if (acc + group > cfg.p) {
      zone = {r0, false};
      break;
    }
    acc += group;
    taken = end;
  }
  if (members) {
    cand.resize(taken);
    *members = std::move(cand);
  }
  return zone;
}

}  // namespace

CohesionZone cohesion_zone_macro(Vec2 x, const GridMeasure& density, Vec2 axis,
                                 const SensingConfig& cfg) {
  return macro_zone(x, density, axis, cfg, nullptr);
}

Velocity intelligent_velocity_macro(Vec2 x, const GridMeasure& density, Vec2 axis,
                                    const SensingConfig& cfg) {
  return intelligent_velocity_macro(x, density, density, axis, cfg);
}

Velocity intelligent_velocity_macro(Vec2 x, const GridMeasure& cohesion_density,
                                    const GridMeasure& repulsion_density, Vec2 axis,
                                    const SensingConfig& cfg) {
  if (!(cohesion_density.spec() == repulsion_density.spec())) {
    throw SimError(ErrorKind::GridMismatch, "cohesion and repulsion densities differ in grid");
  }
  Vec2 cohesion, repulsion;
  if (cfg.F_c != 0.0) {
    std::vector<Candidate> members;
    macro_zone(x, cohesion_density, axis, cfg, &members);
    for (const auto& c : members) cohesion += c.mass * c.d;
  }
  if (cfg.F_r != 0.0) {
    const GridSpec& g = repulsion_density.spec();
    check_axis(axis, cfg.alpha_r);
    const auto self = g.locate(x);
    const bool full = cfg.alpha_r >= kTwoPi;
    const double cos_half = std::cos(0.5 * cfg.alpha_r);
    const auto [i0, i1, j0, j1] = cell_window(g, x, cfg.R_r);
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        if (i == self[0] && j == self[1]) continue;
        const double rho = repulsion_density.at(i, j);
        if (rho == 0.0) continue;
        const Vec2 d = g.center(i, j) - x;
        const double r = norm(d);
        if (r == 0.0 || r > cfg.R_r || !in_cone(d, r, axis, cos_half, full)) continue;
        repulsion += (rho * g.cell_area() / (r * r)) * d;
      }
    }
  }
  return cfg.F_c * cohesion + cfg.F_r * repulsion;
}

// ---------------------------------------------------------------------------

MacroKernel::MacroKernel(const GridSpec& grid, const SensingConfig& cfg) : grid_(grid), cfg_(cfg) {
  cfg_.validate();
  auto build = [&](double radius, bool include_self, std::vector<Offset>& out) {
    const int reach_x = std::min(grid.nx - 1, static_cast<int>(std::ceil(radius / grid.h)));
    const int reach_y = std::min(grid.ny - 1, static_cast<int>(std::ceil(radius / grid.h)));
    for (int dj = -reach_y; dj <= reach_y; ++dj) {
      for (int di = -reach_x; di <= reach_x; ++di) {
        if (di == 0 && dj == 0 && !include_self) continue;
        const Vec2 d{di * grid.h, dj * grid.h};
        const double r = norm(d);
        if (r > radius) continue;
        out.push_back({di, dj, std::int64_t{di} * di + std::int64_t{dj} * dj, r, d});
      }
    }
  };
  if (cfg_.F_r != 0.0) build(cfg_.R_r, false, repulsion_);
  if (cfg_.F_c != 0.0) {
    build(cfg_.R_c_max, true, cohesion_);
    std::stable_sort(cohesion_.begin(), cohesion_.end(),
                     [](const Offset& a, const Offset& b) { return a.dist2 < b.dist2; });
  }
}

Velocity MacroKernel::evaluate(int i, int j, Vec2 axis, const GridMeasure& cohesion_density,
                               const GridMeasure& repulsion_density) const {
  const GridSpec& g = grid_;
  const double area = g.cell_area();
  Vec2 cohesion, repulsion;

  if (!repulsion_.empty()) {
    const bool full = cfg_.alpha_r >= kTwoPi;
    if (!full) check_axis(axis, cfg_.alpha_r);
    const double cos_half = std::cos(0.5 * cfg_.alpha_r);
    const double* rho = repulsion_density.rho().data();
    for (const Offset& o : repulsion_) {
      const int ni = i + o.di, nj = j + o.dj;
      if (ni < 0 || nj < 0 || ni >= g.nx || nj >= g.ny) continue;
      const double m = rho[g.index(ni, nj)];
      if (m == 0.0) continue;
      if (!in_cone(o.d, o.r, axis, cos_half, full)) continue;
      repulsion += (m / (o.r * o.r)) * o.d;
    }
    repulsion *= area;
  }

  if (!cohesion_.empty()) {
    const bool full = cfg_.alpha_c >= kTwoPi;
    if (!full) check_axis(axis, cfg_.alpha_c);
    const double cos_half = std::cos(0.5 * cfg_.alpha_c);
    const double* rho = cohesion_density.rho().data();
    const bool topological = std::isfinite(cfg_.p);
    double acc = 0.0;
    std::size_t k = 0;
    while (k < cohesion_.size()) {
      const std::int64_t d2 = cohesion_[k].dist2;
      double group_mass = 0.0;
      Vec2 group_moment;
      for (; k < cohesion_.size() && cohesion_[k].dist2 == d2; ++k) {
        const Offset& o = cohesion_[k];
        const int ni = i + o.di, nj = j + o.dj;
        if (ni < 0 || nj < 0 || ni >= g.nx || nj >= g.ny) continue;
        const double m = rho[g.index(ni, nj)];
        if (m == 0.0) continue;
        if (o.r != 0.0 && !in_cone(o.d, o.r, axis, cos_half, full)) continue;
        group_mass += m * area;
        group_moment += (m * area) * o.d;
      }
      if (topological && acc + group_mass > cfg_.p) break;
      acc += group_mass;
      cohesion += group_moment;
    }
  }
  return cfg_.F_c * cohesion + cfg_.F_r * repulsion;
}

}  // namespace ipsim
