#include "ipsim/grid.hpp"

#include <algorithm>
#include <cmath>

#include "ipsim/errors.hpp"

namespace ipsim {

std::array<int, 2> GridSpec::locate(Vec2 p) const {
  const int i = static_cast<int>(std::floor((p.x - origin.x) / h));
  const int j = static_cast<int>(std::floor((p.y - origin.y) / h));
  return {std::clamp(i, 0, nx - 1), std::clamp(j, 0, ny - 1)};
}

GridSpec grid_for(const Rect& bounds, double h) {
  if (!(h > 0.0)) throw SimError(ErrorKind::InvalidDomain, "cell size must be positive");
  const double fx = bounds.width() / h;
  const double fy = bounds.height() / h;
  const double rx = std::round(fx), ry = std::round(fy);
  if (rx < 1 || ry < 1 || std::abs(fx - rx) > 1e-9 * rx || std::abs(fy - ry) > 1e-9 * ry) {
    throw SimError(ErrorKind::InvalidDomain, "grid does not cover the domain bounds exactly");
  }
  return GridSpec{static_cast<int>(rx), static_cast<int>(ry), h, {bounds.x0, bounds.y0}};
}

GridTopology::GridTopology(const Domain& domain, const GridSpec& spec)
    : spec_(spec), obstacle_(spec.size(), 0), faces_(spec.size()) {
  for (int j = 0; j < spec.ny; ++j) {
    for (int i = 0; i < spec.nx; ++i) {
      obstacle_[spec.index(i, j)] = domain.point_in_obstacle(spec.center(i, j)) ? 1 : 0;
    }
  }
  auto to_kind = [](BoundaryLabel l) {
    switch (l) {
      case BoundaryLabel::Target: return FaceKind::Target;
      case BoundaryLabel::Inflow: return FaceKind::Inflow;
      case BoundaryLabel::Wall: break;
    }
    return FaceKind::Wall;
  };
  for (int j = 0; j < spec.ny; ++j) {
    for (int i = 0; i < spec.nx; ++i) {
      auto& f = faces_[spec.index(i, j)];
      const Rect c = spec.cell(i, j);
      for (int d = 0; d < 4; ++d) {
        const int ni = i + kDirOffset[d][0], nj = j + kDirOffset[d][1];
        if (spec.in_range(ni, nj)) {
          f[d] = obstacle_[spec.index(ni, nj)] ? FaceKind::Obstacle : FaceKind::Interior;
          continue;
        }
        switch (d) {
          case East: f[d] = to_kind(domain.face_label(Edge::Right, c.y0, c.y1)); break;
          case West: f[d] = to_kind(domain.face_label(Edge::Left, c.y0, c.y1)); break;
          case North: f[d] = to_kind(domain.face_label(Edge::Top, c.x0, c.x1)); break;
          default: f[d] = to_kind(domain.face_label(Edge::Bottom, c.x0, c.x1)); break;
        }
      }
    }
  }
}

bool GridTopology::target_adjacent(std::size_t k) const {
  if (obstacle_[k]) return false;
  const auto& f = faces_[k];
  return std::any_of(f.begin(), f.end(), [](FaceKind x) { return x == FaceKind::Target; });
}

GridMeasure::GridMeasure(const GridSpec& spec) : spec_(spec), rho_(spec.size(), 0.0) {}

GridMeasure::GridMeasure(const GridSpec& spec, std::vector<std::uint8_t> obstacle_mask)
    : spec_(spec), rho_(spec.size(), 0.0), obstacle_(std::move(obstacle_mask)) {
  if (!obstacle_.empty() && obstacle_.size() != spec.size()) {
    throw SimError(ErrorKind::GridMismatch, "obstacle mask size does not match grid");
  }
}

double GridMeasure::total_mass() const {
  double s = 0.0;
  for (double r : rho_) s += r;
  return s * spec_.cell_area();
}

double GridMeasure::max_density() const {
  return rho_.empty() ? 0.0 : *std::max_element(rho_.begin(), rho_.end());
}

double GridMeasure::min_density() const {
  return rho_.empty() ? 0.0 : *std::min_element(rho_.begin(), rho_.end());
}

}  // namespace ipsim
