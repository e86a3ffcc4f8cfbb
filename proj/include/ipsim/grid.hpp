#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ipsim/geometry.hpp"

namespace ipsim {

/// Uniform grid of square cells; cell (i, j) covers
/// [origin.x + i h, origin.x + (i+1) h] x [origin.y + j h, origin.y + (j+1) h].
struct GridSpec {
  int nx = 1;
  int ny = 1;
  double h = 1.0;
  Vec2 origin;

  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
  }
  bool in_range(int i, int j) const { return i >= 0 && j >= 0 && i < nx && j < ny; }
  Vec2 center(int i, int j) const { return {origin.x + (i + 0.5) * h, origin.y + (j + 0.5) * h}; }
  Rect cell(int i, int j) const {
    return {origin.x + i * h, origin.y + j * h, origin.x + (i + 1) * h, origin.y + (j + 1) * h};
  }
  Rect bounds() const { return {origin.x, origin.y, origin.x + nx * h, origin.y + ny * h}; }
  double cell_area() const { return h * h; }
  /// Cell containing p (clamped to the grid).
  std::array<int, 2> locate(Vec2 p) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Grid covering `bounds` exactly with cell size h; throws InvalidDomain if
/// the extents are not integer multiples of h.
GridSpec grid_for(const Rect& bounds, double h);

/// What lies across one face of a cell.
enum class FaceKind : std::uint8_t {
  Interior,  // another free cell
  Obstacle,  // obstacle cell (Neumann, blocks transport)
  Target,    // outer boundary labeled target (Dirichlet u = 1, open)
  Wall,      // outer boundary labeled wall (Dirichlet u = 0, blocks transport)
  Inflow,    // outer boundary labeled inflow (Neumann, open)
};

enum Dir : int { East = 0, West = 1, North = 2, South = 3 };

inline constexpr std::array<std::array<int, 2>, 4> kDirOffset{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

constexpr bool blocks_transport(FaceKind k) { return k == FaceKind::Obstacle || k == FaceKind::Wall; }
constexpr bool is_boundary_open(FaceKind k) { return k == FaceKind::Target || k == FaceKind::Inflow; }

/// Cell classification of a domain on a grid: obstacle mask plus the kind of
/// each of the four faces of every cell.
class GridTopology {
 public:
  GridTopology() = default;
  GridTopology(const Domain& domain, const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  bool is_obstacle(int i, int j) const { return obstacle_[spec_.index(i, j)] != 0; }
  bool is_obstacle(std::size_t k) const { return obstacle_[k] != 0; }
  FaceKind face(int i, int j, Dir d) const { return faces_[spec_.index(i, j)][d]; }
  const std::array<FaceKind, 4>& faces(std::size_t k) const { return faces_[k]; }
  /// Free cell with at least one target face.
  bool target_adjacent(std::size_t k) const;
  const std::vector<std::uint8_t>& obstacle_mask() const { return obstacle_; }

 private:
  GridSpec spec_;
  std::vector<std::uint8_t> obstacle_;
  std::vector<std::array<FaceKind, 4>> faces_;
};

/// Piecewise-constant density on a grid. Obstacle cells hold zero density.
class GridMeasure {
 public:
  GridMeasure() = default;
  explicit GridMeasure(const GridSpec& spec);
  GridMeasure(const GridSpec& spec, std::vector<std::uint8_t> obstacle_mask);

  const GridSpec& spec() const { return spec_; }
  std::size_t size() const { return rho_.size(); }
  double& at(int i, int j) { return rho_[spec_.index(i, j)]; }
  double at(int i, int j) const { return rho_[spec_.index(i, j)]; }
  double& operator[](std::size_t k) { return rho_[k]; }
  double operator[](std::size_t k) const { return rho_[k]; }
  std::vector<double>& rho() { return rho_; }
  const std::vector<double>& rho() const { return rho_; }
  const std::vector<std::uint8_t>& obstacle_mask() const { return obstacle_; }
  bool is_obstacle(std::size_t k) const { return !obstacle_.empty() && obstacle_[k] != 0; }

  /// Sum of rho * h^2.
  double total_mass() const;
  double max_density() const;
  double min_density() const;

 private:
  GridSpec spec_;
  std::vector<double> rho_;
  std::vector<std::uint8_t> obstacle_;
};

}  // namespace ipsim
