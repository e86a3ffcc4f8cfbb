#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "ipsim/geometry.hpp"
#include "ipsim/grid.hpp"

namespace ipsim {

enum class SweepOrder { RedBlack, Lexicographic };

struct PotentialSolverOptions {
  double tol = 1e-10;     // max-norm residual of the discrete Laplacian
  int max_iters = 200000;
  double omega = 1.7;     // SOR relaxation; 1 gives plain Gauss-Seidel
  SweepOrder order = SweepOrder::RedBlack;
  friend bool operator==(const PotentialSolverOptions&, const PotentialSolverOptions&) = default;
};

/// Gradients below this norm give w = 0.
inline constexpr double kGradientEpsilon = 1e-12;

/// Cell-centered harmonic potential with its normalized gradient.
///
/// Boundary data: u = 1 across target faces, u = 0 across wall faces, and a
/// mirrored ghost value (zero normal derivative) across obstacle and inflow
/// faces. Dirichlet data sit on the face, half a cell from the center.
class PotentialField {
 public:
  PotentialField() = default;
  /// Wraps an existing potential; w is derived immediately.
  PotentialField(GridTopology topology, std::vector<double> u);

  const GridSpec& grid() const { return topology_.spec(); }
  const GridTopology& topology() const { return topology_; }
  const std::vector<double>& u() const { return u_; }
  double u(int i, int j) const { return u_[grid().index(i, j)]; }
  Vec2 w(int i, int j) const { return w_[grid().index(i, j)]; }
  Vec2 w(std::size_t k) const { return w_[k]; }
  const std::vector<Vec2>& w() const { return w_; }
  /// w at the cell containing p.
  Vec2 sample(Vec2 p) const;

  int iterations = 0;
  double residual = 0.0;

 private:
  GridTopology topology_;
  std::vector<double> u_;
  std::vector<Vec2> w_;
};

/// External velocity of a population: either a solved potential field or a
/// constant vector.
struct ExternalVelocity {
  std::shared_ptr<const PotentialField> field;
  Vec2 fixed{1.0, 0.0};

  Vec2 at(std::size_t cell) const { return field ? field->w(cell) : fixed; }
  Vec2 sample(Vec2 p) const { return field ? field->sample(p) : fixed; }
};

/// Solves the 5-point Laplace problem by red-black (or lexicographic) SOR
/// until the discrete residual is below opts.tol.
/// Throws InvalidDomain without a target segment or when an obstacle is
/// narrower than two cells, NonConvergence after opts.max_iters sweeps.
PotentialField solve_potential(const Domain& domain, const GridSpec& grid,
                               const PotentialSolverOptions& opts = {});

/// Central-difference gradient normalized to unit length; one-sided next to
/// open Neumann faces, zero normal component next to obstacles, and the zero
/// vector when |grad u| < kGradientEpsilon.
Vec2 external_velocity(const PotentialField& field, int i, int j);

/// Max over free cells of |Δ_h u| recomputed from scratch.
double laplace_residual(const GridTopology& topology, const std::vector<double>& u);

/// Rows "i,j,x,y,u,wx,wy" in row-major order (j outer).
void write_field_csv(const PotentialField& field, std::ostream& os);

}  // namespace ipsim
