#include "ipsim/field.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "ipsim/errors.hpp"

namespace ipsim {

namespace {

constexpr double dirichlet_value(FaceKind k) { return k == FaceKind::Target ? 1.0 : 0.0; }
constexpr bool is_dirichlet(FaceKind k) { return k == FaceKind::Target || k == FaceKind::Wall; }

// Sum of neighbor contributions and the diagonal weight of cell k.
template <typename U>
inline void stencil(const GridTopology& topo, const U& u, int i, int j, double& sum, double& diag) {
  const GridSpec& g = topo.spec();
  const auto& faces = topo.faces(g.index(i, j));
  sum = 0.0;
  diag = 0.0;
  for (int d = 0; d < 4; ++d) {
    const FaceKind f = faces[d];
    if (f == FaceKind::Interior) {
      sum += u[g.index(i + kDirOffset[d][0], j + kDirOffset[d][1])];
      diag += 1.0;
    } else if (is_dirichlet(f)) {
      sum += 2.0 * dirichlet_value(f);
      diag += 2.0;
    }
  }
}

}  // namespace

double laplace_residual(const GridTopology& topology, const std::vector<double>& u) {
  const GridSpec& g = topology.spec();
  const double inv_h2 = 1.0 / (g.h * g.h);
  double worst = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (topology.is_obstacle(i, j)) continue;
      double sum, diag;
      stencil(topology, u, i, j, sum, diag);
      if (diag == 0.0) continue;
      worst = std::max(worst, std::abs((sum - diag * u[g.index(i, j)]) * inv_h2));
    }
  }
  return worst;
}

PotentialField solve_potential(const Domain& domain, const GridSpec& grid,
                               const PotentialSolverOptions& opts) {
  domain.validate();
  if (!domain.has_label(BoundaryLabel::Target)) {
    throw SimError(ErrorKind::InvalidDomain, "potential needs at least one target segment");
  }
  for (const Rect& o : domain.obstacles) {
    if (o.width() < 2.0 * grid.h * (1.0 - 1e-9) || o.height() < 2.0 * grid.h * (1.0 - 1e-9)) {
      throw SimError(ErrorKind::InvalidDomain, "obstacle narrower than two grid cells");
    }
  }
  GridTopology topo(domain, grid);
  bool any_target = false;
  for (std::size_t k = 0; k < grid.size() && !any_target; ++k) any_target = topo.target_adjacent(k);
  if (!any_target) throw SimError(ErrorKind::InvalidDomain, "no grid face lies on a target segment");

  std::vector<double> u(grid.size(), 0.0);
  const double omega = opts.omega;
  auto relax = [&](int i, int j) {
    double sum, diag;
    stencil(topo, u, i, j, sum, diag);
    if (diag == 0.0) return;
    double& up = u[grid.index(i, j)];
    up += omega * (sum / diag - up);
  };

  int iter = 0;
  double res = laplace_residual(topo, u);
  while (res > opts.tol) {
    if (iter >= opts.max_iters) {
      std::ostringstream os;
      os << "residual " << res << " > tol " << opts.tol << " after " << iter << " sweeps";
      throw SimError(ErrorKind::NonConvergence, os.str());
    }
    if (opts.order == SweepOrder::RedBlack) {
      for (int color = 0; color < 2; ++color) {
        for (int j = 0; j < grid.ny; ++j) {
          for (int i = (j + color) % 2; i < grid.nx; i += 2) {
            if (!topo.is_obstacle(i, j)) relax(i, j);
          }
        }
      }
    } else {
      for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
          if (!topo.is_obstacle(i, j)) relax(i, j);
        }
      }
    }
    ++iter;
    if (iter % 10 == 0 || iter >= opts.max_iters) res = laplace_residual(topo, u);
  }
  // Roundoff can leave values a few ulps outside the boundary data range.
  for (double& x : u) x = std::clamp(x, 0.0, 1.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (topo.is_obstacle(k)) u[k] = 0.0;
  }

  PotentialField field(std::move(topo), std::move(u));
  field.iterations = iter;
  field.residual = res;
  return field;
}

namespace {

// Gradient component along one axis given the plus/minus faces.
double directional_derivative(const PotentialField& f, int i, int j, Dir plus, Dir minus) {
  const GridTopology& topo = f.topology();
  const GridSpec& g = f.grid();
  const FaceKind fp = topo.face(i, j, plus), fm = topo.face(i, j, minus);
  if (fp == FaceKind::Obstacle || fm == FaceKind::Obstacle) return 0.0;
  const double up = f.u(i, j);
  auto side = [&](Dir d, FaceKind k, double& value, double& dist) {
    if (k == FaceKind::Interior) {
      value = f.u(i + kDirOffset[d][0], j + kDirOffset[d][1]);
      dist = g.h;
      return true;
    }
    if (is_dirichlet(k)) {
      value = dirichlet_value(k);
      dist = 0.5 * g.h;
      return true;
    }
    return false;
  };
  double vp = 0, dp = 0, vm = 0, dm = 0;
  const bool has_p = side(plus, fp, vp, dp);
  const bool has_m = side(minus, fm, vm, dm);
  if (has_p && has_m) return (vp - vm) / (dp + dm);
  if (has_p) return (vp - up) / dp;
  if (has_m) return (up - vm) / dm;
  return 0.0;
}

}  // namespace

Vec2 external_velocity(const PotentialField& field, int i, int j) {
  if (field.topology().is_obstacle(i, j)) return {};
  const Vec2 grad{directional_derivative(field, i, j, East, West),
                  directional_derivative(field, i, j, North, South)};
  const double n = norm(grad);
  if (n < kGradientEpsilon) return {};
  return grad / n;
}

PotentialField::PotentialField(GridTopology topology, std::vector<double> u)
    : topology_(std::move(topology)), u_(std::move(u)) {
  const GridSpec& g = topology_.spec();
  if (u_.size() != g.size()) throw SimError(ErrorKind::GridMismatch, "potential size mismatch");
  w_.assign(g.size(), Vec2{});
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) w_[g.index(i, j)] = external_velocity(*this, i, j);
  }
}

Vec2 PotentialField::sample(Vec2 p) const {
  const auto [i, j] = grid().locate(p);
  return w(i, j);
}

void write_field_csv(const PotentialField& field, std::ostream& os) {
  const GridSpec& g = field.grid();
  os << "i,j,x,y,u,wx,wy\n";
  os.precision(17);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const Vec2 c = g.center(i, j);
      const Vec2 w = field.w(i, j);
      os << i << ',' << j << ',' << c.x << ',' << c.y << ',' << field.u(i, j) << ',' << w.x << ','
         << w.y << '\n';
    }
  }
}

}  // namespace ipsim
