#include "ipsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "ipsim/errors.hpp"

namespace ipsim {

std::int64_t AngleHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

std::size_t AngleHistogram::bin_of(double degrees) const {
  const auto n = counts.size();
  double shifted = std::fmod(degrees + 0.5 * bin_width, 360.0);
  if (shifted < 0.0) shifted += 360.0;
  auto b = static_cast<std::size_t>(std::floor(shifted / bin_width));
  return b >= n ? b % n : b;
}

AngleHistogram& AngleHistogram::operator+=(const AngleHistogram& other) {
  if (other.counts.size() != counts.size() || other.bin_width != bin_width) {
    throw SimError(ErrorKind::InvalidArgument, "histograms use different bins");
  }
  for (std::size_t b = 0; b < counts.size(); ++b) counts[b] += other.counts[b];
  return *this;
}

AngleHistogram make_angle_histogram(double bin_width) {
  const double nb = std::round(360.0 / bin_width);
  if (!(bin_width > 0.0) || std::abs(nb * bin_width - 360.0) > 1e-9) {
    throw SimError(ErrorKind::InvalidArgument, "bin width must divide 360 degrees");
  }
  return {bin_width, std::vector<std::int64_t>(static_cast<std::size_t>(nb), 0)};
}

AngleHistogram angle_distribution(const AgentSet& agents, int k_neighbors, double bin_width) {
  AngleHistogram hist = make_angle_histogram(bin_width);
  const auto& x = agents.positions;
  const std::size_t n = x.size();
  if (k_neighbors < 1 || n <= static_cast<std::size_t>(k_neighbors)) {
    throw SimError(ErrorKind::InvalidArgument, "need more agents than neighbors per agent");
  }
  std::vector<std::pair<double, std::size_t>> by_distance;
  const auto k = static_cast<std::ptrdiff_t>(k_neighbors);
  for (std::size_t j = 0; j < n; ++j) {
    by_distance.clear();
    for (std::size_t m = 0; m < n; ++m) {
      if (m != j) by_distance.emplace_back(norm2(x[m] - x[j]), m);
    }
    std::partial_sort(by_distance.begin(), by_distance.begin() + k, by_distance.end());
    for (std::ptrdiff_t q = 0; q < k; ++q) {
      const Vec2 d = x[by_distance[static_cast<std::size_t>(q)].second] - x[j];
      const double deg = std::atan2(d.y, d.x) * 180.0 / kPi;
      ++hist.counts[hist.bin_of(deg)];
    }
  }
  return hist;
}

std::vector<double> nearest_neighbor_distances(const AgentSet& agents) {
  const auto& x = agents.positions;
  std::vector<double> nn(x.size(), std::numeric_limits<double>::infinity());
  for (std::size_t a = 0; a < x.size(); ++a) {
    for (std::size_t b = a + 1; b < x.size(); ++b) {
      const double r = norm(x[b] - x[a]);
      nn[a] = std::min(nn[a], r);
      nn[b] = std::min(nn[b], r);
    }
  }
  return nn;
}

namespace {

double cross(Vec2 o, Vec2 a, Vec2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

// Andrew's monotone chain; counter-clockwise, no repeated first vertex.
std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Vec2& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = norm2(ab);
  const double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
  return norm(p - (a + t * ab));
}

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

CrystalScore crystal_score(const AgentSet& agents) {
  const auto& x = agents.positions;
  if (x.size() < 3) throw SimError(ErrorKind::DegenerateHull, "fewer than three agents");
  const auto hull = convex_hull(x);
  double hull_area = 0.0;
  for (std::size_t e = 0; e < hull.size(); ++e) {
    const Vec2 a = hull[e], b = hull[(e + 1) % hull.size()];
    hull_area += a.x * b.y - b.x * a.y;
  }
  if (hull.size() < 3 || std::abs(hull_area) == 0.0) {
    throw SimError(ErrorKind::DegenerateHull, "agents are collinear");
  }

  const auto nn = nearest_neighbor_distances(agents);
  const double med = median(nn);
  const double mean = std::accumulate(nn.begin(), nn.end(), 0.0) / static_cast<double>(nn.size());
  double var = 0.0;
  for (double d : nn) var += (d - mean) * (d - mean);
  var /= static_cast<double>(nn.size());

  CrystalScore out;
  out.nn_distance_cv = mean > 0.0 ? std::sqrt(var) / mean : 0.0;
  const double reach = 1.5 * med;
  std::size_t six = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    double boundary = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < hull.size(); ++e) {
      boundary = std::min(boundary, segment_distance(x[j], hull[e], hull[(e + 1) % hull.size()]));
    }
    if (!(boundary > med)) continue;
    ++out.interior_count;
    int neighbors = 0;
    for (std::size_t m = 0; m < x.size(); ++m) {
      if (m != j && norm(x[m] - x[j]) <= reach) ++neighbors;
    }
    if (neighbors == 6) ++six;
  }
  out.six_neighbor_fraction =
      out.interior_count ? static_cast<double>(six) / static_cast<double>(out.interior_count) : 0.0;
  return out;
}

Collinearity collinearity(const AgentSet& agents) {
  const auto& x = agents.positions;
  if (x.size() < 3) throw SimError(ErrorKind::InvalidArgument, "collinearity needs at least 3 agents");
  Vec2 mean;
  for (const Vec2& p : x) mean += p;
  mean = mean / static_cast<double>(x.size());
  double sxx = 0, syy = 0, sxy = 0;
  for (const Vec2& p : x) {
    const Vec2 d = p - mean;
    sxx += d.x * d.x;
    syy += d.y * d.y;
    sxy += d.x * d.y;
  }
  const double tr = sxx + syy;
  if (tr == 0.0) return {1.0, 0.0};
  const double disc = std::sqrt(0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy);
  const double lmax = 0.5 * tr + disc;
  double bearing = 0.5 * std::atan2(2.0 * sxy, sxx - syy) * 180.0 / kPi;
  if (bearing < 0.0) bearing += 180.0;
  if (bearing >= 180.0) bearing -= 180.0;
  return {std::clamp(lmax / tr, 0.5, 1.0), bearing};
}

LaneProfile lane_profile(const GridMeasure& rho1, const GridMeasure& rho2, int col_begin, int col_end) {
  if (!(rho1.spec() == rho2.spec())) throw SimError(ErrorKind::GridMismatch, "lane densities differ in grid");
  const GridSpec& g = rho1.spec();
  col_begin = std::max(col_begin, 0);
  col_end = std::min(col_end, g.nx);
  if (col_begin >= col_end) throw SimError(ErrorKind::InvalidArgument, "empty column range");
  LaneProfile out;
  out.profile.assign(static_cast<std::size_t>(g.ny), 0.0);
  double peak = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    double s = 0.0;
    for (int i = col_begin; i < col_end; ++i) s += rho1.at(i, j) - rho2.at(i, j);
    s /= static_cast<double>(col_end - col_begin);
    out.profile[static_cast<std::size_t>(j)] = s;
    peak = std::max(peak, std::abs(s));
  }
  if (peak == 0.0) return out;
  int last_sign = 0;
  for (double v : out.profile) {
    if (std::abs(v) < 0.05 * peak) continue;
    const int sign = v > 0.0 ? 1 : -1;
    if (last_sign != 0 && sign != last_sign) ++out.alternation_count;
    last_sign = sign;
  }
  return out;
}

double wasserstein_1d(std::span<const WeightedSample> mu1, std::span<const WeightedSample> mu2) {
  double m1 = 0.0, m2 = 0.0;
  for (const auto& s : mu1) {
    if (!(s.weight > 0.0)) throw SimError(ErrorKind::InvalidArgument, "weights must be positive");
    m1 += s.weight;
  }
  for (const auto& s : mu2) {
    if (!(s.weight > 0.0)) throw SimError(ErrorKind::InvalidArgument, "weights must be positive");
    m2 += s.weight;
  }
  if (std::abs(m1 - m2) > 1e-9 * std::max(m1, m2)) {
    throw SimError(ErrorKind::MassMismatch, "measures carry different total mass");
  }
  // Signed events: +w for mu1, -w for mu2; integrate |F1 - F2| between them.
  std::vector<WeightedSample> events;
  events.reserve(mu1.size() + mu2.size());
  for (const auto& s : mu1) events.push_back(s);
  for (const auto& s : mu2) events.push_back({s.x, -s.weight});
  std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
  double cdf = 0.0, total = 0.0;
  for (std::size_t e = 0; e + 1 < events.size(); ++e) {
    cdf += events[e].weight;
    total += std::abs(cdf) * (events[e + 1].x - events[e].x);
  }
  return total;
}

double wasserstein_2d_assignment(std::span<const Vec2> a, std::span<const Vec2> b) {
  if (a.size() != b.size()) throw SimError(ErrorKind::MassMismatch, "point clouds differ in size");
  const std::size_t n = a.size();
  if (n == 0) return 0.0;
  // Hungarian method with potentials, 1-based rows/columns.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  auto cost = [&](std::size_t i, std::size_t j) { return norm(a[i - 1] - b[j - 1]); };
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j) total += cost(match[j], j);
  return total;
}

double l1_distance(std::span<const double> rho1, std::span<const double> rho2, double dx) {
  if (rho1.size() != rho2.size()) throw SimError(ErrorKind::GridMismatch, "sample counts differ");
  double s = 0.0;
  for (std::size_t k = 0; k < rho1.size(); ++k) s += std::abs(rho1[k] - rho2[k]);
  return s * dx;
}

int count_components(const GridMeasure& density, double threshold_fraction) {
  const GridSpec& g = density.spec();
  const double cut = threshold_fraction * density.max_density();
  std::vector<char> seen(g.size(), 0);
  int components = 0;
  std::queue<std::pair<int, int>> q;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      if (seen[k] || !(density[k] > cut)) continue;
      ++components;
      seen[k] = 1;
      q.emplace(i, j);
      while (!q.empty()) {
        const auto [ci, cj] = q.front();
        q.pop();
        for (const auto& off : kDirOffset) {
          const int ni = ci + off[0], nj = cj + off[1];
          if (!g.in_range(ni, nj)) continue;
          const std::size_t nk = g.index(ni, nj);
          if (seen[nk] || !(density[nk] > cut)) continue;
          seen[nk] = 1;
          q.emplace(ni, nj);
        }
      }
    }
  }
  return components;
}

double region_mean_density(const GridMeasure& density, const Rect& region) {
  const GridSpec& g = density.spec();
  double s = 0.0;
  int n = 0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (!region.contains(g.center(i, j)) || density.is_obstacle(g.index(i, j))) continue;
      s += density.at(i, j);
      ++n;
    }
  }
  return n ? s / n : 0.0;
}

}  // namespace ipsim
