#include <algorithm>
#include <random>

#include "doctest.h"
#include "ipsim/errors.hpp"
#include "ipsim/metrics.hpp"
#include "oracles.hpp"

using namespace ipsim;

namespace {

// Hexagonal patch: all lattice points within `shells` steps of the origin.
std::vector<Vec2> hex_patch(int shells, double a = 1.0) {
  std::vector<Vec2> pts;
  for (int q = -shells; q <= shells; ++q)
    for (int r = -shells; r <= shells; ++r) {
      const int s = -q - r;
      if (std::max({std::abs(q), std::abs(r), std::abs(s)}) > shells) continue;
      pts.push_back({a * (q + 0.5 * r), a * (std::sqrt(3.0) / 2.0) * r});
    }
  return pts;
}

std::vector<Vec2> square_patch(int n, double a = 1.0) {
  std::vector<Vec2> pts;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) pts.push_back({a * i, a * j});
  return pts;
}

AgentSet agents(std::vector<Vec2> p) { return AgentSet(std::move(p), {1, 0}); }

std::vector<Vec2> transform(const std::vector<Vec2>& p, double theta, Vec2 shift, double scale = 1.0) {
  std::vector<Vec2> out;
  for (const Vec2& q : p) out.push_back(scale * rotate(q, theta) + shift);
  return out;
}

}  // namespace

TEST_CASE("angle histogram bins") {
  const AngleHistogram h = make_angle_histogram(5.0);
  CHECK(h.counts.size() == 72);
  CHECK(h.bin_of(0.0) == 0);
  CHECK(h.bin_of(2.49) == 0);
  CHECK(h.bin_of(2.5) == 1);
  CHECK(h.bin_of(-2.4) == 0);
  CHECK(h.bin_of(-2.6) == 71);
  CHECK(h.bin_of(180.0) == 36);
  CHECK(h.bin_of(359.0) == 0);
  CHECK_THROWS_AS(make_angle_histogram(7.0), SimError);
}

TEST_CASE("angle distribution of a horizontal pair") {
  const AngleHistogram h = angle_distribution(agents({{0, 0}, {1, 0}}), 1);
  CHECK(h.total() == 2);
  CHECK(h.counts[h.bin_of(0)] == 1);
  CHECK(h.counts[h.bin_of(180)] == 1);
  CHECK_THROWS_AS(angle_distribution(agents({{0, 0}, {1, 0}}), 2), SimError);
}

TEST_CASE("angle distribution of a perfect hexagonal lattice") {
  const auto pts = hex_patch(6);
  const AngleHistogram h = angle_distribution(agents(pts), 6);
  CHECK(h.total() == static_cast<std::int64_t>(6 * pts.size()));
  std::vector<std::int64_t> peaks;
  for (int k = 0; k < 6; ++k) peaks.push_back(h.counts[h.bin_of(60.0 * k)]);
  const auto [lo, hi] = std::minmax_element(peaks.begin(), peaks.end());
  std::int64_t in_peaks = 0;
  for (auto p : peaks) in_peaks += p;
  // Only the boundary ring can pick a second-shell neighbour.
  CHECK(static_cast<double>(*lo) >= 0.95 * static_cast<double>(*hi));
  CHECK(static_cast<double>(in_peaks) >= 0.9 * static_cast<double>(h.total()));
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    if (std::find(peaks.begin(), peaks.end(), h.counts[b]) == peaks.end()) CHECK(h.counts[b] < *lo);
  }
}

TEST_CASE("angle distribution of a jittered hexagonal lattice") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> J(-0.02, 0.02);
  auto pts = hex_patch(6);
  for (auto& p : pts) p += Vec2{J(rng), J(rng)};
  const AngleHistogram h = angle_distribution(agents(pts), 6, 1.0);
  std::int64_t near = 0;
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    const double deg = h.bin_center(b);
    double off = 360;
    for (int k = 0; k <= 6; ++k) off = std::min(off, std::abs(deg - 60.0 * k));
    if (off <= 10.0) near += h.counts[b];
  }
  const double share = static_cast<double>(near) / static_cast<double>(h.total());
  MESSAGE("share within 10 degrees of a lattice direction: " << share);
  CHECK(share >= 0.9);
}

TEST_CASE("crystal score of lattices") {
  const CrystalScore hex = crystal_score(agents(hex_patch(6)));
  CHECK(hex.interior_count > 0);
  CHECK(hex.six_neighbor_fraction == 1.0);
  CHECK(hex.nn_distance_cv == doctest::Approx(0.0).epsilon(1e-12));

  // Square lattice: four neighbours at d and four at sqrt(2) d, all within 1.5 d.
  const auto sq = square_patch(12);
  const double reach = 1.5;
  int within = 0;
  for (const Vec2& q : sq)
    if (q != sq[5 * 12 + 5] && norm(q - sq[5 * 12 + 5]) <= reach) ++within;
  CHECK(within == 8);
  const CrystalScore s = crystal_score(agents(sq));
  CHECK(s.interior_count > 0);
  CHECK(s.six_neighbor_fraction == 0.0);

  CHECK_THROWS_AS(crystal_score(agents({{0, 0}, {1, 1}, {2, 2}, {3, 3}})), SimError);
}

TEST_CASE("crystal score of uniform random points") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(0, 1);
  double lo_f = 1, hi_f = 0, lo_cv = 1e9, hi_cv = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<Vec2> pts(100);
    for (auto& p : pts) p = {U(rng), U(rng)};
    const CrystalScore c = crystal_score(agents(pts));
    lo_f = std::min(lo_f, c.six_neighbor_fraction);
    hi_f = std::max(hi_f, c.six_neighbor_fraction);
    lo_cv = std::min(lo_cv, c.nn_distance_cv);
    hi_cv = std::max(hi_cv, c.nn_distance_cv);
  }
  MESSAGE("six-neighbour fraction in [" << lo_f << ", " << hi_f << "], nn cv in [" << lo_cv << ", " << hi_cv << "]");
  CHECK(hi_f < 0.8);
  CHECK(lo_cv > 0.2);
}

TEST_CASE("crystal score is invariant under similarity transforms") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0, 1), J(-0.1, 0.1);
  auto pts = hex_patch(5);
  for (auto& p : pts) p += Vec2{J(rng), J(rng)};
  const CrystalScore a = crystal_score(agents(pts));
  for (int t = 0; t < 10; ++t) {
    const CrystalScore b = crystal_score(agents(transform(pts, kTwoPi * U(rng), {10 * U(rng), -5 * U(rng)}, 0.1 + 3 * U(rng))));
    CHECK(b.six_neighbor_fraction == doctest::Approx(a.six_neighbor_fraction));
    CHECK(b.interior_count == a.interior_count);
    CHECK(b.nn_distance_cv == doctest::Approx(a.nn_distance_cv).epsilon(1e-9));
  }
}

TEST_CASE("collinearity") {
  const Collinearity line = collinearity(agents({{0, 0}, {1, 1}, {2, 2}, {5, 5}}));
  CHECK(line.ratio == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(line.bearing_deg == doctest::Approx(45.0));

  std::mt19937_64 rng(21);
  std::normal_distribution<double> G(0, 1);
  std::uniform_real_distribution<double> U(0, 1);
  for (int t = 0; t < 20; ++t) {
    std::vector<Vec2> cloud(100);
    for (auto& p : cloud) p = {G(rng), G(rng)};
    CHECK(collinearity(agents(cloud)).ratio < 0.7);
  }
  std::vector<Vec2> jittered;
  for (int k = 0; k < 100; ++k) jittered.push_back({k * 0.1, 0.01 * 10.0 * (U(rng) - 0.5)});
  CHECK(collinearity(agents(jittered)).ratio > 0.999);
  const double b = collinearity(agents(jittered)).bearing_deg;
  CHECK(std::min(b, 180.0 - b) < 0.5);
}

TEST_CASE("collinearity is invariant under rotation and translation") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> G(0, 1);
  std::uniform_real_distribution<double> U(0, 1);
  std::vector<Vec2> cloud(60);
  for (auto& p : cloud) p = {3 * G(rng), G(rng)};
  const double r0 = collinearity(agents(cloud)).ratio;
  for (int t = 0; t < 20; ++t) {
    const auto moved = transform(cloud, kTwoPi * U(rng), {100 * U(rng), -50 * U(rng)});
    CHECK(std::abs(collinearity(agents(moved)).ratio - r0) <= 1e-9);
  }
}

TEST_CASE("lane profile") {
  const GridSpec g{8, 12, 1.0, {0, 0}};
  GridMeasure a(g), b(g), c(g);
  for (double& r : a.rho()) r = 0.5;
  b = a;
  CHECK(g == b.spec());
  const LaneProfile flat = lane_profile(a, b, 0, 8);
  CHECK(flat.alternation_count == 0);
  for (double v : flat.profile) CHECK(v == 0.0);

  GridMeasure top(g), bottom(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) (j >= 6 ? top : bottom).at(i, j) = 1.0;
  CHECK(lane_profile(top, bottom, 2, 6).alternation_count == 1);

  GridMeasure s1(g), s2(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) ((j / 3) % 2 == 0 ? s1 : s2).at(i, j) = 1.0;
  // Four bands of three rows: sign flips at j = 3, 6 and 9.
  CHECK(lane_profile(s1, s2, 0, 8).alternation_count == 3);

  // Sub-threshold noise between bands does not count.
  s1.at(0, 4) += 0.01;
  CHECK(lane_profile(s1, s2, 0, 8).alternation_count == 3);

  const GridMeasure other(GridSpec{8, 10, 1.0, {0, 0}});
  CHECK_THROWS_AS(lane_profile(a, other, 0, 8), SimError);
}

TEST_CASE("one-dimensional Wasserstein distance") {
  const std::vector<WeightedSample> d0{{0.0, 1.0}}, dd{{0.3, 1.0}};
  CHECK(wasserstein_1d(d0, dd) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(wasserstein_1d(d0, d0) == 0.0);
  const std::vector<WeightedSample> a{{0.0, 1}, {1.0, 1}}, b{{0.5, 1}, {0.5, 1}};
  CHECK(wasserstein_1d(a, b) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(wasserstein_1d(a, d0), SimError);
  const std::vector<WeightedSample> neg{{0.0, -1.0}, {1.0, 3.0}};
  CHECK_THROWS_AS(wasserstein_1d(neg, a), SimError);
}

TEST_CASE("Wasserstein metric axioms on random triples") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> U(-1, 1), W(0.1, 1);
  auto draw = [&](int n) {
    std::vector<WeightedSample> m(n);
    double s = 0;
    for (auto& x : m) {
      x = {U(rng), W(rng)};
      s += x.weight;
    }
    for (auto& x : m) x.weight /= s;
    return m;
  };
  for (int t = 0; t < 200; ++t) {
    const auto a = draw(5), b = draw(7), c = draw(3);
    const double ab = wasserstein_1d(a, b), ba = wasserstein_1d(b, a);
    const double bc = wasserstein_1d(b, c), ac = wasserstein_1d(a, c);
    CHECK(std::abs(ab - ba) <= 1e-9);
    CHECK(ac <= ab + bc + 1e-9);
    CHECK(wasserstein_1d(a, a) <= 1e-9);
    CHECK(ab > 0);
    const double shift = 3 * U(rng);
    auto moved = a;
    for (auto& x : moved) x.x += shift;
    CHECK(std::abs(wasserstein_1d(a, moved) - std::abs(shift)) <= 1e-9);
  }
}

TEST_CASE("thin transported densities: L1 is order one, W1 is the offset") {
  const double eps = 0.01, delta = 0.1, dx = eps / 100;
  const int n = static_cast<int>(std::round(0.2 / dx));
  std::vector<double> r1(n, 0.0), r2(n, 0.0);
  std::vector<WeightedSample> m1, m2;
  for (int k = 0; k < n; ++k) {
    const double x = (k + 0.5) * dx;
    if (x < eps) {
      r1[k] = 1 / eps;
      m1.push_back({x, dx / eps});
    }
    if (x >= delta && x < delta + eps) {
      r2[k] = 1 / eps;
      m2.push_back({x, dx / eps});
    }
  }
  CHECK(std::abs(l1_distance(r1, r2, dx) - 2.0) <= 1e-6);
  CHECK(std::abs(wasserstein_1d(m1, m2) - delta) <= 1e-6);
}

TEST_CASE("planar assignment W1 equals exhaustive enumeration") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0, 1);
  for (int n = 1; n <= 8; ++n) {
    for (int t = 0; t < (n <= 6 ? 10 : 2); ++t) {
      std::vector<Vec2> a(n), b(n);
      for (auto& p : a) p = {U(rng), U(rng)};
      for (auto& p : b) p = {U(rng), U(rng)};
      CHECK(wasserstein_2d_assignment(a, b) == oracle::w1_enumerate(a, b));
    }
  }
  const std::vector<Vec2> two(2), three(3);
  CHECK_THROWS_AS(wasserstein_2d_assignment(two, three), SimError);
}

TEST_CASE("connected components and region density") {
  const GridSpec g{6, 6, 1.0, {0, 0}};
  GridMeasure m(g);
  m.at(0, 0) = 1;
  m.at(1, 1) = 1;  // diagonal only: separate under 4-connectivity
  m.at(4, 4) = 1;
  m.at(4, 5) = 1;
  m.at(3, 0) = 0.05;  // below 10 % of the max
  CHECK(count_components(m, 0.1) == 3);
  CHECK(count_components(m, 0.01) == 4);
  CHECK(count_components(GridMeasure(g), 0.1) == 0);
  CHECK(region_mean_density(m, {3.9, 3.9, 4.9, 5.9}) == doctest::Approx(1.0));
  CHECK(region_mean_density(m, {0, 0, 1.9, 0.9}) == doctest::Approx(0.5));
}
