#include <random>

#include "doctest.h"
#include "ipsim/errors.hpp"
#include "ipsim/kernel.hpp"
#include "oracles.hpp"

using namespace ipsim;

namespace {

SensingConfig metric_cfg() {
  SensingConfig c;
  c.alpha_c = kTwoPi;
  c.alpha_r = kTwoPi;
  c.R_r = 1.0;
  c.R_c_max = 10.0;
  c.p = kUnbounded;
  c.F_c = 0.0;
  c.F_r = 0.0;
  return c;
}

double dist(Vec2 a, Vec2 b) { return norm(a - b); }

// Random positions in [0, side]^2 with pairwise distance at least min_gap.
std::vector<Vec2> scatter(std::mt19937_64& rng, int n, double side, double min_gap) {
  std::uniform_real_distribution<double> U(0.0, side);
  std::vector<Vec2> pts;
  while (static_cast<int>(pts.size()) < n) {
    const Vec2 p{U(rng), U(rng)};
    bool ok = true;
    for (const Vec2& q : pts) ok = ok && dist(p, q) >= min_gap;
    if (ok) pts.push_back(p);
  }
  return pts;
}

}  // namespace

TEST_CASE("config validation") {
  SensingConfig c;
  CHECK_NOTHROW(c.validate());
  c.F_c = -1;
  CHECK_THROWS_AS(c.validate(), SimError);
  c = SensingConfig{};
  c.F_r = 0.5;
  CHECK_THROWS_AS(c.validate(), SimError);
  c = SensingConfig{};
  c.body_size = c.R_r;
  CHECK_THROWS_AS(c.validate(), SimError);
  c = SensingConfig{};
  c.alpha_c = 0;
  CHECK_THROWS_AS(c.validate(), SimError);
  c = SensingConfig{};
  c.R_c_max = 2;
  CHECK(c.cohesion_area_bound() == doctest::Approx(kTwoPi * 2));
}

TEST_CASE("micro cohesion radius") {
  SensingConfig c = metric_cfg();
  const std::vector<Vec2> line{{1, 0}, {2, 0}, {3, 0}};
  CHECK(cohesion_radius_micro({0, 0}, {1, 0}, line, c) == 10.0);

  c.p = 1;
  // Brute force: grow R over the sorted distances while the count stays <= p.
  std::vector<double> d;
  for (const Vec2& q : line) d.push_back(norm(q));
  std::sort(d.begin(), d.end());
  double R = 0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (static_cast<double>(k + 1) > c.p) {
      R = d[k];
      break;
    }
  }
  CHECK(R == 2.0);
  CHECK(cohesion_radius_micro({0, 0}, {1, 0}, line, c) == R);
  // Only one agent strictly inside the returned radius.
  const CohesionZone z = cohesion_zone_micro({0, 0}, {1, 0}, line, c);
  int inside = 0;
  for (const Vec2& q : line) inside += z.contains_distance(norm(q)) ? 1 : 0;
  CHECK(inside == 1);

  const std::vector<Vec2> one{{-3, 4}};
  CHECK(cohesion_radius_micro({0, 0}, {1, 0}, one, c) == 10.0);
  c.R_c_max = 1.5;
  CHECK(cohesion_radius_micro({0, 0}, {1, 0}, line, c) == 1.5);
}

TEST_CASE("micro cohesion excludes agents tied at the limiting distance") {
  SensingConfig c = metric_cfg();
  c.F_c = 1;
  c.p = 2;
  // Four agents all at distance 1: including them would exceed p.
  AgentSet a({{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}, {3, 0}}, {1, 0});
  CHECK(cohesion_neighbors(0, a, c).empty());
  const Vec2 v = intelligent_velocity_micro(0, a, c);
  const Vec2 o = oracle::micro_velocity(0, a, c);
  CHECK(v == Vec2{0, 0});
  CHECK(o == Vec2{0, 0});
  c.p = 4;
  CHECK(cohesion_neighbors(0, a, c).size() == 4);
}

TEST_CASE("micro velocity hand examples") {
  SensingConfig c = metric_cfg();
  c.F_c = 1;
  c.p = 1;
  AgentSet pair({{0, 0}, {1, 0}}, {1, 0});
  const Vec2 v0 = intelligent_velocity_micro(0, pair, c);
  CHECK(v0.x == 1.0);
  CHECK(v0.y == 0.0);

  c = metric_cfg();
  c.F_r = -1;
  AgentSet close({{0, 0}, {0.5, 0}}, {1, 0});
  const Vec2 v1 = intelligent_velocity_micro(0, close, c);
  CHECK(v1.x == doctest::Approx(-1 * 0.5 / 0.25).epsilon(1e-15));
  CHECK(v1.y == 0.0);
  CHECK(oracle::micro_velocity(0, close, c) == v1);

  c.alpha_r = kPi;
  c.body_size = 0.1;
  AgentSet behind({{0, 0}, {-0.5, 0}}, {1, 0});
  CHECK(intelligent_velocity_micro(0, behind, c) == Vec2{0, 0});
}

TEST_CASE("micro kernel against the naive double loop") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(0, 1), Ang(0, kTwoPi);
  std::uniform_int_distribution<int> N(2, 50), P(0, 12);
  int cases = 0, topo = 0, aniso = 0;
  for (int t = 0; t < 100; ++t) {
    SensingConfig c;
    c.body_size = 0.05 * U(rng);
    c.R_r = 0.1 + 0.6 * U(rng);
    c.R_c_max = 0.2 + 2.0 * U(rng);
    c.alpha_c = t % 3 == 0 ? kTwoPi : 0.2 + (kTwoPi - 0.2) * U(rng);
    c.alpha_r = t % 4 == 0 ? kTwoPi : 0.2 + (kTwoPi - 0.2) * U(rng);
    c.p = t % 5 == 0 ? kUnbounded : P(rng);
    c.F_c = 2 * U(rng);
    c.F_r = -U(rng);
    const int n = N(rng);
    auto pos = scatter(rng, n, 1.0 + U(rng), std::max(c.body_size, 1e-3));
    AgentSet a(pos, {1, 0});
    for (auto& ax : a.axes) {
      const double phi = Ang(rng);
      ax = {std::cos(phi), std::sin(phi)};
    }
    topo += std::isfinite(c.p) ? 1 : 0;
    aniso += c.alpha_c < kTwoPi || c.alpha_r < kTwoPi ? 1 : 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      const Vec2 v = intelligent_velocity_micro(j, a, c);
      const Vec2 o = oracle::micro_velocity(j, a, c);
      const double scale = std::max(1.0, norm(o));
      CHECK(norm(v - o) <= 1e-12 * scale);
      if (std::isfinite(c.p)) CHECK(cohesion_neighbors(j, a, c).size() <= static_cast<std::size_t>(c.p));
    }
    ++cases;
  }
  CHECK(cases == 100);
  CHECK(topo >= 50);
  CHECK(aniso >= 50);
}

TEST_CASE("micro kernel adversarial placements") {
  SensingConfig c;
  c.alpha_c = kPi / 2;
  c.alpha_r = kPi / 3;
  c.R_r = 0.5;
  c.R_c_max = 2.0;
  c.p = 3;
  c.F_c = 1.0;
  c.F_r = -1.0;
  c.body_size = 0.05;
  const double eps = 1e-6;
  std::vector<Vec2> pos{{0, 0}};
  // Just inside and just outside both cone edges, at several radii.
  for (double r : {0.2, 0.45, 0.55, 1.0, 1.9, 2.1}) {
    for (double half : {c.alpha_c / 2, c.alpha_r / 2}) {
      for (double s : {-1.0, 1.0}) {
        pos.push_back({r * std::cos(s * (half - eps)), r * std::sin(s * (half - eps))});
        const double ro = r + 0.06;
        pos.push_back({ro * std::cos(s * (half + eps)), ro * std::sin(s * (half + eps))});
      }
    }
  }
  // Behind the agent inside the body ball, and behind beyond it.
  pos.push_back({-0.04, 0.0});
  pos.push_back({-0.3, 0.0});
  AgentSet a(pos, {1, 0});
  for (std::size_t j = 0; j < a.size(); ++j) {
    const Vec2 v = intelligent_velocity_micro(j, a, c);
    const Vec2 o = oracle::micro_velocity(j, a, c);
    CHECK(norm(v - o) <= 1e-12 * std::max(1.0, norm(o)));
  }
  // Mass outside both zones contributes nothing to repulsion.
  SensingConfig rep = c;
  rep.F_c = 0;
  AgentSet outside({{0, 0}, {0.3 * std::cos(kPi / 6 + 0.01), 0.3 * std::sin(kPi / 6 + 0.01)}, {-0.3, 0}, {0.51, 0}},
                   {1, 0});
  CHECK(intelligent_velocity_micro(0, outside, rep) == Vec2{0, 0});
  AgentSet body({{0, 0}, {-0.04, 0}}, {1, 0});
  CHECK(intelligent_velocity_micro(0, body, rep).x == doctest::Approx(-1.0 * -0.04 / 0.0016));
}

TEST_CASE("micro cohesion with one neighbour points straight at it") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1, 1);
  SensingConfig c = metric_cfg();
  c.F_c = 0.7;
  c.p = 1;
  for (int n = 0; n < 50; ++n) {
    const Vec2 q{U(rng), U(rng)};
    AgentSet a({{0, 0}, q}, {1, 0});
    const Vec2 v = intelligent_velocity_micro(0, a, c);
    CHECK(norm(v) == doctest::Approx(0.7 * norm(q)).epsilon(1e-14));
    CHECK(std::abs(v.x * q.y - v.y * q.x) < 1e-14);
    CHECK(dot(v, q) > 0);
  }
}

TEST_CASE("micro kernel is rotation equivariant") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> Ang(0, kTwoPi);
  SensingConfig c;
  c.alpha_c = 2.0;
  c.alpha_r = 1.5;
  c.R_r = 0.5;
  c.R_c_max = 1.5;
  c.p = 5;
  c.F_c = 1;
  c.F_r = -0.3;
  c.body_size = 0.02;
  for (int t = 0; t < 20; ++t) {
    const auto pos = scatter(rng, 30, 1.0, 0.03);
    const double phi = Ang(rng), theta = Ang(rng);
    AgentSet a(pos, {std::cos(phi), std::sin(phi)});
    std::vector<Vec2> rp;
    for (const Vec2& p : pos) rp.push_back(rotate(p, theta));
    AgentSet b(rp, rotate(a.axes[0], theta));
    for (std::size_t j = 0; j < a.size(); ++j) {
      const Vec2 va = rotate(intelligent_velocity_micro(j, a, c), theta);
      const Vec2 vb = intelligent_velocity_micro(j, b, c);
      CHECK(norm(va - vb) <= 1e-9 * std::max(1.0, norm(va)));
    }
  }
}

TEST_CASE("micro singular pair") {
  SensingConfig c = metric_cfg();
  c.F_r = -1;
  c.body_size = 0.1;
  AgentSet a({{0, 0}, {0.005, 0}}, {1, 0});
  try {
    intelligent_velocity_micro(0, a, c);
    FAIL("expected SingularPair");
  } catch (const SimError& e) {
    CHECK(e.kind() == ErrorKind::SingularPair);
  }
}

TEST_CASE("macro velocity hand examples") {
  const GridSpec g{16, 16, 1.0 / 16, {0, 0}};
  GridMeasure rho(g);
  SensingConfig c = metric_cfg();
  c.F_r = -1;
  c.F_c = 1;
  c.R_r = 0.3;
  CHECK(intelligent_velocity_macro(g.center(8, 8), rho, {1, 0}, c) == Vec2{0, 0});

  c.F_c = 0;
  rho.at(10, 8) = 3.0;
  const double m = 3.0 * g.cell_area();
  const Vec2 v = intelligent_velocity_macro(g.center(8, 8), rho, {1, 0}, c);
  CHECK(v.x == doctest::Approx(-m / (2 * g.h)).epsilon(1e-14));
  CHECK(v.y == doctest::Approx(0.0));

  // Uniform density with a full-angle zone cancels away from the edges.
  GridMeasure flat(g);
  for (double& r : flat.rho()) r = 1.0;
  c.R_r = 0.2;
  const Vec2 u = intelligent_velocity_macro(g.center(8, 8), flat, {1, 0}, c);
  CHECK(norm(u) < 1e-12);
}

TEST_CASE("macro kernel against the naive cell sums") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> U(0, 1), Ang(0, kTwoPi);
  const GridSpec g{20, 16, 0.05, {0, 0}};
  for (int t = 0; t < 30; ++t) {
    GridMeasure rho(g);
    for (double& r : rho.rho()) r = U(rng) < 0.4 ? 2 * U(rng) : 0.0;
    SensingConfig c;
    c.alpha_c = t % 2 ? kTwoPi : 0.5 + 5 * U(rng);
    c.alpha_r = t % 3 ? kPi : 0.5 + 5 * U(rng);
    c.R_r = 0.1 + 0.3 * U(rng);
    c.R_c_max = 0.2 + 0.8 * U(rng);
    c.p = t % 4 == 0 ? kUnbounded : 0.1 * U(rng);
    c.F_c = 1 + U(rng);
    c.F_r = -U(rng);
    const MacroKernel kernel(g, c);
    for (int n = 0; n < 40; ++n) {
      const int i = static_cast<int>(U(rng) * g.nx), j = static_cast<int>(U(rng) * g.ny);
      const double phi = Ang(rng);
      const Vec2 axis{std::cos(phi), std::sin(phi)};
      const Vec2 o = oracle::macro_velocity(g.center(i, j), rho, axis, c);
      const Vec2 v = intelligent_velocity_macro(g.center(i, j), rho, axis, c);
      const Vec2 k = kernel.evaluate(i, j, axis, rho, rho);
      const double scale = std::max(1.0, norm(o));
      CHECK(norm(v - o) <= 1e-12 * scale);
      CHECK(norm(k - o) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("macro zone accumulates mass up to p") {
  const GridSpec g{9, 9, 0.1, {0, 0}};
  GridMeasure rho(g);
  for (double& r : rho.rho()) r = 1.0;  // 0.01 mass per cell
  SensingConfig c = metric_cfg();
  c.F_c = 1;
  c.p = 0.055;  // self cell plus four neighbours; the next ring of four would exceed it
  const CohesionZone z = cohesion_zone_macro(g.center(4, 4), rho, {1, 0}, c);
  CHECK_FALSE(z.inclusive);
  CHECK(z.radius == doctest::Approx(std::sqrt(2.0) * 0.1));
}

TEST_CASE("macro kernel rotates with quarter turns") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> U(0, 1);
  const int n = 24;
  const GridSpec g{n, n, 1.0 / n, {0, 0}};
  GridMeasure a(g), b(g);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) a.at(i, j) = U(rng) < 0.5 ? U(rng) : 0.0;
  // b(i, j) = a rotated by +90 degrees about the grid center.
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) b.at(n - 1 - j, i) = a.at(i, j);
  SensingConfig c;
  c.alpha_c = kPi;
  c.alpha_r = kPi;
  c.R_r = 0.3;
  c.R_c_max = 0.5;
  c.p = 0.05;
  c.F_c = 2;
  c.F_r = -1;
  const MacroKernel k(g, c);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Vec2 va = k.evaluate(i, j, {1, 0}, a, a);
      const Vec2 vb = k.evaluate(n - 1 - j, i, {0, 1}, b, b);
      CHECK(norm(rotate(va, kPi / 2) - vb) <= 1e-12 * std::max(1.0, norm(va)));
    }
}

TEST_CASE("macro velocity converges to micro velocity at first order") {
  std::mt19937_64 rng(31);
  SensingConfig c = metric_cfg();
  c.F_c = 1;
  c.F_r = -0.01;
  c.R_r = 5;
  double err[2] = {0, 0};
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    const auto pos = scatter(rng, 12, 1.0, 0.15);
    AgentSet a(pos, {1, 0});
    int r = 0;
    for (int n : {32, 64}) {
      const GridSpec g{n, n, 1.0 / n, {0, 0}};
      GridMeasure rho(g);
      for (const Vec2& p : pos) {
        const auto [i, j] = g.locate(p);
        rho.at(i, j) += 1.0 / g.cell_area();
      }
      for (std::size_t j = 0; j < a.size(); ++j) {
        // The macro density includes the observer; take its cell out of cohesion.
        GridMeasure others = rho;
        const auto [si, sj] = g.locate(pos[j]);
        others.at(si, sj) -= 1.0 / g.cell_area();
        const Vec2 mac = intelligent_velocity_macro(pos[j], others, rho, {1, 0}, c);
        err[r] += norm(mac - intelligent_velocity_micro(j, a, c));
      }
      ++r;
    }
  }
  const double ratio = err[0] / err[1];
  CHECK(ratio > 1.6);
  CHECK(ratio < 2.5);
}
