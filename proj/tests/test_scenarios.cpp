#include <algorithm>

#include "doctest.h"
#include "ipsim/errors.hpp"
#include "ipsim/scenarios.hpp"
#include "ipsim/simulation.hpp"

using namespace ipsim;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const SimError& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("built-in scenario list") {
  CHECK(scenario_names().size() == 8);
  for (const auto& n : scenario_names()) CHECK(build_scenario(n).name == n);
  CHECK(kind_of([] { build_scenario("nope"); }) == ErrorKind::UnknownScenario);
}

TEST_CASE("crossing lanes carries the pedestrian defaults") {
  const Scenario s = build_scenario("crossing_lanes");
  REQUIRE(s.populations.size() == 2);
  for (const auto& p : s.populations) {
    CHECK(p.cfg.alpha_r == kPi);
    CHECK(p.cfg.R_r == 0.1);
    CHECK(p.cfg.F_r == -1.0);
    CHECK(p.cfg.F_c == 0.0);
  }
  CHECK(s.populations[0].w_fixed == Vec2{1, 0});
  CHECK(s.populations[1].w_fixed == Vec2{-1, 0});
  CHECK(s.populations[0].repulsion_source == RepulsionSource::Other);
  CHECK(s.populations[0].other == 1);
  CHECK(s.populations[1].other == 0);
  CHECK(s.h == 1.0 / 128.0);
}

TEST_CASE("crystal and globular differ only in p") {
  const Scenario crystal = build_scenario("crystal_topological", 4);
  const auto& c = crystal.populations.at(0).cfg;
  CHECK(c.alpha_r == kTwoPi);
  CHECK(c.alpha_c == kTwoPi);
  CHECK(c.p == 7.0);
  CHECK(c.F_c == 1.0);
  CHECK(c.F_r == -1.0);
  CHECK(crystal.populations[0].lattice.nx * crystal.populations[0].lattice.ny == 100);

  Scenario globular = build_scenario("globular_metric", 4);
  CHECK(globular.populations[0].cfg.p == 100.0);
  globular.populations[0].cfg.p = 7.0;
  globular.name = crystal.name;
  CHECK(globular == crystal);
}

TEST_CASE("remaining scenario parameters") {
  const Scenario merge = build_scenario("cohesion_merge");
  const auto& m = merge.populations.at(0);
  CHECK(m.cfg.alpha_c == kTwoPi);
  CHECK(std::abs(m.cfg.F_c / m.cfg.F_r) == 100.0);
  CHECK(m.patches.size() == 3);
  const Simulation sim(merge);
  CHECK(m.cfg.p == doctest::Approx(2.0 / 3.0 * sim.populations()[0].measure.total_mass()).epsilon(1e-12));

  const Scenario bn = build_scenario("bottleneck");
  CHECK(bn.populations.at(0).cfg.F_r == -10.0);
  REQUIRE(bn.domain.obstacles.size() == 2);
  const double gap = bn.domain.obstacles[1].y0 - bn.domain.obstacles[0].y1;
  CHECK(gap == doctest::Approx(10 * bn.h));

  const Scenario me = build_scenario("micro_expansion");
  CHECK(me.populations.at(0).cfg.F_r == -0.05);
  CHECK(me.populations[0].cfg.alpha_r == kPi);

  const Scenario line = build_scenario("line_formation");
  const auto& l = line.populations.at(0).cfg;
  CHECK(l.alpha_r == kPi / 4);
  CHECK(l.alpha_c == kPi);
  CHECK(l.p == 7.0);
  CHECK(l.F_c > std::abs(l.F_r));
}

TEST_CASE("every scenario fits the desk-scale budget and starts cleanly") {
  for (const auto& n : scenario_names()) {
    CAPTURE(n);
    const Scenario s = build_scenario(n);
    CHECK_NOTHROW(s.validate());
    CHECK(s.schedule.steps <= 5000);
    if (s.scale == Scale::Macro) {
      const GridSpec g = grid_for(s.domain.bounds, s.h);
      CHECK(g.nx <= 128);
      CHECK(g.ny <= 128);
      CHECK(s.schedule.dt * s.speed_bound <= s.h);
    } else {
      const auto& L = s.populations[0].lattice;
      CHECK(L.nx * L.ny <= 400);
    }
    Simulation sim(s);
    for (int k = 0; k < 3; ++k) CHECK_NOTHROW(sim.step());
    CHECK_NOTHROW(sim.metrics());
  }
}

TEST_CASE("config dump round-trips for every scenario") {
  for (const auto& n : scenario_names()) {
    CAPTURE(n);
    const Scenario s = build_scenario(n, 17);
    const std::string text = dump_config(s);
    const Scenario back = parse_config(text);
    CHECK(back == s);
    CHECK(dump_config(back) == text);
  }
}

TEST_CASE("construction is deterministic in name and seed") {
  for (const auto& n : scenario_names()) CHECK(build_scenario(n, 9) == build_scenario(n, 9));
  const Scenario a = build_scenario("crystal_topological", 1), b = build_scenario("crystal_topological", 2);
  const auto pa = initial_agents(a.populations[0], a.seed).positions;
  CHECK(pa == initial_agents(a.populations[0], a.seed).positions);
  CHECK(pa != initial_agents(b.populations[0], b.seed).positions);
}

TEST_CASE("config text syntax") {
  const std::string base = dump_config(build_scenario("line_formation"));
  std::string text = base;
  text.insert(0, "# leading comment\n\n");
  const std::string key = "alpha_r = ";
  const auto at = text.find(key);
  REQUIRE(at != std::string::npos);
  text.replace(at, text.find('\n', at) - at, "alpha_r = pi/4   # quarter turn");
  CHECK(parse_config(text).populations[0].cfg.alpha_r == kPi / 4);

  CHECK(kind_of([] { ConfigDoc::parse("key = 1\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { ConfigDoc::parse("[scenario\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { ConfigDoc::parse("[scenario]\njunk\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { load_config("/nonexistent/file.ini"); }) == ErrorKind::ConfigError);
}

TEST_CASE("overrides") {
  const Scenario s = build_scenario("line_formation");
  const Scenario o = apply_overrides(s, {"steps=10", "population.0.p=inf", "population.0.R_c_max = 0.2", "metrics.angle_bin=10"});
  CHECK(o.schedule.steps == 10);
  CHECK(std::isinf(o.populations[0].cfg.p));
  CHECK(o.populations[0].cfg.R_c_max == 0.2);
  CHECK(o.metrics.angle_bin == 10.0);
  Scenario expect = s;
  expect.schedule.steps = 10;
  expect.populations[0].cfg.p = kUnbounded;
  expect.populations[0].cfg.R_c_max = 0.2;
  expect.metrics.angle_bin = 10.0;
  CHECK(o == expect);
  CHECK(apply_overrides(s, {}) == s);

  CHECK(kind_of([&] { apply_overrides(s, {"steps"}); }) == ErrorKind::ConfigError);
  CHECK(kind_of([&] { apply_overrides(s, {"population.3.p=1"}); }) == ErrorKind::ConfigError);
  CHECK(kind_of([&] { apply_overrides(s, {"dt=fast"}); }) == ErrorKind::ConfigError);
}

TEST_CASE("validation") {
  const Scenario lanes = build_scenario("crossing_lanes");
  const Scenario fast = apply_overrides(lanes, {"dt=0.1"});
  CHECK(kind_of([&] { fast.validate(); }) == ErrorKind::CflViolation);
  CHECK(kind_of([&] { Simulation{fast}; }) == ErrorKind::CflViolation);

  Scenario bad = lanes;
  bad.metrics.names.push_back("beauty");
  CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::ConfigError);
  bad = lanes;
  bad.populations[0].other = 0;
  CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::ConfigError);
  bad = lanes;
  bad.populations[0].inflows[0].segment = "bottom";
  CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::ConfigError);
  bad = lanes;
  bad.populations[0].cfg.R_r = -1;
  CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::ConfigError);
  bad = lanes;
  bad.schedule.stride = 0;
  CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::ConfigError);
  bad = build_scenario("crowd_expansion");
  for (auto& seg : bad.domain.segments)
    if (seg.label == BoundaryLabel::Target) seg.label = BoundaryLabel::Wall;
  CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::ConfigError);
}

TEST_CASE("annotated example configs match the built-in scenarios") {
  for (const auto& n : scenario_names()) {
    CAPTURE(n);
    CHECK(load_config(std::string(IPSIM_CONFIG_DIR) + "/" + n + ".ini") == build_scenario(n));
  }
}
