#include "ipsim/scenarios.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ipsim/errors.hpp"
#include "ipsim/grid.hpp"

namespace ipsim {

namespace {

[[noreturn]] void config_error(const std::string& what) { throw SimError(ErrorKind::ConfigError, what); }

SensingConfig pedestrian_defaults() {
  SensingConfig c;
  c.alpha_c = kTwoPi;
  c.alpha_r = kPi;
  c.R_r = 0.1;
  c.R_c_max = 1.0;
  c.p = kUnbounded;
  c.F_c = 0.0;
  c.F_r = -1.0;
  return c;
}

// Speed bound for macro runs: |w| <= 1, repulsion <= |F_r| rho_max alpha_r R_r,
// cohesion <= F_c * min(p, m_total) * R_c_max.
double macro_speed_bound(const SensingConfig& c, double rho_max, double mass) {
  const double rep = -c.F_r * rho_max * c.alpha_r * c.R_r;
  const double coh = c.F_c * std::min(c.p, mass) * c.R_c_max;
  return 1.0 + rep + coh;
}

Scenario crossing_lanes() {
  Scenario s;
  s.name = "crossing_lanes";
  s.scale = Scale::Macro;
  s.domain = make_box_domain({0, 0, 1, 1}, BoundaryLabel::Inflow, BoundaryLabel::Inflow,
                             BoundaryLabel::Wall, BoundaryLabel::Wall);
  s.h = 1.0 / 128.0;
  const double rho_in = 0.3;
  for (int k = 0; k < 2; ++k) {
    PopulationSpec p;
    p.name = k == 0 ? "rightward" : "leftward";
    p.cfg = pedestrian_defaults();
    p.velocity = VelocityMode::Fixed;
    p.w_fixed = k == 0 ? Vec2{1, 0} : Vec2{-1, 0};
    p.repulsion_source = RepulsionSource::Other;
    p.other = k == 0 ? 1 : 0;
    p.inflows.push_back({k == 0 ? "left" : "right", rho_in, {}, 0.2});
    s.populations.push_back(p);
  }
  s.speed_bound = macro_speed_bound(s.populations[0].cfg, 1.5, 0.0);
  s.schedule.dt = 0.8 * s.h / s.speed_bound;
  s.schedule.steps = 1500;
  s.schedule.stride = 50;
  s.metrics.names = {"mass", "lane_alternation"};
  s.metrics.lane_col_begin = 48;
  s.metrics.lane_col_end = 80;
  return s;
}

Scenario crowd_expansion() {
  Scenario s;
  s.name = "crowd_expansion";
  s.scale = Scale::Macro;
  s.domain = make_box_domain({0, 0, 1, 1}, BoundaryLabel::Wall, BoundaryLabel::Target,
                             BoundaryLabel::Wall, BoundaryLabel::Wall);
  s.h = 1.0 / 128.0;
  PopulationSpec p;
  p.name = "crowd";
  p.cfg = pedestrian_defaults();
  p.velocity = VelocityMode::Field;
  p.absorbing = true;
  DensityPatch block;
  block.rect = {0.1, 0.4, 0.3, 0.6};
  block.density = 1.0;
  p.patches.push_back(block);
  s.populations.push_back(p);
  s.speed_bound = macro_speed_bound(p.cfg, 1.0, 0.0);
  s.schedule.dt = 0.8 * s.h / s.speed_bound;
  s.schedule.steps = 600;
  s.schedule.stride = 25;
  s.metrics.names = {"mass", "max_density"};
  return s;
}

Scenario cohesion_merge() {
  Scenario s;
  s.name = "cohesion_merge";
  s.scale = Scale::Macro;
  s.domain = make_box_domain({0, 0, 2, 1}, BoundaryLabel::Wall, BoundaryLabel::Target,
                             BoundaryLabel::Wall, BoundaryLabel::Wall);
  s.h = 1.0 / 64.0;
  PopulationSpec p;
  p.name = "walkers";
  p.cfg = pedestrian_defaults();
  p.cfg.alpha_c = kTwoPi;
  p.cfg.F_c = 100.0;
  p.cfg.F_r = -1.0;
  p.cfg.R_c_max = 1.0;
  p.velocity = VelocityMode::Fixed;
  p.w_fixed = {1, 0};
  p.absorbing = true;
  const double rho0 = 0.6, radius = 0.07;
  for (double y : {0.22, 0.44, 0.8}) {
    DensityPatch d;
    d.shape = DensityPatch::Shape::Disc;
    d.center = {0.15, y};
    d.radius = radius;
    d.density = rho0;
    p.patches.push_back(d);
  }
  // p is two thirds of the initial mass, measured on the grid.
  {
    const GridSpec g = grid_for(s.domain.bounds, s.h);
    double mass = 0.0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        for (const auto& d : p.patches)
          if (norm2(g.center(i, j) - d.center) <= d.radius * d.radius) mass += d.density * g.cell_area();
    p.cfg.p = 2.0 / 3.0 * mass;
  }
  s.populations.push_back(p);
  s.speed_bound = macro_speed_bound(p.cfg, 4.0 * rho0, p.cfg.p);
  s.schedule.dt = 0.8 * s.h / s.speed_bound;
  // Ends before the front reaches the target: absorption would erase clusters.
  s.schedule.steps = 450;
  s.schedule.stride = 50;
  s.metrics.names = {"mass", "components"};
  return s;
}

Scenario bottleneck() {
  Scenario s;
  s.name = "bottleneck";
  s.scale = Scale::Macro;
  s.domain = make_box_domain({0, 0, 1, 1}, BoundaryLabel::Wall, BoundaryLabel::Target,
                             BoundaryLabel::Wall, BoundaryLabel::Wall);
  s.h = 1.0 / 64.0;
  // The pair backs onto the target column. A free column behind the back
  // faces would trap mass: w there is tangential only, and the centre gap and
  // the wall slits feed it from both ends.
  const double h = s.h, gap = 10 * h, x0 = 1 - 5 * h;
  s.domain.obstacles.push_back({x0, h, 1 - h, 0.5 - gap / 2});
  s.domain.obstacles.push_back({x0, 0.5 + gap / 2, 1 - h, 1 - h});
  PopulationSpec p;
  p.name = "crowd";
  p.cfg = pedestrian_defaults();
  p.cfg.F_r = -10.0;
  p.velocity = VelocityMode::Field;
  p.absorbing = true;
  DensityPatch block;
  block.rect = {0.4, 0.2, x0, 0.8};
  block.density = 0.2;
  p.patches.push_back(block);
  s.populations.push_back(p);
  s.speed_bound = macro_speed_bound(p.cfg, 1.0, 0.0);
  s.schedule.dt = 0.8 * s.h / s.speed_bound;
  s.schedule.steps = 2000;
  s.schedule.stride = 100;
  s.metrics.names = {"mass", "region_density"};
  s.metrics.region = {x0 - 6 * h, 0.5 - gap / 2, x0, 0.5 + gap / 2};
  return s;
}

Scenario animal_cluster(const std::string& name, double p_count) {
  Scenario s;
  s.name = name;
  s.scale = Scale::Micro;
  s.domain = make_box_domain({0, 0, 10, 10}, BoundaryLabel::Wall, BoundaryLabel::Wall,
                             BoundaryLabel::Wall, BoundaryLabel::Wall);
  PopulationSpec p;
  p.name = "animals";
  p.cfg.alpha_c = kTwoPi;
  p.cfg.alpha_r = kTwoPi;
  p.cfg.body_size = 0.05;
  p.cfg.R_r = 0.15;
  p.cfg.R_c_max = 100.0;
  p.cfg.p = p_count;
  p.cfg.F_c = 1.0;
  p.cfg.F_r = -1.0;
  p.velocity = VelocityMode::Fixed;
  p.w_fixed = {0, 0};
  p.lattice = {LatticeSpec::Kind::Square, 10, 10, 0.12, {5, 5}, 0.1};
  s.populations.push_back(p);
  s.speed_bound = 0.0;
  s.schedule.dt = 2e-4;
  s.schedule.steps = 5000;
  s.schedule.stride = 500;
  s.schedule.stop_at_equilibrium = true;
  s.metrics.names = {"displacement", "crystal", "angle_histogram"};
  return s;
}

Scenario micro_expansion() {
  Scenario s;
  s.name = "micro_expansion";
  s.scale = Scale::Micro;
  s.domain = make_box_domain({0, 0, 10, 10}, BoundaryLabel::Wall, BoundaryLabel::Wall,
                             BoundaryLabel::Wall, BoundaryLabel::Wall);
  PopulationSpec p;
  p.name = "animals";
  p.cfg.alpha_c = kTwoPi;
  p.cfg.alpha_r = kPi;
  p.cfg.body_size = 0.05;
  p.cfg.R_r = 0.5;
  p.cfg.R_c_max = 1.0;
  p.cfg.p = kUnbounded;
  p.cfg.F_c = 0.0;
  p.cfg.F_r = -0.05;
  p.velocity = VelocityMode::Fixed;
  p.w_fixed = {1, 0};
  p.lattice = {LatticeSpec::Kind::Square, 10, 10, 0.1, {2, 5}, 0.0};
  s.populations.push_back(p);
  s.speed_bound = 0.0;
  s.schedule.dt = 0.005;
  s.schedule.steps = 1200;
  s.schedule.stride = 100;
  s.schedule.stop_at_equilibrium = true;
  s.metrics.names = {"displacement", "collinearity"};
  return s;
}

Scenario line_formation() {
  Scenario s = animal_cluster("line_formation", 7);
  PopulationSpec& p = s.populations[0];
  p.cfg.alpha_r = kPi / 4;
  p.cfg.alpha_c = kPi;
  p.cfg.F_c = 0.2;
  p.cfg.F_r = -0.05;
  s.schedule.dt = 0.005;
  s.schedule.stop_at_equilibrium = false;
  s.metrics.names = {"displacement", "collinearity", "angle_histogram"};
  return s;
}

// ---------------------------------------------------------------------------
// Text helpers

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string t; is >> t;) out.push_back(t);
  return out;
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fmt(Vec2 v) { return fmt(v.x) + " " + fmt(v.y); }
std::string fmt(const Rect& r) { return fmt(r.x0) + " " + fmt(r.y0) + " " + fmt(r.x1) + " " + fmt(r.y1); }
std::string fmt(bool b) { return b ? "true" : "false"; }

// Plain numbers, "inf", or multiples of pi written as "pi", "2pi", "pi/4",
// "0.5pi".
double parse_number(const std::string& raw, const std::string& key) {
  const std::string t = trim(raw);
  auto plain = [&](const std::string& x, double& out) {
    if (x.empty()) return false;
    const char* b = x.data();
    const char* e = b + x.size();
    if (*b == '+') ++b;
    auto [ptr, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && ptr == e;
  };
  double v = 0.0;
  if (plain(t, v)) return v;
  const auto pi = t.find("pi");
  if (pi != std::string::npos) {
    const std::string pre = t.substr(0, pi), post = t.substr(pi + 2);
    double a = 1.0, b = 1.0;
    const bool ok_pre = pre.empty() || (pre == "-" ? (a = -1.0, true) : plain(pre, a));
    const bool ok_post = post.empty() || (post[0] == '/' && plain(post.substr(1), b) && b != 0.0);
    if (ok_pre && ok_post) return a * kPi / b;
  }
  config_error("key '" + key + "': cannot parse number '" + t + "'");
}

long parse_integer(const std::string& raw, const std::string& key) {
  const std::string t = trim(raw);
  long v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) config_error("key '" + key + "': cannot parse integer '" + t + "'");
  return v;
}

bool parse_bool(const std::string& raw, const std::string& key) {
  const std::string t = trim(raw);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  config_error("key '" + key + "': expected true or false, got '" + t + "'");
}

std::vector<double> parse_numbers(const std::string& raw, const std::string& key, std::size_t n) {
  const auto parts = split_ws(raw);
  if (parts.size() != n) config_error("key '" + key + "': expected " + std::to_string(n) + " numbers");
  std::vector<double> out;
  for (const auto& p : parts) out.push_back(parse_number(p, key));
  return out;
}

Vec2 parse_vec(const std::string& raw, const std::string& key) {
  const auto v = parse_numbers(raw, key, 2);
  return {v[0], v[1]};
}

Rect parse_rect(const std::string& raw, const std::string& key) {
  const auto v = parse_numbers(raw, key, 4);
  return {v[0], v[1], v[2], v[3]};
}

const char* to_string(SweepOrder o) { return o == SweepOrder::RedBlack ? "red_black" : "lexicographic"; }

std::string population_section(std::size_t k) { return "population." + std::to_string(k); }

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<std::string>& known_metrics() {
  static const std::vector<std::string> names{"mass",         "max_density", "components",
                                              "lane_alternation", "region_density", "crystal",
                                              "collinearity", "angle_histogram", "displacement"};
  return names;
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"crossing_lanes",  "crowd_expansion",     "cohesion_merge",
                                              "bottleneck",      "globular_metric",     "crystal_topological",
                                              "micro_expansion", "line_formation"};
  return names;
}

Scenario build_scenario(const std::string& name, std::uint64_t seed) {
  Scenario s;
  if (name == "crossing_lanes") s = crossing_lanes();
  else if (name == "crowd_expansion") s = crowd_expansion();
  else if (name == "cohesion_merge") s = cohesion_merge();
  else if (name == "bottleneck") s = bottleneck();
  else if (name == "globular_metric") s = animal_cluster(name, 100);
  else if (name == "crystal_topological") s = animal_cluster(name, 7);
  else if (name == "micro_expansion") s = micro_expansion();
  else if (name == "line_formation") s = line_formation();
  else throw SimError(ErrorKind::UnknownScenario, "unknown scenario '" + name + "'");
  s.seed = seed;
  return s;
}

void Scenario::validate() const {
  if (name.empty()) config_error("scenario name is empty");
  if (populations.empty()) config_error("scenario has no population");
  if (!(schedule.dt > 0.0) || !std::isfinite(schedule.dt)) config_error("dt must be positive");
  if (schedule.steps < 0) config_error("steps must be non-negative");
  if (schedule.stride < 1) config_error("stride must be at least 1");
  if (schedule.equilibrium_window < 1) config_error("equilibrium_window must be at least 1");
  domain.validate();
  for (const auto& m : metrics.names) {
    if (std::find(known_metrics().begin(), known_metrics().end(), m) == known_metrics().end())
      config_error("unknown metric '" + m + "'");
  }
  auto uses = [&](const char* m) {
    return std::find(metrics.names.begin(), metrics.names.end(), m) != metrics.names.end();
  };

  bool needs_field = false;
  for (std::size_t k = 0; k < populations.size(); ++k) {
    const auto& p = populations[k];
    try {
      p.cfg.validate();
    } catch (const SimError& e) {
      config_error("population " + std::to_string(k) + ": " + e.what());
    }
    if (p.velocity == VelocityMode::Field) needs_field = true;
    if (p.repulsion_source == RepulsionSource::Other && (p.other >= populations.size() || p.other == k))
      config_error("population " + std::to_string(k) + ": repulsion source must name another population");
  }
  if (needs_field && !domain.has_label(BoundaryLabel::Target))
    config_error("a field-driven population needs a target segment");

  if (scale == Scale::Macro) {
    if (!(h > 0.0)) config_error("h must be positive");
    const GridSpec g = grid_for(domain.bounds, h);
    if (schedule.dt * speed_bound > h * (1.0 + 1e-12)) throw CflViolationError(speed_bound, schedule.dt, h);
    for (const auto& p : populations) {
      for (const auto& in : p.inflows) {
        const auto* seg = domain.find_segment(in.segment);
        if (!seg || seg->label != BoundaryLabel::Inflow)
          config_error("inflow segment '" + in.segment + "' is not an inflow-labeled segment");
        if (!(in.density >= 0.0) || !(in.jitter >= 0.0 && in.jitter <= 1.0))
          config_error("inflow density must be >= 0 and jitter in [0, 1]");
        if (in.waveform.kind == InflowWaveform::Kind::Square &&
            !(in.waveform.period > 0.0 && in.waveform.duty >= 0.0 && in.waveform.duty <= 1.0))
          config_error("square inflow needs period > 0 and duty in [0, 1]");
      }
      for (const auto& d : p.patches)
        if (!(d.density >= 0.0)) config_error("patch density must be non-negative");
    }
    if (uses("lane_alternation")) {
      if (populations.size() < 2) config_error("lane_alternation needs two populations");
      if (metrics.lane_col_begin < 0 || metrics.lane_col_end > g.nx || metrics.lane_col_begin >= metrics.lane_col_end)
        config_error("lane_columns out of range");
    }
    for (const char* m : {"crystal", "collinearity", "angle_histogram", "displacement"})
      if (uses(m)) config_error(std::string("metric '") + m + "' needs a micro scenario");
  } else {
    if (populations.size() != 1) config_error("micro scenarios take exactly one population");
    const auto& L = populations[0].lattice;
    if (L.nx < 1 || L.ny < 1 || !(L.spacing > 0.0) || !(L.jitter >= 0.0 && L.jitter < 0.5))
      config_error("lattice needs nx, ny >= 1, spacing > 0, jitter in [0, 0.5)");
    const double half_w = 0.5 * (L.nx - 1 + 2 * L.jitter + (L.kind == LatticeSpec::Kind::Hex ? 0.5 : 0.0)) * L.spacing;
    const double half_h = 0.5 * ((L.ny - 1) * (L.kind == LatticeSpec::Kind::Hex ? std::sqrt(3.0) / 2 : 1.0) + 2 * L.jitter) * L.spacing;
    const Rect& b = domain.bounds;
    if (L.center.x - half_w < b.x0 || L.center.x + half_w > b.x1 || L.center.y - half_h < b.y0 || L.center.y + half_h > b.y1)
      config_error("lattice does not fit inside the domain");
    for (const char* m : {"mass", "max_density", "components", "lane_alternation", "region_density"})
      if (uses(m)) config_error(std::string("metric '") + m + "' needs a macro scenario");
  }
}

// ---------------------------------------------------------------------------
// ConfigDoc

ConfigDoc ConfigDoc::parse(const std::string& text) {
  ConfigDoc doc;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') config_error("line " + std::to_string(lineno) + ": malformed section header");
      doc.sections.push_back({trim(line.substr(1, line.size() - 2)), {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_error("line " + std::to_string(lineno) + ": expected key = value");
    if (doc.sections.empty()) config_error("line " + std::to_string(lineno) + ": entry before any section");
    doc.sections.back().entries.push_back({trim(line.substr(0, eq)), trim(line.substr(eq + 1))});
  }
  return doc;
}

ConfigDoc::Section* ConfigDoc::find(const std::string& name) {
  for (auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

void ConfigDoc::set(const std::string& section, const std::string& key, const std::string& value) {
  Section* s = find(section);
  if (!s) {
    sections.push_back({section, {}});
    s = &sections.back();
  }
  auto& e = s->entries;
  auto first = std::find_if(e.begin(), e.end(), [&](const Entry& x) { return x.key == key; });
  if (first == e.end()) {
    e.push_back({key, value});
    return;
  }
  first->value = value;
  const auto pos = first - e.begin();
  e.erase(std::remove_if(e.begin() + pos + 1, e.end(), [&](const Entry& x) { return x.key == key; }), e.end());
}

// ---------------------------------------------------------------------------
// dump

std::string dump_config(const Scenario& s) {
  std::ostringstream o;
  o << "[scenario]\n";
  o << "name = " << s.name << "\n";
  o << "scale = " << (s.scale == Scale::Macro ? "macro" : "micro") << "\n";
  o << "seed = " << s.seed << "\n";
  o << "h = " << fmt(s.h) << "\n";
  o << "speed_bound = " << fmt(s.speed_bound) << "\n";
  o << "dt = " << fmt(s.schedule.dt) << "\n";
  o << "steps = " << s.schedule.steps << "\n";
  o << "stride = " << s.schedule.stride << "\n";
  o << "stop_at_equilibrium = " << fmt(s.schedule.stop_at_equilibrium) << "\n";
  o << "equilibrium_tol = " << fmt(s.schedule.equilibrium_tol) << "\n";
  o << "equilibrium_window = " << s.schedule.equilibrium_window << "\n";
  o << "solver_tol = " << fmt(s.solver.tol) << "\n";
  o << "solver_max_iters = " << s.solver.max_iters << "\n";
  o << "solver_omega = " << fmt(s.solver.omega) << "\n";
  o << "solver_order = " << to_string(s.solver.order) << "\n";

  o << "\n[domain]\n";
  o << "bounds = " << fmt(s.domain.bounds) << "\n";
  for (const auto& r : s.domain.obstacles) o << "obstacle = " << fmt(r) << "\n";
  for (const auto& g : s.domain.segments)
    o << "segment = " << g.name << " " << to_string(g.edge) << " " << fmt(g.from) << " " << fmt(g.to) << " "
      << to_string(g.label) << "\n";

  o << "\n[metrics]\n";
  o << "names =";
  for (const auto& m : s.metrics.names) o << " " << m;
  o << "\n";
  o << "lane_columns = " << s.metrics.lane_col_begin << " " << s.metrics.lane_col_end << "\n";
  o << "region = " << fmt(s.metrics.region) << "\n";
  o << "component_threshold = " << fmt(s.metrics.component_threshold) << "\n";
  o << "angle_neighbors = " << s.metrics.angle_neighbors << "\n";
  o << "angle_bin = " << fmt(s.metrics.angle_bin) << "\n";

  for (std::size_t k = 0; k < s.populations.size(); ++k) {
    const auto& p = s.populations[k];
    const auto& c = p.cfg;
    o << "\n[" << population_section(k) << "]\n";
    o << "name = " << p.name << "\n";
    o << "alpha_c = " << fmt(c.alpha_c) << "\n";
    o << "alpha_r = " << fmt(c.alpha_r) << "\n";
    o << "R_r = " << fmt(c.R_r) << "\n";
    o << "R_c_max = " << fmt(c.R_c_max) << "\n";
    o << "p = " << fmt(c.p) << "\n";
    o << "F_c = " << fmt(c.F_c) << "\n";
    o << "F_r = " << fmt(c.F_r) << "\n";
    o << "body_size = " << fmt(c.body_size) << "\n";
    o << "velocity = " << (p.velocity == VelocityMode::Field ? "field" : "fixed") << "\n";
    o << "w = " << fmt(p.w_fixed) << "\n";
    o << "axis = " << fmt(p.axis) << "\n";
    o << "repulsion = " << (p.repulsion_source == RepulsionSource::Self ? "self" : "other") << "\n";
    o << "other = " << p.other << "\n";
    o << "absorbing = " << fmt(p.absorbing) << "\n";
    for (const auto& d : p.patches) {
      if (d.shape == DensityPatch::Shape::Rect)
        o << "patch = rect " << fmt(d.rect) << " " << fmt(d.density) << "\n";
      else
        o << "patch = disc " << fmt(d.center) << " " << fmt(d.radius) << " " << fmt(d.density) << "\n";
    }
    for (const auto& in : p.inflows) {
      o << "inflow = " << in.segment << " " << fmt(in.density) << " "
        << (in.waveform.kind == InflowWaveform::Kind::Constant ? "constant" : "square") << " "
        << fmt(in.waveform.period) << " " << fmt(in.waveform.duty) << " " << fmt(in.jitter) << "\n";
    }
    const auto& L = p.lattice;
    if (s.scale == Scale::Macro && L == LatticeSpec{}) continue;
    o << "lattice = " << (L.kind == LatticeSpec::Kind::Square ? "square" : "hex") << " " << L.nx << " " << L.ny << " "
      << fmt(L.spacing) << " " << fmt(L.center) << " " << fmt(L.jitter) << "\n";
  }
  return o.str();
}

// ---------------------------------------------------------------------------
// parse

namespace {

void read_population(const ConfigDoc::Section& sec, PopulationSpec& p) {
  for (const auto& [key, value] : sec.entries) {
    auto& c = p.cfg;
    if (key == "name") p.name = value;
    else if (key == "alpha_c") c.alpha_c = parse_number(value, key);
    else if (key == "alpha_r") c.alpha_r = parse_number(value, key);
    else if (key == "R_r") c.R_r = parse_number(value, key);
    else if (key == "R_c_max") c.R_c_max = parse_number(value, key);
    else if (key == "p") c.p = parse_number(value, key);
    else if (key == "F_c") c.F_c = parse_number(value, key);
    else if (key == "F_r") c.F_r = parse_number(value, key);
    else if (key == "body_size") c.body_size = parse_number(value, key);
    else if (key == "velocity") {
      if (value == "field") p.velocity = VelocityMode::Field;
      else if (value == "fixed") p.velocity = VelocityMode::Fixed;
      else config_error("velocity must be field or fixed");
    } else if (key == "w") p.w_fixed = parse_vec(value, key);
    else if (key == "axis") p.axis = parse_vec(value, key);
    else if (key == "repulsion") {
      if (value == "self") p.repulsion_source = RepulsionSource::Self;
      else if (value == "other") p.repulsion_source = RepulsionSource::Other;
      else config_error("repulsion must be self or other");
    } else if (key == "other") {
      const long o = parse_integer(value, key);
      if (o < 0) config_error("other must be a population index");
      p.other = static_cast<std::size_t>(o);
    } else if (key == "absorbing") p.absorbing = parse_bool(value, key);
    else if (key == "patch") {
      const auto parts = split_ws(value);
      DensityPatch d;
      if (!parts.empty() && parts[0] == "rect" && parts.size() == 6) {
        d.shape = DensityPatch::Shape::Rect;
        d.rect = {parse_number(parts[1], key), parse_number(parts[2], key), parse_number(parts[3], key),
                  parse_number(parts[4], key)};
        d.density = parse_number(parts[5], key);
      } else if (!parts.empty() && parts[0] == "disc" && parts.size() == 5) {
        d.shape = DensityPatch::Shape::Disc;
        d.center = {parse_number(parts[1], key), parse_number(parts[2], key)};
        d.radius = parse_number(parts[3], key);
        d.density = parse_number(parts[4], key);
      } else {
        config_error("patch must be 'rect x0 y0 x1 y1 density' or 'disc cx cy r density'");
      }
      p.patches.push_back(d);
    } else if (key == "inflow") {
      const auto parts = split_ws(value);
      if (parts.size() != 6) config_error("inflow must be 'segment density constant|square period duty jitter'");
      InflowSpec in;
      in.segment = parts[0];
      in.density = parse_number(parts[1], key);
      if (parts[2] == "constant") in.waveform.kind = InflowWaveform::Kind::Constant;
      else if (parts[2] == "square") in.waveform.kind = InflowWaveform::Kind::Square;
      else config_error("inflow waveform must be constant or square");
      in.waveform.period = parse_number(parts[3], key);
      in.waveform.duty = parse_number(parts[4], key);
      in.jitter = parse_number(parts[5], key);
      p.inflows.push_back(in);
    } else if (key == "lattice") {
      const auto parts = split_ws(value);
      if (parts.size() != 7) config_error("lattice must be 'square|hex nx ny spacing cx cy jitter'");
      auto& L = p.lattice;
      if (parts[0] == "square") L.kind = LatticeSpec::Kind::Square;
      else if (parts[0] == "hex") L.kind = LatticeSpec::Kind::Hex;
      else config_error("lattice kind must be square or hex");
      L.nx = static_cast<int>(parse_integer(parts[1], key));
      L.ny = static_cast<int>(parse_integer(parts[2], key));
      L.spacing = parse_number(parts[3], key);
      L.center = {parse_number(parts[4], key), parse_number(parts[5], key)};
      L.jitter = parse_number(parts[6], key);
    } else {
      config_error("unknown key '" + key + "' in [" + sec.name + "]");
    }
  }
}

}  // namespace

Scenario scenario_from_doc(const ConfigDoc& doc) {
  Scenario s;
  s.domain = Domain{};
  bool have_scenario = false, have_domain = false;
  std::vector<std::pair<std::size_t, PopulationSpec>> pops;

  for (const auto& sec : doc.sections) {
    if (sec.name == "scenario") {
      have_scenario = true;
      for (const auto& [key, value] : sec.entries) {
        if (key == "name") s.name = value;
        else if (key == "scale") {
          if (value == "macro") s.scale = Scale::Macro;
          else if (value == "micro") s.scale = Scale::Micro;
          else config_error("scale must be macro or micro");
        } else if (key == "seed") {
          const long v = parse_integer(value, key);
          if (v < 0) config_error("seed must be non-negative");
          s.seed = static_cast<std::uint64_t>(v);
        } else if (key == "h") s.h = parse_number(value, key);
        else if (key == "speed_bound") s.speed_bound = parse_number(value, key);
        else if (key == "dt") s.schedule.dt = parse_number(value, key);
        else if (key == "steps") s.schedule.steps = parse_integer(value, key);
        else if (key == "stride") s.schedule.stride = parse_integer(value, key);
        else if (key == "stop_at_equilibrium") s.schedule.stop_at_equilibrium = parse_bool(value, key);
        else if (key == "equilibrium_tol") s.schedule.equilibrium_tol = parse_number(value, key);
        else if (key == "equilibrium_window") s.schedule.equilibrium_window = static_cast<int>(parse_integer(value, key));
        else if (key == "solver_tol") s.solver.tol = parse_number(value, key);
        else if (key == "solver_max_iters") s.solver.max_iters = static_cast<int>(parse_integer(value, key));
        else if (key == "solver_omega") s.solver.omega = parse_number(value, key);
        else if (key == "solver_order") {
          if (value == "red_black") s.solver.order = SweepOrder::RedBlack;
          else if (value == "lexicographic") s.solver.order = SweepOrder::Lexicographic;
          else config_error("solver_order must be red_black or lexicographic");
        } else config_error("unknown key '" + key + "' in [scenario]");
      }
    } else if (sec.name == "domain") {
      have_domain = true;
      for (const auto& [key, value] : sec.entries) {
        if (key == "bounds") s.domain.bounds = parse_rect(value, key);
        else if (key == "obstacle") s.domain.obstacles.push_back(parse_rect(value, key));
        else if (key == "segment") {
          const auto parts = split_ws(value);
          if (parts.size() != 5) config_error("segment must be 'name edge from to label'");
          BoundarySegment g;
          g.name = parts[0];
          const auto e = parse_edge(parts[1]);
          const auto l = parse_label(parts[4]);
          if (!e) config_error("unknown edge '" + parts[1] + "'");
          if (!l) config_error("unknown boundary label '" + parts[4] + "'");
          g.edge = *e;
          g.label = *l;
          g.from = parse_number(parts[2], key);
          g.to = parse_number(parts[3], key);
          s.domain.segments.push_back(g);
        } else config_error("unknown key '" + key + "' in [domain]");
      }
    } else if (sec.name == "metrics") {
      for (const auto& [key, value] : sec.entries) {
        if (key == "names") s.metrics.names = split_ws(value);
        else if (key == "lane_columns") {
          const auto parts = split_ws(value);
          if (parts.size() != 2) config_error("lane_columns takes two integers");
          s.metrics.lane_col_begin = static_cast<int>(parse_integer(parts[0], key));
          s.metrics.lane_col_end = static_cast<int>(parse_integer(parts[1], key));
        } else if (key == "region") s.metrics.region = parse_rect(value, key);
        else if (key == "component_threshold") s.metrics.component_threshold = parse_number(value, key);
        else if (key == "angle_neighbors") s.metrics.angle_neighbors = static_cast<int>(parse_integer(value, key));
        else if (key == "angle_bin") s.metrics.angle_bin = parse_number(value, key);
        else config_error("unknown key '" + key + "' in [metrics]");
      }
    } else if (sec.name.rfind("population.", 0) == 0) {
      const long idx = parse_integer(sec.name.substr(11), "section " + sec.name);
      if (idx < 0) config_error("bad population index in [" + sec.name + "]");
      for (const auto& [k, _] : pops)
        if (k == static_cast<std::size_t>(idx)) config_error("duplicate section [" + sec.name + "]");
      PopulationSpec p;
      read_population(sec, p);
      pops.emplace_back(static_cast<std::size_t>(idx), std::move(p));
    } else {
      config_error("unknown section [" + sec.name + "]");
    }
  }
  if (!have_scenario) config_error("missing [scenario] section");
  if (!have_domain) config_error("missing [domain] section");
  std::sort(pops.begin(), pops.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t k = 0; k < pops.size(); ++k) {
    if (pops[k].first != k) config_error("population sections must be numbered 0, 1, ...");
    s.populations.push_back(std::move(pops[k].second));
  }
  return s;
}

Scenario parse_config(const std::string& text) { return scenario_from_doc(ConfigDoc::parse(text)); }

Scenario load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

Scenario apply_overrides(const Scenario& s, const std::vector<std::string>& overrides) {
  if (overrides.empty()) return s;
  ConfigDoc doc = ConfigDoc::parse(dump_config(s));
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) config_error("override '" + o + "' is not key=value");
    const std::string path = trim(o.substr(0, eq)), value = trim(o.substr(eq + 1));
    const auto dot = path.rfind('.');
    const std::string section = dot == std::string::npos ? "scenario" : path.substr(0, dot);
    const std::string key = dot == std::string::npos ? path : path.substr(dot + 1);
    if (section != "scenario" && section != "domain" && section != "metrics" && !doc.find(section))
      config_error("override '" + o + "' names unknown section '" + section + "'");
    doc.set(section, key, value);
  }
  return scenario_from_doc(doc);
}

}  // namespace ipsim
