#include "ipsim/geometry.hpp"

#include <algorithm>

#include "ipsim/errors.hpp"

namespace ipsim {

double cell_overlap_volume(const Rect& cell_a, const Rect& cell_b, Vec2 shift) {
  const Rect b = cell_b.shifted(shift);
  return interval_overlap(cell_a.x0, cell_a.x1, b.x0, b.x1) *
         interval_overlap(cell_a.y0, cell_a.y1, b.y0, b.y1);
}

bool sector_contains(const Sector& s, Vec2 y) {
  const bool full = s.angle >= kTwoPi;
  if (!full && std::abs(norm(s.axis) - 1.0) > 1e-12) {
    throw SimError(ErrorKind::InvalidArgument, "sector axis must be a unit vector");
  }
  const Vec2 d = y - s.apex;
  const double r = norm(d);
  if (r > s.radius) return false;
  if (r == 0.0 || full) return true;
  return dot(d, s.axis) >= (std::cos(0.5 * s.angle) - kAngularSlack) * r;
}

double sector_area(const Sector& s) { return 0.5 * s.angle * s.radius * s.radius; }

const char* to_string(Edge e) {
  switch (e) {
    case Edge::Left: return "left";
    case Edge::Right: return "right";
    case Edge::Bottom: return "bottom";
    case Edge::Top: return "top";
  }
  return "?";
}

const char* to_string(BoundaryLabel l) {
  switch (l) {
    case BoundaryLabel::Target: return "target";
    case BoundaryLabel::Wall: return "wall";
    case BoundaryLabel::Inflow: return "inflow";
  }
  return "?";
}

std::optional<Edge> parse_edge(const std::string& s) {
  if (s == "left") return Edge::Left;
  if (s == "right") return Edge::Right;
  if (s == "bottom") return Edge::Bottom;
  if (s == "top") return Edge::Top;
  return std::nullopt;
}

std::optional<BoundaryLabel> parse_label(const std::string& s) {
  if (s == "target") return BoundaryLabel::Target;
  if (s == "wall") return BoundaryLabel::Wall;
  if (s == "inflow") return BoundaryLabel::Inflow;
  return std::nullopt;
}

namespace {

bool strictly_inside(const Rect& inner, const Rect& outer) {
  return inner.x0 > outer.x0 && inner.x1 < outer.x1 && inner.y0 > outer.y0 && inner.y1 < outer.y1;
}

bool closed_overlap(const Rect& a, const Rect& b) {
  return a.x0 <= b.x1 && b.x0 <= a.x1 && a.y0 <= b.y1 && b.y0 <= a.y1;
}

std::pair<double, double> edge_extent(const Rect& r, Edge e) {
  if (e == Edge::Left || e == Edge::Right) return {r.y0, r.y1};
  return {r.x0, r.x1};
}

}  // namespace

void Domain::validate() const {
  if (!(bounds.width() > 0.0 && bounds.height() > 0.0)) {
    throw SimError(ErrorKind::InvalidDomain, "bounds must have positive extent");
  }
  for (std::size_t a = 0; a < obstacles.size(); ++a) {
    const Rect& o = obstacles[a];
    if (!(o.width() > 0.0 && o.height() > 0.0)) {
      throw SimError(ErrorKind::InvalidDomain, "obstacle with non-positive extent");
    }
    if (!strictly_inside(o, bounds)) {
      throw SimError(ErrorKind::InvalidDomain, "obstacle touches or leaves the outer boundary");
    }
    for (std::size_t b = a + 1; b < obstacles.size(); ++b) {
      if (closed_overlap(o, obstacles[b])) {
        throw SimError(ErrorKind::InvalidDomain, "obstacles are not pairwise disjoint");
      }
    }
  }
  for (std::size_t a = 0; a < segments.size(); ++a) {
    const auto& s = segments[a];
    const auto [lo, hi] = edge_extent(bounds, s.edge);
    if (!(s.from < s.to) || s.from < lo || s.to > hi) {
      throw SimError(ErrorKind::InvalidDomain, "segment '" + s.name + "' outside its edge");
    }
    for (std::size_t b = a + 1; b < segments.size(); ++b) {
      const auto& t = segments[b];
      if (t.name == s.name) {
        throw SimError(ErrorKind::InvalidDomain, "duplicate segment name '" + s.name + "'");
      }
      if (t.edge == s.edge && interval_overlap(s.from, s.to, t.from, t.to) > 0.0) {
        throw SimError(ErrorKind::InvalidDomain,
                       "segments '" + s.name + "' and '" + t.name + "' overlap");
      }
    }
  }
}

BoundaryLabel Domain::face_label(Edge edge, double s0, double s1) const {
  bool any_inflow = false;
  bool touches_target = false;
  double covered_inflow = 0.0;
  for (const auto& s : segments) {
    if (s.edge != edge) continue;
    if (s.label == BoundaryLabel::Target && interval_overlap(s0, s1, s.from, s.to) > 0.0) {
      touches_target = true;
    }
    if (s.label == BoundaryLabel::Inflow) {
      const double ov = interval_overlap(s0, s1, s.from, s.to);
      covered_inflow += ov;
      any_inflow = any_inflow || ov > 0.0;
    }
  }
  if (touches_target) return BoundaryLabel::Target;
  if (any_inflow && covered_inflow >= 0.5 * (s1 - s0)) return BoundaryLabel::Inflow;
  return BoundaryLabel::Wall;
}

const BoundarySegment* Domain::find_segment(const std::string& name) const {
  for (const auto& s : segments) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

bool Domain::point_in_obstacle(Vec2 p) const {
  return std::any_of(obstacles.begin(), obstacles.end(), [&](const Rect& o) { return o.contains(p); });
}

bool Domain::has_label(BoundaryLabel l) const {
  return std::any_of(segments.begin(), segments.end(), [&](const auto& s) { return s.label == l; });
}

Domain make_box_domain(const Rect& bounds, BoundaryLabel left, BoundaryLabel right,
                       BoundaryLabel bottom, BoundaryLabel top) {
  Domain d;
  d.bounds = bounds;
  auto add = [&](const char* name, Edge e, BoundaryLabel l) {
    const auto [lo, hi] = edge_extent(bounds, e);
    d.segments.push_back({name, e, lo, hi, l});
  };
  add("left", Edge::Left, left);
  add("right", Edge::Right, right);
  add("bottom", Edge::Bottom, bottom);
  add("top", Edge::Top, top);
  return d;
}

}  // namespace ipsim
