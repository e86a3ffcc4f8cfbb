#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace ipsim {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double norm2(Vec2 a) { return dot(a, a); }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
/// Counter-clockwise rotation by theta radians.
inline Vec2 rotate(Vec2 a, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * a.x - s * a.y, s * a.x + c * a.y};
}

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

  constexpr double width() const { return x1 - x0; }
  constexpr double height() const { return y1 - y0; }
  constexpr double area() const { return width() * height(); }
  constexpr bool contains(Vec2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  constexpr Rect shifted(Vec2 s) const { return {x0 + s.x, y0 + s.y, x1 + s.x, y1 + s.y}; }
  friend constexpr bool operator==(const Rect&, const Rect&) = default;
};

/// Length of [a0, a1] ∩ [b0, b1] (zero when disjoint).
inline double interval_overlap(double a0, double a1, double b0, double b1) {
  const double lo = a0 > b0 ? a0 : b0;
  const double hi = a1 < b1 ? a1 : b1;
  return hi > lo ? hi - lo : 0.0;
}

/// Exact area of cell_a ∩ (cell_b + shift).
double cell_overlap_volume(const Rect& cell_a, const Rect& cell_b, Vec2 shift);

/// Circular sector S(apex, radius, angle) symmetric about `axis`.
struct Sector {
  Vec2 apex;
  double radius = 0.0;
  Vec2 axis{1.0, 0.0};
  double angle = kTwoPi;
};

/// Slack on the angular test; keeps exactly perpendicular points inside a
/// half-plane sector despite cos(pi/2) rounding to 6e-17.
inline constexpr double kAngularSlack = 1e-12;

/// Closed membership test. Throws InvalidArgument for a non-unit axis unless
/// the sector is a full ball.
bool sector_contains(const Sector& s, Vec2 y);

/// alpha * R^2 / 2, not clipped by the domain.
double sector_area(const Sector& s);

// ---------------------------------------------------------------------------
// Domain

enum class Edge { Left, Right, Bottom, Top };
enum class BoundaryLabel { Target, Wall, Inflow };

const char* to_string(Edge e);
const char* to_string(BoundaryLabel l);
std::optional<Edge> parse_edge(const std::string& s);
std::optional<BoundaryLabel> parse_label(const std::string& s);

/// Labeled piece of one outer edge. `from`/`to` are absolute coordinates
/// along the edge: y for Left/Right, x for Bottom/Top.
struct BoundarySegment {
  std::string name;
  Edge edge = Edge::Left;
  double from = 0.0;
  double to = 0.0;
  BoundaryLabel label = BoundaryLabel::Wall;
  friend bool operator==(const BoundarySegment&, const BoundarySegment&) = default;
};

/// Outer rectangle, rectangular obstacles, and boundary labels. Parts of the
/// outer boundary not covered by a segment are walls.
struct Domain {
  Rect bounds{0.0, 0.0, 1.0, 1.0};
  std::vector<Rect> obstacles;
  std::vector<BoundarySegment> segments;

  /// Throws InvalidDomain on overlapping obstacles/segments or obstacles
  /// touching the outer boundary.
  void validate() const;

  /// Label of the boundary face [s0, s1] on `edge`; Target wins whenever any
  /// part of the face touches a target segment.
  BoundaryLabel face_label(Edge edge, double s0, double s1) const;

  const BoundarySegment* find_segment(const std::string& name) const;
  bool point_in_obstacle(Vec2 p) const;
  bool has_label(BoundaryLabel l) const;

  friend bool operator==(const Domain&, const Domain&) = default;
};

/// Domain whose four edges each carry a single label.
Domain make_box_domain(const Rect& bounds, BoundaryLabel left, BoundaryLabel right,
                       BoundaryLabel bottom, BoundaryLabel top);

}  // namespace ipsim
