#pragma once

#include <algorithm>
#include <cmath>

namespace crosscheck {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(Vec2 a, double k) { return {a.x * k, a.y * k}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

// Axis-aligned rectangle, x1 < x2 and y1 < y2 when well-formed.
struct Rect {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  bool well_formed() const { return x1 < x2 && y1 < y2; }
  Vec2 center() const { return {(x1 + x2) * 0.5, (y1 + y2) * 0.5}; }
  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }

  bool contains(Vec2 p) const { return p.x >= x1 && p.x <= x2 && p.y >= y1 && p.y <= y2; }

  Rect expanded(double margin) const {
    return {x1 - margin, y1 - margin, x2 + margin, y2 + margin};
  }
};

inline bool rects_overlap(const Rect& a, const Rect& b) {
  return a.x1 <= b.x2 && a.x2 >= b.x1 && a.y1 <= b.y2 && a.y2 >= b.y1;
}

// True iff the open segment (a, b) passes through the interior of r.
// Touching an edge or corner only does not count.
bool segment_intersects_interior(Vec2 a, Vec2 b, const Rect& r);

// Entry distance of segment a->b into rect r, or a negative value when the
// segment never reaches the rect. Boundary touches count here (closed rect);
// used for picking the nearest rectangle along a ray.
double segment_rect_entry(Vec2 a, Vec2 b, const Rect& r);

// Compass heading of a velocity/heading angle given in degrees CCW from +x.
// n = +y, s = -y, e = +x, w = -x; 45-degree boundaries round toward e/w.
enum class Compass { n, s, e, w };
Compass compass_from_rot_deg(double rot_deg);
Vec2 compass_unit(Compass c);

} // namespace crosscheck
