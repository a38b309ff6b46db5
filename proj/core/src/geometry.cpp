#include "crosscheck/geometry.hpp"

#include <limits>

namespace crosscheck {

namespace {

// Liang-Barsky clip of segment a + t*(b-a), t in [0,1], against the slab
// lo <= a.c + t*d.c <= hi. Returns false when the slab is missed entirely.
bool clip_axis(double p, double d, double lo, double hi, double& t0, double& t1) {
  if (d == 0.0) return p >= lo && p <= hi;
  double ta = (lo - p) / d;
  double tb = (hi - p) / d;
  if (ta > tb) std::swap(ta, tb);
  t0 = std::max(t0, ta);
  t1 = std::min(t1, tb);
  return t0 <= t1;
}

} // namespace

bool segment_intersects_interior(Vec2 a, Vec2 b, const Rect& r) {
  Vec2 d = b - a;
  double t0 = 0.0;
  double t1 = 1.0;
  if (!clip_axis(a.x, d.x, r.x1, r.x2, t0, t1)) return false;
  if (!clip_axis(a.y, d.y, r.y1, r.y2, t0, t1)) return false;
  if (t0 >= t1) return false; // grazing contact, zero-length overlap
  // The clipped sub-segment has positive length inside the closed rect; it
  // runs through the interior unless it lies entirely on one edge line.
  Vec2 p0 = a + d * t0;
  Vec2 p1 = a + d * t1;
  Vec2 mid = (p0 + p1) * 0.5;
  return mid.x > r.x1 && mid.x < r.x2 && mid.y > r.y1 && mid.y < r.y2;
}

double segment_rect_entry(Vec2 a, Vec2 b, const Rect& r) {
  Vec2 d = b - a;
  double t0 = 0.0;
  double t1 = 1.0;
  if (!clip_axis(a.x, d.x, r.x1, r.x2, t0, t1)) return -1.0;
  if (!clip_axis(a.y, d.y, r.y1, r.y2, t0, t1)) return -1.0;
  if (t0 > t1) return -1.0;
  return t0 * norm(d);
}

Compass compass_from_rot_deg(double rot_deg) {
  double r = std::fmod(rot_deg, 360.0);
  if (r < 0.0) r += 360.0;
  if (r > 45.0 && r < 135.0) return Compass::n;
  if (r >= 135.0 && r <= 225.0) return Compass::w;
  if (r > 225.0 && r < 315.0) return Compass::s;
  return Compass::e;
}

Vec2 compass_unit(Compass c) {
  switch (c) {
    case Compass::n: return {0.0, 1.0};
    case Compass::s: return {0.0, -1.0};
    case Compass::e: return {1.0, 0.0};
    case Compass::w: return {-1.0, 0.0};
  }
  return {1.0, 0.0};
}

} // namespace crosscheck
