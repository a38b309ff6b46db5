#include "crosscheck/world_config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "crosscheck/errors.hpp"
#include "json_reader.hpp"

namespace crosscheck {

using nlohmann::json;

Vec2 LaneSpec::dir() const {
  Vec2 d = end - start;
  double n = norm(d);
  return {d.x / n, d.y / n};
}

Compass LaneSpec::direction() const {
  Vec2 d = end - start;
  if (std::abs(d.x) >= std::abs(d.y)) return d.x >= 0 ? Compass::e : Compass::w;
  return d.y >= 0 ? Compass::n : Compass::s;
}

Rect LaneSpec::band() const {
  double half = width_m / 2.0;
  if (horizontal()) {
    return {std::min(start.x, end.x), start.y - half, std::max(start.x, end.x), start.y + half};
  }
  return {start.x - half, std::min(start.y, end.y), start.x + half, std::max(start.y, end.y)};
}

namespace {

using detail::ObjectReader;
using detail::array_field;

bool valid_symbol(const std::string& s) {
  if (s.empty() || !std::islower(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s) {
    unsigned char u = static_cast<unsigned char>(c);
    if (!(std::islower(u) || std::isdigit(u) || c == '_')) return false;
  }
  return true;
}

} // namespace

WorldConfig world_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("world config: invalid JSON: ") + e.what());
  }

  WorldConfig cfg;
  ObjectReader top(j, "world config");

  ObjectReader map_spec(top.required("map_spec"), "map_spec");
  std::size_t idx = 0;
  for (const auto& lj : array_field(map_spec, "lanes")) {
    ObjectReader r(lj, "lane[" + std::to_string(idx) + "]");
    LaneSpec lane;
    lane.id = r.string("id");
    lane.start = r.point("start");
    lane.end = r.point("end");
    lane.width_m = r.number_or("width_m", 3.5);
    lane.speed_limit_mps = r.number_or("speed_limit_mps", 8.4);
    lane.spawn_weight = r.number_or("spawn_weight", 0.0);
    lane.vehicle_length_m = r.number_or("vehicle_length_m", 4.5);
    lane.vehicle_width_m = r.number_or("vehicle_width_m", 2.0);
    lane.wrap = r.boolean_or("wrap", false);
    r.finish();
    cfg.lanes.push_back(std::move(lane));
    ++idx;
  }
  idx = 0;
  for (const auto& ij : array_field(map_spec, "intersections")) {
    ObjectReader r(ij, "intersection[" + std::to_string(idx) + "]");
    IntersectionSpec spec;
    spec.id = r.integer("id");
    spec.bbox = r.rect("bbox");
    r.finish();
    cfg.intersections.push_back(spec);
    ++idx;
  }
  map_spec.finish();

  idx = 0;
  if (const json* phases = top.optional("light_phases")) {
    if (!phases->is_array()) throw ConfigError("world config: field 'light_phases' must be an array");
    for (const auto& pj : *phases) {
      ObjectReader r(pj, "light_phase[" + std::to_string(idx) + "]");
      PhaseSpec p;
      p.intersection_id = r.integer("intersection_id");
      std::string approach = r.string("approach");
      try {
        p.approach = compass_from_string(approach);
      } catch (const ValidationError&) {
        throw ConfigError("light_phase[" + std::to_string(idx) + "]: field 'approach' must be one of n, s, e, w");
      }
      p.red_s = r.number("red_s");
      p.green_s = r.number("green_s");
      p.yellow_s = r.number("yellow_s");
      p.offset_s = r.number_or("offset_s", 0.0);
      r.finish();
      cfg.light_phases.push_back(p);
      ++idx;
    }
  }

  idx = 0;
  if (const json* obstacles = top.optional("obstacle_specs")) {
    if (!obstacles->is_array()) throw ConfigError("world config: field 'obstacle_specs' must be an array");
    for (const auto& oj : *obstacles) {
      ObjectReader r(oj, "obstacle_spec[" + std::to_string(idx) + "]");
      ObstacleSpec o;
      o.lane_id = r.string("lane_id");
      o.bbox = r.rect("bbox");
      o.spawn_time_s = r.number_or("spawn_time_s", 0.0);
      r.finish();
      cfg.obstacle_specs.push_back(std::move(o));
      ++idx;
    }
  }

  cfg.npc_count = top.integer("npc_count");
  cfg.duration_s = top.number("duration_s");
  cfg.dt_s = top.number_or("dt_s", 0.1);
  cfg.seed = top.uinteger_or("seed", 0);
  top.finish();

  validate_world_config(cfg);
  return cfg;
}

WorldConfig world_config_from_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open world config '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return world_config_from_json(ss.str());
}

namespace {

// Green window of a phase in absolute time, as [lo, hi) modulo the cycle.
struct ModInterval {
  double lo, hi, cycle;
};

ModInterval green_interval(const PhaseSpec& p) {
  double cycle = p.cycle_s();
  double lo = std::fmod(p.red_s - p.offset_s, cycle);
  if (lo < 0) lo += cycle;
  return {lo, lo + p.green_s, cycle};
}

bool segments_overlap(double a1, double a2, double b1, double b2) {
  return a1 < b2 && b1 < a2;
}

bool mod_intervals_overlap(const ModInterval& a, const ModInterval& b) {
  // Unroll each interval onto [0, 2*cycle) and test all segment pairs.
  double c = a.cycle;
  const double as[2][2] = {{a.lo, std::min(a.hi, c)}, {c, a.hi > c ? a.hi : c}};
  const double bs[2][2] = {{b.lo, std::min(b.hi, c)}, {0.0, b.hi > c ? b.hi - c : 0.0}};
  for (const auto& sa : as) {
    for (const auto& sb : bs) {
      if (segments_overlap(sa[0], sa[1], sb[0], sb[1])) return true;
      if (segments_overlap(sa[0] - c, sa[1] - c, sb[0], sb[1])) return true;
    }
  }
  return false;
}

bool conflicting(Compass a, Compass b) {
  bool a_ns = a == Compass::n || a == Compass::s;
  bool b_ns = b == Compass::n || b == Compass::s;
  return a_ns != b_ns;
}

} // namespace

void validate_world_config(const WorldConfig& cfg) {
  if (!(cfg.dt_s > 0)) throw ConfigError("world config: dt_s must be > 0");
  if (!(cfg.duration_s > 0)) throw ConfigError("world config: duration_s must be > 0");
  if (cfg.npc_count < 0) throw ConfigError("world config: npc_count must be >= 0");
  if (cfg.lanes.empty()) throw ConfigError("world config: map_spec.lanes must not be empty");

  std::set<std::string> lane_ids;
  double total_weight = 0.0;
  for (const LaneSpec& lane : cfg.lanes) {
    std::string ctx = "lane '" + lane.id + "'";
    if (!valid_symbol(lane.id))
      throw ConfigError(ctx + ": id must match [a-z][a-z0-9_]*");
    if (!lane_ids.insert(lane.id).second) throw ConfigError(ctx + ": duplicate id");
    bool axis = (lane.start.x == lane.end.x) != (lane.start.y == lane.end.y);
    if (!axis) throw ConfigError(ctx + ": start/end must differ along exactly one axis");
    if (!(lane.width_m > 0)) throw ConfigError(ctx + ": width_m must be > 0");
    if (lane.speed_limit_mps < 0) throw ConfigError(ctx + ": speed_limit_mps must be >= 0");
    if (lane.spawn_weight < 0) throw ConfigError(ctx + ": spawn_weight must be >= 0");
    if (!(lane.vehicle_length_m > 0)) throw ConfigError(ctx + ": vehicle_length_m must be > 0");
    if (!(lane.vehicle_width_m > 0)) throw ConfigError(ctx + ": vehicle_width_m must be > 0");
    total_weight += lane.spawn_weight;
  }
  if (cfg.npc_count > 0 && total_weight <= 0)
    throw ConfigError("world config: npc_count > 0 requires a lane with spawn_weight > 0");

  std::set<std::int64_t> intersection_ids;
  for (const IntersectionSpec& in : cfg.intersections) {
    std::string ctx = "intersection " + std::to_string(in.id);
    if (!intersection_ids.insert(in.id).second) throw ConfigError(ctx + ": duplicate id");
    if (!in.bbox.well_formed()) throw ConfigError(ctx + ": bbox must satisfy x1 < x2 and y1 < y2");
  }

  std::map<std::int64_t, std::vector<PhaseSpec>> by_intersection;
  std::set<std::pair<std::int64_t, int>> phase_keys;
  for (const PhaseSpec& p : cfg.light_phases) {
    std::string ctx = "light_phase (intersection " + std::to_string(p.intersection_id) + ", approach " +
                      to_string(p.approach) + ")";
    if (!intersection_ids.count(p.intersection_id))
      throw ConfigError(ctx + ": unknown intersection_id");
    if (p.red_s < 0 || p.green_s < 0 || p.yellow_s < 0)
      throw ConfigError(ctx + ": phase durations must be >= 0");
    if (!(p.cycle_s() > 0)) throw ConfigError(ctx + ": red_s + green_s + yellow_s must be > 0");
    if (p.offset_s < 0) throw ConfigError(ctx + ": offset_s must be >= 0");
    if (!phase_keys.insert({p.intersection_id, static_cast<int>(p.approach)}).second)
      throw ConfigError(ctx + ": duplicate approach for this intersection");
    by_intersection[p.intersection_id].push_back(p);
  }
  for (const auto& [iid, phases] : by_intersection) {
    for (std::size_t i = 0; i < phases.size(); ++i) {
      for (std::size_t k = i + 1; k < phases.size(); ++k) {
        if (!conflicting(phases[i].approach, phases[k].approach)) continue;
        if (phases[i].cycle_s() != phases[k].cycle_s())
          throw ConfigError("light_phase: conflicting approaches at intersection " + std::to_string(iid) +
                            " must share one cycle length");
        if (phases[i].green_s == 0 || phases[k].green_s == 0) continue;
        if (mod_intervals_overlap(green_interval(phases[i]), green_interval(phases[k])))
          throw ConfigError("light_phase: approaches " + to_string(phases[i].approach) + " and " +
                            to_string(phases[k].approach) + " at intersection " + std::to_string(iid) +
                            " are simultaneously green");
      }
    }
  }

  for (const ObstacleSpec& o : cfg.obstacle_specs) {
    std::string ctx = "obstacle_spec (lane '" + o.lane_id + "')";
    if (!lane_ids.count(o.lane_id)) throw ConfigError(ctx + ": unknown lane_id");
    if (!o.bbox.well_formed()) throw ConfigError(ctx + ": bbox must satisfy x1 < x2 and y1 < y2");
    if (o.spawn_time_s < 0) throw ConfigError(ctx + ": spawn_time_s must be >= 0");
    const LaneSpec* lane = nullptr;
    for (const LaneSpec& l : cfg.lanes)
      if (l.id == o.lane_id) lane = &l;
    if (!rects_overlap(o.bbox, lane->band()))
      throw ConfigError(ctx + ": bbox does not intersect the lane");
  }
}

} // namespace crosscheck
