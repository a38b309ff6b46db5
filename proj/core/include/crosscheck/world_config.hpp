#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crosscheck/frame.hpp"
#include "crosscheck/geometry.hpp"

namespace crosscheck {

// Axis-aligned lane segment. Vehicles travel from start to end; the first
// lane in the config carries the ego vehicle (parked there when the speed
// limit is zero). spawn_weight distributes npc_count across lanes.
struct LaneSpec {
  std::string id;
  Vec2 start;
  Vec2 end;
  double width_m = 3.5;
  double speed_limit_mps = 8.4;
  double spawn_weight = 0.0;
  double vehicle_length_m = 4.5;
  double vehicle_width_m = 2.0;
  bool wrap = false;

  bool horizontal() const { return start.y == end.y; }
  double length() const { return norm(end - start); }
  Vec2 dir() const;
  Compass direction() const;
  // Band swept by the lane: segment extent along the axis, width across it.
  Rect band() const;
};

struct IntersectionSpec {
  std::int64_t id = 0;
  Rect bbox;
};

struct PhaseSpec {
  std::int64_t intersection_id = 0;
  Compass approach = Compass::n;
  double red_s = 0.0;
  double green_s = 0.0;
  double yellow_s = 0.0;
  double offset_s = 0.0;

  double cycle_s() const { return red_s + green_s + yellow_s; }
};

struct ObstacleSpec {
  std::string lane_id;
  Rect bbox;
  double spawn_time_s = 0.0;
};

struct WorldConfig {
  std::vector<LaneSpec> lanes;
  std::vector<IntersectionSpec> intersections;
  std::vector<PhaseSpec> light_phases;
  std::vector<ObstacleSpec> obstacle_specs;
  std::int64_t npc_count = 0;
  double duration_s = 0.0;
  double dt_s = 0.1;
  std::uint64_t seed = 0;
};

// Strict parse: unknown or missing keys raise ConfigError naming the field.
WorldConfig world_config_from_json(const std::string& text);
WorldConfig world_config_from_file(const std::string& path);

// Structural checks beyond parsing: positive durations, lane geometry,
// unique ids, phase references, no conflicting simultaneous greens,
// obstacles intersecting their lane. Throws ConfigError.
void validate_world_config(const WorldConfig& cfg);

} // namespace crosscheck
