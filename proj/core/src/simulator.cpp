#include "crosscheck/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "crosscheck/errors.hpp"

namespace crosscheck {

LightColor light_color_at(const PhaseSpec& phase, double t) {
  double cycle = phase.cycle_s();
  if (!(cycle > 0)) throw ConfigError("light phase: red_s + green_s + yellow_s must be > 0");
  double local = std::fmod(t + phase.offset_s, cycle);
  if (local < 0) local += cycle;
  if (local < phase.red_s) return LightColor::red;
  if (local < phase.red_s + phase.green_s) return LightColor::green;
  return LightColor::yellow;
}

namespace {

constexpr double kMaxAccel = 2.0;       // m/s^2
constexpr double kMaxDecel = 4.0;       // m/s^2
constexpr double kLeaderGap = 2.0;      // m kept behind a leader or obstacle
constexpr double kStopLineSetback = 3.0; // stop line this far before the box
constexpr double kStopLineBuffer = 0.5; // aim this far before the line
constexpr double kHoldZone = 1.0;       // keep braking until this far past it
constexpr double kChangeTrigger = 30.0; // obstacle distance that prompts a change
constexpr double kChangeDuration = 2.0; // s to settle on the new centerline
constexpr double kAdjacentMax = 5.0;    // max centerline offset of an adjacent lane
constexpr double kLeaderScan = 100.0;   // ignore leaders farther than this
constexpr double kSpawnHeadway = 8.0;   // gap between spawned vehicles

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct StopPoint {
  double line_a = 0.0; // stop line along the lane axis
  std::size_t phase = 0;
};

struct LaneObstacle {
  double rear_a = 0.0; // near edge along the lane axis
  std::size_t spec = 0;
};

struct LaneInfo {
  Vec2 u;      // unit direction of travel
  Vec2 p;      // left-hand perpendicular
  double origin_a = 0.0; // axis coordinate of the lane start
  double heading_deg = 0.0;
  std::vector<StopPoint> stops;
  std::vector<LaneObstacle> obstacles;
  std::vector<std::size_t> adjacent;
};

struct VehicleSim {
  std::int64_t id = 0;
  std::size_t lane = 0;
  double s = 0.0;   // center along the lane from its start
  double v = 0.0;
  double lat = 0.0; // offset from the centerline, decays to 0 after a change
  double lat_rate = 0.0;
  double desired = 0.0;
  double length = 4.5;
  double width = 2.0;
  bool alive = true;
};

// Axis coordinate helpers: everything is axis-aligned, so positions along a
// lane reduce to one world coordinate signed by the direction of travel.
double along(Vec2 pos, Vec2 u) { return dot(pos, u); }

double rect_min_along(const Rect& r, Vec2 u) {
  if (u.x > 0.5) return r.x1;
  if (u.x < -0.5) return -r.x2;
  if (u.y > 0.5) return r.y1;
  return -r.y2;
}

double rect_max_along(const Rect& r, Vec2 u) {
  if (u.x > 0.5) return r.x2;
  if (u.x < -0.5) return -r.x1;
  if (u.y > 0.5) return r.y2;
  return -r.y1;
}

class Simulator {
public:
  explicit Simulator(const WorldConfig& cfg) : cfg_(cfg) {
    validate_world_config(cfg_);
    build_lanes();
    spawn();
  }

  FrameLog run() {
    auto n_frames = static_cast<std::int64_t>(std::floor(cfg_.duration_s / cfg_.dt_s + 1e-9)) + 1;
    FrameLog log;
    log.reserve(static_cast<std::size_t>(n_frames));
    for (std::int64_t f = 0; f < n_frames; ++f) {
      double t = static_cast<double>(f) * cfg_.dt_s;
      log.push_back(snapshot(f, t));
      if (f + 1 < n_frames) step(t);
    }
    return log;
  }

private:
  void build_lanes() {
    lanes_.resize(cfg_.lanes.size());
    for (std::size_t i = 0; i < cfg_.lanes.size(); ++i) {
      const LaneSpec& spec = cfg_.lanes[i];
      LaneInfo& info = lanes_[i];
      info.u = spec.dir();
      info.p = {-info.u.y, info.u.x};
      info.origin_a = along(spec.start, info.u);
      info.heading_deg = std::atan2(info.u.y, info.u.x) * 180.0 / std::numbers::pi;

      for (std::size_t k = 0; k < cfg_.light_phases.size(); ++k) {
        const PhaseSpec& phase = cfg_.light_phases[k];
        if (phase.approach != spec.direction()) continue;
        const IntersectionSpec* in = intersection_by_id(phase.intersection_id);
        if (!rects_overlap(spec.band(), in->bbox)) continue;
        double line_a = rect_min_along(in->bbox, info.u) - kStopLineSetback;
        double s_line = line_a - info.origin_a;
        if (s_line < 0 || s_line > spec.length()) continue;
        info.stops.push_back({line_a, k});
      }

      for (std::size_t k = 0; k < cfg_.obstacle_specs.size(); ++k) {
        if (cfg_.obstacle_specs[k].lane_id != spec.id) continue;
        info.obstacles.push_back({rect_min_along(cfg_.obstacle_specs[k].bbox, info.u), k});
      }

      for (std::size_t k = 0; k < cfg_.lanes.size(); ++k) {
        if (k == i) continue;
        const LaneSpec& other = cfg_.lanes[k];
        if (other.direction() != spec.direction()) continue;
        if (other.horizontal() != spec.horizontal()) continue;
        if (other.speed_limit_mps <= 0) continue;
        double offset = spec.horizontal() ? std::abs(other.start.y - spec.start.y)
                                          : std::abs(other.start.x - spec.start.x);
        if (offset > 0 && offset <= kAdjacentMax) info.adjacent.push_back(k);
      }
    }
  }

  const IntersectionSpec* intersection_by_id(std::int64_t id) const {
    for (const IntersectionSpec& in : cfg_.intersections) {
      if (in.id == id) return &in;
    }
    return nullptr;
  }

  void spawn() {
    std::mt19937_64 rng(cfg_.seed);

    const LaneSpec& ego_lane = cfg_.lanes[0];
    VehicleSim ego;
    ego.id = 0;
    ego.lane = 0;
    ego.s = ego_lane.length() / 2.0;
    ego.length = ego_lane.vehicle_length_m;
    ego.width = ego_lane.vehicle_width_m;
    ego.desired = ego_lane.speed_limit_mps * (1.0 - 0.08 * uniform01(rng));
    ego.v = ego.desired;
    vehicles_.push_back(ego);

    double total_weight = 0.0;
    for (const LaneSpec& lane : cfg_.lanes) total_weight += lane.spawn_weight;
    std::vector<std::int64_t> counts(cfg_.lanes.size(), 0);
    if (cfg_.npc_count > 0) {
      std::vector<double> remainders(cfg_.lanes.size(), 0.0);
      std::int64_t assigned = 0;
      for (std::size_t i = 0; i < cfg_.lanes.size(); ++i) {
        double quota = static_cast<double>(cfg_.npc_count) * cfg_.lanes[i].spawn_weight / total_weight;
        counts[i] = static_cast<std::int64_t>(std::floor(quota));
        remainders[i] = quota - std::floor(quota);
        assigned += counts[i];
      }
      std::vector<std::size_t> order(cfg_.lanes.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
      for (std::size_t i = 0; assigned < cfg_.npc_count; ++i) {
        ++counts[order[i % order.size()]];
        ++assigned;
      }
    }

    std::int64_t next_id = 1;
    for (std::size_t i = 0; i < cfg_.lanes.size(); ++i) {
      const LaneSpec& lane = cfg_.lanes[i];
      for (std::int64_t k = 0; k < counts[i]; ++k) {
        VehicleSim veh;
        veh.id = next_id++;
        veh.lane = i;
        veh.length = lane.vehicle_length_m;
        veh.width = lane.vehicle_width_m;
        veh.s = veh.length / 2.0 + static_cast<double>(k) * (veh.length + kSpawnHeadway);
        if (veh.s + veh.length / 2.0 > lane.length() + 1e-9)
          throw ConfigError("lane '" + lane.id + "' cannot fit " + std::to_string(counts[i]) +
                            " spawned vehicles");
        if (i == 0 && std::abs(veh.s - ego_lane.length() / 2.0) <
                          (veh.length + ego_lane.vehicle_length_m) / 2.0 + kLeaderGap)
          throw ConfigError("lane '" + lane.id + "': spawned vehicle overlaps the ego position");
        veh.desired = lane.speed_limit_mps * (1.0 - 0.08 * uniform01(rng));
        veh.v = veh.desired;
        vehicles_.push_back(veh);
      }
    }
  }

  Vec2 position(const VehicleSim& v) const {
    const LaneSpec& spec = cfg_.lanes[v.lane];
    const LaneInfo& info = lanes_[v.lane];
    return spec.start + info.u * v.s + info.p * v.lat;
  }

  Rect bbox_of(const VehicleSim& v) const {
    Vec2 c = position(v);
    double ax = cfg_.lanes[v.lane].horizontal() ? v.length / 2.0 : v.width / 2.0;
    double ay = cfg_.lanes[v.lane].horizontal() ? v.width / 2.0 : v.length / 2.0;
    return {c.x - ax, c.y - ay, c.x + ax, c.y + ay};
  }

  Vec2 velocity(const VehicleSim& v) const {
    const LaneInfo& info = lanes_[v.lane];
    double lat_vel = v.lat == 0.0 ? 0.0 : (v.lat > 0 ? -v.lat_rate : v.lat_rate);
    return info.u * v.v + info.p * lat_vel;
  }

  FrameRecord snapshot(std::int64_t frame, double t) const {
    FrameRecord rec;
    rec.frame = frame;
    rec.time_s = t;

    for (const VehicleSim& v : vehicles_) {
      if (!v.alive) continue;
      VehicleState state;
      state.id = v.id;
      Vec2 pos = position(v);
      Vec2 vel = velocity(v);
      state.x = pos.x;
      state.y = pos.y;
      state.vx = vel.x;
      state.vy = vel.y;
      state.action = classify_action(vel.x, vel.y);
      state.rot = state.action == VehicleAction::moving
                      ? std::atan2(vel.y, vel.x) * 180.0 / std::numbers::pi
                      : lanes_[v.lane].heading_deg;
      state.bbox = bbox_of(v);
      state.lane_id = cfg_.lanes[v.lane].id;
      if (v.id == 0) {
        rec.ego = EgoState{state, cfg_.lanes[0].direction()};
      } else {
        rec.vehicles.push_back(std::move(state));
      }
    }

    for (std::size_t k = 0; k < cfg_.light_phases.size(); ++k) {
      const PhaseSpec& phase = cfg_.light_phases[k];
      rec.lights.push_back({static_cast<std::int64_t>(k) + 1, phase.intersection_id, phase.approach,
                            light_color_at(phase, t)});
    }
    for (const IntersectionSpec& in : cfg_.intersections) rec.intersections.push_back({in.id, in.bbox});
    for (std::size_t k = 0; k < cfg_.obstacle_specs.size(); ++k) {
      const ObstacleSpec& o = cfg_.obstacle_specs[k];
      if (o.spawn_time_s <= t)
        rec.obstacles.push_back({static_cast<std::int64_t>(k) + 1, o.lane_id, o.bbox});
    }
    return rec;
  }

  // Nearest stopping target ahead of `front_a`, or nullopt for a clear road.
  std::optional<double> nearest_target(const VehicleSim& self, const std::vector<Rect>& boxes,
                                       const std::vector<double>& lat_lo,
                                       const std::vector<double>& lat_hi, double t) const {
    const LaneInfo& info = lanes_[self.lane];
    Rect own = bbox_of(self);
    double front_a = rect_max_along(own, info.u);
    double own_lo = info.u.x != 0.0 ? own.y1 : own.x1;
    double own_hi = info.u.x != 0.0 ? own.y2 : own.x2;

    std::optional<double> target;
    auto consider = [&](double candidate) {
      if (!target || candidate < *target) target = candidate;
    };

    for (std::size_t i = 0; i < boxes.size(); ++i) {
      const VehicleSim& other = vehicles_[i];
      if (!other.alive || other.id == self.id) continue;
      if (lat_hi[i] <= own_lo || lat_lo[i] >= own_hi) continue;
      double rear_a = rect_min_along(boxes[i], info.u);
      if (rear_a < front_a - 0.5 || rear_a > front_a + kLeaderScan) continue;
      consider(rear_a - kLeaderGap);
    }

    for (const LaneObstacle& o : info.obstacles) {
      if (cfg_.obstacle_specs[o.spec].spawn_time_s > t) continue;
      if (o.rear_a < front_a - 0.5) continue;
      consider(o.rear_a - kLeaderGap);
    }

    for (const StopPoint& stop : info.stops) {
      LightColor color = light_color_at(cfg_.light_phases[stop.phase], t);
      if (color == LightColor::green) continue;
      if (front_a >= stop.line_a + kHoldZone) continue;
      consider(stop.line_a - kStopLineBuffer);
    }
    return target;
  }

  bool window_free(std::int64_t self_id, std::size_t target_lane, double front_a,
                   const std::vector<Rect>& boxes, double t) const {
    const LaneSpec& spec = cfg_.lanes[target_lane];
    const LaneInfo& info = lanes_[target_lane];
    Rect band = spec.band();
    double band_lo = info.u.x != 0.0 ? band.y1 : band.x1;
    double band_hi = info.u.x != 0.0 ? band.y2 : band.x2;
    double lo_a = front_a - 8.0;
    double hi_a = front_a + 16.0;

    for (std::size_t i = 0; i < boxes.size(); ++i) {
      if (!vehicles_[i].alive || vehicles_[i].id == self_id) continue;
      double v_lo = info.u.x != 0.0 ? boxes[i].y1 : boxes[i].x1;
      double v_hi = info.u.x != 0.0 ? boxes[i].y2 : boxes[i].x2;
      if (v_hi <= band_lo || v_lo >= band_hi) continue;
      double rear_a = rect_min_along(boxes[i], info.u);
      double front_other = rect_max_along(boxes[i], info.u);
      if (front_other < lo_a || rear_a > hi_a) continue;
      return false;
    }
    for (const LaneObstacle& o : info.obstacles) {
      if (cfg_.obstacle_specs[o.spec].spawn_time_s > t) continue;
      if (o.rear_a >= lo_a && o.rear_a <= hi_a) return false;
    }
    return true;
  }

  void step(double t) {
    std::vector<Rect> boxes(vehicles_.size());
    std::vector<double> lat_lo(vehicles_.size()), lat_hi(vehicles_.size());
    for (std::size_t i = 0; i < vehicles_.size(); ++i) {
      if (!vehicles_[i].alive) continue;
      boxes[i] = bbox_of(vehicles_[i]);
    }

    std::vector<VehicleSim> next = vehicles_;
    for (std::size_t i = 0; i < vehicles_.size(); ++i) {
      VehicleSim& self = next[i];
      if (!self.alive) continue;
      const VehicleSim& old = vehicles_[i];

      if (self.id != 0 && self.lat == 0.0) maybe_change_lane(self, boxes, t);

      // Lateral overlap intervals are against the (possibly new) lane axis.
      bool horiz = cfg_.lanes[self.lane].horizontal();
      for (std::size_t k = 0; k < vehicles_.size(); ++k) {
        lat_lo[k] = horiz ? boxes[k].y1 : boxes[k].x1;
        lat_hi[k] = horiz ? boxes[k].y2 : boxes[k].x2;
      }

      const LaneSpec& spec = cfg_.lanes[self.lane];
      const LaneInfo& info = lanes_[self.lane];
      double front_a = rect_max_along(bbox_of(self), info.u);

      double allowed = self.desired;
      if (auto target = nearest_target(self, boxes, lat_lo, lat_hi, t)) {
        double d = *target - front_a;
        allowed = std::min(allowed, std::sqrt(2.0 * kMaxDecel * std::max(0.0, d)));
      }
      double v_new = std::clamp(allowed, old.v - kMaxDecel * cfg_.dt_s, old.v + kMaxAccel * cfg_.dt_s);
      v_new = std::max(0.0, v_new);

      self.s += old.v * cfg_.dt_s;
      if (self.lat != 0.0) {
        double shift = self.lat_rate * cfg_.dt_s;
        self.lat = self.lat > 0 ? std::max(0.0, self.lat - shift) : std::min(0.0, self.lat + shift);
      }
      self.v = v_new;

      if (self.s + self.length / 2.0 > spec.length()) {
        if (self.id == 0) {
          self.s = spec.length() - self.length / 2.0;
          self.v = 0.0;
        } else if (spec.wrap) {
          self.s -= spec.length();
        } else {
          self.alive = false;
        }
      }
    }
    vehicles_ = std::move(next);
  }

  void maybe_change_lane(VehicleSim& self, const std::vector<Rect>& boxes, double t) {
    const LaneInfo& info = lanes_[self.lane];
    Rect own = bbox_of(self);
    double front_a = rect_max_along(own, info.u);

    bool blocked = false;
    for (const LaneObstacle& o : info.obstacles) {
      if (cfg_.obstacle_specs[o.spec].spawn_time_s > t) continue;
      if (o.rear_a > front_a && o.rear_a <= front_a + kChangeTrigger) blocked = true;
    }
    if (!blocked) return;

    for (std::size_t target : info.adjacent) {
      const LaneSpec& spec = cfg_.lanes[target];
      const LaneInfo& tinfo = lanes_[target];
      double s_new = along(position(self), tinfo.u) - tinfo.origin_a;
      if (s_new < self.length / 2.0 || s_new > spec.length() - self.length / 2.0) continue;
      if (!window_free(self.id, target, front_a, boxes, t)) continue;
      double lat_new = dot(position(self) - spec.start, tinfo.p);
      self.lane = target;
      self.s = s_new;
      self.lat = lat_new;
      self.lat_rate = std::abs(lat_new) / kChangeDuration;
      return;
    }
  }

  WorldConfig cfg_;
  std::vector<LaneInfo> lanes_;
  std::vector<VehicleSim> vehicles_;
};

} // namespace

FrameLog run_scenario(const WorldConfig& cfg) {
  Simulator sim(cfg);
  return sim.run();
}

} // namespace crosscheck
