#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "crosscheck/geometry.hpp"

namespace crosscheck {

// Speed below which a vehicle counts as stopped, in m/s. Shared between the
// simulator (which writes the action field) and the fact extractor (which
// recomputes it from velocities).
inline constexpr double kStoppedSpeedMps = 0.5;

enum class LightColor { red, yellow, green };
enum class VehicleAction { moving, stopped };

std::string to_string(LightColor c);
std::string to_string(VehicleAction a);
std::string to_string(Compass c);
LightColor light_color_from_string(const std::string& s);
VehicleAction action_from_string(const std::string& s);
Compass compass_from_string(const std::string& s);

// stopped iff sqrt(vx^2+vy^2) < kStoppedSpeedMps. Non-finite input is a
// validation error.
VehicleAction classify_action(double vx, double vy);

struct VehicleState {
  std::int64_t id = 0;
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double rot = 0.0; // degrees CCW from +x
  Rect bbox;
  std::string lane_id;
  VehicleAction action = VehicleAction::stopped;
};

struct EgoState : VehicleState {
  Compass approach = Compass::n;
};

struct LightState {
  std::int64_t id = 0;
  std::int64_t intersection_id = 0;
  Compass approach = Compass::n;
  LightColor color = LightColor::red;
};

struct IntersectionState {
  std::int64_t id = 0;
  Rect bbox;
};

struct ObstacleState {
  std::int64_t id = 0;
  std::string lane_id;
  Rect bbox;
};

// One timestamped snapshot of the world. The same shape is used for ground
// truth and for detection logs; detection frames may be missing objects and
// may carry wrong light colors, but never invent objects.
struct FrameRecord {
  std::int64_t frame = 0;
  double time_s = 0.0;
  EgoState ego;
  std::vector<VehicleState> vehicles;
  std::vector<LightState> lights;
  std::vector<IntersectionState> intersections;
  std::vector<ObstacleState> obstacles;
};

using FrameLog = std::vector<FrameRecord>;

// JSONL serialization: one frame object per line, fixed key order, floats in
// shortest round-trip form. Identical logs serialize byte-identically.
std::string frame_to_jsonl_line(const FrameRecord& f);
FrameRecord frame_from_jsonl_line(const std::string& line, std::size_t line_no);

void write_log(std::ostream& os, const FrameLog& log);
void write_log_file(const std::string& path, const FrameLog& log);
FrameLog read_log(std::istream& is);
FrameLog read_log_file(const std::string& path);

// Frame indices consecutive from 0, lights referencing known intersections,
// well-formed bboxes, finite numbers. Throws ValidationError.
void validate_log(const FrameLog& log);

} // namespace crosscheck
