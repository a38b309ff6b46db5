#include "crosscheck/frame.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "crosscheck/errors.hpp"

namespace crosscheck {

using ordered_json = nlohmann::ordered_json;

std::string to_string(LightColor c) {
  switch (c) {
    case LightColor::red: return "red";
    case LightColor::yellow: return "yellow";
    case LightColor::green: return "green";
  }
  return "red";
}

std::string to_string(VehicleAction a) {
  return a == VehicleAction::moving ? "moving" : "stopped";
}

std::string to_string(Compass c) {
  switch (c) {
    case Compass::n: return "n";
    case Compass::s: return "s";
    case Compass::e: return "e";
    case Compass::w: return "w";
  }
  return "n";
}

LightColor light_color_from_string(const std::string& s) {
  if (s == "red") return LightColor::red;
  if (s == "yellow") return LightColor::yellow;
  if (s == "green") return LightColor::green;
  throw ValidationError("unknown light color '" + s + "'");
}

VehicleAction action_from_string(const std::string& s) {
  if (s == "moving") return VehicleAction::moving;
  if (s == "stopped") return VehicleAction::stopped;
  throw ValidationError("unknown vehicle action '" + s + "'");
}

Compass compass_from_string(const std::string& s) {
  if (s == "n") return Compass::n;
  if (s == "s") return Compass::s;
  if (s == "e") return Compass::e;
  if (s == "w") return Compass::w;
  throw ValidationError("unknown approach '" + s + "'");
}

VehicleAction classify_action(double vx, double vy) {
  if (!std::isfinite(vx) || !std::isfinite(vy))
    throw ValidationError("non-finite velocity components");
  double speed = std::sqrt(vx * vx + vy * vy);
  return speed < kStoppedSpeedMps ? VehicleAction::stopped : VehicleAction::moving;
}

namespace {

ordered_json bbox_to_json(const Rect& r) {
  return ordered_json::array({r.x1, r.y1, r.x2, r.y2});
}

Rect bbox_from_json(const ordered_json& j, const char* what) {
  if (!j.is_array() || j.size() != 4)
    throw ValidationError(std::string(what) + ": bbox must be [x1,y1,x2,y2]");
  Rect r{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  return r;
}

void require_keys(const ordered_json& j, std::initializer_list<const char*> keys,
                  const char* what) {
  for (const char* k : keys) {
    if (!j.contains(k))
      throw ValidationError(std::string(what) + ": missing key '" + k + "'");
  }
}

ordered_json vehicle_to_json(const VehicleState& v) {
  ordered_json j;
  j["id"] = v.id;
  j["x"] = v.x;
  j["y"] = v.y;
  j["vx"] = v.vx;
  j["vy"] = v.vy;
  j["rot"] = v.rot;
  j["bbox"] = bbox_to_json(v.bbox);
  j["lane_id"] = v.lane_id;
  j["action"] = to_string(v.action);
  return j;
}

void vehicle_from_json(const ordered_json& j, VehicleState& v) {
  require_keys(j, {"id", "x", "y", "vx", "vy", "rot", "bbox", "lane_id", "action"}, "vehicle");
  v.id = j["id"].get<std::int64_t>();
  v.x = j["x"].get<double>();
  v.y = j["y"].get<double>();
  v.vx = j["vx"].get<double>();
  v.vy = j["vy"].get<double>();
  v.rot = j["rot"].get<double>();
  v.bbox = bbox_from_json(j["bbox"], "vehicle");
  v.lane_id = j["lane_id"].get<std::string>();
  v.action = action_from_string(j["action"].get<std::string>());
}

} // namespace

std::string frame_to_jsonl_line(const FrameRecord& f) {
  ordered_json j;
  j["frame"] = f.frame;
  j["time_s"] = f.time_s;
  ordered_json ego = vehicle_to_json(f.ego);
  ego["approach"] = to_string(f.ego.approach);
  j["ego"] = std::move(ego);
  ordered_json vehicles = ordered_json::array();
  for (const auto& v : f.vehicles) vehicles.push_back(vehicle_to_json(v));
  j["vehicles"] = std::move(vehicles);
  ordered_json lights = ordered_json::array();
  for (const auto& l : f.lights) {
    ordered_json lj;
    lj["id"] = l.id;
    lj["intersection_id"] = l.intersection_id;
    lj["approach"] = to_string(l.approach);
    lj["color"] = to_string(l.color);
    lights.push_back(std::move(lj));
  }
  j["lights"] = std::move(lights);
  ordered_json intersections = ordered_json::array();
  for (const auto& i : f.intersections) {
    ordered_json ij;
    ij["id"] = i.id;
    ij["bbox"] = bbox_to_json(i.bbox);
    intersections.push_back(std::move(ij));
  }
  j["intersections"] = std::move(intersections);
  ordered_json obstacles = ordered_json::array();
  for (const auto& o : f.obstacles) {
    ordered_json oj;
    oj["id"] = o.id;
    oj["lane_id"] = o.lane_id;
    oj["bbox"] = bbox_to_json(o.bbox);
    obstacles.push_back(std::move(oj));
  }
  j["obstacles"] = std::move(obstacles);
  return j.dump();
}

FrameRecord frame_from_jsonl_line(const std::string& line, std::size_t line_no) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("log line " + std::to_string(line_no) + ": " + e.what());
  }
  try {
    require_keys(j, {"frame", "time_s", "ego", "vehicles", "lights", "intersections", "obstacles"},
                 "frame");
    FrameRecord f;
    f.frame = j["frame"].get<std::int64_t>();
    f.time_s = j["time_s"].get<double>();
    vehicle_from_json(j["ego"], f.ego);
    require_keys(j["ego"], {"approach"}, "ego");
    f.ego.approach = compass_from_string(j["ego"]["approach"].get<std::string>());
    for (const auto& vj : j["vehicles"]) {
      VehicleState v;
      vehicle_from_json(vj, v);
      f.vehicles.push_back(std::move(v));
    }
    for (const auto& lj : j["lights"]) {
      require_keys(lj, {"id", "intersection_id", "approach", "color"}, "light");
      LightState l;
      l.id = lj["id"].get<std::int64_t>();
      l.intersection_id = lj["intersection_id"].get<std::int64_t>();
      l.approach = compass_from_string(lj["approach"].get<std::string>());
      l.color = light_color_from_string(lj["color"].get<std::string>());
      f.lights.push_back(l);
    }
    for (const auto& ij : j["intersections"]) {
      require_keys(ij, {"id", "bbox"}, "intersection");
      IntersectionState i;
      i.id = ij["id"].get<std::int64_t>();
      i.bbox = bbox_from_json(ij["bbox"], "intersection");
      f.intersections.push_back(i);
    }
    for (const auto& oj : j["obstacles"]) {
      require_keys(oj, {"id", "lane_id", "bbox"}, "obstacle");
      ObstacleState o;
      o.id = oj["id"].get<std::int64_t>();
      o.lane_id = oj["lane_id"].get<std::string>();
      o.bbox = bbox_from_json(oj["bbox"], "obstacle");
      f.obstacles.push_back(std::move(o));
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("log line " + std::to_string(line_no) + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ParseError("log line " + std::to_string(line_no) + ": " + e.what());
  }
}

void write_log(std::ostream& os, const FrameLog& log) {
  for (const auto& f : log) os << frame_to_jsonl_line(f) << '\n';
}

void write_log_file(const std::string& path, const FrameLog& log) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open '" + path + "' for writing");
  write_log(os, log);
}

FrameLog read_log(std::istream& is) {
  FrameLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    log.push_back(frame_from_jsonl_line(line, line_no));
  }
  validate_log(log);
  return log;
}

FrameLog read_log_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot open log file '" + path + "'");
  return read_log(is);
}

namespace {

void validate_numbers(const VehicleState& v, std::int64_t frame, const char* what) {
  for (double d : {v.x, v.y, v.vx, v.vy, v.rot, v.bbox.x1, v.bbox.y1, v.bbox.x2, v.bbox.y2}) {
    if (!std::isfinite(d))
      throw ValidationError("frame " + std::to_string(frame) + ": non-finite field in " + what);
  }
  if (!v.bbox.well_formed())
    throw ValidationError("frame " + std::to_string(frame) + ": " + what +
                          " bbox not ordered (x1<x2, y1<y2)");
}

} // namespace

void validate_log(const FrameLog& log) {
  for (std::size_t i = 0; i < log.size(); ++i) {
    const FrameRecord& f = log[i];
    if (f.frame != static_cast<std::int64_t>(i))
      throw ValidationError("frame index " + std::to_string(f.frame) + " at line " +
                            std::to_string(i + 1) + ", expected " + std::to_string(i));
    validate_numbers(f.ego, f.frame, "ego");
    std::set<std::int64_t> intersection_ids;
    for (const auto& in : f.intersections) {
      if (!in.bbox.well_formed())
        throw ValidationError("frame " + std::to_string(f.frame) + ": intersection " +
                              std::to_string(in.id) + " bbox not ordered");
      intersection_ids.insert(in.id);
    }
    for (const auto& l : f.lights) {
      if (!intersection_ids.count(l.intersection_id))
        throw ValidationError("frame " + std::to_string(f.frame) + ": light " +
                              std::to_string(l.id) + " references unknown intersection " +
                              std::to_string(l.intersection_id));
    }
    for (const auto& v : f.vehicles) validate_numbers(v, f.frame, "vehicle");
    for (const auto& o : f.obstacles) {
      if (!o.bbox.well_formed())
        throw ValidationError("frame " + std::to_string(f.frame) + ": obstacle " +
                              std::to_string(o.id) + " bbox not ordered");
    }
  }
}

} // namespace crosscheck
