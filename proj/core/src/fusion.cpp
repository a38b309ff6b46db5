#include "crosscheck/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "crosscheck/errors.hpp"
#include "crosscheck/geometry.hpp"
#include "crosscheck/logic/parser.hpp"

namespace crosscheck {

using nlohmann::json;

namespace {

constexpr double kStopLineSetbackM = 3.0;
constexpr double kQueueDepthM = 12.0;
constexpr double kQueueChainGapM = 10.0;
constexpr double kQueueLateralSlackM = 2.0;

std::string k_text(const ReasonerParams& p) { return std::to_string(p.k); }

} // namespace

std::string standard_light_rules(const ReasonerParams& p) {
  std::string k = k_text(p);
  std::string out;
  out +=
      "% Vehicles in motion inside the watched region, split by direction of\n"
      "% travel. The region bounds arrive precomputed on\n"
      "% ego_front_intersection; boundary headings (45, 135, ...) go to the\n"
      "% east/west movers.\n"
      "mover_up(F, V) :- property_vehicle(F, V, moving, _, _, Rot, _, _, _, _), "
      "vehicle_center(F, V, Cx, Cy), ego_front_intersection(F, _, Rx1, Ry1, Rx2, Ry2), "
      "Rot > 45, Rot < 135, Cx >= Rx1, Cx <= Rx2, Cy >= Ry1, Cy <= Ry2.\n"
      "mover_down(F, V) :- property_vehicle(F, V, moving, _, _, Rot, _, _, _, _), "
      "vehicle_center(F, V, Cx, Cy), ego_front_intersection(F, _, Rx1, Ry1, Rx2, Ry2), "
      "Rot > -135, Rot < -45, Cx >= Rx1, Cx <= Rx2, Cy >= Ry1, Cy <= Ry2.\n"
      "mover_right(F, V) :- property_vehicle(F, V, moving, _, _, Rot, _, _, _, _), "
      "vehicle_center(F, V, Cx, Cy), ego_front_intersection(F, _, Rx1, Ry1, Rx2, Ry2), "
      "Rot >= -45, Rot <= 45, Cx >= Rx1, Cx <= Rx2, Cy >= Ry1, Cy <= Ry2.\n"
      "mover_left(F, V) :- property_vehicle(F, V, moving, _, _, Rot, _, _, _, _), "
      "vehicle_center(F, V, Cx, Cy), ego_front_intersection(F, _, Rx1, Ry1, Rx2, Ry2), "
      "Rot >= 135, Cx >= Rx1, Cx <= Rx2, Cy >= Ry1, Cy <= Ry2.\n"
      "mover_left(F, V) :- property_vehicle(F, V, moving, _, _, Rot, _, _, _, _), "
      "vehicle_center(F, V, Cx, Cy), ego_front_intersection(F, _, Rx1, Ry1, Rx2, Ry2), "
      "Rot <= -135, Cx >= Rx1, Cx <= Rx2, Cy >= Ry1, Cy <= Ry2.\n"
      "\n";
  out += "collective_up(F) :- ego(F, _, _, _), N = count(V : mover_up(F, V)), N >= " + k + ".\n";
  out += "collective_down(F) :- ego(F, _, _, _), N = count(V : mover_down(F, V)), N >= " + k + ".\n";
  out += "collective_left(F) :- ego(F, _, _, _), N = count(V : mover_left(F, V)), N >= " + k + ".\n";
  out += "collective_right(F) :- ego(F, _, _, _), N = count(V : mover_right(F, V)), N >= " + k + ".\n";
  out +=
      "\n"
      "% Cross traffic flowing through the forward intersection means our\n"
      "% approach cannot have the green.\n"
      "false_negative_light(F) :- ego(F, n, _, _), ego_front_intersection(F, _, _, _, _, _), collective_left(F).\n"
      "false_negative_light(F) :- ego(F, n, _, _), ego_front_intersection(F, _, _, _, _, _), collective_right(F).\n"
      "false_negative_light(F) :- ego(F, s, _, _), ego_front_intersection(F, _, _, _, _, _), collective_left(F).\n"
      "false_negative_light(F) :- ego(F, s, _, _), ego_front_intersection(F, _, _, _, _, _), collective_right(F).\n"
      "false_negative_light(F) :- ego(F, e, _, _), ego_front_intersection(F, _, _, _, _, _), collective_up(F).\n"
      "false_negative_light(F) :- ego(F, e, _, _), ego_front_intersection(F, _, _, _, _, _), collective_down(F).\n"
      "false_negative_light(F) :- ego(F, w, _, _), ego_front_intersection(F, _, _, _, _, _), collective_up(F).\n"
      "false_negative_light(F) :- ego(F, w, _, _), ego_front_intersection(F, _, _, _, _, _), collective_down(F).\n";
  if (p.enable_green_rule) {
    out +=
        "\n"
        "% Traffic flowing our own way through the forward intersection means\n"
        "% our approach has the green.\n"
        "inferred_green(F) :- ego(F, n, _, _), ego_front_intersection(F, _, _, _, _, _), collective_up(F).\n"
        "inferred_green(F) :- ego(F, s, _, _), ego_front_intersection(F, _, _, _, _, _), collective_down(F).\n"
        "inferred_green(F) :- ego(F, e, _, _), ego_front_intersection(F, _, _, _, _, _), collective_right(F).\n"
        "inferred_green(F) :- ego(F, w, _, _), ego_front_intersection(F, _, _, _, _, _), collective_left(F).\n";
  }
  return out;
}

std::string standard_obstacle_rules(const ReasonerParams& p) {
  std::string k = k_text(p);
  std::string out;
  if (p.enable_stopped_rule) {
    out +=
        "stopped_in_lane(F, V, L) :- property_vehicle(F, V, stopped, _, _, _, _, _, _, _), "
        "vehicle_lane(F, V, L).\n"
        "\n"
        "ahead_of_ego(F, V) :- ego(F, n, _, Ey), vehicle_center(F, V, _, Cy), Cy > Ey.\n"
        "ahead_of_ego(F, V) :- ego(F, s, _, Ey), vehicle_center(F, V, _, Cy), Cy < Ey.\n"
        "ahead_of_ego(F, V) :- ego(F, e, Ex, _), vehicle_center(F, V, Cx, _), Cx > Ex.\n"
        "ahead_of_ego(F, V) :- ego(F, w, Ex, _), vehicle_center(F, V, Cx, _), Cx < Ex.\n"
        "\n"
        "% Stopped ahead of us with no signal queue to explain it.\n"
        "obstacle_stopper(F, V, L) :- stopped_in_lane(F, V, L), ahead_of_ego(F, V), "
        "\\+ light_queue_member(F, V).\n"
        "\n";
    out += "lane_blocked(F, L) :- vehicle_lane(F, _, L), "
           "N = count(V : obstacle_stopper(F, V, L)), N >= " + k + ".\n";
  }
  if (p.enable_vacated_rule) {
    if (!out.empty()) out += "\n";
    out += "% Enough vehicles abandoning one lane reads as a blockage even\n"
           "% before anyone has to stop.\n";
    out += "lane_blocked(F, L) :- vacated_lane(F, _, L), "
           "N = count(V : vacated_lane(F, V, L)), N >= " + k + ".\n";
  }
  return out;
}

std::string standard_rules(const ReasonerParams& p) {
  std::string lights = standard_light_rules(p);
  std::string obstacles = standard_obstacle_rules(p);
  if (obstacles.empty()) return lights;
  return lights + "\n" + obstacles;
}

namespace {

double as_double(const Value& v) {
  if (v.index() == 0) return static_cast<double>(std::get<std::int64_t>(v));
  if (v.index() == 1) return std::get<double>(v);
  throw ValidationError("expected a numeric fact argument, got symbol '" +
                        std::get<std::string>(v) + "'");
}

// Typed view of one frame's base facts, tolerant of extra predicates.
struct FrameView {
  struct Veh {
    std::int64_t id = 0;
    std::string action;
    Vec2 center;
  };
  struct Light {
    std::int64_t intersection_id = 0;
    Compass approach = Compass::n;
    std::string color;
  };

  bool has_ego = false;
  Compass ego_approach = Compass::n;
  Vec2 ego_pos;
  std::vector<Veh> vehicles;
  std::map<std::int64_t, Rect> intersections;
  std::vector<Light> lights;
  std::map<std::int64_t, std::string> vehicle_lane;
};

FrameView view_frame(const std::set<Atom>& atoms) {
  FrameView fv;
  for (const Atom& a : atoms) {
    if (a.pred == "ego" && a.args.size() == 4) {
      fv.has_ego = true;
      fv.ego_approach = compass_from_string(std::get<std::string>(a.args[1]));
      fv.ego_pos = {as_double(a.args[2]), as_double(a.args[3])};
    } else if (a.pred == "property_vehicle" && a.args.size() == 10) {
      FrameView::Veh v;
      v.id = std::get<std::int64_t>(a.args[1]);
      v.action = std::get<std::string>(a.args[2]);
      Rect bbox{as_double(a.args[6]), as_double(a.args[7]), as_double(a.args[8]),
                as_double(a.args[9])};
      v.center = bbox.center();
      fv.vehicles.push_back(v);
    } else if (a.pred == "property_intersection" && a.args.size() == 6) {
      fv.intersections[std::get<std::int64_t>(a.args[1])] =
          Rect{as_double(a.args[2]), as_double(a.args[3]), as_double(a.args[4]),
               as_double(a.args[5])};
    } else if (a.pred == "light_observed" && a.args.size() == 5) {
      fv.lights.push_back({std::get<std::int64_t>(a.args[2]),
                           compass_from_string(std::get<std::string>(a.args[3])),
                           std::get<std::string>(a.args[4])});
    } else if (a.pred == "vehicle_lane" && a.args.size() == 3) {
      fv.vehicle_lane[std::get<std::int64_t>(a.args[1])] = std::get<std::string>(a.args[2]);
    }
  }
  return fv;
}

std::optional<std::int64_t> front_intersection_of(const FrameView& fv, double lookahead_m) {
  if (!fv.has_ego) return std::nullopt;
  Vec2 tip = fv.ego_pos + compass_unit(fv.ego_approach) * lookahead_m;
  std::optional<std::int64_t> best;
  double best_d = 0.0;
  for (const auto& [id, bbox] : fv.intersections) {
    double d = segment_rect_entry(fv.ego_pos, tip, bbox);
    if (d < 0) continue;
    if (!best || d < best_d || (d == best_d && id < *best)) {
      best = id;
      best_d = d;
    }
  }
  return best;
}

std::set<std::int64_t> queue_members(const FrameView& fv) {
  std::vector<const FrameView::Veh*> stopped;
  for (const FrameView::Veh& v : fv.vehicles)
    if (v.action == "stopped") stopped.push_back(&v);
  if (stopped.empty()) return {};

  std::set<std::int64_t> members;
  for (const FrameView::Light& light : fv.lights) {
    if (light.color == "green") continue;
    auto it = fv.intersections.find(light.intersection_id);
    if (it == fv.intersections.end()) continue;
    const Rect& b = it->second;
    for (const FrameView::Veh* v : stopped) {
      double along = 0.0, line = 0.0;
      bool lateral_ok = false;
      switch (light.approach) {
        case Compass::n:
          line = b.y1 - kStopLineSetbackM;
          along = line - v->center.y;
          lateral_ok = v->center.x >= b.x1 - kQueueLateralSlackM &&
                       v->center.x <= b.x2 + kQueueLateralSlackM;
          break;
        case Compass::s:
          line = b.y2 + kStopLineSetbackM;
          along = v->center.y - line;
          lateral_ok = v->center.x >= b.x1 - kQueueLateralSlackM &&
                       v->center.x <= b.x2 + kQueueLateralSlackM;
          break;
        case Compass::e:
          line = b.x1 - kStopLineSetbackM;
          along = line - v->center.x;
          lateral_ok = v->center.y >= b.y1 - kQueueLateralSlackM &&
                       v->center.y <= b.y2 + kQueueLateralSlackM;
          break;
        case Compass::w:
          line = b.x2 + kStopLineSetbackM;
          along = v->center.x - line;
          lateral_ok = v->center.y >= b.y1 - kQueueLateralSlackM &&
                       v->center.y <= b.y2 + kQueueLateralSlackM;
          break;
      }
      if (lateral_ok && along >= 0.0 && along <= kQueueDepthM) members.insert(v->id);
    }
  }

  // Stopped vehicles packed behind a member queue with it.
  bool grew = !members.empty();
  while (grew) {
    grew = false;
    for (const FrameView::Veh* v : stopped) {
      if (members.count(v->id)) continue;
      for (const FrameView::Veh& m : fv.vehicles) {
        if (!members.count(m.id) || m.id == v->id) continue;
        if (norm(v->center - m.center) <= kQueueChainGapM) {
          members.insert(v->id);
          grew = true;
          break;
        }
      }
    }
  }
  return members;
}

} // namespace

std::vector<FactSet> augment_facts(const std::vector<FactSet>& windows, const ReasonerParams& p) {
  std::map<std::int64_t, std::set<Atom>> by_frame;
  for (const FactSet& fs : windows) {
    for (const Atom& a : fs.atoms) {
      if (a.args.empty() || a.args[0].index() != 0) continue;
      by_frame[std::get<std::int64_t>(a.args[0])].insert(a);
    }
  }

  std::map<std::int64_t, std::set<Atom>> aug;
  std::map<std::int64_t, FrameView> views;
  for (const auto& [frame, atoms] : by_frame) views.emplace(frame, view_frame(atoms));

  std::set<std::int64_t> held;
  std::int64_t held_frame = 0;
  bool have_held = false;
  for (const auto& [frame, fv] : views) {
    std::set<Atom>& out = aug[frame];
    Value f{frame};
    for (const FrameView::Veh& v : fv.vehicles)
      out.insert({"vehicle_center", {f, Value{v.id}, Value{v.center.x}, Value{v.center.y}}});
    if (auto front = front_intersection_of(fv, p.lookahead_m)) {
      Rect r = fv.intersections.at(*front).expanded(p.margin_m);
      out.insert({"ego_front_intersection",
                  {f, Value{*front}, Value{r.x1}, Value{r.y1}, Value{r.x2}, Value{r.y2}}});
    }
    std::set<std::int64_t> members = queue_members(fv);
    // A queued vehicle stays explained by its light while it remains stopped,
    // so a discharging queue does not strand its tail as phantom obstacles.
    if (have_held && frame == held_frame + 1) {
      for (std::int64_t vid : held)
        for (const FrameView::Veh& v : fv.vehicles)
          if (v.id == vid && v.action == "stopped") {
            members.insert(vid);
            break;
          }
    }
    for (std::int64_t vid : members)
      out.insert({"light_queue_member", {f, Value{vid}}});
    held = std::move(members);
    held_frame = frame;
    have_held = true;
  }

  for (const auto& [frame, fv] : views) {
    auto prev = views.find(frame - 1);
    if (prev == views.end()) continue;
    for (const auto& [vid, lane] : fv.vehicle_lane) {
      auto before = prev->second.vehicle_lane.find(vid);
      if (before == prev->second.vehicle_lane.end() || before->second == lane) continue;
      for (std::int64_t h = frame; h < frame + p.window_frames; ++h)
        aug[h].insert({"vacated_lane", {Value{h}, Value{vid}, Value{before->second}}});
    }
  }

  std::vector<FactSet> out = windows;
  for (FactSet& fs : out) {
    for (std::int64_t h = fs.frame_lo; h <= fs.frame_hi; ++h) {
      auto it = aug.find(h);
      if (it != aug.end()) fs.atoms.insert(it->second.begin(), it->second.end());
    }
  }
  return out;
}

namespace {

bool frame_fired(const logic::Model& m, const std::string& pred, std::int64_t frame) {
  auto it = m.relations.find(pred);
  if (it == m.relations.end()) return false;
  for (const auto& tuple : it->second)
    if (!tuple.empty() && tuple[0] == Value{frame}) return true;
  return false;
}

} // namespace

Verdict extract_verdict(const logic::Model& m, std::int64_t frame) {
  Verdict v;
  v.frame = frame;
  bool red = frame_fired(m, "false_negative_light", frame);
  bool green = frame_fired(m, "inferred_green", frame);
  if (red || green) {
    v.light_eligible = true;
    v.light = red ? Verdict::Light::red : Verdict::Light::green;
  }
  auto it = m.relations.find("lane_blocked");
  if (it != m.relations.end()) {
    for (const auto& tuple : it->second) {
      if (tuple.size() != 2 || !(tuple[0] == Value{frame})) continue;
      v.obstacle_lanes.insert(value_to_string(tuple[1]));
    }
  }
  v.obstacle_eligible = !v.obstacle_lanes.empty();
  if (red) v.fired_rules.push_back("false_negative_light");
  if (green) v.fired_rules.push_back("inferred_green");
  if (v.obstacle_eligible) v.fired_rules.push_back("lane_blocked");
  return v;
}

namespace {

std::vector<Verdict> reason_over_windows(std::vector<FactSet> windows,
                                         const logic::Program& program,
                                         const ReasonerParams& p) {
  windows = augment_facts(windows, p);
  std::vector<Verdict> out;
  out.reserve(windows.size());
  for (const FactSet& fs : windows) {
    logic::Model m = logic::evaluate(program, fs);
    out.push_back(extract_verdict(m, fs.frame_hi));
  }
  return out;
}

} // namespace

std::vector<Verdict> run_reasoner(const FrameLog& det, const logic::Program& program,
                                  const ReasonerParams& p, std::int64_t fact_window) {
  return reason_over_windows(extract_facts(det, fact_window), program, p);
}

std::vector<Verdict> run_reasoner(const FactSet& facts, const logic::Program& program,
                                  const ReasonerParams& p, std::int64_t fact_window) {
  if (fact_window < 1) throw ValidationError("fact window must be >= 1");
  std::map<std::int64_t, std::set<Atom>> by_frame;
  for (const Atom& a : facts.atoms) {
    if (a.args.empty() || a.args[0].index() != 0)
      throw ValidationError("fact atom '" + a.pred +
                            "' must carry the frame index as its first argument");
    by_frame[std::get<std::int64_t>(a.args[0])].insert(a);
  }
  std::vector<FactSet> windows;
  windows.reserve(by_frame.size());
  std::int64_t first = by_frame.empty() ? 0 : by_frame.begin()->first;
  for (const auto& [frame, atoms] : by_frame) {
    FactSet fs;
    fs.frame_hi = frame;
    fs.frame_lo = std::max(first, frame - fact_window + 1);
    for (std::int64_t g = fs.frame_lo; g <= fs.frame_hi; ++g) {
      auto it = by_frame.find(g);
      if (it != by_frame.end()) fs.atoms.insert(it->second.begin(), it->second.end());
    }
    windows.push_back(std::move(fs));
  }
  return reason_over_windows(std::move(windows), program, p);
}

std::optional<std::int64_t> front_intersection(const FrameRecord& rec, double lookahead_m) {
  Vec2 ego{rec.ego.x, rec.ego.y};
  Vec2 tip = ego + compass_unit(rec.ego.approach) * lookahead_m;
  std::optional<std::int64_t> best;
  double best_d = 0.0;
  for (const IntersectionState& in : rec.intersections) {
    double d = segment_rect_entry(ego, tip, in.bbox);
    if (d < 0) continue;
    if (!best || d < best_d || (d == best_d && in.id < *best)) {
      best = in.id;
      best_d = d;
    }
  }
  return best;
}

std::optional<LightColor> ego_light_color(const FrameRecord& rec, std::int64_t intersection_id) {
  for (const LightState& light : rec.lights)
    if (light.intersection_id == intersection_id && light.approach == rec.ego.approach)
      return light.color;
  return std::nullopt;
}

BaselineClassification classify_baseline(const FrameRecord& det, double lookahead_m) {
  BaselineClassification b;
  b.frame = det.frame;
  if (auto front = front_intersection(det, lookahead_m)) {
    if (auto color = ego_light_color(det, *front)) {
      switch (*color) {
        case LightColor::red: b.light_color = BaselineClassification::Color::red; break;
        case LightColor::yellow: b.light_color = BaselineClassification::Color::yellow; break;
        case LightColor::green: b.light_color = BaselineClassification::Color::green; break;
      }
    }
  }
  for (const ObstacleState& o : det.obstacles) b.obstacle_lanes.insert(o.lane_id);
  return b;
}

CombinedClassification combine(const BaselineClassification& baseline, const Verdict& v) {
  if (baseline.frame != v.frame)
    throw AlignmentError("combine: baseline frame " + std::to_string(baseline.frame) +
                         " does not match verdict frame " + std::to_string(v.frame));
  CombinedClassification c;
  c.frame = baseline.frame;
  c.light_color = baseline.light_color;
  c.obstacle_lanes = baseline.obstacle_lanes;
  if (v.light_eligible) {
    c.light_color = v.light == Verdict::Light::red ? BaselineClassification::Color::red
                                                   : BaselineClassification::Color::green;
    c.logic_override = true;
  }
  if (v.obstacle_eligible) {
    c.obstacle_lanes.insert(v.obstacle_lanes.begin(), v.obstacle_lanes.end());
    c.logic_override = true;
  }
  return c;
}

namespace {

const char* light_verdict_name(Verdict::Light l) {
  switch (l) {
    case Verdict::Light::none: return "none";
    case Verdict::Light::red: return "red";
    case Verdict::Light::green: return "green";
  }
  return "none";
}

Verdict::Light light_verdict_from_name(const std::string& s, std::size_t line_no) {
  if (s == "none") return Verdict::Light::none;
  if (s == "red") return Verdict::Light::red;
  if (s == "green") return Verdict::Light::green;
  throw ParseError("verdict line " + std::to_string(line_no) + ": unknown light_verdict '" + s +
                   "'");
}

} // namespace

std::string verdict_to_jsonl_line(const Verdict& v) {
  nlohmann::ordered_json j;
  j["frame"] = v.frame;
  j["light_verdict"] = light_verdict_name(v.light);
  j["light_eligible"] = v.light_eligible;
  j["obstacle_lanes"] = v.obstacle_lanes;
  j["obstacle_eligible"] = v.obstacle_eligible;
  j["fired_rules"] = v.fired_rules;
  return j.dump();
}

Verdict verdict_from_jsonl_line(const std::string& line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError("verdict line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
  }
  try {
    Verdict v;
    v.frame = j.at("frame").get<std::int64_t>();
    v.light = light_verdict_from_name(j.at("light_verdict").get<std::string>(), line_no);
    v.light_eligible = j.at("light_eligible").get<bool>();
    for (const auto& lane : j.at("obstacle_lanes"))
      v.obstacle_lanes.insert(lane.get<std::string>());
    v.obstacle_eligible = j.at("obstacle_eligible").get<bool>();
    for (const auto& rule : j.at("fired_rules")) v.fired_rules.push_back(rule.get<std::string>());
    if ((v.light != Verdict::Light::none && !v.light_eligible) ||
        (!v.obstacle_lanes.empty() != v.obstacle_eligible) ||
        (v.fired_rules.empty() !=
         (v.light == Verdict::Light::none && v.obstacle_lanes.empty())))
      throw ParseError("verdict line " + std::to_string(line_no) +
                       ": eligibility flags do not match the verdicts");
    return v;
  } catch (const json::exception& e) {
    throw ParseError("verdict line " + std::to_string(line_no) + ": " + e.what());
  }
}

void write_verdicts_file(const std::string& path, const std::vector<Verdict>& verdicts) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open '" + path + "' for writing");
  for (const Verdict& v : verdicts) os << verdict_to_jsonl_line(v) << '\n';
}

std::vector<Verdict> read_verdicts_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot open verdicts file '" + path + "'");
  std::vector<Verdict> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    out.push_back(verdict_from_jsonl_line(line, line_no));
  }
  return out;
}

} // namespace crosscheck
