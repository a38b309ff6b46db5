#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "crosscheck/facts.hpp"
#include "crosscheck/frame.hpp"
#include "crosscheck/logic/eval.hpp"

namespace crosscheck {

struct ReasonerParams {
  std::int64_t k = 2;              // vehicles needed for a collective
  double margin_m = 5.0;           // intersection bbox expansion
  double lookahead_m = 40.0;       // forward search for the watched intersection
  std::int64_t window_frames = 30; // memory of lane-vacating events
  bool enable_green_rule = true;
  bool enable_stopped_rule = true;
  bool enable_vacated_rule = true;
};

// Shipped rule sources. The light rules derive false_negative_light and
// inferred_green from directional collectives; the obstacle rules derive
// lane_blocked from unexplained stopped vehicles and from lane-vacating
// counts. k is inlined into the generated text; the enable flags drop the
// corresponding rule groups.
std::string standard_light_rules(const ReasonerParams& p = {});
std::string standard_obstacle_rules(const ReasonerParams& p = {});
std::string standard_rules(const ReasonerParams& p = {});

// Derived helper facts the rules consume, recomputed per frame from the base
// facts (the rule language has no arithmetic):
//   vehicle_center(F, V, Cx, Cy)
//   ego_front_intersection(F, I, Rx1, Ry1, Rx2, Ry2): nearest intersection
//     hit by the ego's forward ray within lookahead_m; R* is the bbox
//     expanded by margin_m
//   light_queue_member(F, V): stopped vehicle within 12 m behind the stop
//     line (3 m before the intersection edge) of a red or yellow light, or
//     chained to a member with a center gap of at most 10 m; membership
//     persists while the vehicle stays stopped in consecutive frames, so a
//     discharging queue keeps explaining its not-yet-moving tail
//   vacated_lane(F, V, L): V switched away from lane L at most
//     window_frames-1 frames before F
std::vector<FactSet> augment_facts(const std::vector<FactSet>& windows, const ReasonerParams& p);

struct Verdict {
  enum class Light { none, red, green };

  std::int64_t frame = 0;
  Light light = Light::none;
  bool light_eligible = false;
  std::set<std::string> obstacle_lanes;
  bool obstacle_eligible = false;
  std::vector<std::string> fired_rules; // sorted rule-head names
};

// Reads the consistency predicates for one frame out of an evaluated model.
// false_negative_light -> red, inferred_green -> green, both -> red;
// lane_blocked(F, L) collects blocked lanes. Missing predicates mean the
// rule never fired.
Verdict extract_verdict(const logic::Model& m, std::int64_t frame);

// extract + augment + evaluate + extract_verdict over a whole detection log,
// one verdict per frame.
std::vector<Verdict> run_reasoner(const FrameLog& det, const logic::Program& program,
                                  const ReasonerParams& p, std::int64_t fact_window = 1);

// Same, starting from already-extracted facts (e.g. an `extract` output file).
// Atoms are grouped by their leading frame argument; one verdict per distinct
// frame, each evaluated over a trailing window of fact_window frames.
std::vector<Verdict> run_reasoner(const FactSet& facts, const logic::Program& program,
                                  const ReasonerParams& p, std::int64_t fact_window = 1);

// What the detector alone claims for one frame: the reported color of the
// ego-approach light at the forward intersection (unknown when there is no
// such light), plus the lanes with detected obstacles.
struct BaselineClassification {
  enum class Color { red, yellow, green, unknown };

  std::int64_t frame = 0;
  Color light_color = Color::unknown;
  std::set<std::string> obstacle_lanes;
};

struct CombinedClassification {
  std::int64_t frame = 0;
  BaselineClassification::Color light_color = BaselineClassification::Color::unknown;
  std::set<std::string> obstacle_lanes;
  bool logic_override = false;
};

// Intersection id hit first by the ego's forward ray within lookahead_m.
std::optional<std::int64_t> front_intersection(const FrameRecord& rec, double lookahead_m);

// Color of the light matching the ego approach at the given intersection.
std::optional<LightColor> ego_light_color(const FrameRecord& rec, std::int64_t intersection_id);

BaselineClassification classify_baseline(const FrameRecord& det, double lookahead_m);

// Eligible light verdicts override the color; eligible obstacle verdicts add
// blocked lanes; ineligible verdicts pass the baseline through unchanged.
// Throws AlignmentError when the frames disagree.
CombinedClassification combine(const BaselineClassification& baseline, const Verdict& v);

// JSONL: {frame, light_verdict, light_eligible, obstacle_lanes,
// obstacle_eligible, fired_rules}, one object per line.
std::string verdict_to_jsonl_line(const Verdict& v);
Verdict verdict_from_jsonl_line(const std::string& line, std::size_t line_no);
void write_verdicts_file(const std::string& path, const std::vector<Verdict>& verdicts);
std::vector<Verdict> read_verdicts_file(const std::string& path);

} // namespace crosscheck
