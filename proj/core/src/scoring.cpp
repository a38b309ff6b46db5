#include "crosscheck/scoring.hpp"

#include <charconv>
#include <fstream>
#include <optional>

#include <json.hpp>

#include "crosscheck/errors.hpp"
#include "crosscheck/geometry.hpp"

namespace crosscheck {

namespace {

constexpr double kObstacleWindowM = 60.0;
constexpr std::size_t kMaxReportedMismatches = 10;

void check_alignment(const FrameLog& gt, const FrameLog& det,
                     const std::vector<Verdict>& verdicts) {
  if (gt.size() != det.size() || gt.size() != verdicts.size())
    throw AlignmentError("frame counts differ: ground truth " + std::to_string(gt.size()) +
                         ", detections " + std::to_string(det.size()) + ", verdicts " +
                         std::to_string(verdicts.size()));
  std::string bad;
  std::size_t bad_count = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i].frame == det[i].frame && gt[i].frame == verdicts[i].frame) continue;
    ++bad_count;
    if (bad_count <= kMaxReportedMismatches) {
      if (!bad.empty()) bad += ", ";
      bad += std::to_string(i);
    }
  }
  if (bad_count > 0)
    throw AlignmentError("frame indices disagree at " + std::to_string(bad_count) +
                         " position(s): " + bad +
                         (bad_count > kMaxReportedMismatches ? ", ..." : ""));
}

ModelRow finish_row(std::string model, std::string task, const ConfusionCounts& counts,
                    std::int64_t eligible) {
  ModelRow row;
  row.model = std::move(model);
  row.task = std::move(task);
  row.counts = counts;
  row.eligible_frames = eligible;
  row.total_frames = counts.total();
  if (counts.total() > 0) row.scores = metrics(counts);
  return row;
}

// Nearest ground-truth obstacle ahead of ego within the scoring window;
// ties go to the smaller lane id.
std::optional<std::string> gt_obstacle_lane(const FrameRecord& rec) {
  Vec2 ego{rec.ego.x, rec.ego.y};
  Vec2 forward = compass_unit(rec.ego.approach);
  std::optional<std::string> best;
  double best_d = 0.0;
  for (const ObstacleState& o : rec.obstacles) {
    Vec2 c = o.bbox.center();
    if (dot(c - ego, forward) <= 0.0) continue;
    double d = norm(c - ego);
    if (d > kObstacleWindowM) continue;
    if (!best || d < best_d || (d == best_d && o.lane_id < *best)) {
      best = o.lane_id;
      best_d = d;
    }
  }
  return best;
}

std::string double_text(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void metric_cell(std::string& out, const MetricValue& m) {
  out += ',';
  out += m.defined ? double_text(m.value) : "0";
}

nlohmann::ordered_json row_json(const ModelRow& row) {
  nlohmann::ordered_json j;
  j["model"] = row.model;
  j["task"] = row.task;
  j["accuracy"] = row.scores.accuracy.value;
  j["precision"] = row.scores.precision.value;
  j["recall"] = row.scores.recall.value;
  j["f_score"] = row.scores.f_score.value;
  j["tp"] = row.counts.tp;
  j["fp"] = row.counts.fp;
  j["fn"] = row.counts.fn;
  j["tn"] = row.counts.tn;
  j["eligible_frames"] = row.eligible_frames;
  j["total_frames"] = row.total_frames;
  nlohmann::ordered_json undefined = nlohmann::ordered_json::array();
  if (!row.scores.accuracy.defined) undefined.push_back("accuracy");
  if (!row.scores.precision.defined) undefined.push_back("precision");
  if (!row.scores.recall.defined) undefined.push_back("recall");
  if (!row.scores.f_score.defined) undefined.push_back("f_score");
  j["undefined_metrics"] = std::move(undefined);
  return j;
}

} // namespace

std::vector<ModelRow> score_lights(const FrameLog& gt, const FrameLog& det,
                                   const std::vector<Verdict>& verdicts,
                                   const ReasonerParams& params) {
  check_alignment(gt, det, verdicts);
  ConfusionCounts logic, baseline, combined;
  std::int64_t eligible_count = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    auto front = front_intersection(gt[i], params.lookahead_m);
    if (!front) continue;
    auto gt_color = ego_light_color(gt[i], *front);
    if (!gt_color) continue;
    bool gt_pos = *gt_color == LightColor::red;

    BaselineClassification base = classify_baseline(det[i], params.lookahead_m);
    baseline.add(gt_pos, base.light_color == BaselineClassification::Color::red);

    CombinedClassification comb = combine(base, verdicts[i]);
    combined.add(gt_pos, comb.light_color == BaselineClassification::Color::red);

    if (verdicts[i].light_eligible) {
      ++eligible_count;
      logic.add(gt_pos, verdicts[i].light == Verdict::Light::red);
    }
  }
  return {finish_row("logic", "lights", logic, eligible_count),
          finish_row("baseline", "lights", baseline, eligible_count),
          finish_row("combined", "lights", combined, eligible_count)};
}

std::vector<ModelRow> score_obstacles(const FrameLog& gt, const FrameLog& det,
                                      const std::vector<Verdict>& verdicts,
                                      [[maybe_unused]] const ReasonerParams& params) {
  check_alignment(gt, det, verdicts);
  ConfusionCounts logic, baseline, combined;
  std::int64_t eligible_count = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const Verdict& v = verdicts[i];
    std::optional<std::string> lane = gt_obstacle_lane(gt[i]);
    bool gt_pos = lane.has_value();
    if (!lane && !v.obstacle_lanes.empty()) lane = *v.obstacle_lanes.begin();
    if (!lane) continue;

    bool base_pos = false;
    for (const ObstacleState& o : det[i].obstacles)
      if (o.lane_id == *lane) base_pos = true;
    baseline.add(gt_pos, base_pos);

    bool verdict_pos = v.obstacle_eligible && v.obstacle_lanes.count(*lane) > 0;
    combined.add(gt_pos, base_pos || verdict_pos);

    if (v.obstacle_eligible) {
      ++eligible_count;
      logic.add(gt_pos, verdict_pos);
    }
  }
  return {finish_row("logic", "obstacles", logic, eligible_count),
          finish_row("baseline", "obstacles", baseline, eligible_count),
          finish_row("combined", "obstacles", combined, eligible_count)};
}

MetricsReport score_all(const FrameLog& gt, const FrameLog& det,
                        const std::vector<Verdict>& verdicts, const ReasonerParams& params) {
  MetricsReport report;
  for (ModelRow& row : score_lights(gt, det, verdicts, params)) report.rows.push_back(std::move(row));
  for (ModelRow& row : score_obstacles(gt, det, verdicts, params))
    report.rows.push_back(std::move(row));
  return report;
}

std::string report_to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["rows"] = nlohmann::ordered_json::array();
  for (const ModelRow& row : report.rows) j["rows"].push_back(row_json(row));
  return j.dump(2) + "\n";
}

std::string report_to_csv(const MetricsReport& report) {
  std::string out = "model,task,accuracy,precision,recall,f_score,tp,fp,fn,tn,eligible,total\n";
  for (const ModelRow& row : report.rows) {
    out += row.model;
    out += ',';
    out += row.task;
    metric_cell(out, row.scores.accuracy);
    metric_cell(out, row.scores.precision);
    metric_cell(out, row.scores.recall);
    metric_cell(out, row.scores.f_score);
    out += ',' + std::to_string(row.counts.tp);
    out += ',' + std::to_string(row.counts.fp);
    out += ',' + std::to_string(row.counts.fn);
    out += ',' + std::to_string(row.counts.tn);
    out += ',' + std::to_string(row.eligible_frames);
    out += ',' + std::to_string(row.total_frames);
    out += '\n';
  }
  return out;
}

namespace {

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open '" + path + "' for writing");
  os << text;
}

} // namespace

void write_report_json_file(const std::string& path, const MetricsReport& report) {
  write_text_file(path, report_to_json(report));
}

void write_report_csv_file(const std::string& path, const MetricsReport& report) {
  write_text_file(path, report_to_csv(report));
}

} // namespace crosscheck
