#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crosscheck/frame.hpp"
#include "crosscheck/fusion.hpp"
#include "crosscheck/metrics.hpp"

namespace crosscheck {

struct ModelRow {
  std::string model; // logic | baseline | combined
  std::string task;  // lights | obstacles
  ConfusionCounts counts;
  Metrics scores; // all undefined when no frame was evaluated
  std::int64_t eligible_frames = 0;
  std::int64_t total_frames = 0; // == counts.total()
};

struct MetricsReport {
  std::vector<ModelRow> rows; // lights then obstacles; logic, baseline, combined
};

// Ground truth, detections and verdicts must align frame-for-frame; a
// mismatch raises AlignmentError naming the offending indices.
//
// Lights: a frame is evaluated when the ground-truth ego forward ray meets
// an intersection with an ego-approach light within lookahead. The positive
// class is red; yellow scores as not-red. Logic counts only eligible
// frames, baseline and combined count every evaluated frame.
//
// Obstacles: a frame is evaluated when a ground-truth obstacle sits ahead
// of ego within 60 m (nearest wins, ties to the smaller lane id) or, with
// none, when the verdict claims a blocked lane (smallest). Predictions are
// judged on that single lane.
std::vector<ModelRow> score_lights(const FrameLog& gt, const FrameLog& det,
                                   const std::vector<Verdict>& verdicts,
                                   const ReasonerParams& params);
std::vector<ModelRow> score_obstacles(const FrameLog& gt, const FrameLog& det,
                                      const std::vector<Verdict>& verdicts,
                                      const ReasonerParams& params);
MetricsReport score_all(const FrameLog& gt, const FrameLog& det,
                        const std::vector<Verdict>& verdicts, const ReasonerParams& params);

// Deterministic serializations: JSON mirrors ModelRow; CSV columns are
// model, task, accuracy, precision, recall, f_score, tp, fp, fn, tn,
// eligible, total. Undefined metrics serialize as 0 and are listed in the
// JSON row's undefined_metrics array.
std::string report_to_json(const MetricsReport& report);
std::string report_to_csv(const MetricsReport& report);
void write_report_json_file(const std::string& path, const MetricsReport& report);
void write_report_csv_file(const std::string& path, const MetricsReport& report);

} // namespace crosscheck
