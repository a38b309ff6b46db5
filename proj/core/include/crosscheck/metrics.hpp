#pragma once

#include <cstdint>

namespace crosscheck {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  std::int64_t total() const { return tp + fp + fn + tn; }

  void add(bool actual_positive, bool predicted_positive) {
    if (actual_positive)
      predicted_positive ? ++tp : ++fn;
    else
      predicted_positive ? ++fp : ++tn;
  }
};

// A metric with a zero denominator reports value 0 and defined=false.
struct MetricValue {
  double value = 0.0;
  bool defined = false;
};

struct Metrics {
  MetricValue accuracy;
  MetricValue precision;
  MetricValue recall;
  MetricValue f_score;
};

// accuracy=(tp+tn)/total, precision=tp/(tp+fp), recall=tp/(tp+fn),
// f_score=2PR/(P+R). Throws ValidationError when total()==0.
Metrics metrics(const ConfusionCounts& c);

} // namespace crosscheck
