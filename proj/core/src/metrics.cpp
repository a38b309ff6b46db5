#include "crosscheck/metrics.hpp"

#include "crosscheck/errors.hpp"

namespace crosscheck {

namespace {

MetricValue ratio(std::int64_t num, std::int64_t den) {
  if (den == 0) return {0.0, false};
  return {static_cast<double>(num) / static_cast<double>(den), true};
}

} // namespace

Metrics metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw ValidationError("metrics: no evaluated frames");
  Metrics m;
  m.accuracy = ratio(c.tp + c.tn, c.total());
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  if (m.precision.defined && m.recall.defined && m.precision.value + m.recall.value > 0.0) {
    m.f_score.value =
        2.0 * m.precision.value * m.recall.value / (m.precision.value + m.recall.value);
    m.f_score.defined = true;
  }
  return m;
}

} // namespace crosscheck
