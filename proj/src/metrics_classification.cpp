#include <cmath>
#include <cstdio>
#include <string>

#include "fallsynth/error.hpp"
#include "fallsynth/metrics.hpp"

namespace fallsynth {

ClassificationMetrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn,
                                          std::size_t tn) {
  ClassificationMetrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.tn = tn;
  m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  const double pr = m.precision + m.recall;
  m.f1 = pr > 0.0 ? 2.0 * m.precision * m.recall / pr : 0.0;
  return m;
}

ClassificationMetrics classification_metrics(std::span<const double> probabilities,
                                             std::span<const int> labels, double threshold) {
  if (probabilities.size() != labels.size()) {
    throw DataError("classification metrics: " + std::to_string(probabilities.size()) +
                    " probabilities vs " + std::to_string(labels.size()) + " labels");
  }
  if (probabilities.empty()) throw EmptyInputError("classification metrics: no predictions");

  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = probabilities[i];
    if (!(p >= 0.0 && p <= 1.0)) throw DataError("probability outside [0, 1]");
    if (labels[i] != 0 && labels[i] != 1) throw DataError("label must be 0 or 1");
    const bool predicted = p >= threshold;
    const bool actual = labels[i] == 1;
    if (predicted && actual) ++tp;
    else if (predicted) ++fp;
    else if (actual) ++fn;
    else ++tn;
  }
  return metrics_from_counts(tp, fp, fn, tn);
}

double percent_delta(double baseline_f1, double augmented_f1) {
  if (!(baseline_f1 > 0.0)) throw DataError("percent delta needs a positive baseline");
  return 100.0 * (augmented_f1 - baseline_f1) / baseline_f1;
}

std::string format_percent_delta(double delta) {
  const double rounded = std::round(delta * 100.0) / 100.0;
  if (rounded == 0.0) return "0.00%";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%+.2f%%", rounded);
  return buf;
}

}  // namespace fallsynth
