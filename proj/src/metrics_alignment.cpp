#include <algorithm>
#include <cmath>

#include "fallsynth/error.hpp"
#include "fallsynth/metrics.hpp"

namespace fallsynth {
namespace {

Scaler pooled_scaler(std::span<const Window> windows) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const Window& w : windows) {
    for (double v : w.values) sum += v;
    count += w.values.size();
  }
  const double mean = sum / static_cast<double>(count);
  double sq = 0.0;
  for (const Window& w : windows) {
    for (double v : w.values) sq += (v - mean) * (v - mean);
  }
  const double sd = std::max(std::sqrt(sq / static_cast<double>(count)), Scaler::kStdFloor);
  return Scaler{{mean, mean, mean}, {sd, sd, sd}};
}

std::vector<double> axis_values(std::span<const Window> windows, std::size_t axis) {
  std::vector<double> out;
  for (const Window& w : windows) {
    for (std::size_t r = 0; r < w.length(); ++r) out.push_back(w.at(r, axis));
  }
  return out;
}

std::vector<double> all_values(std::span<const Window> windows) {
  std::vector<double> out;
  for (const Window& w : windows) out.insert(out.end(), w.values.begin(), w.values.end());
  return out;
}

}  // namespace

AlignmentReport align_windows(std::span<const Window> real, std::span<const Window> synthetic,
                              const AlignmentOptions& options) {
  if (real.empty()) throw EmptyInputError("alignment: no real windows");
  if (synthetic.empty()) throw EmptyInputError("alignment: no synthetic windows");
  const std::size_t length = real.front().length();
  for (auto set : {real, synthetic}) {
    for (const Window& w : set) {
      if (w.length() != length || w.values.size() != length * kAxes) {
        throw ShapeError("alignment: windows differ in length");
      }
    }
  }

  const Scaler scaler =
      options.normalization == Normalization::Pooled ? pooled_scaler(real) : fit_scaler(real);
  const auto real_n = apply_scaler(scaler, real);
  const auto synth_n = apply_scaler(scaler, synthetic);

  AlignmentReport report;
  report.real_windows = real.size();
  report.synthetic_windows = synthetic.size();

  double p_sum = 0.0;
  for (std::size_t axis = 0; axis < kAxes; ++axis) {
    report.ks[axis] = ks_two_sample(axis_values(real_n, axis), axis_values(synth_n, axis));
    p_sum += report.ks[axis].p_value;
  }
  report.ks_mean_p = p_sum / 3.0;

  const auto rv = all_values(real_n);
  const auto sv = all_values(synth_n);
  const auto [rmin, rmax] = std::minmax_element(rv.begin(), rv.end());
  const auto [smin, smax] = std::minmax_element(sv.begin(), sv.end());
  double lo = std::min(*rmin, *smin);
  double hi = std::max(*rmax, *smax);
  if (!(lo < hi)) hi = lo + 1.0;

  report.real_density = histogram_density(rv, options.bins, lo, hi);
  report.synthetic_density = histogram_density(sv, options.bins, lo, hi);
  report.jsd = jsd(report.real_density, report.synthetic_density);
  report.coverage = coverage(real_n, synth_n, options.k, options.threads);
  return report;
}

}  // namespace fallsynth
