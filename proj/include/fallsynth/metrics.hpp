#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fallsynth/windowing.hpp"

namespace fallsynth {

// ---------------------------------------------------------------------------
// Two-sample Kolmogorov-Smirnov

enum class KsMode {
  // Kolmogorov limit with effective size ne = n*m/(n+m) and the
  // (sqrt(ne) + 0.12 + 0.11/sqrt(ne)) small-sample correction.
  Asymptotic,
  // Permutation p-value over all C(n+m, n) relabellings. n + m <= 14 only.
  Exact,
};

inline constexpr std::size_t kKsExactMaxTotal = 14;

struct KsResult {
  double statistic = 0.0;  // D in [0, 1]
  double p_value = 1.0;    // in [0, 1]
  std::size_t n = 0;
  std::size_t m = 0;

  friend bool operator==(const KsResult&, const KsResult&) = default;
};

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b,
                       KsMode mode = KsMode::Asymptotic);

// max_t |n_b * count(a <= t) - n_a * count(b <= t)|, i.e. D * n * m as an
// integer. Inputs need not be sorted.
std::uint64_t ks_scaled_statistic(std::span<const double> a, std::span<const double> b);

// Q_KS(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2), clamped to [0, 1].
double kolmogorov_survival(double lambda);

// ---------------------------------------------------------------------------
// Histogram densities and Jensen-Shannon divergence

inline constexpr std::size_t kDefaultBins = 100;

struct DensityCurve {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> centers;
  std::vector<double> densities;

  std::size_t bins() const noexcept { return densities.size(); }
  double width() const noexcept { return (hi - lo) / static_cast<double>(densities.size()); }
  std::vector<double> masses() const;

  friend bool operator==(const DensityCurve&, const DensityCurve&) = default;
};

// Equal-width bins over [lo, hi]; out-of-range values clip into the edge bins;
// density = count / (N * width).
DensityCurve histogram_density(std::span<const double> values, std::size_t bins, double lo,
                               double hi);

// Base-2 JSD of two curves on the same grid; result in [0, 1].
double jsd(const DensityCurve& p, const DensityCurve& q);
// Base-2 JSD of two probability mass vectors of equal length.
double jsd_masses(std::span<const double> p, std::span<const double> q);

// Two-column "center;density" CSV.
std::string write_density_csv(const DensityCurve& curve);
DensityCurve read_density_csv(std::string_view text);

// ---------------------------------------------------------------------------
// Coverage

inline constexpr std::size_t kDefaultCoverageK = 5;

// Fraction of real samples whose k-NN ball (radius = distance to the k-th
// nearest other real sample) contains at least one synthetic sample. Rows of
// `real` and `synthetic` are flattened feature vectors of length `dim`.
// `threads` > 1 partitions real rows across threads; the result does not
// depend on it.
double coverage(std::span<const double> real, std::span<const double> synthetic, std::size_t dim,
                std::size_t k = kDefaultCoverageK, std::size_t threads = 1);
double coverage(std::span<const Window> real, std::span<const Window> synthetic,
                std::size_t k = kDefaultCoverageK, std::size_t threads = 1);

// ---------------------------------------------------------------------------
// Classification metrics

struct ClassificationMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  friend bool operator==(const ClassificationMetrics&, const ClassificationMetrics&) = default;
};

ClassificationMetrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn,
                                          std::size_t tn);

// Predicts 1 iff probability >= threshold. Labels must be 0 or 1.
ClassificationMetrics classification_metrics(std::span<const double> probabilities,
                                             std::span<const int> labels,
                                             double threshold = 0.5);

// 100 * (augmented - baseline) / baseline. Throws ConfigError if baseline <= 0.
double percent_delta(double baseline_f1, double augmented_f1);
// "+56.83%" / "-4.05%" / "0.00%".
std::string format_percent_delta(double delta);

// ---------------------------------------------------------------------------
// Alignment of real vs synthetic windows

enum class Normalization {
  // One scalar mean/std over all real values, all axes pooled.
  Pooled,
  // Per-axis mean/std of the real set.
  PerAxis,
};

struct AlignmentOptions {
  std::size_t bins = kDefaultBins;
  std::size_t k = kDefaultCoverageK;
  Normalization normalization = Normalization::Pooled;
  std::size_t threads = 1;

  friend bool operator==(const AlignmentOptions&, const AlignmentOptions&) = default;
};

struct AlignmentReport {
  std::array<KsResult, 3> ks;  // x, y, z
  double ks_mean_p = 0.0;      // arithmetic mean of the three axis p-values
  double jsd = 0.0;
  double coverage = 0.0;
  DensityCurve real_density;
  DensityCurve synthetic_density;
  std::size_t real_windows = 0;
  std::size_t synthetic_windows = 0;

  friend bool operator==(const AlignmentReport&, const AlignmentReport&) = default;
};

// Standardizes both window sets against the real set, then computes per-axis
// KS, JSD of the pooled-value histograms over the joint [min, max], and
// Coverage on the flattened standardized windows.
AlignmentReport align_windows(std::span<const Window> real, std::span<const Window> synthetic,
                              const AlignmentOptions& options = {});

}  // namespace fallsynth
