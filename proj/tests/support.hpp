// Shared generators and brute-force oracles for the test binaries.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fallsynth/rng.hpp"
#include "fallsynth/types.hpp"
#include "fallsynth/windowing.hpp"

namespace testing_support {

using fallsynth::Rng;

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fallsynth_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::vector<double> normal_vector(Rng& rng, std::size_t n, double mean = 0.0,
                                         double sd = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = mean + sd * rng.normal();
  return v;
}

// Small integers so that ties are common.
inline std::vector<double> tied_vector(Rng& rng, std::size_t n, std::uint64_t levels) {
  std::vector<double> v(n);
  for (double& x : v) x = static_cast<double>(rng.below(levels));
  return v;
}

inline fallsynth::AccelSeries ramp_series(std::size_t n) {
  fallsynth::AccelSeries s;
  s.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i);
    s.samples[i] = {t, 10.0 * t, 100.0 * t};
  }
  return s;
}

// Number of start positions 0, s, 2s, ... with start + W <= N, by counting.
inline std::size_t naive_window_count(std::size_t n, std::size_t w, std::size_t s) {
  std::size_t count = 0;
  for (std::size_t start = 0; start + w <= n; start += s) ++count;
  return count;
}

// max over pooled t of |m * #(a <= t) - n * #(b <= t)|, O((n+m)^2).
inline std::uint64_t brute_ks_scaled(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto n = static_cast<std::int64_t>(a.size());
  const auto m = static_cast<std::int64_t>(b.size());
  std::int64_t best = 0;
  for (double t : pooled) {
    std::int64_t ca = 0, cb = 0;
    for (double x : a) ca += x <= t;
    for (double x : b) cb += x <= t;
    best = std::max(best, std::abs(ca * m - cb * n));
  }
  return static_cast<std::uint64_t>(best);
}

// Fraction of label assignments (n to a, m to b) of the pooled values whose
// statistic reaches the observed one, enumerated with next_permutation.
inline double brute_ks_permutation_p(const std::vector<double>& a, const std::vector<double>& b) {
  const std::uint64_t observed = brute_ks_scaled(a, b);
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::vector<int> assign(pooled.size(), 0);
  std::fill(assign.begin(), assign.begin() + static_cast<std::ptrdiff_t>(a.size()), 1);
  std::sort(assign.begin(), assign.end());
  std::uint64_t hits = 0, total = 0;
  do {
    std::vector<double> pa, pb;
    for (std::size_t i = 0; i < pooled.size(); ++i) (assign[i] ? pa : pb).push_back(pooled[i]);
    hits += brute_ks_scaled(pa, pb) >= observed;
    ++total;
  } while (std::next_permutation(assign.begin(), assign.end()));
  return static_cast<double>(hits) / static_cast<double>(total);
}

// JSD in bits written straight from the definition, masses normalized first.
inline double reference_jsd(std::vector<double> p, std::vector<double> q) {
  double sp = 0.0, sq = 0.0;
  for (double x : p) sp += x;
  for (double x : q) sq += x;
  for (double& x : p) x /= sp;
  for (double& x : q) x /= sq;
  double kl_pm = 0.0, kl_qm = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) kl_pm += p[i] * std::log2(p[i] / m);
    if (q[i] > 0.0) kl_qm += q[i] * std::log2(q[i] / m);
  }
  return 0.5 * kl_pm + 0.5 * kl_qm;
}

// Coverage by full sort of every real row's distances: O(n^2 log n + n m d).
inline double brute_coverage(const std::vector<double>& real, const std::vector<double>& synth,
                             std::size_t dim, std::size_t k) {
  const std::size_t n = real.size() / dim;
  const std::size_t m = synth.size() / dim;
  auto dist2 = [dim](const double* x, const double* y) {
    double s = 0.0;
    for (std::size_t d = 0; d < dim; ++d) s += (x[d] - y[d]) * (x[d] - y[d]);
    return s;
  };
  std::size_t covered = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> d;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) d.push_back(dist2(&real[i * dim], &real[j * dim]));
    }
    std::sort(d.begin(), d.end());
    const double radius = d[k - 1];
    bool hit = false;
    for (std::size_t s = 0; s < m; ++s) hit = hit || dist2(&real[i * dim], &synth[s * dim]) <= radius;
    covered += hit;
  }
  return static_cast<double>(covered) / static_cast<double>(n);
}

// Largest T with T * num_c <= pool_c * den for every category with num_c > 0,
// found by walking T upward in integer arithmetic.
inline std::size_t brute_mix_budget(const std::size_t pools[3], const std::size_t num[3],
                                    std::size_t den) {
  std::size_t t = 0;
  for (;;) {
    bool ok = true;
    for (int c = 0; c < 3; ++c) ok = ok && (num[c] == 0 || (t + 1) * num[c] <= pools[c] * den);
    if (!ok) return t;
    ++t;
  }
}

// Windows whose mean over all values is `offset` plus noise.
inline std::vector<fallsynth::Window> cluster_windows(Rng& rng, std::size_t count,
                                                      std::size_t length, double offset,
                                                      fallsynth::Label label, double noise = 1.0) {
  std::vector<fallsynth::Window> out(count);
  for (auto& w : out) {
    w.values.resize(length * fallsynth::kAxes);
    for (double& v : w.values) v = offset + noise * rng.normal();
    w.label = label;
  }
  return out;
}

inline double window_mean(const fallsynth::Window& w) {
  double s = 0.0;
  for (double v : w.values) s += v;
  return s / static_cast<double>(w.values.size());
}

// Best single-threshold classifier on the window mean; returns its accuracy.
inline double decision_stump_accuracy(const std::vector<fallsynth::Window>& windows) {
  std::vector<std::pair<double, int>> xs;
  for (const auto& w : windows) xs.emplace_back(window_mean(w), static_cast<int>(w.label));
  std::sort(xs.begin(), xs.end());
  std::size_t best = 0;
  for (std::size_t cut = 0; cut <= xs.size(); ++cut) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) correct += (i >= cut) == (xs[i].second == 1);
    best = std::max(best, correct);
  }
  return static_cast<double>(best) / static_cast<double>(xs.size());
}

}  // namespace testing_support
