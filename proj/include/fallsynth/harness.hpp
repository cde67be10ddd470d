#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fallsynth/classifier.hpp"
#include "fallsynth/ingest.hpp"
#include "fallsynth/metrics.hpp"
#include "fallsynth/windowing.hpp"

namespace fallsynth {

struct WindowOptions {
  std::size_t length = kDefaultWindowLength;
  std::size_t stride = kDefaultStride;

  friend bool operator==(const WindowOptions&, const WindowOptions&) = default;
};

struct ExperimentConfig {
  std::filesystem::path manifest;                          // real dataset
  std::vector<std::filesystem::path> synthetic_manifests;  // pooled when more than one
  WindowOptions window;
  MixSpec mix;
  SplitSizes split;
  std::size_t iterations = 5;
  std::uint64_t seed = 0;  // master seed
  // Train the real-only condition next to the augmented one.
  bool baseline = true;
  // Unpaired mode: the baseline draws its splits from this seed instead of
  // sharing the augmented run's.
  std::optional<std::uint64_t> baseline_seed;
  TrainConfig train;  // train.seed is ignored; per-iteration seeds are derived
  ModelShape model;
  AlignmentOptions metrics;
  // Real-vs-synthetic alignment of the fall windows, reported alongside.
  bool alignment = true;

  // Throws ConfigError on invalid values, DataError on missing manifests.
  void validate() const;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Canonical JSON of a fully resolved config (sorted keys, absolute paths).
std::string config_to_json(const ExperimentConfig& config);
// Missing fields keep their defaults; relative paths resolve against base_dir.
ExperimentConfig config_from_json(std::string_view text, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

// 16 hex digits of FNV-1a 64 over config_to_json().
std::string config_fingerprint(const ExperimentConfig& config);

// ---------------------------------------------------------------------------

struct IterationResult {
  std::size_t iteration = 0;
  std::uint64_t seed = 0;
  SubjectSplit split;
  MixCounts counts;
  std::size_t validation_windows = 0;
  std::size_t test_windows = 0;
  ClassificationMetrics metrics;
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;
  StopReason stop_reason = StopReason::MaxEpochs;

  friend bool operator==(const IterationResult&, const IterationResult&) = default;
};

struct ConditionReport {
  MixSpec mix;
  std::vector<IterationResult> iterations;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_f1 = 0.0;

  friend bool operator==(const ConditionReport&, const ConditionReport&) = default;
};

struct ExperimentReport {
  std::string kind;  // "experiment" or "ablate-quantity"
  std::string fingerprint;
  std::string config_json;
  ConditionReport augmented;
  std::optional<ConditionReport> baseline;
  std::optional<double> percent_delta;  // of mean F1, augmented vs baseline
  std::optional<AlignmentReport> alignment;

  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

// Arithmetic means of the per-iteration metrics.
void aggregate(ConditionReport& condition);

// Fall windows of the real manifest against the (pooled) synthetic manifests.
AlignmentReport run_alignment(const std::filesystem::path& real_manifest,
                              std::span<const std::filesystem::path> synthetic_manifests,
                              const WindowOptions& window, const AlignmentOptions& options);

ExperimentReport run_experiment(const ExperimentConfig& config);

struct TrainedModel {
  IterationResult result;
  Checkpoint checkpoint;
  TrainHistory history;
};

// A single iteration of the augmented condition, keeping the model.
TrainedModel train_iteration(const ExperimentConfig& config, std::size_t iteration);
// run_experiment with the (0.5, 0.1, 0.4) mix.
ExperimentReport run_ablation_quantity(ExperimentConfig config);

inline constexpr MixSpec kQuantityAblationMix{0.5, 0.1, 0.4};

// ---------------------------------------------------------------------------
// Report files

enum class ReportFormat { Json, Csv };
ReportFormat parse_report_format(std::string_view text);

std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(std::string_view text);
// One row per iteration and condition, then the means.
std::string report_to_csv(const ExperimentReport& report);

std::string alignment_to_json(const AlignmentReport& report);
AlignmentReport alignment_from_json(std::string_view text);

// Writes <kind>-<fingerprint>.<json|csv> into out_dir and, when the report
// carries an alignment, density-<fingerprint>-{real,synthetic}.csv into
// plot_dir. Returns the written paths.
std::vector<std::filesystem::path> emit_report(const ExperimentReport& report, ReportFormat format,
                                               const std::filesystem::path& out_dir,
                                               const std::filesystem::path& plot_dir);

// ---------------------------------------------------------------------------
// Synthetic test fixture

struct FixtureOptions {
  std::size_t subjects = 12;
  std::size_t adl_series = 1;   // per subject
  std::size_t fall_series = 1;  // per subject
  std::size_t series_length = 148;
  std::size_t synthetic_sources = 3;
  std::size_t synthetic_series = 4;  // per source
  // Offset between the ADL and fall clusters, in noise standard deviations.
  double separation = 6.0;
  std::uint64_t seed = 7;
};

struct FixturePaths {
  std::filesystem::path manifest;
  std::vector<std::filesystem::path> synthetic_manifests;
  std::filesystem::path config;
  std::filesystem::path motion;  // one (F,22,3) trajectory for the kinematics command
};

// Writes CSV series, a real manifest, one manifest per synthetic source and an
// experiment config into dir. ADL series are noise around 0; falls (real and
// synthetic) add a constant offset so a threshold on the window mean
// separates the two classes.
FixturePaths generate_fixture(const std::filesystem::path& dir, const FixtureOptions& options = {});

}  // namespace fallsynth
