#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fallsynth/types.hpp"

namespace fallsynth {

inline constexpr std::size_t kDefaultWindowLength = 128;
inline constexpr std::size_t kDefaultStride = 10;

// W x 3 accelerometer segment, row-major (x0, y0, z0, x1, ...).
struct Window {
  std::vector<double> values;
  Label label = Label::Adl;
  std::string subject_id;
  Provenance provenance = Provenance::Real;
  std::string source;

  std::size_t length() const noexcept { return values.size() / kAxes; }
  double at(std::size_t row, std::size_t axis) const { return values[row * kAxes + axis]; }

  friend bool operator==(const Window&, const Window&) = default;
};

// Windows start at 0, stride, 2*stride, ...; count = floor((N - W) / stride) + 1
// when N >= W, otherwise 0. Throws ConfigError if W or stride is 0.
std::vector<Window> slide_windows(const AccelSeries& series, std::size_t length,
                                  std::size_t stride);

struct WindowBuildResult {
  std::vector<Window> windows;
  // Indices (into the input) of series shorter than the window length.
  std::vector<std::size_t> skipped;
};

// Windows every series in order; series shorter than W are skipped, not padded.
WindowBuildResult build_windows(std::span<const AccelSeries> series, std::size_t length,
                                std::size_t stride);

// Per-axis standardization statistics.
struct Scaler {
  static constexpr double kStdFloor = 1e-8;

  std::array<double, 3> mean{0.0, 0.0, 0.0};
  std::array<double, 3> stddev{1.0, 1.0, 1.0};

  friend bool operator==(const Scaler&, const Scaler&) = default;
};

// Pooled per-axis mean and population std over every row of every window.
Scaler fit_scaler(std::span<const Window> windows);
std::vector<Window> apply_scaler(const Scaler& scaler, std::span<const Window> windows);
std::vector<Window> invert_scaler(const Scaler& scaler, std::span<const Window> windows);

struct SplitSizes {
  std::size_t train = 8;
  std::size_t validation = 2;
  std::size_t test = 2;

  std::size_t total() const noexcept { return train + validation + test; }
  friend bool operator==(const SplitSizes&, const SplitSizes&) = default;
};

// Subject sets are kept sorted.
struct SubjectSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;

  friend bool operator==(const SubjectSplit&, const SubjectSplit&) = default;
};

// Uniformly random disjoint partition determined by (sorted subjects, sizes, seed).
// Throws ConfigError when |subjects| != sizes.total() or subjects repeat.
SubjectSplit split_subjects(std::span<const std::string> subjects, const SplitSizes& sizes,
                            std::uint64_t seed);

struct MixSpec {
  double adl = 0.6;
  double real_fall = 0.2;
  double synthetic_fall = 0.2;

  // Throws ConfigError unless each fraction is in [0,1] and they sum to 1 +/- 1e-9.
  void validate() const;
  // The real-only condition: synthetic share redistributed proportionally.
  MixSpec without_synthetic() const;

  friend bool operator==(const MixSpec&, const MixSpec&) = default;
};

struct MixCounts {
  std::size_t total_budget = 0;  // T
  std::size_t adl = 0;
  std::size_t real_fall = 0;
  std::size_t synthetic_fall = 0;

  friend bool operator==(const MixCounts&, const MixCounts&) = default;
};

// T = min over categories with fraction > 0 of floor(pool / fraction); each
// category then takes floor(T * fraction). Throws InfeasibleMixError when a
// category with a positive fraction has an empty pool.
MixCounts plan_mix(std::size_t adl_pool, std::size_t real_fall_pool,
                   std::size_t synthetic_fall_pool, const MixSpec& spec);

// Draws the planned counts without replacement and shuffles the result.
std::vector<Window> compose_training_mix(std::span<const Window> adl_pool,
                                         std::span<const Window> real_fall_pool,
                                         std::span<const Window> synthetic_fall_pool,
                                         const MixSpec& spec, std::uint64_t seed);

// Binary window cache: "FSWC" magic, u32 version, u32 W, u64 count, then per
// window u8 label, u8 provenance, u32-length-prefixed subject and source, and
// W*3 little-endian float64 values.
inline constexpr std::uint32_t kWindowCacheVersion = 1;

std::vector<std::byte> write_window_cache(std::span<const Window> windows);
std::vector<Window> read_window_cache(std::span<const std::byte> bytes);
void save_window_cache(const std::filesystem::path& path, std::span<const Window> windows);
std::vector<Window> load_window_cache(const std::filesystem::path& path);

// Debug CSV: window;row;x;y;z;label;subject;provenance
std::string write_windows_csv(std::span<const Window> windows);

}  // namespace fallsynth
