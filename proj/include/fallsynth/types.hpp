#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fallsynth {

enum class Label : std::uint8_t { Adl = 0, Fall = 1 };

enum class Provenance : std::uint8_t { Real = 0, Synthetic = 1 };

// One triaxial accelerometer reading (x, y, z) in m/s^2.
using Sample = std::array<double, 3>;

inline constexpr std::size_t kAxes = 3;

// Default frame/sampling rate for generated motion when a file declares none.
inline constexpr double kDefaultFrameRate = 46.0;

struct AccelSeries {
  std::vector<Sample> samples;
  double sampling_rate = kDefaultFrameRate;
  Label label = Label::Fall;
  Provenance provenance = Provenance::Real;
  std::optional<std::string> subject_id;
  // Free-form origin tag ("T2M", "ParCo", a dataset name); used when several
  // synthetic sources are pooled.
  std::string source;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }

  // Throws DataError if a sample is non-finite or the rate is not positive.
  void validate() const;
};

std::string_view to_string(Label label);
std::string_view to_string(Provenance provenance);
Label parse_label(std::string_view text);
Provenance parse_provenance(std::string_view text);

}  // namespace fallsynth
