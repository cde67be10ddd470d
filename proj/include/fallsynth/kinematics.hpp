#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "fallsynth/types.hpp"

namespace fallsynth {

inline constexpr std::size_t kSmplJoints = 22;

enum class SensorPlacement { LeftWrist, RightWrist, WaistPelvis, LeftFoot, RightHip };

inline constexpr std::array<SensorPlacement, 5> kAllPlacements = {
    SensorPlacement::LeftWrist, SensorPlacement::RightWrist, SensorPlacement::WaistPelvis,
    SensorPlacement::LeftFoot, SensorPlacement::RightHip};

// SMPL joint index of a sensor placement.
constexpr std::size_t joint_index_for(SensorPlacement placement) noexcept {
  switch (placement) {
    case SensorPlacement::LeftWrist: return 20;
    case SensorPlacement::RightWrist: return 21;
    case SensorPlacement::WaistPelvis: return 0;
    case SensorPlacement::LeftFoot: return 10;
    case SensorPlacement::RightHip: return 2;
  }
  return 0;
}

// Names used in manifests and on the command line: left_wrist, right_wrist,
// waist, left_foot, right_hip.
std::string_view to_string(SensorPlacement placement);
SensorPlacement parse_placement(std::string_view text);

// F frames x 22 joints x 3 coordinates (meters), C-order, at a fixed rate.
class JointTrajectory {
 public:
  // Throws ShapeError unless positions.size() == frames * 22 * 3 and frames >= 2;
  // throws DataError on non-finite entries or frame_rate <= 0.
  JointTrajectory(std::size_t frames, std::vector<double> positions,
                  double frame_rate = kDefaultFrameRate);

  std::size_t frames() const noexcept { return frames_; }
  double frame_rate() const noexcept { return frame_rate_; }
  std::span<const double> positions() const noexcept { return positions_; }

  const double* at(std::size_t frame, std::size_t joint) const noexcept {
    return positions_.data() + (frame * kSmplJoints + joint) * 3;
  }

 private:
  std::size_t frames_;
  std::vector<double> positions_;
  double frame_rate_;
};

struct PositionSeries {
  std::vector<Sample> samples;  // meters
  double dt = 1.0 / kDefaultFrameRate;  // seconds per frame
};

PositionSeries extract_joint(const JointTrajectory& trajectory, SensorPlacement placement);

struct DifferentiationOptions {
  // false: a(f) = (p(f+1) - p(f)) / dt^2, N = F - 1 (the default).
  // true:  a(f) = (p(f+1) - 2 p(f) + p(f-1)) / dt^2, N = F - 2.
  bool central_second_difference = false;
};

// Synthetic accelerometer series from a joint position series. The result is
// labelled Fall / Synthetic; callers overwrite metadata as needed.
AccelSeries differentiate_to_accel(const PositionSeries& positions,
                                   const DifferentiationOptions& options = {});

}  // namespace fallsynth
