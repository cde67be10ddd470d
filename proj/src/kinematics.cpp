#include "fallsynth/kinematics.hpp"

#include <cmath>
#include <string>

#include "fallsynth/error.hpp"

namespace fallsynth {

std::string_view to_string(SensorPlacement placement) {
  switch (placement) {
    case SensorPlacement::LeftWrist: return "left_wrist";
    case SensorPlacement::RightWrist: return "right_wrist";
    case SensorPlacement::WaistPelvis: return "waist";
    case SensorPlacement::LeftFoot: return "left_foot";
    case SensorPlacement::RightHip: return "right_hip";
  }
  return "unknown";
}

SensorPlacement parse_placement(std::string_view text) {
  for (SensorPlacement p : kAllPlacements) {
    if (to_string(p) == text) return p;
  }
  if (text == "pelvis" || text == "waist_pelvis") return SensorPlacement::WaistPelvis;
  throw ConfigError("unknown sensor placement '" + std::string(text) + "'");
}

JointTrajectory::JointTrajectory(std::size_t frames, std::vector<double> positions,
                                 double frame_rate)
    : frames_(frames), positions_(std::move(positions)), frame_rate_(frame_rate) {
  if (frames_ < 2) {
    throw ShapeError("trajectory needs at least 2 frames, got " + std::to_string(frames_));
  }
  if (positions_.size() != frames_ * kSmplJoints * 3) {
    throw ShapeError("trajectory expects " + std::to_string(frames_ * kSmplJoints * 3) +
                     " values for " + std::to_string(frames_) + " frames, got " +
                     std::to_string(positions_.size()));
  }
  if (!(frame_rate_ > 0.0) || !std::isfinite(frame_rate_)) {
    throw DataError("frame rate must be positive");
  }
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    if (!std::isfinite(positions_[i])) {
      throw DataError("non-finite joint position at frame " + std::to_string(i / 66));
    }
  }
}

PositionSeries extract_joint(const JointTrajectory& trajectory, SensorPlacement placement) {
  const std::size_t joint = joint_index_for(placement);
  PositionSeries out;
  out.dt = 1.0 / trajectory.frame_rate();
  out.samples.reserve(trajectory.frames());
  for (std::size_t f = 0; f < trajectory.frames(); ++f) {
    const double* p = trajectory.at(f, joint);
    out.samples.push_back({p[0], p[1], p[2]});
  }
  return out;
}

AccelSeries differentiate_to_accel(const PositionSeries& positions,
                                   const DifferentiationOptions& options) {
  const auto& p = positions.samples;
  const std::size_t needed = options.central_second_difference ? 3 : 2;
  if (p.size() < needed) {
    throw DataError("insufficient frames: need at least " + std::to_string(needed) + ", got " +
                    std::to_string(p.size()));
  }
  if (!(positions.dt > 0.0) || !std::isfinite(positions.dt)) {
    throw DataError("frame interval must be positive");
  }

  const double dt2 = positions.dt * positions.dt;
  AccelSeries out;
  out.sampling_rate = 1.0 / positions.dt;
  out.label = Label::Fall;
  out.provenance = Provenance::Synthetic;

  if (options.central_second_difference) {
    out.samples.reserve(p.size() - 2);
    for (std::size_t f = 1; f + 1 < p.size(); ++f) {
      Sample a;
      for (std::size_t k = 0; k < kAxes; ++k) {
        a[k] = (p[f + 1][k] - 2.0 * p[f][k] + p[f - 1][k]) / dt2;
      }
      out.samples.push_back(a);
    }
  } else {
    out.samples.reserve(p.size() - 1);
    for (std::size_t f = 0; f + 1 < p.size(); ++f) {
      Sample a;
      for (std::size_t k = 0; k < kAxes; ++k) a[k] = (p[f + 1][k] - p[f][k]) / dt2;
      out.samples.push_back(a);
    }
  }
  return out;
}

}  // namespace fallsynth
