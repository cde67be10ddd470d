#include "fallsynth/types.hpp"

#include <cmath>
#include <string>

#include "fallsynth/error.hpp"

namespace fallsynth {

void AccelSeries::validate() const {
  if (!(sampling_rate > 0.0) || !std::isfinite(sampling_rate)) {
    throw DataError("sampling rate must be positive, got " + std::to_string(sampling_rate));
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (double v : samples[i]) {
      if (!std::isfinite(v)) {
        throw DataError("non-finite accelerometer value at sample " + std::to_string(i));
      }
    }
  }
}

std::string_view to_string(Label label) { return label == Label::Fall ? "fall" : "adl"; }

std::string_view to_string(Provenance provenance) {
  return provenance == Provenance::Synthetic ? "synthetic" : "real";
}

Label parse_label(std::string_view text) {
  if (text == "fall") return Label::Fall;
  if (text == "adl") return Label::Adl;
  throw DataError("unknown activity '" + std::string(text) + "', expected adl or fall");
}

Provenance parse_provenance(std::string_view text) {
  if (text == "real") return Provenance::Real;
  if (text == "synthetic") return Provenance::Synthetic;
  throw DataError("unknown provenance '" + std::string(text) + "', expected real or synthetic");
}

}  // namespace fallsynth
