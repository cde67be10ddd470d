#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fallsynth/error.hpp"
#include "fallsynth/harness.hpp"
#include "fallsynth/ingest.hpp"
#include "fallsynth/kinematics.hpp"
#include "fallsynth/rng.hpp"
#include "json.hpp"

namespace fallsynth {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr double kGravity = 9.81;

AccelSeries make_series(Rng& rng, std::size_t length, bool fall, double separation,
                        double noise) {
  AccelSeries s;
  s.samples.resize(length);
  const double phase = rng.uniform(0.0, 6.283185307179586);
  const double offset = fall ? separation : 0.0;
  for (std::size_t t = 0; t < length; ++t) {
    const double wave = 0.5 * std::sin(phase + 0.2 * static_cast<double>(t));
    s.samples[t] = {offset + wave + noise * rng.normal(),
                    offset + wave + noise * rng.normal(),
                    kGravity + offset + noise * rng.normal()};
  }
  s.sampling_rate = kDefaultFrameRate;
  s.label = fall ? Label::Fall : Label::Adl;
  return s;
}

json entry(const std::string& subject, Label label, const std::string& path, Provenance prov,
           const std::string& source) {
  json e = {{"subject", subject},
            {"activity", std::string(to_string(label))},
            {"path", path},
            {"rate_hz", kDefaultFrameRate},
            {"placement", "waist"},
            {"provenance", std::string(to_string(prov))}};
  if (!source.empty()) e["source"] = source;
  return e;
}

}  // namespace

FixturePaths generate_fixture(const fs::path& dir, const FixtureOptions& o) {
  if (o.subjects == 0 || o.series_length == 0) throw ConfigError("fixture: empty fixture requested");
  Rng rng(o.seed);
  FixturePaths paths;
  char name[64];

  json real = json::array();
  for (std::size_t s = 0; s < o.subjects; ++s) {
    std::snprintf(name, sizeof name, "S%02zu", s + 1);
    const std::string subject = name;
    for (int fall = 0; fall < 2; ++fall) {
      const std::size_t count = fall ? o.fall_series : o.adl_series;
      for (std::size_t k = 0; k < count; ++k) {
        const std::string rel =
            "real/" + subject + (fall ? "_fall_" : "_adl_") + std::to_string(k) + ".csv";
        save_accel_csv(dir / rel, make_series(rng, o.series_length, fall != 0, o.separation, 1.0));
        real.push_back(entry(subject, fall ? Label::Fall : Label::Adl, rel, Provenance::Real, ""));
      }
    }
  }
  paths.manifest = dir / "real.json";
  write_text_file(paths.manifest, real.dump(2) + "\n");

  json synthetic_names = json::array();
  for (std::size_t g = 0; g < o.synthetic_sources; ++g) {
    const std::string source = std::string("gen_") + static_cast<char>('a' + g % 26) +
                               (g >= 26 ? std::to_string(g / 26) : "");
    json manifest = json::array();
    const double noise = 1.0 + 0.1 * static_cast<double>(g);
    for (std::size_t k = 0; k < o.synthetic_series; ++k) {
      const std::string rel = "synthetic/" + source + "_" + std::to_string(k) + ".csv";
      save_accel_csv(dir / rel, make_series(rng, o.series_length, true, o.separation, noise));
      manifest.push_back(entry(source, Label::Fall, rel, Provenance::Synthetic, source));
    }
    const fs::path p = dir / (source + ".json");
    write_text_file(p, manifest.dump(2) + "\n");
    paths.synthetic_manifests.push_back(p);
    synthetic_names.push_back(source + ".json");
  }

  const std::size_t holdout = o.subjects >= 3 ? std::max<std::size_t>(1, o.subjects / 6) : 0;
  json config = {{"manifest", "real.json"},
                 {"synthetic_manifests", synthetic_names},
                 {"seed", o.seed}};
  if (holdout > 0 && o.subjects != 12) {
    config["split"] = {{"train", o.subjects - 2 * holdout},
                       {"validation", holdout},
                       {"test", holdout}};
  }
  paths.config = dir / "config.json";
  write_text_file(paths.config, config.dump(2) + "\n");

  // Joints swinging on small circles; the first frame is a rest pose.
  const std::size_t frames = 60;
  std::vector<double> pos(frames * kSmplJoints * 3);
  for (std::size_t f = 0; f < frames; ++f) {
    const double t = static_cast<double>(f) / kDefaultFrameRate;
    for (std::size_t j = 0; j < kSmplJoints; ++j) {
      const double r = 0.05 * static_cast<double>(j % 5 + 1);
      double* p = &pos[(f * kSmplJoints + j) * 3];
      p[0] = r * std::cos(2.0 * t + static_cast<double>(j));
      p[1] = 0.08 * static_cast<double>(j);
      p[2] = r * std::sin(2.0 * t + static_cast<double>(j));
    }
  }
  const auto bytes = write_motion_array(JointTrajectory(frames, std::move(pos)));
  paths.motion = dir / "motion" / "sway.npy";
  write_text_file(paths.motion, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  return paths;
}

}  // namespace fallsynth
