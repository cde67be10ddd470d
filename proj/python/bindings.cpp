#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fallsynth/error.hpp"
#include "fallsynth/harness.hpp"
#include "fallsynth/ingest.hpp"
#include "fallsynth/kinematics.hpp"
#include "fallsynth/metrics.hpp"
#include "fallsynth/windowing.hpp"

namespace py = pybind11;
using namespace fallsynth;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> flat(const Array& a) { return {a.data(), a.data() + a.size()}; }

Array samples_array(const AccelSeries& s) {
  Array out({s.size(), std::size_t{3}});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t k = 0; k < 3; ++k) v(i, k) = s.samples[i][k];
  }
  return out;
}

AccelSeries series_from(const Array& a) {
  if (a.ndim() != 2 || a.shape(1) != 3) throw ShapeError("expected an (N, 3) array");
  AccelSeries s;
  s.samples.resize(static_cast<std::size_t>(a.shape(0)));
  auto v = a.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    s.samples[i] = {v(i, 0), v(i, 1), v(i, 2)};
  }
  return s;
}

}  // namespace

PYBIND11_MODULE(_fallsynth, m) {
  m.doc() = "Synthetic accelerometer evaluation toolkit";

  static py::exception<Error> base(m, "Error");
  static py::exception<ConfigError> config_error(m, "ConfigError", base.ptr());
  static py::exception<DataError> data_error(m, "DataError", base.ptr());
  static py::exception<NumericError> numeric_error(m, "NumericError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::set_error(config_error, e.what());
    } catch (const DataError& e) {
      py::set_error(data_error, e.what());
    } catch (const NumericError& e) {
      py::set_error(numeric_error, e.what());
    }
  });

  m.def("joint_index_for", [](const std::string& placement) {
    return joint_index_for(parse_placement(placement));
  });

  m.def(
      "joint_to_accel",
      [](const Array& positions, const std::string& placement, double frame_rate,
         bool central_second_difference) {
        if (positions.ndim() != 3 || positions.shape(1) != kSmplJoints || positions.shape(2) != 3) {
          throw ShapeError("expected an (F, 22, 3) array");
        }
        JointTrajectory traj(static_cast<std::size_t>(positions.shape(0)), flat(positions),
                             frame_rate);
        return samples_array(differentiate_to_accel(
            extract_joint(traj, parse_placement(placement)),
            DifferentiationOptions{central_second_difference}));
      },
      py::arg("positions"), py::arg("placement") = "left_wrist",
      py::arg("frame_rate") = kDefaultFrameRate, py::arg("central_second_difference") = false);

  m.def("read_accel_csv", [](const std::string& text) { return samples_array(read_accel_csv(text)); });
  m.def("write_accel_csv", [](const Array& samples) { return write_accel_csv(series_from(samples)); });

  m.def(
      "slide_windows",
      [](const Array& samples, std::size_t length, std::size_t stride) {
        const auto windows = slide_windows(series_from(samples), length, stride);
        Array out({windows.size(), length, std::size_t{3}});
        double* dst = out.mutable_data();
        for (const auto& w : windows) dst = std::copy(w.values.begin(), w.values.end(), dst);
        return out;
      },
      py::arg("samples"), py::arg("length") = kDefaultWindowLength,
      py::arg("stride") = kDefaultStride);

  m.def(
      "plan_mix",
      [](std::size_t adl, std::size_t real_fall, std::size_t synthetic_fall,
         std::array<double, 3> fractions) {
        const auto c = plan_mix(adl, real_fall, synthetic_fall,
                                MixSpec{fractions[0], fractions[1], fractions[2]});
        return py::dict(py::arg("total_budget") = c.total_budget, py::arg("adl") = c.adl,
                        py::arg("real_fall") = c.real_fall,
                        py::arg("synthetic_fall") = c.synthetic_fall);
      },
      py::arg("adl"), py::arg("real_fall"), py::arg("synthetic_fall"),
      py::arg("fractions") = std::array<double, 3>{0.6, 0.2, 0.2});

  m.def(
      "ks_two_sample",
      [](std::vector<double> a, std::vector<double> b, bool exact) {
        const auto r = ks_two_sample(a, b, exact ? KsMode::Exact : KsMode::Asymptotic);
        return py::make_tuple(r.statistic, r.p_value);
      },
      py::arg("a"), py::arg("b"), py::arg("exact") = false);

  m.def("jsd", [](std::vector<double> p, std::vector<double> q) { return jsd_masses(p, q); });

  m.def(
      "coverage",
      [](const Array& real, const Array& synthetic, std::size_t k) {
        if (real.ndim() != 2 || synthetic.ndim() != 2 || real.shape(1) != synthetic.shape(1)) {
          throw ShapeError("expected (n, d) and (m, d) arrays");
        }
        return coverage(flat(real), flat(synthetic), static_cast<std::size_t>(real.shape(1)), k);
      },
      py::arg("real"), py::arg("synthetic"), py::arg("k") = kDefaultCoverageK);

  m.def("percent_delta", &percent_delta);
  m.def("format_percent_delta", &format_percent_delta);

  m.def(
      "generate_prompts",
      [](std::optional<std::vector<std::string>> tags) {
        const auto catalog = PromptCatalog::bundled();
        if (!tags) return generate_prompt_variants(catalog, kDefaultVariantTags);
        return generate_prompt_variants(catalog, *tags);
      },
      py::arg("tags") = py::none());

  m.def(
      "generate_fixture",
      [](const std::string& dir, std::size_t subjects, std::uint64_t seed) {
        FixtureOptions o;
        o.subjects = subjects;
        o.seed = seed;
        return generate_fixture(dir, o).config.string();
      },
      py::arg("dir"), py::arg("subjects") = 12, py::arg("seed") = 7);

  m.def(
      "run_experiment",
      [](const std::string& config_path, std::uint64_t seed, std::optional<std::size_t> iterations,
         std::optional<std::size_t> max_epochs, bool baseline) {
        auto c = load_config(config_path);
        c.seed = seed;
        if (iterations) c.iterations = *iterations;
        if (max_epochs) {
          c.train.max_epochs = *max_epochs;
          c.train.patience = std::min(c.train.patience, *max_epochs);
        }
        c.baseline = baseline;
        py::gil_scoped_release release;
        return report_to_json(run_experiment(c));
      },
      py::arg("config"), py::arg("seed"), py::arg("iterations") = py::none(),
      py::arg("max_epochs") = py::none(), py::arg("baseline") = true);
}
