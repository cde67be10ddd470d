#include <set>

#include "doctest.h"
#include "fallsynth/error.hpp"
#include "fallsynth/harness.hpp"
#include "support.hpp"

using namespace fallsynth;
using namespace testing_support;

namespace fs = std::filesystem;

namespace {

// A fixture small enough to train in well under a second per run.
ExperimentConfig quick_config(const std::string& name) {
  const auto paths = generate_fixture(scratch_dir(name));
  ExperimentConfig c = load_config(paths.config);
  c.iterations = 2;
  c.model = ModelShape{3, 8, 8};
  c.train.max_epochs = 3;
  c.train.patience = 3;
  c.train.batch_size = 16;
  c.metrics.bins = 20;
  return c;
}

}  // namespace

TEST_CASE("config JSON") {
  const auto paths = generate_fixture(scratch_dir("config"));
  const auto c = load_config(paths.config);
  CHECK(c.manifest == paths.manifest);
  CHECK(c.synthetic_manifests == paths.synthetic_manifests);
  CHECK(c.seed == 7);
  CHECK(c.iterations == 5);
  CHECK_NOTHROW(c.validate());

  SUBCASE("round trip") {
    const auto again = config_from_json(config_to_json(c), "/");
    CHECK(again == c);
    CHECK(config_to_json(again) == config_to_json(c));
  }
  SUBCASE("unknown fields and wrong types are rejected") {
    CHECK_THROWS_AS(config_from_json(R"({"manifest": "a.json", "sed": 1})", "/"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"train": {"epochs": 3}})", "/"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"iterations": "five"})", "/"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"metrics": {"normalization": "zscore"}})", "/"), ConfigError);
    CHECK_THROWS_AS(config_from_json("[", "/"), ConfigError);
    CHECK_THROWS_AS(load_config(paths.config.parent_path() / "none.json"), ConfigError);
  }
  SUBCASE("relative paths resolve against the config directory") {
    const auto d = config_from_json(R"({"manifest": "real.json"})", paths.config.parent_path());
    CHECK(d.manifest == paths.manifest);
  }
  SUBCASE("validation") {
    auto bad = c;
    bad.iterations = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.mix = MixSpec{0.5, 0.5, 0.5};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.manifest = c.manifest.parent_path() / "missing.json";
    CHECK_THROWS_AS(bad.validate(), DataError);
  }
}

TEST_CASE("fingerprint changes with every field") {
  const auto paths = generate_fixture(scratch_dir("fingerprint"));
  const auto c = load_config(paths.config);
  const auto fp = config_fingerprint(c);
  CHECK(fp.size() == 16);
  CHECK(config_fingerprint(c) == fp);

  std::vector<ExperimentConfig> variants(16, c);
  variants[0].seed += 1;
  variants[1].iterations += 1;
  variants[2].window.stride += 1;
  variants[3].window.length += 1;
  variants[4].mix = kQuantityAblationMix;
  variants[5].split = SplitSizes{7, 3, 2};
  variants[6].baseline = false;
  variants[7].baseline_seed = 3;
  variants[8].train.learning_rate = 2e-3;
  variants[9].train.max_epochs = 100;
  variants[10].train.batch_size = 32;
  variants[11].model.hidden = 64;
  variants[12].metrics.k = 3;
  variants[13].metrics.normalization = Normalization::PerAxis;
  variants[14].synthetic_manifests.pop_back();
  variants[15].alignment = false;
  std::set<std::string> seen{fp};
  for (const auto& v : variants) CHECK(seen.insert(config_fingerprint(v)).second);
}

TEST_CASE("alignment of manifests") {
  const auto paths = generate_fixture(scratch_dir("align"));
  SUBCASE("a manifest against itself") {
    const std::vector<fs::path> self{paths.manifest};
    const auto r = run_alignment(paths.manifest, self, {}, {});
    CHECK(r.real_windows == r.synthetic_windows);
    for (const auto& ks : r.ks) {
      CHECK(ks.statistic == 0.0);
      CHECK(ks.p_value == 1.0);
    }
    CHECK(r.jsd <= 1e-12);
    CHECK(r.coverage == 1.0);
  }
  SUBCASE("fixture synthetic falls") {
    const auto r = run_alignment(paths.manifest, paths.synthetic_manifests, {}, {});
    CHECK(r.real_windows == 12 * 3);
    CHECK(r.synthetic_windows == 3 * 4 * 3);
    CHECK((r.jsd >= 0.0 && r.jsd <= std::log(2.0) + 1e-12));
    CHECK((r.coverage >= 0.0 && r.coverage <= 1.0));
    const auto back = alignment_from_json(alignment_to_json(r));
    CHECK(back == r);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(run_alignment(paths.manifest, {}, {}, {}), ConfigError);
  }
}

TEST_CASE("quick experiment") {
  const auto c = quick_config("quick");
  const auto r = run_experiment(c);

  CHECK(r.kind == "experiment");
  CHECK(r.fingerprint == config_fingerprint(c));
  REQUIRE(r.augmented.iterations.size() == 2);
  REQUIRE(r.baseline.has_value());
  REQUIRE(r.alignment.has_value());

  double f1 = 0.0;
  for (const auto& it : r.augmented.iterations) {
    f1 += it.metrics.f1;
    CHECK(it.counts.synthetic_fall > 0);
    CHECK(it.split.train.size() == 8);
    CHECK(it.epochs == 3);
  }
  CHECK(r.augmented.mean_f1 == doctest::Approx(f1 / 2).epsilon(1e-15));

  // Paired: the baseline reuses each iteration's seed and subject split.
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& a = r.augmented.iterations[i];
    const auto& b = r.baseline->iterations[i];
    CHECK(a.seed == b.seed);
    CHECK(a.split == b.split);
    CHECK(b.counts.synthetic_fall == 0);
  }
  CHECK(r.augmented.iterations[0].seed != r.augmented.iterations[1].seed);
  if (r.baseline->mean_f1 > 0.0) {
    REQUIRE(r.percent_delta.has_value());
    CHECK(*r.percent_delta == doctest::Approx(percent_delta(r.baseline->mean_f1, r.augmented.mean_f1)));
  }

  SUBCASE("deterministic") { CHECK(run_experiment(c) == r); }
  SUBCASE("report JSON round trip") {
    const auto text = report_to_json(r);
    CHECK(report_from_json(text) == r);
    CHECK(report_to_json(report_from_json(text)) == text);
    CHECK_THROWS_AS(report_from_json("{}"), FormatError);
  }
  SUBCASE("report CSV") {
    const auto csv = report_to_csv(r);
    CHECK(csv.rfind("condition;iteration;seed;", 0) == 0);
    CHECK(csv.find("augmented;mean;") != std::string::npos);
    CHECK(csv.find("baseline;1;") != std::string::npos);
  }
  SUBCASE("emitted files") {
    const auto dir = scratch_dir("emit");
    const auto files = emit_report(r, ReportFormat::Json, dir / "reports", dir / "plots");
    REQUIRE(files.size() == 3);
    CHECK(files[0] == dir / "reports" / ("experiment-" + r.fingerprint + ".json"));
    CHECK(files[1] == dir / "plots" / ("density-" + r.fingerprint + "-real.csv"));
    for (const auto& f : files) CHECK(fs::exists(f));
    const auto csv = emit_report(r, parse_report_format("csv"), dir / "reports", dir / "plots");
    CHECK(csv[0].extension() == ".csv");
    CHECK_THROWS_AS(parse_report_format("xml"), ConfigError);
  }
  SUBCASE("unpaired baseline uses its own seed") {
    auto u = c;
    u.baseline_seed = 99;
    u.alignment = false;
    const auto ur = run_experiment(u);
    CHECK(ur.baseline->iterations[0].seed == derive_seed(99, 0));
    CHECK(ur.augmented == r.augmented);
    CHECK_FALSE(ur.alignment.has_value());
  }
}

TEST_CASE("train_iteration matches the experiment's first iteration") {
  auto c = quick_config("single");
  c.baseline = false;
  const auto model = train_iteration(c, 0);
  const auto r = run_experiment(c);
  CHECK(model.result == r.augmented.iterations[0]);
  CHECK(model.history.epochs() == 3);
  CHECK(model.checkpoint.window_length == 128);
  CHECK(model.checkpoint.model.shape == c.model);
}

TEST_CASE("quantity ablation uses its own mix") {
  auto c = quick_config("ablate");
  c.iterations = 1;
  c.baseline = false;
  c.alignment = false;
  const auto r = run_ablation_quantity(c);
  CHECK(r.kind == "ablate-quantity");
  CHECK(r.augmented.mix == kQuantityAblationMix);
  const auto& counts = r.augmented.iterations[0].counts;
  CHECK(counts.synthetic_fall * 10 <= counts.total_budget * 4);
  CHECK(counts.real_fall * 10 <= counts.total_budget);
}

TEST_CASE("experiment errors") {
  SUBCASE("no synthetic pool for a synthetic share") {
    auto c = quick_config("nosynth");
    c.synthetic_manifests.clear();
    CHECK_THROWS_AS(run_experiment(c), InfeasibleMixError);
    c.mix = MixSpec{}.without_synthetic();
    c.iterations = 1;
    c.baseline = false;
    const auto r = run_experiment(c);
    CHECK_FALSE(r.alignment.has_value());
  }
  SUBCASE("subject count must match the split") {
    auto c = quick_config("split");
    c.split = SplitSizes{7, 2, 2};
    CHECK_THROWS_AS(run_experiment(c), DataError);
  }
  SUBCASE("aggregate of nothing") {
    ConditionReport empty;
    CHECK_THROWS_AS(aggregate(empty), EmptyInputError);
  }
}
