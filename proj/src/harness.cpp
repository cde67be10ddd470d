#include "fallsynth/harness.hpp"

#include <cstdio>
#include <map>
#include <set>

#include "fallsynth/error.hpp"
#include "fallsynth/rng.hpp"
#include "json.hpp"

namespace fallsynth {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string_view to_string(Normalization n) {
  return n == Normalization::Pooled ? "pooled" : "per_axis";
}

Normalization parse_normalization(std::string_view text) {
  if (text == "pooled") return Normalization::Pooled;
  if (text == "per_axis") return Normalization::PerAxis;
  throw ConfigError("unknown normalization '" + std::string(text) + "' (pooled, per_axis)");
}

StopReason parse_stop_reason(std::string_view text) {
  if (text == "early_stop") return StopReason::EarlyStop;
  if (text == "max_epochs") return StopReason::MaxEpochs;
  throw FormatError("unknown stop reason '" + std::string(text) + "'");
}

std::string resolved(const fs::path& p, const fs::path& base) {
  if (p.empty()) return {};
  return fs::weakly_canonical(p.is_absolute() ? p : base / p).generic_string();
}

// Reads obj[key] into out when present; rejects wrong types as config errors.
template <typename T>
void read_field(const json& obj, const char* key, T& out, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->template get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + "." + key + " has the wrong type");
  }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                    std::string_view where) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("unknown config field " + std::string(where) + "." + key);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

void ExperimentConfig::validate() const {
  if (manifest.empty()) throw ConfigError("config: manifest is required");
  if (iterations == 0) throw ConfigError("config: iterations must be >= 1");
  if (window.length == 0 || window.stride == 0) {
    throw ConfigError("config: window length and stride must be >= 1");
  }
  if (split.train == 0 || split.validation == 0 || split.test == 0) {
    throw ConfigError("config: every split part needs at least one subject");
  }
  if (model.input != kAxes) throw ConfigError("config: model input must be 3 axes");
  if (metrics.bins == 0 || metrics.k == 0) throw ConfigError("config: bins and k must be >= 1");
  if (!(train.threshold > 0.0 && train.threshold < 1.0)) {
    throw ConfigError("config: threshold must be in (0, 1)");
  }
  mix.validate();
  train.validate();
  if (!fs::exists(manifest)) throw DataError("manifest not found: " + manifest.string());
  for (const auto& m : synthetic_manifests) {
    if (!fs::exists(m)) throw DataError("synthetic manifest not found: " + m.string());
  }
}

namespace {

json config_json(const ExperimentConfig& c) {
  json synth = json::array();
  for (const auto& m : c.synthetic_manifests) synth.push_back(resolved(m, fs::current_path()));
  return json{
      {"manifest", resolved(c.manifest, fs::current_path())},
      {"synthetic_manifests", synth},
      {"window", {{"length", c.window.length}, {"stride", c.window.stride}}},
      {"mix",
       {{"adl", c.mix.adl}, {"real_fall", c.mix.real_fall}, {"synthetic_fall", c.mix.synthetic_fall}}},
      {"split",
       {{"train", c.split.train}, {"validation", c.split.validation}, {"test", c.split.test}}},
      {"iterations", c.iterations},
      {"seed", c.seed},
      {"baseline", c.baseline},
      {"baseline_seed", c.baseline_seed ? json(*c.baseline_seed) : json(nullptr)},
      {"train",
       {{"learning_rate", c.train.learning_rate},
        {"max_epochs", c.train.max_epochs},
        {"patience", c.train.patience},
        {"batch_size", c.train.batch_size},
        {"shuffle", c.train.shuffle},
        {"threshold", c.train.threshold}}},
      {"model", {{"hidden", c.model.hidden}, {"dense", c.model.dense}}},
      {"metrics",
       {{"bins", c.metrics.bins},
        {"k", c.metrics.k},
        {"normalization", to_string(c.metrics.normalization)},
        {"threads", c.metrics.threads}}},
      {"alignment", c.alignment},
  };
}

}  // namespace

std::string config_to_json(const ExperimentConfig& config) { return config_json(config).dump(2); }

ExperimentConfig config_from_json(std::string_view text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(doc,
                 {"manifest", "synthetic_manifests", "window", "mix", "split", "iterations", "seed",
                  "baseline", "baseline_seed", "train", "model", "metrics", "alignment"},
                 "config");

  ExperimentConfig c;
  std::string manifest;
  read_field(doc, "manifest", manifest, "config");
  if (!manifest.empty()) c.manifest = resolved(manifest, base_dir);
  std::vector<std::string> synth;
  read_field(doc, "synthetic_manifests", synth, "config");
  for (const auto& s : synth) c.synthetic_manifests.emplace_back(resolved(s, base_dir));

  if (doc.contains("window")) {
    const json& w = doc["window"];
    reject_unknown(w, {"length", "stride"}, "window");
    read_field(w, "length", c.window.length, "window");
    read_field(w, "stride", c.window.stride, "window");
  }
  if (doc.contains("mix")) {
    const json& m = doc["mix"];
    reject_unknown(m, {"adl", "real_fall", "synthetic_fall"}, "mix");
    read_field(m, "adl", c.mix.adl, "mix");
    read_field(m, "real_fall", c.mix.real_fall, "mix");
    read_field(m, "synthetic_fall", c.mix.synthetic_fall, "mix");
  }
  if (doc.contains("split")) {
    const json& s = doc["split"];
    reject_unknown(s, {"train", "validation", "test"}, "split");
    read_field(s, "train", c.split.train, "split");
    read_field(s, "validation", c.split.validation, "split");
    read_field(s, "test", c.split.test, "split");
  }
  read_field(doc, "iterations", c.iterations, "config");
  read_field(doc, "seed", c.seed, "config");
  read_field(doc, "baseline", c.baseline, "config");
  if (doc.contains("baseline_seed") && !doc["baseline_seed"].is_null()) {
    std::uint64_t s = 0;
    read_field(doc, "baseline_seed", s, "config");
    c.baseline_seed = s;
  }
  if (doc.contains("train")) {
    const json& t = doc["train"];
    reject_unknown(t,
                   {"learning_rate", "max_epochs", "patience", "batch_size", "shuffle", "threshold"},
                   "train");
    read_field(t, "learning_rate", c.train.learning_rate, "train");
    read_field(t, "max_epochs", c.train.max_epochs, "train");
    read_field(t, "patience", c.train.patience, "train");
    read_field(t, "batch_size", c.train.batch_size, "train");
    read_field(t, "shuffle", c.train.shuffle, "train");
    read_field(t, "threshold", c.train.threshold, "train");
  }
  if (doc.contains("model")) {
    const json& m = doc["model"];
    reject_unknown(m, {"hidden", "dense"}, "model");
    read_field(m, "hidden", c.model.hidden, "model");
    read_field(m, "dense", c.model.dense, "model");
  }
  if (doc.contains("metrics")) {
    const json& m = doc["metrics"];
    reject_unknown(m, {"bins", "k", "normalization", "threads"}, "metrics");
    read_field(m, "bins", c.metrics.bins, "metrics");
    read_field(m, "k", c.metrics.k, "metrics");
    std::string norm = std::string(to_string(c.metrics.normalization));
    read_field(m, "normalization", norm, "metrics");
    c.metrics.normalization = parse_normalization(norm);
    read_field(m, "threads", c.metrics.threads, "metrics");
  }
  read_field(doc, "alignment", c.alignment, "config");
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const DataError&) {
    throw ConfigError("cannot read config " + path.string());
  }
  return config_from_json(text, path.parent_path());
}

std::string config_fingerprint(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config_to_json(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Experiments

void aggregate(ConditionReport& c) {
  if (c.iterations.empty()) throw EmptyInputError("no iterations to aggregate");
  double p = 0.0, r = 0.0, f = 0.0;
  for (const auto& it : c.iterations) {
    p += it.metrics.precision;
    r += it.metrics.recall;
    f += it.metrics.f1;
  }
  const double n = static_cast<double>(c.iterations.size());
  c.mean_precision = p / n;
  c.mean_recall = r / n;
  c.mean_f1 = f / n;
}

namespace {

struct SubjectWindows {
  std::vector<Window> adl;
  std::vector<Window> fall;
};

// Real windows grouped by subject, plus the pooled synthetic fall windows.
struct WindowPools {
  std::map<std::string, SubjectWindows> subjects;
  std::vector<Window> synthetic;
};

std::vector<Window> real_windows(const DatasetCatalog& catalog, const WindowOptions& w) {
  std::vector<AccelSeries> series;
  series.reserve(catalog.size());
  for (const auto& e : catalog.entries()) series.push_back(load_series(e));
  return build_windows(series, w.length, w.stride).windows;
}

std::vector<Window> synthetic_falls(std::span<const fs::path> manifests, const WindowOptions& w) {
  std::vector<AccelSeries> series;
  for (const auto& path : manifests) {
    const auto catalog = load_catalog(path);
    for (const auto& e : catalog.entries()) {
      if (e.activity != Label::Fall) continue;
      AccelSeries s = load_series(e);
      s.provenance = Provenance::Synthetic;
      if (s.source.empty()) s.source = path.stem().string();
      series.push_back(std::move(s));
    }
  }
  return build_windows(series, w.length, w.stride).windows;
}

WindowPools load_pools(const ExperimentConfig& config) {
  WindowPools pools;
  const auto catalog = load_catalog(config.manifest);
  for (const auto& s : catalog.subjects()) pools.subjects[s];
  for (auto& w : real_windows(catalog, config.window)) {
    auto& sw = pools.subjects[w.subject_id];
    (w.label == Label::Fall ? sw.fall : sw.adl).push_back(std::move(w));
  }
  pools.synthetic = synthetic_falls(config.synthetic_manifests, config.window);
  return pools;
}

std::vector<Window> gather(const WindowPools& pools, std::span<const std::string> subjects) {
  std::vector<Window> out;
  for (const auto& s : subjects) {
    const auto& sw = pools.subjects.at(s);
    out.insert(out.end(), sw.adl.begin(), sw.adl.end());
    out.insert(out.end(), sw.fall.begin(), sw.fall.end());
  }
  return out;
}

IterationResult run_iteration(const ExperimentConfig& config, const WindowPools& pools,
                              std::span<const std::string> subjects, const MixSpec& mix,
                              std::size_t index, std::uint64_t seed,
                              TrainedModel* keep = nullptr) {
  IterationResult r;
  r.iteration = index;
  r.seed = seed;
  r.split = split_subjects(subjects, config.split, stream_seed(seed, Stream::Split));

  std::vector<Window> adl, real_fall;
  for (const auto& s : r.split.train) {
    const auto& sw = pools.subjects.at(s);
    adl.insert(adl.end(), sw.adl.begin(), sw.adl.end());
    real_fall.insert(real_fall.end(), sw.fall.begin(), sw.fall.end());
  }
  r.counts = plan_mix(adl.size(), real_fall.size(), pools.synthetic.size(), mix);
  const auto train_raw =
      compose_training_mix(adl, real_fall, pools.synthetic, mix, stream_seed(seed, Stream::Mix));
  if (train_raw.empty()) throw EmptyInputError("iteration " + std::to_string(index) + ": empty training mix");
  const auto val_raw = gather(pools, r.split.validation);
  const auto test_raw = gather(pools, r.split.test);
  if (val_raw.empty() || test_raw.empty()) {
    throw EmptyInputError("iteration " + std::to_string(index) +
                          ": validation or test subjects have no windows");
  }
  r.validation_windows = val_raw.size();
  r.test_windows = test_raw.size();

  const Scaler scaler = fit_scaler(train_raw);
  const auto train_set = apply_scaler(scaler, train_raw);
  const auto val_set = apply_scaler(scaler, val_raw);
  const auto test_set = apply_scaler(scaler, test_raw);

  TrainConfig tc = config.train;
  tc.seed = stream_seed(seed, Stream::Shuffle);
  auto trained = train(init_model<float>(stream_seed(seed, Stream::Init), config.model), train_set,
                       val_set, tc);
  r.metrics = evaluate(trained.model, test_set, config.train.threshold);
  r.epochs = trained.history.epochs();
  r.best_epoch = trained.history.best_epoch;
  r.stop_reason = trained.history.stop_reason;
  if (keep != nullptr) {
    keep->result = r;
    keep->checkpoint = Checkpoint{std::move(trained.model), scaler, config.window.length};
    keep->history = std::move(trained.history);
  }
  return r;
}

ConditionReport run_condition(const ExperimentConfig& config, const WindowPools& pools,
                              std::span<const std::string> subjects, const MixSpec& mix,
                              std::uint64_t master) {
  ConditionReport c;
  c.mix = mix;
  for (std::size_t i = 0; i < config.iterations; ++i) {
    c.iterations.push_back(run_iteration(config, pools, subjects, mix, i, derive_seed(master, i)));
  }
  aggregate(c);
  return c;
}

std::vector<std::string> checked_subjects(const ExperimentConfig& config,
                                          const WindowPools& pools) {
  std::vector<std::string> subjects;
  for (const auto& [s, w] : pools.subjects) subjects.push_back(s);
  if (subjects.size() < config.split.total()) {
    throw DataError("manifest has " + std::to_string(subjects.size()) +
                    " subjects, fewer than the split needs (" +
                    std::to_string(config.split.total()) + ")");
  }
  if (subjects.size() > config.split.total()) {
    throw DataError("manifest has " + std::to_string(subjects.size()) +
                    " subjects but the split sizes add up to " +
                    std::to_string(config.split.total()));
  }
  return subjects;
}

ExperimentReport run(const ExperimentConfig& config, std::string kind) {
  config.validate();
  const WindowPools pools = load_pools(config);
  const auto subjects = checked_subjects(config, pools);

  ExperimentReport report;
  report.kind = std::move(kind);
  report.config_json = config_to_json(config);
  report.fingerprint = config_fingerprint(config);
  report.augmented = run_condition(config, pools, subjects, config.mix, config.seed);
  if (config.baseline) {
    report.baseline = run_condition(config, pools, subjects, config.mix.without_synthetic(),
                                    config.baseline_seed.value_or(config.seed));
    if (report.baseline->mean_f1 > 0.0) {
      report.percent_delta = percent_delta(report.baseline->mean_f1, report.augmented.mean_f1);
    }
  }
  if (config.alignment && !pools.synthetic.empty()) {
    std::vector<Window> real_falls;
    for (const auto& [s, sw] : pools.subjects) {
      real_falls.insert(real_falls.end(), sw.fall.begin(), sw.fall.end());
    }
    if (!real_falls.empty()) report.alignment = align_windows(real_falls, pools.synthetic, config.metrics);
  }
  return report;
}

}  // namespace

AlignmentReport run_alignment(const fs::path& real_manifest,
                              std::span<const fs::path> synthetic_manifests,
                              const WindowOptions& window, const AlignmentOptions& options) {
  if (synthetic_manifests.empty()) throw ConfigError("alignment needs a synthetic manifest");
  const auto catalog = load_catalog(real_manifest);
  std::vector<Window> real_falls;
  for (auto& w : real_windows(catalog, window)) {
    if (w.label == Label::Fall) real_falls.push_back(std::move(w));
  }
  if (real_falls.empty()) throw EmptyInputError("alignment: the real manifest has no fall windows");
  const auto synth = synthetic_falls(synthetic_manifests, window);
  if (synth.empty()) throw EmptyInputError("alignment: the synthetic manifests have no fall windows");
  return align_windows(real_falls, synth, options);
}

TrainedModel train_iteration(const ExperimentConfig& config, std::size_t iteration) {
  config.validate();
  const WindowPools pools = load_pools(config);
  const auto subjects = checked_subjects(config, pools);
  TrainedModel out;
  run_iteration(config, pools, subjects, config.mix, iteration,
                derive_seed(config.seed, iteration), &out);
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& config) { return run(config, "experiment"); }

ExperimentReport run_ablation_quantity(ExperimentConfig config) {
  config.mix = kQuantityAblationMix;
  return run(config, "ablate-quantity");
}

// ---------------------------------------------------------------------------
// Report serialization

namespace {

json to_json(const ClassificationMetrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
          {"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn}};
}

ClassificationMetrics metrics_from(const json& j) {
  ClassificationMetrics m;
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.f1 = j.at("f1").get<double>();
  m.tp = j.at("tp").get<std::size_t>();
  m.fp = j.at("fp").get<std::size_t>();
  m.fn = j.at("fn").get<std::size_t>();
  m.tn = j.at("tn").get<std::size_t>();
  return m;
}

json to_json(const MixSpec& m) {
  return {{"adl", m.adl}, {"real_fall", m.real_fall}, {"synthetic_fall", m.synthetic_fall}};
}

MixSpec mix_from(const json& j) {
  return MixSpec{j.at("adl").get<double>(), j.at("real_fall").get<double>(),
                 j.at("synthetic_fall").get<double>()};
}

json to_json(const IterationResult& r) {
  return {
      {"iteration", r.iteration},
      {"seed", r.seed},
      {"split", {{"train", r.split.train}, {"validation", r.split.validation}, {"test", r.split.test}}},
      {"counts",
       {{"total_budget", r.counts.total_budget},
        {"adl", r.counts.adl},
        {"real_fall", r.counts.real_fall},
        {"synthetic_fall", r.counts.synthetic_fall}}},
      {"validation_windows", r.validation_windows},
      {"test_windows", r.test_windows},
      {"metrics", to_json(r.metrics)},
      {"epochs", r.epochs},
      {"best_epoch", r.best_epoch},
      {"stop_reason", to_string(r.stop_reason)},
  };
}

IterationResult iteration_from(const json& j) {
  IterationResult r;
  r.iteration = j.at("iteration").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  const json& s = j.at("split");
  r.split.train = s.at("train").get<std::vector<std::string>>();
  r.split.validation = s.at("validation").get<std::vector<std::string>>();
  r.split.test = s.at("test").get<std::vector<std::string>>();
  const json& c = j.at("counts");
  r.counts.total_budget = c.at("total_budget").get<std::size_t>();
  r.counts.adl = c.at("adl").get<std::size_t>();
  r.counts.real_fall = c.at("real_fall").get<std::size_t>();
  r.counts.synthetic_fall = c.at("synthetic_fall").get<std::size_t>();
  r.validation_windows = j.at("validation_windows").get<std::size_t>();
  r.test_windows = j.at("test_windows").get<std::size_t>();
  r.metrics = metrics_from(j.at("metrics"));
  r.epochs = j.at("epochs").get<std::size_t>();
  r.best_epoch = j.at("best_epoch").get<std::size_t>();
  r.stop_reason = parse_stop_reason(j.at("stop_reason").get<std::string>());
  return r;
}

json to_json(const ConditionReport& c) {
  json its = json::array();
  for (const auto& it : c.iterations) its.push_back(to_json(it));
  return {{"mix", to_json(c.mix)},
          {"iterations", its},
          {"mean_precision", c.mean_precision},
          {"mean_recall", c.mean_recall},
          {"mean_f1", c.mean_f1}};
}

ConditionReport condition_from(const json& j) {
  ConditionReport c;
  c.mix = mix_from(j.at("mix"));
  for (const auto& it : j.at("iterations")) c.iterations.push_back(iteration_from(it));
  c.mean_precision = j.at("mean_precision").get<double>();
  c.mean_recall = j.at("mean_recall").get<double>();
  c.mean_f1 = j.at("mean_f1").get<double>();
  return c;
}

json to_json(const DensityCurve& d) {
  return {{"lo", d.lo}, {"hi", d.hi}, {"centers", d.centers}, {"densities", d.densities}};
}

DensityCurve density_from(const json& j) {
  DensityCurve d;
  d.lo = j.at("lo").get<double>();
  d.hi = j.at("hi").get<double>();
  d.centers = j.at("centers").get<std::vector<double>>();
  d.densities = j.at("densities").get<std::vector<double>>();
  return d;
}

json to_json(const AlignmentReport& a) {
  json ks = json::array();
  for (const auto& k : a.ks) {
    ks.push_back({{"statistic", k.statistic}, {"p_value", k.p_value}, {"n", k.n}, {"m", k.m}});
  }
  return {{"ks", ks},
          {"ks_mean_p", a.ks_mean_p},
          {"jsd", a.jsd},
          {"coverage", a.coverage},
          {"real_windows", a.real_windows},
          {"synthetic_windows", a.synthetic_windows},
          {"real_density", to_json(a.real_density)},
          {"synthetic_density", to_json(a.synthetic_density)}};
}

AlignmentReport alignment_from(const json& j) {
  AlignmentReport a;
  const json& ks = j.at("ks");
  if (!ks.is_array() || ks.size() != 3) throw FormatError("alignment: ks must list 3 axes");
  for (std::size_t i = 0; i < 3; ++i) {
    a.ks[i].statistic = ks[i].at("statistic").get<double>();
    a.ks[i].p_value = ks[i].at("p_value").get<double>();
    a.ks[i].n = ks[i].at("n").get<std::size_t>();
    a.ks[i].m = ks[i].at("m").get<std::size_t>();
  }
  a.ks_mean_p = j.at("ks_mean_p").get<double>();
  a.jsd = j.at("jsd").get<double>();
  a.coverage = j.at("coverage").get<double>();
  a.real_windows = j.at("real_windows").get<std::size_t>();
  a.synthetic_windows = j.at("synthetic_windows").get<std::size_t>();
  a.real_density = density_from(j.at("real_density"));
  a.synthetic_density = density_from(j.at("synthetic_density"));
  return a;
}

template <typename F>
auto parse_or_format_error(std::string_view text, const char* what, F&& f) {
  try {
    return f(json::parse(text));
  } catch (const json::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string report_to_json(const ExperimentReport& r) {
  json doc = {
      {"kind", r.kind},
      {"fingerprint", r.fingerprint},
      {"config", json::parse(r.config_json)},
      {"augmented", to_json(r.augmented)},
      {"mean_f1", r.augmented.mean_f1},
      {"baseline", r.baseline ? to_json(*r.baseline) : json(nullptr)},
      {"baseline_mean_f1", r.baseline ? json(r.baseline->mean_f1) : json(nullptr)},
      {"percent_delta", r.percent_delta ? json(*r.percent_delta) : json(nullptr)},
      {"percent_delta_text",
       r.percent_delta ? json(format_percent_delta(*r.percent_delta)) : json(nullptr)},
      {"alignment", r.alignment ? to_json(*r.alignment) : json(nullptr)},
  };
  return doc.dump(2) + "\n";
}

ExperimentReport report_from_json(std::string_view text) {
  return parse_or_format_error(text, "report", [](const json& j) {
    ExperimentReport r;
    r.kind = j.at("kind").get<std::string>();
    r.fingerprint = j.at("fingerprint").get<std::string>();
    r.config_json = j.at("config").dump(2);
    r.augmented = condition_from(j.at("augmented"));
    if (!j.at("baseline").is_null()) r.baseline = condition_from(j.at("baseline"));
    if (!j.at("percent_delta").is_null()) r.percent_delta = j.at("percent_delta").get<double>();
    if (!j.at("alignment").is_null()) r.alignment = alignment_from(j.at("alignment"));
    return r;
  });
}

std::string alignment_to_json(const AlignmentReport& report) {
  return to_json(report).dump(2) + "\n";
}

AlignmentReport alignment_from_json(std::string_view text) {
  return parse_or_format_error(text, "alignment report",
                               [](const json& j) { return alignment_from(j); });
}

std::string report_to_csv(const ExperimentReport& r) {
  std::string out =
      "condition;iteration;seed;precision;recall;f1;tp;fp;fn;tn;epochs;best_epoch;stop_reason\n";
  char buf[512];
  auto rows = [&](const char* name, const ConditionReport& c) {
    for (const auto& it : c.iterations) {
      const auto& m = it.metrics;
      std::snprintf(buf, sizeof buf, "%s;%zu;%llu;%.17g;%.17g;%.17g;%zu;%zu;%zu;%zu;%zu;%zu;%s\n",
                    name, it.iteration, static_cast<unsigned long long>(it.seed), m.precision,
                    m.recall, m.f1, m.tp, m.fp, m.fn, m.tn, it.epochs, it.best_epoch,
                    std::string(to_string(it.stop_reason)).c_str());
      out += buf;
    }
    std::snprintf(buf, sizeof buf, "%s;mean;;%.17g;%.17g;%.17g;;;;;;;\n", name, c.mean_precision,
                  c.mean_recall, c.mean_f1);
    out += buf;
  };
  rows("augmented", r.augmented);
  if (r.baseline) rows("baseline", *r.baseline);
  if (r.percent_delta) {
    std::snprintf(buf, sizeof buf, "percent_delta;;;;;%.17g;;;;;;;\n", *r.percent_delta);
    out += buf;
  }
  return out;
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::Json;
  if (text == "csv") return ReportFormat::Csv;
  throw ConfigError("unknown report format '" + std::string(text) + "' (json, csv)");
}

std::vector<fs::path> emit_report(const ExperimentReport& report, ReportFormat format,
                                  const fs::path& out_dir, const fs::path& plot_dir) {
  std::vector<fs::path> written;
  auto write = [&](const fs::path& path, const std::string& text) {
    try {
      write_text_file(path, text);
    } catch (const fs::filesystem_error& e) {
      throw DataError("cannot write " + path.string() + ": " + e.code().message());
    }
    written.push_back(path);
  };
  const std::string stem = report.kind + "-" + report.fingerprint;
  if (format == ReportFormat::Json) {
    write(out_dir / (stem + ".json"), report_to_json(report));
  } else {
    write(out_dir / (stem + ".csv"), report_to_csv(report));
  }
  if (report.alignment) {
    const std::string base = "density-" + report.fingerprint;
    write(plot_dir / (base + "-real.csv"), write_density_csv(report.alignment->real_density));
    write(plot_dir / (base + "-synthetic.csv"),
          write_density_csv(report.alignment->synthetic_density));
  }
  return written;
}

}  // namespace fallsynth
