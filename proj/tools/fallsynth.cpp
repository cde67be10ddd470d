// fallsynth command-line front end.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fallsynth/error.hpp"
#include "fallsynth/harness.hpp"
#include "fallsynth/ingest.hpp"
#include "fallsynth/kinematics.hpp"

namespace fs = std::filesystem;
using namespace fallsynth;

namespace {

// Flags that override fields of an ExperimentConfig.
struct Overrides {
  std::string config;
  std::optional<std::string> manifest;
  std::vector<std::string> synthetic;
  std::optional<std::size_t> length, stride, iterations;
  std::vector<double> mix;
  std::vector<std::size_t> split;
  std::optional<std::uint64_t> seed, baseline_seed;
  bool no_baseline = false;
  std::optional<double> lr, threshold;
  std::optional<std::size_t> max_epochs, patience, batch_size, hidden, dense, bins, k, threads;
  bool no_shuffle = false;
  std::optional<std::string> normalization;
  bool no_alignment = false;

  void add(CLI::App* app, bool training) {
    app->add_option("--config", config, "experiment config JSON");
    app->add_option("--manifest", manifest, "real dataset manifest");
    app->add_option("--synthetic", synthetic, "synthetic manifest (repeatable, pooled)");
    app->add_option("--length", length, "window length W");
    app->add_option("--stride", stride, "window stride");
    app->add_option("--bins", bins, "histogram bins");
    app->add_option("--k", k, "coverage neighbours");
    app->add_option("--normalization", normalization, "pooled | per_axis");
    app->add_option("--threads", threads, "metric threads");
    if (!training) return;
    app->add_option("--mix", mix, "adl,real_fall,synthetic_fall fractions")->delimiter(',')
        ->expected(3);
    app->add_option("--split", split, "train,validation,test subject counts")->delimiter(',')
        ->expected(3);
    app->add_option("--iterations", iterations, "iterations");
    app->add_option("--seed", seed, "master seed")->required();
    app->add_option("--baseline-seed", baseline_seed, "separate seed for the baseline (unpaired)");
    app->add_flag("--no-baseline", no_baseline, "skip the real-only condition");
    app->add_option("--lr", lr, "learning rate");
    app->add_option("--max-epochs", max_epochs, "maximum epochs");
    app->add_option("--patience", patience, "early-stopping patience");
    app->add_option("--batch-size", batch_size, "minibatch size");
    app->add_flag("--no-shuffle", no_shuffle, "keep the training order fixed");
    app->add_option("--threshold", threshold, "decision threshold");
    app->add_option("--hidden", hidden, "LSTM units");
    app->add_option("--dense", dense, "dense units");
    app->add_flag("--no-alignment", no_alignment, "skip the alignment section");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig c = config.empty() ? ExperimentConfig{} : load_config(config);
    const fs::path cwd = fs::current_path();
    if (manifest) c.manifest = fs::absolute(*manifest);
    if (!synthetic.empty()) {
      c.synthetic_manifests.clear();
      for (const auto& s : synthetic) c.synthetic_manifests.push_back(fs::absolute(s));
    }
    if (length) c.window.length = *length;
    if (stride) c.window.stride = *stride;
    if (!mix.empty()) c.mix = MixSpec{mix[0], mix[1], mix[2]};
    if (!split.empty()) c.split = SplitSizes{split[0], split[1], split[2]};
    if (iterations) c.iterations = *iterations;
    if (seed) c.seed = *seed;
    if (baseline_seed) c.baseline_seed = *baseline_seed;
    if (no_baseline) c.baseline = false;
    if (lr) c.train.learning_rate = *lr;
    if (max_epochs) c.train.max_epochs = *max_epochs;
    if (patience) c.train.patience = *patience;
    if (batch_size) c.train.batch_size = *batch_size;
    if (no_shuffle) c.train.shuffle = false;
    if (threshold) c.train.threshold = *threshold;
    if (hidden) c.model.hidden = *hidden;
    if (dense) c.model.dense = *dense;
    if (bins) c.metrics.bins = *bins;
    if (k) c.metrics.k = *k;
    if (normalization) {
      if (*normalization == "pooled") c.metrics.normalization = Normalization::Pooled;
      else if (*normalization == "per_axis") c.metrics.normalization = Normalization::PerAxis;
      else throw ConfigError("unknown normalization '" + *normalization + "'");
    }
    if (threads) c.metrics.threads = *threads;
    if (no_alignment) c.alignment = false;
    return c;
  }
};

void print_condition(const char* name, const ConditionReport& c) {
  for (const auto& it : c.iterations) {
    std::printf("%s iteration %zu: test=[%s,%s] f1=%.4f precision=%.4f recall=%.4f epochs=%zu\n",
                name, it.iteration, it.split.test.at(0).c_str(),
                it.split.test.size() > 1 ? it.split.test[1].c_str() : "", it.metrics.f1,
                it.metrics.precision, it.metrics.recall, it.epochs);
  }
  std::printf("%s mean f1=%.4f precision=%.4f recall=%.4f\n", name, c.mean_f1, c.mean_precision,
              c.mean_recall);
}

void print_alignment(const AlignmentReport& a) {
  static const char* axes[] = {"x", "y", "z"};
  for (std::size_t i = 0; i < 3; ++i) {
    std::printf("ks %s: D=%.6f p=%.6g\n", axes[i], a.ks[i].statistic, a.ks[i].p_value);
  }
  std::printf("ks mean p=%.6g\njsd=%.6f\ncoverage=%.6f\n", a.ks_mean_p, a.jsd, a.coverage);
}

int run_experiment_command(const Overrides& o, bool ablation, const std::string& out_dir,
                           const std::string& plot_dir, const std::string& format) {
  const ExperimentConfig config = o.resolve();
  const ReportFormat fmt = parse_report_format(format);
  const ExperimentReport report = ablation ? run_ablation_quantity(config) : run_experiment(config);
  print_condition("augmented", report.augmented);
  if (report.baseline) print_condition("baseline", *report.baseline);
  if (report.percent_delta) {
    std::printf("delta %s\n", format_percent_delta(*report.percent_delta).c_str());
  }
  for (const auto& p : emit_report(report, fmt, out_dir, plot_dir.empty() ? out_dir : plot_dir)) {
    std::printf("wrote %s\n", p.string().c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic accelerometer evaluation toolkit"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "validate dataset manifests");
  std::vector<std::string> ingest_manifests;
  ingest->add_option("manifests", ingest_manifests, "manifest JSON files")->required();

  // kinematics
  auto* kin = app.add_subcommand("kinematics", "motion array -> accelerometer CSV");
  std::string kin_input, kin_output, kin_placement = "left_wrist";
  std::optional<double> kin_dt;
  bool kin_central = false;
  kin->add_option("input", kin_input, "NPY motion array, (F,22,3) or (F,66)")->required();
  kin->add_option("-o,--output", kin_output, "output CSV")->required();
  kin->add_option("--placement", kin_placement,
                  "left_wrist | right_wrist | waist | left_foot | right_hip");
  kin->add_option("--dt", kin_dt, "seconds per frame (default 1/46)");
  kin->add_flag("--central-diff", kin_central, "use (p(f+1) - 2p(f) + p(f-1)) / dt^2");

  // windows
  auto* win = app.add_subcommand("windows", "build a window cache");
  std::vector<std::string> win_manifests;
  std::string win_output, win_csv;
  std::size_t win_length = kDefaultWindowLength, win_stride = kDefaultStride;
  win->add_option("manifests", win_manifests, "manifest JSON files")->required();
  win->add_option("-o,--output", win_output, "window cache file")->required();
  win->add_option("--length", win_length, "window length");
  win->add_option("--stride", win_stride, "stride");
  win->add_option("--csv", win_csv, "also write a debug CSV");

  // align
  auto* align = app.add_subcommand("align", "real vs synthetic alignment metrics");
  Overrides align_o;
  align_o.add(align, false);
  std::string align_out, align_plot;
  align->add_option("-o,--output", align_out, "alignment report JSON");
  align->add_option("--plot-dir", align_plot, "directory for density CSVs");

  // train
  auto* tr = app.add_subcommand("train", "train one iteration and save the model");
  Overrides train_o;
  train_o.add(tr, true);
  std::size_t train_iter = 0;
  std::string train_ckpt, train_hist;
  tr->add_option("--iteration", train_iter, "iteration index");
  tr->add_option("--checkpoint", train_ckpt, "model checkpoint path")->required();
  tr->add_option("--history", train_hist, "history CSV path");

  // experiment / ablate-quantity
  std::string exp_out = "reports", exp_plot, exp_format = "json";
  auto* exp = app.add_subcommand("experiment", "augmented vs baseline over iterations");
  Overrides exp_o;
  exp_o.add(exp, true);
  auto* abl = app.add_subcommand("ablate-quantity", "experiment with the 50/10/40 mix");
  Overrides abl_o;
  abl_o.add(abl, true);
  for (auto* sub : {exp, abl}) {
    sub->add_option("--out", exp_out, "report directory");
    sub->add_option("--plot-dir", exp_plot, "density CSV directory (default: --out)");
    sub->add_option("--format", exp_format, "json | csv");
  }

  // prompts
  auto* pr = app.add_subcommand("prompts", "generate prompt variants");
  std::string pr_catalog, pr_output;
  std::vector<std::string> pr_tags;
  pr->add_option("--catalog", pr_catalog, "base prompts, one per line (default: bundled)");
  pr->add_option("--tags", pr_tags, "variant tags")->delimiter(',');
  pr->add_option("-o,--output", pr_output, "output file (default stdout)");

  // report
  auto* rep = app.add_subcommand("report", "summarize or convert a report");
  std::string rep_input, rep_format, rep_output;
  rep->add_option("input", rep_input, "report JSON")->required();
  rep->add_option("--format", rep_format, "json | csv");
  rep->add_option("-o,--output", rep_output, "output file");

  // fixture
  auto* fix = app.add_subcommand("fixture", "write a separable synthetic fixture");
  std::string fix_dir;
  FixtureOptions fix_opts;
  fix->add_option("dir", fix_dir, "output directory")->required();
  fix->add_option("--subjects", fix_opts.subjects, "subjects");
  fix->add_option("--length", fix_opts.series_length, "samples per series");
  fix->add_option("--sources", fix_opts.synthetic_sources, "synthetic sources");
  fix->add_option("--separation", fix_opts.separation, "class offset in noise units");
  fix->add_option("--seed", fix_opts.seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*ingest) {
      for (const auto& m : ingest_manifests) {
        const auto catalog = load_catalog(m);
        std::size_t samples = 0;
        for (const auto& e : catalog.entries()) samples += load_series(e).size();
        std::printf("%s: %zu series, %zu subjects, %zu falls, %zu adl, %zu samples\n", m.c_str(),
                    catalog.size(), catalog.subject_count(), catalog.fall_count(),
                    catalog.adl_count(), samples);
        for (const auto& [key, count] : catalog.activity_histogram()) {
          std::printf("  %s %s: %zu\n", std::string(to_string(key.first)).c_str(),
                      key.second.empty() ? "-" : key.second.c_str(), count);
        }
      }
    } else if (*kin) {
      const double rate = kin_dt ? 1.0 / *kin_dt : kDefaultFrameRate;
      if (kin_dt && !(*kin_dt > 0.0)) throw ConfigError("--dt must be > 0");
      const auto traj = load_motion_array(kin_input, rate);
      const auto pos = extract_joint(traj, parse_placement(kin_placement));
      const auto accel = differentiate_to_accel(pos, DifferentiationOptions{kin_central});
      save_accel_csv(kin_output, accel);
      std::printf("%zu frames -> %zu samples at %.6g Hz -> %s\n", traj.frames(), accel.size(),
                  accel.sampling_rate, kin_output.c_str());
    } else if (*win) {
      std::vector<AccelSeries> series;
      for (const auto& m : win_manifests) {
        const auto catalog = load_catalog(m);
        for (const auto& e : catalog.entries()) series.push_back(load_series(e));
      }
      const auto built = build_windows(series, win_length, win_stride);
      save_window_cache(win_output, built.windows);
      if (!win_csv.empty()) write_text_file(win_csv, write_windows_csv(built.windows));
      std::printf("%zu windows from %zu series (%zu too short) -> %s\n", built.windows.size(),
                  series.size(), built.skipped.size(), win_output.c_str());
    } else if (*align) {
      const ExperimentConfig c = align_o.resolve();
      if (c.manifest.empty()) throw ConfigError("align needs --manifest or --config");
      const auto report = run_alignment(c.manifest, c.synthetic_manifests, c.window, c.metrics);
      print_alignment(report);
      if (!align_out.empty()) write_text_file(align_out, alignment_to_json(report));
      if (!align_plot.empty()) {
        write_text_file(fs::path(align_plot) / "density-real.csv",
                        write_density_csv(report.real_density));
        write_text_file(fs::path(align_plot) / "density-synthetic.csv",
                        write_density_csv(report.synthetic_density));
      }
    } else if (*tr) {
      const ExperimentConfig c = train_o.resolve();
      const auto trained = train_iteration(c, train_iter);
      save_checkpoint(train_ckpt, trained.checkpoint);
      if (!train_hist.empty()) write_text_file(train_hist, write_history_csv(trained.history));
      const auto& r = trained.result;
      std::printf("iteration %zu: f1=%.4f precision=%.4f recall=%.4f epochs=%zu best=%zu (%s)\n",
                  r.iteration, r.metrics.f1, r.metrics.precision, r.metrics.recall, r.epochs,
                  r.best_epoch + 1, std::string(to_string(r.stop_reason)).c_str());
    } else if (*exp) {
      return run_experiment_command(exp_o, false, exp_out, exp_plot, exp_format);
    } else if (*abl) {
      return run_experiment_command(abl_o, true, exp_out, exp_plot, exp_format);
    } else if (*pr) {
      const PromptCatalog catalog = pr_catalog.empty()
                                        ? PromptCatalog::bundled()
                                        : PromptCatalog::from_text(read_text_file(pr_catalog));
      std::vector<std::string> prompts;
      if (pr_tags.empty()) {
        prompts = generate_prompt_variants(catalog, kDefaultVariantTags);
      } else {
        prompts = generate_prompt_variants(catalog, pr_tags);
      }
      std::string text;
      for (const auto& p : prompts) text += p + "\n";
      if (pr_output.empty()) {
        std::fwrite(text.data(), 1, text.size(), stdout);
      } else {
        write_text_file(pr_output, text);
        std::printf("%zu prompts -> %s\n", prompts.size(), pr_output.c_str());
      }
    } else if (*rep) {
      const auto report = report_from_json(read_text_file(rep_input));
      if (rep_format.empty()) {
        std::printf("%s %s\n", report.kind.c_str(), report.fingerprint.c_str());
        print_condition("augmented", report.augmented);
        if (report.baseline) print_condition("baseline", *report.baseline);
        if (report.percent_delta) {
          std::printf("delta %s\n", format_percent_delta(*report.percent_delta).c_str());
        }
        if (report.alignment) print_alignment(*report.alignment);
      } else {
        const std::string text = parse_report_format(rep_format) == ReportFormat::Json
                                     ? report_to_json(report)
                                     : report_to_csv(report);
        if (rep_output.empty()) std::fwrite(text.data(), 1, text.size(), stdout);
        else write_text_file(rep_output, text);
      }
    } else if (*fix) {
      const auto paths = generate_fixture(fix_dir, fix_opts);
      std::printf("manifest %s\nconfig %s\nmotion %s\n", paths.manifest.string().c_str(),
                  paths.config.string().c_str(), paths.motion.string().c_str());
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.category());
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
