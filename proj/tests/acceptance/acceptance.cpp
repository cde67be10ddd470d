// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fallsynth/classifier.hpp"
#include "fallsynth/error.hpp"
#include "fallsynth/harness.hpp"
#include "fallsynth/ingest.hpp"
#include "fallsynth/kinematics.hpp"
#include "fallsynth/metrics.hpp"
#include "fallsynth/windowing.hpp"
#include "gradcheck.hpp"
#include "support.hpp"

using namespace fallsynth;
using namespace testing_support;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // 0 = no runtime bound
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1 -------------------------------------------------------------------------
Outcome window_arithmetic() {
  const auto w = slide_windows(ramp_series(138), 128, 10);
  bool ok = w.size() == 2;
  std::size_t shared = 0;
  if (ok) {
    for (std::size_t r = 10; r < 128; ++r) {
      bool same = true;
      for (std::size_t k = 0; k < 3; ++k) same = same && w[0].at(r, k) == w[1].at(r - 10, k);
      shared += same;
    }
    ok = shared == 118 && w[0].at(10, 0) == w[1].at(0, 0);
  }
  Rng rng(1001);
  std::size_t bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = rng.below(600), len = 1 + rng.below(200), stride = 1 + rng.below(64);
    const auto wins = slide_windows(ramp_series(n), len, stride);
    bool good = wins.size() == naive_window_count(n, len, stride);
    for (std::size_t j = 0; good && j < wins.size(); ++j) {
      good = wins[j].length() == len && wins[j].at(0, 0) == static_cast<double>(j * stride);
    }
    bad += !good;
  }
  return {ok && bad == 0,
          fmt("138 samples -> %zu windows, %zu shared rows; %zu/1000 random triples disagree with enumeration",
              w.size(), shared, bad)};
}

// 2 -------------------------------------------------------------------------
struct DeltaCell {
  const char* dataset;
  double baseline;
  double f1;
  double printed;
};

const DeltaCell kDeltaCells[] = {
    {"SMM", 0.740, 0.680, -8.11},     {"SMM", 0.740, 0.710, -4.05},
    {"SMM", 0.740, 0.680, -8.11},     {"SMM", 0.740, 0.648, -12.43},
    {"SMM", 0.740, 0.636, -14.05},    {"SMM", 0.740, 0.662, -10.54},
    {"SMM", 0.740, 0.578, -21.89},    {"SMM", 0.740, 0.626, -15.41},
    {"SMM", 0.740, 0.588, -20.54},    {"SMM", 0.740, 0.620, -16.22},
    {"KFall", 0.778, 0.854, +9.76},   {"KFall", 0.778, 0.902, +15.94},
    {"KFall", 0.778, 0.870, +11.84},  {"KFall", 0.778, 0.902, +15.94},
    {"KFall", 0.778, 0.794, +2.06},   {"KFall", 0.778, 0.848, +8.99},
    {"KFall", 0.778, 0.878, +12.87},  {"KFall", 0.778, 0.822, +5.65},
    {"KFall", 0.778, 0.898, +15.43},  {"KFall", 0.778, 0.892, +14.65},
    {"UMAFall", 0.542, 0.652, +20.30}, {"UMAFall", 0.542, 0.630, +16.23},
    {"UMAFall", 0.542, 0.698, +28.78}, {"UMAFall", 0.542, 0.712, +31.18},
    {"UMAFall", 0.542, 0.575, +6.09},  {"UMAFall", 0.542, 0.702, +29.52},
    {"UMAFall", 0.542, 0.630, +16.23}, {"UMAFall", 0.542, 0.850, +56.83},
    {"UMAFall", 0.542, 0.580, +7.01},  {"UMAFall", 0.542, 0.756, +39.48},
    {"SisFall", 0.732, 0.748, +2.19},  {"SisFall", 0.732, 0.742, +1.37},
    {"SisFall", 0.732, 0.758, +3.55},  {"SisFall", 0.732, 0.784, +7.10},
    {"SisFall", 0.732, 0.752, +2.73},  {"SisFall", 0.732, 0.750, +2.46},
    {"SisFall", 0.732, 0.772, +5.46},  {"SisFall", 0.732, 0.776, +6.01},
    {"SisFall", 0.732, 0.782, +6.83},  {"SisFall", 0.732, 0.680, -7.10},
};

Outcome delta_arithmetic() {
  std::size_t matched = 0;
  std::string misses;
  for (const auto& c : kDeltaCells) {
    const double d = percent_delta(c.baseline, c.f1);
    if (std::abs(d - c.printed) <= 0.01 + 1e-9) {
      ++matched;
    } else {
      misses += fmt(" %s %.3f->%.3f printed %+.2f computed %+.4f;", c.dataset, c.baseline, c.f1,
                    c.printed, d);
    }
  }
  const double example = percent_delta(0.542, 0.850);
  const bool example_ok = std::abs(example - 56.83) <= 0.01 && format_percent_delta(example) == "+56.83%";
  const std::size_t total = std::size(kDeltaCells);
  return {matched >= 10 && example_ok,
          fmt("%zu/%zu cells within 0.01 pp (need >= 10); 0.542->0.850 = %s; mismatched cells:", matched,
              total, format_percent_delta(example).c_str()) +
              (misses.empty() ? std::string(" none") : misses)};
}

// 3 -------------------------------------------------------------------------
// Random walk in meters, reflected into [-1, 1].
std::vector<Sample> walk(Rng& rng, std::size_t frames) {
  std::vector<Sample> p(frames);
  Sample cur{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
  for (auto& s : p) {
    for (double& c : cur) {
      c += rng.uniform(-0.05, 0.05);
      if (std::abs(c) > 1.0) c = std::copysign(2.0, c) - c;
    }
    s = cur;
  }
  return p;
}

Outcome kinematics() {
  const double dt = 1.0 / 46.0;
  Rng rng(3003);
  double ramp_rel = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double step = i == 0 ? 0.1 : rng.uniform(-0.2, 0.2);
    std::vector<Sample> p;
    const double origin = rng.uniform(-1, 1);
    for (int f = 0; f < 40; ++f) p.push_back({origin + f * step, origin - f * step, origin});
    const auto a = differentiate_to_accel({p, dt});
    const double expect = step * 46.0 * 46.0;
    for (const auto& s : a.samples) {
      ramp_rel = std::max(ramp_rel, std::abs(s[0] - expect) / std::abs(expect));
      ramp_rel = std::max(ramp_rel, std::abs(s[1] + expect) / std::abs(expect));
      ramp_rel = std::max(ramp_rel, std::abs(s[2]) > 0.0 ? 1.0 : 0.0);
    }
  }

  double lin_err = 0.0;
  std::size_t shift_bad = 0;
  double unquantized_shift = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t frames = 2 + rng.below(200);
    const auto p = walk(rng, frames);
    const auto q = walk(rng, frames);
    const double alpha = rng.uniform(-1, 1), beta = rng.uniform(-1, 1);
    std::vector<Sample> mix(frames), grid(frames), grid_shift(frames), real_shift(frames);
    Sample offset, grid_offset;
    for (std::size_t k = 0; k < 3; ++k) {
      offset[k] = rng.uniform(-2, 2);
      grid_offset[k] = std::ldexp(std::round(std::ldexp(offset[k], 20)), -20);
    }
    for (std::size_t f = 0; f < frames; ++f) {
      for (std::size_t k = 0; k < 3; ++k) {
        mix[f][k] = alpha * p[f][k] + beta * q[f][k];
        // Micrometre grid: every sum below is exact in binary64.
        grid[f][k] = std::ldexp(std::round(std::ldexp(p[f][k], 20)), -20);
        grid_shift[f][k] = grid[f][k] + grid_offset[k];
        real_shift[f][k] = p[f][k] + offset[k];
      }
    }
    const auto ap = differentiate_to_accel({p, dt});
    const auto aq = differentiate_to_accel({q, dt});
    const auto am = differentiate_to_accel({mix, dt});
    for (std::size_t j = 0; j < ap.size(); ++j) {
      for (std::size_t k = 0; k < 3; ++k) {
        lin_err = std::max(lin_err, std::abs(am.samples[j][k] - (alpha * ap.samples[j][k] + beta * aq.samples[j][k])));
      }
    }
    shift_bad += differentiate_to_accel({grid, dt}).samples != differentiate_to_accel({grid_shift, dt}).samples;
    const auto ar = differentiate_to_accel({real_shift, dt});
    for (std::size_t j = 0; j < ap.size(); ++j) {
      for (std::size_t k = 0; k < 3; ++k) {
        unquantized_shift = std::max(unquantized_shift, std::abs(ar.samples[j][k] - ap.samples[j][k]));
      }
    }
  }
  return {ramp_rel <= 1e-9 && lin_err <= 1e-12 && shift_bad == 0,
          fmt("ramp max rel err %.2e (<= 1e-9); linearity max abs err %.2e (<= 1e-12); shift: %zu/1000 "
              "series not bitwise equal (unquantized offsets deviate by up to %.2e)",
              ramp_rel, lin_err, shift_bad, unquantized_shift)};
}

// 4 -------------------------------------------------------------------------
Outcome ks_oracle() {
  Rng rng(4004);
  std::size_t cases = 0, d_bad = 0, p_bad = 0;
  for (std::size_t n = 1; n <= 11; ++n) {
    for (std::size_t m = 1; n + m <= 12; ++m) {
      for (int rep = 0; rep < 6; ++rep) {
        // Alternate continuous draws with heavily tied ones.
        std::vector<double> a, b;
        if (rep % 2 == 0) {
          a = normal_vector(rng, n, 0.0);
          b = normal_vector(rng, m, rep == 4 ? 1.0 : 0.0);
        } else {
          a = tied_vector(rng, n, 3);
          b = tied_vector(rng, m, 3);
        }
        const double brute_d = static_cast<double>(brute_ks_scaled(a, b)) /
                               (static_cast<double>(n) * static_cast<double>(m));
        const auto asym = ks_two_sample(a, b, KsMode::Asymptotic);
        const auto exact = ks_two_sample(a, b, KsMode::Exact);
        d_bad += asym.statistic != brute_d || exact.statistic != brute_d;
        p_bad += exact.p_value != brute_ks_permutation_p(a, b);
        ++cases;
      }
    }
  }
  std::size_t special_bad = 0;
  for (int i = 0; i < 50; ++i) {
    const auto a = normal_vector(rng, 1 + rng.below(6), 0.0);
    special_bad += ks_two_sample(a, a, KsMode::Exact).p_value != 1.0;
    special_bad += ks_two_sample(a, a).p_value != 1.0;
    auto far = a;
    for (double& v : far) v += 100.0;
    special_bad += ks_two_sample(a, far).statistic != 1.0;
    special_bad += ks_two_sample(a, far, KsMode::Exact).statistic != 1.0;
  }
  return {d_bad == 0 && p_bad == 0 && special_bad == 0,
          fmt("%zu sample pairs with n+m <= 12: %zu D mismatches, %zu p mismatches; %zu identical/disjoint failures",
              cases, d_bad, p_bad, special_bad)};
}

// 5 -------------------------------------------------------------------------
Outcome jsd_oracle() {
  Rng rng(5005);
  std::size_t out_of_range = 0;
  double oracle_err = 0.0, self_err = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t bins = 1 + rng.below(64);
    std::vector<double> p(bins), q(bins);
    for (std::size_t j = 0; j < bins; ++j) {
      p[j] = rng.below(4) == 0 ? 0.0 : rng.uniform(0, 1);
      q[j] = rng.below(4) == 0 ? 0.0 : rng.uniform(0, 1);
    }
    p[rng.below(bins)] += 0.5;
    q[rng.below(bins)] += 0.5;
    const double v = jsd_masses(p, q);
    out_of_range += !(v >= 0.0 && v <= 1.0);
    oracle_err = std::max(oracle_err, std::abs(v - reference_jsd(p, q)));
    self_err = std::max(self_err, std::abs(jsd_masses(p, p)));
  }
  const std::vector<double> half{0.5, 0.5}, point{1.0, 0.0};
  const double hand = jsd_masses(half, point);
  // H(M) - (H(P) + H(Q)) / 2 with M = (0.75, 0.25), H(P) = 1, H(Q) = 0.
  const double derived = -(0.75 * std::log2(0.75) + 0.25 * std::log2(0.25)) - 0.5;
  const bool ok = out_of_range == 0 && self_err <= 1e-12 && std::abs(hand - 0.3113) <= 1e-4 &&
                  std::abs(hand - derived) <= 1e-12 && oracle_err <= 1e-12;
  return {ok, fmt("10000 pairs: %zu outside [0,1], max |jsd - reference| %.2e, max self %.2e; "
                  "(0.5,0.5) vs (1,0) = %.6f",
                  out_of_range, oracle_err, self_err, hand)};
}

// 6 -------------------------------------------------------------------------
Outcome coverage_oracle() {
  Rng rng(6006);
  std::size_t mismatches = 0;
  const std::size_t ks[] = {1, 3, 5};
  for (int i = 0; i < 200; ++i) {
    const std::size_t k = ks[i % 3];
    const std::size_t dim = 1 + rng.below(6);
    const std::size_t n = k + 1 + rng.below(50 - k);
    const std::size_t m = 1 + rng.below(50);
    // Integer-valued coordinates half the time so distance ties occur.
    const bool ties = i % 2 == 1;
    auto draw = [&](std::size_t rows, double shift) {
      std::vector<double> v(rows * dim);
      for (double& x : v) x = ties ? static_cast<double>(rng.below(4)) + shift : rng.normal() + shift;
      return v;
    };
    const auto real = draw(n, 0.0);
    const auto synth = draw(m, i % 5 == 0 ? 0.5 : 0.0);
    const double got = coverage(real, synth, dim, k, 1 + (i % 4));
    mismatches += got != brute_coverage(real, synth, dim, k);
  }
  std::size_t special_bad = 0;
  for (int i = 0; i < 20; ++i) {
    const std::size_t dim = 1 + rng.below(4);
    const std::size_t n = 6 + rng.below(40);
    std::vector<double> real(n * dim);
    for (double& x : real) x = rng.normal();
    special_bad += coverage(real, real, dim, 5) != 1.0;
    auto far = real;
    for (double& x : far) x += 1e6;
    special_bad += coverage(real, far, dim, 5) != 0.0;
  }
  return {mismatches == 0 && special_bad == 0,
          fmt("200 random set pairs: %zu differ from brute force; %zu self/far failures", mismatches,
              special_bad)};
}

// 7 -------------------------------------------------------------------------
Outcome gradient_check_all() {
  // Every entry of every tensor at width 8; sampled entries of every tensor at
  // the production width 128.
  double worst_small = 0.0, worst_full = 0.0;
  std::size_t checked_small = 0, checked_full = 0, kinks = 0;
  std::string where;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (int full = 0; full < 2; ++full) {
      const ModelShape shape = full ? ModelShape{} : ModelShape{3, 8, 8};
      auto model = init_model<double>(seed, shape);
      Rng rng(seed + 100);
      for (auto& w : model.tensor(Tensor::BnBeta)) w = 0.1 * rng.normal();
      for (auto& w : model.tensor(Tensor::BnGamma)) w = 1.0 + 0.1 * rng.normal();
      std::vector<int> labels;
      const auto batch = random_batch(rng, 4, 16, labels);
      const auto g = gradient_check(model, batch, labels, 1e-4, 1e-6, full ? 6 : 0, seed);
      double& worst = full ? worst_full : worst_small;
      (full ? checked_full : checked_small) += g.checked;
      kinks += g.kink_retries;
      if (g.max_rel_error > worst) {
        worst = g.max_rel_error;
        where = fmt("seed %llu %s[%zu]", static_cast<unsigned long long>(seed), g.worst_tensor.c_str(),
                    g.worst_index);
      }
    }
  }
  return {worst_small <= 1e-4 && worst_full <= 1e-4,
          fmt("20 seeds, W=16, batch 4: width 8 all %zu entries max rel err %.2e; width 128 %zu sampled "
              "entries max rel err %.2e; worst at %s; %zu entries needed a smaller step at a ReLU kink",
              checked_small, worst_small, checked_full, worst_full, where.c_str(), kinks)};
}

// 8 -------------------------------------------------------------------------
Outcome end_to_end() {
  const auto dir = scratch_dir("acceptance_e2e");
  const auto paths = generate_fixture(dir / "fixture");
  const auto config = load_config(paths.config);
  if (config.iterations != 5) return {false, "fixture config does not ask for 5 iterations"};

  const auto t0 = std::chrono::steady_clock::now();
  const auto first = run_experiment(config);
  const double first_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto files_a = emit_report(first, ReportFormat::Json, dir / "a", dir / "a");
  const auto second = run_experiment(config);
  const auto files_b = emit_report(second, ReportFormat::Json, dir / "b", dir / "b");

  bool identical = files_a.size() == files_b.size();
  for (std::size_t i = 0; identical && i < files_a.size(); ++i) {
    identical = files_a[i].filename() == files_b[i].filename() &&
                read_text_file(files_a[i]) == read_text_file(files_b[i]);
  }
  const double f1 = first.augmented.mean_f1;
  return {first_s < 300.0 && f1 >= 0.95 && identical,
          fmt("5 iterations in %.1f s (< 300); mean F1 %.4f (>= 0.95), baseline %.4f; rerun %s", first_s,
              f1, first.baseline ? first.baseline->mean_f1 : 0.0,
              identical ? "byte-identical" : "DIFFERS")};
}

// 9 -------------------------------------------------------------------------
Outcome mix_law() {
  Rng rng(9009);
  struct Spec {
    MixSpec mix;
    std::size_t num[3];
  };
  const Spec specs[] = {{MixSpec{0.6, 0.2, 0.2}, {6, 2, 2}}, {kQuantityAblationMix, {5, 1, 4}}};
  std::size_t bad = 0, configs = 0;
  double worst_gap = 0.0;
  for (const auto& spec : specs) {
    for (int i = 0; i < 500; ++i) {
      const std::size_t pools[3] = {1 + rng.below(3000), 1 + rng.below(800), 1 + rng.below(1500)};
      std::vector<Window> adl(pools[0]), rf(pools[1]), sf(pools[2]);
      for (std::size_t j = 0; j < pools[0]; ++j) adl[j] = Window{{double(j), 0, 0}, Label::Adl};
      for (std::size_t j = 0; j < pools[1]; ++j) rf[j] = Window{{double(j), 1, 0}, Label::Fall};
      for (std::size_t j = 0; j < pools[2]; ++j) {
        sf[j] = Window{{double(j), 2, 0}, Label::Fall, "", Provenance::Synthetic, "gen"};
      }
      ++configs;
      MixCounts plan;
      try {
        plan = plan_mix(pools[0], pools[1], pools[2], spec.mix);
      } catch (const InfeasibleMixError&) {
        // The budget rounds to zero windows: allowed only if the oracle agrees.
        bad += brute_mix_budget(pools, spec.num, 10) != 0;
        continue;
      }
      const auto mix = compose_training_mix(adl, rf, sf, spec.mix, rng.next());
      std::size_t got[3] = {0, 0, 0};
      std::set<std::pair<double, double>> seen;
      for (const auto& w : mix) {
        const std::size_t c = static_cast<std::size_t>(w.values[1]);
        ++got[c];
        bad += !seen.insert({w.values[0], w.values[1]}).second;
      }
      const double fractions[3] = {spec.mix.adl, spec.mix.real_fall, spec.mix.synthetic_fall};
      const std::size_t planned[3] = {plan.adl, plan.real_fall, plan.synthetic_fall};
      bad += plan.total_budget != brute_mix_budget(pools, spec.num, 10);
      for (int c = 0; c < 3; ++c) {
        const double gap = std::abs(static_cast<double>(got[c]) - fractions[c] * static_cast<double>(plan.total_budget));
        worst_gap = std::max(worst_gap, gap);
        bad += gap >= 1.0 || got[c] != planned[c] || got[c] > pools[c];
      }
    }
  }
  return {bad == 0, fmt("%zu pool configurations over both mixes: %zu violations; max |count - f*T| %.3f (< 1)",
                        configs, bad, worst_gap)};
}

// 10 ------------------------------------------------------------------------
Outcome prompt_catalog() {
  const auto catalog = PromptCatalog::bundled();
  std::string sizes;
  bool ok = catalog.size() == 50;
  for (std::size_t drop = 0; drop < kAllVariantTags.size(); ++drop) {
    std::vector<VariantTag> tags;
    for (std::size_t t = 0; t < kAllVariantTags.size(); ++t) {
      if (t != drop) tags.push_back(kAllVariantTags[t]);
    }
    const auto v = generate_prompt_variants(catalog, tags);
    const std::set<std::string> unique(v.begin(), v.end());
    ok = ok && v.size() == 350 && unique.size() == 350;
    sizes += fmt(" %zu", unique.size());
  }
  const auto d = generate_prompt_variants(catalog, kDefaultVariantTags);
  ok = ok && std::set<std::string>(d.begin(), d.end()).size() == 350;
  return {ok, fmt("%zu base prompts; unique variants for each of the 8 seven-tag sets:", catalog.size()) + sizes};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "window arithmetic", 1.0, window_arithmetic},
      {2, "percent-delta arithmetic", 1.0, delta_arithmetic},
      {3, "kinematics", 1.0, kinematics},
      {4, "KS oracle", 10.0, ks_oracle},
      {5, "JSD bounds and oracle", 5.0, jsd_oracle},
      {6, "coverage oracle", 30.0, coverage_oracle},
      {7, "gradient check", 60.0, gradient_check_all},
      {8, "end-to-end experiment", 0.0, end_to_end},
      {9, "mix law", 5.0, mix_law},
      {10, "prompt catalog", 1.0, prompt_catalog},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.budget_s == 0.0 || s < c.budget_s;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::string budget = c.budget_s > 0.0 ? fmt(" (budget %.0f s)", c.budget_s) : std::string();
    std::printf("[%s] %2d %s: %s [%.2f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), s,
                budget.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
