#include "fallsynth/windowing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>

#include "fallsynth/error.hpp"
#include "fallsynth/ingest.hpp"
#include "fallsynth/rng.hpp"

namespace fallsynth {

std::vector<Window> slide_windows(const AccelSeries& series, std::size_t length,
                                  std::size_t stride) {
  if (length == 0 || stride == 0) throw ConfigError("window length and stride must be >= 1");
  std::vector<Window> out;
  const std::size_t n = series.samples.size();
  if (n < length) return out;

  out.reserve((n - length) / stride + 1);
  for (std::size_t start = 0; start + length <= n; start += stride) {
    Window w;
    w.label = series.label;
    w.provenance = series.provenance;
    w.subject_id = series.subject_id.value_or("");
    w.source = series.source;
    w.values.reserve(length * kAxes);
    for (std::size_t i = start; i < start + length; ++i) {
      const Sample& s = series.samples[i];
      w.values.insert(w.values.end(), s.begin(), s.end());
    }
    out.push_back(std::move(w));
  }
  return out;
}

WindowBuildResult build_windows(std::span<const AccelSeries> series, std::size_t length,
                                std::size_t stride) {
  WindowBuildResult result;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i].size() < length) {
      result.skipped.push_back(i);
      continue;
    }
    auto windows = slide_windows(series[i], length, stride);
    std::move(windows.begin(), windows.end(), std::back_inserter(result.windows));
  }
  return result;
}

Scaler fit_scaler(std::span<const Window> windows) {
  if (windows.empty()) throw EmptyInputError("cannot fit a scaler on zero windows");

  std::array<double, 3> sum{};
  std::size_t rows = 0;
  for (const Window& w : windows) {
    for (std::size_t r = 0; r < w.length(); ++r) {
      for (std::size_t k = 0; k < kAxes; ++k) sum[k] += w.values[r * kAxes + k];
    }
    rows += w.length();
  }
  if (rows == 0) throw EmptyInputError("cannot fit a scaler on empty windows");

  Scaler s;
  for (std::size_t k = 0; k < kAxes; ++k) s.mean[k] = sum[k] / static_cast<double>(rows);

  std::array<double, 3> sq{};
  for (const Window& w : windows) {
    for (std::size_t r = 0; r < w.length(); ++r) {
      for (std::size_t k = 0; k < kAxes; ++k) {
        const double d = w.values[r * kAxes + k] - s.mean[k];
        sq[k] += d * d;
      }
    }
  }
  for (std::size_t k = 0; k < kAxes; ++k) {
    s.stddev[k] = std::max(std::sqrt(sq[k] / static_cast<double>(rows)), Scaler::kStdFloor);
  }
  return s;
}

std::vector<Window> apply_scaler(const Scaler& scaler, std::span<const Window> windows) {
  std::vector<Window> out(windows.begin(), windows.end());
  for (Window& w : out) {
    for (std::size_t i = 0; i < w.values.size(); ++i) {
      const std::size_t k = i % kAxes;
      w.values[i] = (w.values[i] - scaler.mean[k]) / scaler.stddev[k];
    }
  }
  return out;
}

std::vector<Window> invert_scaler(const Scaler& scaler, std::span<const Window> windows) {
  std::vector<Window> out(windows.begin(), windows.end());
  for (Window& w : out) {
    for (std::size_t i = 0; i < w.values.size(); ++i) {
      const std::size_t k = i % kAxes;
      w.values[i] = w.values[i] * scaler.stddev[k] + scaler.mean[k];
    }
  }
  return out;
}

SubjectSplit split_subjects(std::span<const std::string> subjects, const SplitSizes& sizes,
                            std::uint64_t seed) {
  if (subjects.size() != sizes.total()) {
    throw ConfigError("split sizes " + std::to_string(sizes.train) + "/" +
                      std::to_string(sizes.validation) + "/" + std::to_string(sizes.test) +
                      " do not add up to " + std::to_string(subjects.size()) + " subjects");
  }
  std::vector<std::string> order(subjects.begin(), subjects.end());
  std::sort(order.begin(), order.end());
  if (std::adjacent_find(order.begin(), order.end()) != order.end()) {
    throw ConfigError("duplicate subject id in split input");
  }

  Rng rng(seed);
  rng.shuffle(std::span<std::string>(order));

  SubjectSplit split;
  auto take = [&](std::size_t from, std::size_t count) {
    std::vector<std::string> part(order.begin() + static_cast<std::ptrdiff_t>(from),
                                  order.begin() + static_cast<std::ptrdiff_t>(from + count));
    std::sort(part.begin(), part.end());
    return part;
  };
  split.train = take(0, sizes.train);
  split.validation = take(sizes.train, sizes.validation);
  split.test = take(sizes.train + sizes.validation, sizes.test);
  return split;
}

void MixSpec::validate() const {
  for (double f : {adl, real_fall, synthetic_fall}) {
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("mix fractions must lie in [0, 1]");
  }
  if (std::abs(adl + real_fall + synthetic_fall - 1.0) > 1e-9) {
    throw ConfigError("mix fractions must sum to 1");
  }
}

MixSpec MixSpec::without_synthetic() const {
  const double real = adl + real_fall;
  if (!(real > 0.0)) throw ConfigError("mix has no real share to keep");
  return MixSpec{adl / real, real_fall / real, 0.0};
}

namespace {

// floor() that absorbs representation error when the exact value is an integer.
std::size_t floor_count(double x) {
  return static_cast<std::size_t>(std::floor(x * (1.0 + 1e-12)));
}

}  // namespace

MixCounts plan_mix(std::size_t adl_pool, std::size_t real_fall_pool,
                   std::size_t synthetic_fall_pool, const MixSpec& spec) {
  spec.validate();
  const std::array<std::size_t, 3> pools{adl_pool, real_fall_pool, synthetic_fall_pool};
  const std::array<double, 3> fractions{spec.adl, spec.real_fall, spec.synthetic_fall};
  constexpr std::array<const char*, 3> names{"ADL", "real fall", "synthetic fall"};

  std::size_t budget = std::numeric_limits<std::size_t>::max();
  for (std::size_t c = 0; c < 3; ++c) {
    if (fractions[c] <= 0.0) continue;
    if (pools[c] == 0) {
      throw InfeasibleMixError(std::string("infeasible mix: ") + names[c] +
                               " pool is empty but its fraction is " +
                               std::to_string(fractions[c]));
    }
    budget = std::min(budget, floor_count(static_cast<double>(pools[c]) / fractions[c]));
  }

  MixCounts counts;
  counts.total_budget = budget;
  std::array<std::size_t*, 3> dest{&counts.adl, &counts.real_fall, &counts.synthetic_fall};
  for (std::size_t c = 0; c < 3; ++c) {
    *dest[c] = fractions[c] > 0.0
                   ? std::min(pools[c], floor_count(static_cast<double>(budget) * fractions[c]))
                   : 0;
  }
  return counts;
}

std::vector<Window> compose_training_mix(std::span<const Window> adl_pool,
                                         std::span<const Window> real_fall_pool,
                                         std::span<const Window> synthetic_fall_pool,
                                         const MixSpec& spec, std::uint64_t seed) {
  const MixCounts counts =
      plan_mix(adl_pool.size(), real_fall_pool.size(), synthetic_fall_pool.size(), spec);

  Rng rng(seed);
  std::vector<Window> out;
  out.reserve(counts.adl + counts.real_fall + counts.synthetic_fall);

  // Partial Fisher-Yates over an index vector: the first `count` entries are a
  // uniform draw without replacement.
  auto draw = [&](std::span<const Window> pool, std::size_t count) {
    std::vector<std::size_t> idx(pool.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
      std::swap(idx[i], idx[j]);
      out.push_back(pool[idx[i]]);
    }
  };
  draw(adl_pool, counts.adl);
  draw(real_fall_pool, counts.real_fall);
  draw(synthetic_fall_pool, counts.synthetic_fall);

  rng.shuffle(std::span<Window>(out));
  return out;
}

// ---------------------------------------------------------------------------
// Cache

namespace {

constexpr char kCacheMagic[4] = {'F', 'S', 'W', 'C'};

template <typename T>
void put(std::vector<std::byte>& out, T value) {
  auto bits = std::bit_cast<std::array<std::byte, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  out.insert(out.end(), bits.begin(), bits.end());
}

void put_string(std::vector<std::byte>& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  for (char c : s) out.push_back(static_cast<std::byte>(c));
}

class Reader {
 public:
  explicit Reader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::array<std::byte, sizeof(T)> bits;
    std::memcpy(bits.data(), bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
    pos_ += sizeof(T);
    return std::bit_cast<T>(bits);
  }

  std::string get_string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  bool at_end() const noexcept { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("window cache is truncated");
  }

  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::byte> write_window_cache(std::span<const Window> windows) {
  const std::size_t length = windows.empty() ? 0 : windows.front().length();
  std::vector<std::byte> out;
  for (char c : kCacheMagic) out.push_back(static_cast<std::byte>(c));
  put<std::uint32_t>(out, kWindowCacheVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(length));
  put<std::uint64_t>(out, windows.size());
  for (const Window& w : windows) {
    if (w.length() != length || w.values.size() != length * kAxes) {
      throw ShapeError("window cache requires windows of equal length");
    }
    out.push_back(static_cast<std::byte>(w.label));
    out.push_back(static_cast<std::byte>(w.provenance));
    put_string(out, w.subject_id);
    put_string(out, w.source);
    for (double v : w.values) put<double>(out, v);
  }
  return out;
}

std::vector<Window> read_window_cache(std::span<const std::byte> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCacheMagic, 4) != 0) {
    throw FormatError("not a window cache (bad magic)");
  }
  Reader in(bytes.subspan(4));
  const auto version = in.get<std::uint32_t>();
  if (version != kWindowCacheVersion) {
    throw FormatError("unsupported window cache version " + std::to_string(version));
  }
  const auto length = in.get<std::uint32_t>();
  const auto count = in.get<std::uint64_t>();
  std::vector<Window> out;
  for (std::uint64_t i = 0; i < count; ++i) {
    Window w;
    const auto label = in.get<std::uint8_t>();
    const auto prov = in.get<std::uint8_t>();
    if (label > 1 || prov > 1) throw FormatError("window cache has an invalid label byte");
    w.label = static_cast<Label>(label);
    w.provenance = static_cast<Provenance>(prov);
    w.subject_id = in.get_string();
    w.source = in.get_string();
    w.values.resize(static_cast<std::size_t>(length) * kAxes);
    for (double& v : w.values) v = in.get<double>();
    out.push_back(std::move(w));
  }
  if (!in.at_end()) throw FormatError("trailing bytes after window cache");
  return out;
}

void save_window_cache(const std::filesystem::path& path, std::span<const Window> windows) {
  const auto bytes = write_window_cache(windows);
  write_text_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::vector<Window> load_window_cache(const std::filesystem::path& path) {
  const std::string raw = read_text_file(path);
  return read_window_cache(std::as_bytes(std::span<const char>(raw.data(), raw.size())));
}

std::string write_windows_csv(std::span<const Window> windows) {
  std::string out = "window;row;x;y;z;label;subject;provenance\n";
  char buf[160];
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const Window& w = windows[i];
    for (std::size_t r = 0; r < w.length(); ++r) {
      const int n = std::snprintf(buf, sizeof buf, "%zu;%zu;%.6f;%.6f;%.6f;%d;", i, r, w.at(r, 0),
                                  w.at(r, 1), w.at(r, 2), static_cast<int>(w.label));
      out.append(buf, static_cast<std::size_t>(n));
      out += w.subject_id;
      out += ';';
      out += to_string(w.provenance);
      out += '\n';
    }
  }
  return out;
}

}  // namespace fallsynth
