#include <algorithm>
#include <string>
#include <thread>
#include <vector>

#include "fallsynth/error.hpp"
#include "fallsynth/metrics.hpp"

namespace fallsynth {
namespace {

double squared_distance(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

// Marks covered[i] for real rows in [begin, end).
void cover_rows(std::span<const double> real, std::span<const double> synthetic, std::size_t dim,
                std::size_t k, std::size_t begin, std::size_t end, std::vector<char>& covered) {
  const std::size_t n = real.size() / dim;
  const std::size_t m = synthetic.size() / dim;
  std::vector<double> dists;
  dists.reserve(n - 1);
  for (std::size_t i = begin; i < end; ++i) {
    const double* r = real.data() + i * dim;
    dists.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dists.push_back(squared_distance(r, real.data() + j * dim, dim));
    }
    std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(k - 1), dists.end());
    const double radius2 = dists[k - 1];

    char hit = 0;
    for (std::size_t s = 0; s < m && !hit; ++s) {
      hit = squared_distance(r, synthetic.data() + s * dim, dim) <= radius2;
    }
    covered[i] = hit;
  }
}

}  // namespace

double coverage(std::span<const double> real, std::span<const double> synthetic, std::size_t dim,
                std::size_t k, std::size_t threads) {
  if (dim == 0) throw ConfigError("coverage: feature dimension must be >= 1");
  if (k == 0) throw ConfigError("coverage: k must be >= 1");
  if (real.size() % dim != 0 || synthetic.size() % dim != 0) {
    throw ShapeError("coverage: input size is not a multiple of the feature dimension");
  }
  const std::size_t n = real.size() / dim;
  if (n <= k) {
    throw DataError("coverage: need more than k=" + std::to_string(k) + " real samples, got " +
                    std::to_string(n));
  }
  if (synthetic.empty()) throw EmptyInputError("coverage: synthetic set is empty");

  std::vector<char> covered(n, 0);
  threads = std::clamp<std::size_t>(threads, 1, n);
  if (threads == 1) {
    cover_rows(real, synthetic, dim, k, 0, n, covered);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(cover_rows, real, synthetic, dim, k, begin, end, std::ref(covered));
    }
    for (auto& th : pool) th.join();
  }

  std::size_t hits = 0;
  for (char c : covered) hits += c != 0;
  return static_cast<double>(hits) / static_cast<double>(n);
}

namespace {

std::vector<double> flatten(std::span<const Window> windows, std::size_t dim) {
  std::vector<double> out;
  out.reserve(windows.size() * dim);
  for (const Window& w : windows) {
    if (w.values.size() != dim) throw ShapeError("coverage: windows differ in length");
    out.insert(out.end(), w.values.begin(), w.values.end());
  }
  return out;
}

}  // namespace

double coverage(std::span<const Window> real, std::span<const Window> synthetic, std::size_t k,
                std::size_t threads) {
  if (real.empty()) throw EmptyInputError("coverage: real set is empty");
  const std::size_t dim = real.front().values.size();
  return coverage(flatten(real, dim), flatten(synthetic, dim), dim, k, threads);
}

}  // namespace fallsynth
