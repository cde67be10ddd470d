#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

#include "fallsynth/error.hpp"
#include "fallsynth/metrics.hpp"

namespace fallsynth {

std::vector<double> DensityCurve::masses() const {
  std::vector<double> out(densities.size());
  const double w = width();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = densities[i] * w;
  return out;
}

DensityCurve histogram_density(std::span<const double> values, std::size_t bins, double lo,
                               double hi) {
  if (values.empty()) throw EmptyInputError("histogram of an empty sample");
  if (bins == 0) throw ConfigError("histogram needs at least one bin");
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw ConfigError("histogram range must satisfy lo < hi");
  }

  std::vector<std::size_t> counts(bins, 0);
  const double span = hi - lo;
  const double nb = static_cast<double>(bins);
  for (double v : values) {
    if (!std::isfinite(v)) throw DataError("histogram input is not finite");
    const double pos = std::floor((v - lo) / span * nb);
    std::size_t b = 0;
    if (pos >= nb) {
      b = bins - 1;
    } else if (pos > 0.0) {
      b = static_cast<std::size_t>(pos);
    }
    ++counts[b];
  }

  DensityCurve curve;
  curve.lo = lo;
  curve.hi = hi;
  curve.centers.resize(bins);
  curve.densities.resize(bins);
  const double width = span / nb;
  const double norm = static_cast<double>(values.size()) * width;
  for (std::size_t b = 0; b < bins; ++b) {
    curve.centers[b] = lo + (static_cast<double>(b) + 0.5) * width;
    curve.densities[b] = static_cast<double>(counts[b]) / norm;
  }
  return curve;
}

double jsd_masses(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ConfigError("JSD inputs have different bin counts");
  if (p.empty()) throw EmptyInputError("JSD of empty distributions");

  double sp = 0.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0) || !(q[i] >= 0.0) || !std::isfinite(p[i]) || !std::isfinite(q[i])) {
      throw DataError("JSD inputs must be finite and non-negative");
    }
    sp += p[i];
    sq += q[i];
  }
  if (!(sp > 0.0) || !(sq > 0.0)) throw DataError("JSD input has zero total mass");

  // 0 * log(0 / x) is taken as 0.
  double kl_pm = 0.0;
  double kl_qm = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = p[i] / sp;
    const double qi = q[i] / sq;
    const double mi = 0.5 * (pi + qi);
    if (pi > 0.0) kl_pm += pi * std::log2(pi / mi);
    if (qi > 0.0) kl_qm += qi * std::log2(qi / mi);
  }
  return std::clamp(0.5 * kl_pm + 0.5 * kl_qm, 0.0, 1.0);
}

double jsd(const DensityCurve& p, const DensityCurve& q) {
  if (p.bins() != q.bins() || p.lo != q.lo || p.hi != q.hi) {
    throw ConfigError("JSD requires identical bin grids");
  }
  return jsd_masses(p.masses(), q.masses());
}

std::string write_density_csv(const DensityCurve& curve) {
  std::string out = "center;density\n";
  char buf[96];
  for (std::size_t b = 0; b < curve.bins(); ++b) {
    const int n = std::snprintf(buf, sizeof buf, "%.17g;%.17g\n", curve.centers[b], curve.densities[b]);
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

DensityCurve read_density_csv(std::string_view text) {
  const std::size_t nl = text.find('\n');
  std::string_view header = text.substr(0, nl);
  if (!header.empty() && header.back() == '\r') header.remove_suffix(1);
  if (header != "center;density") throw FormatError("expected header 'center;density'");
  text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

  DensityCurve curve;
  std::size_t line = 1;
  while (!text.empty()) {
    const std::size_t e = text.find('\n');
    std::string_view row = text.substr(0, e);
    text = e == std::string_view::npos ? std::string_view{} : text.substr(e + 1);
    ++line;
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    if (row.empty()) continue;
    const std::size_t semi = row.find(';');
    if (semi == std::string_view::npos) throw ParseError("expected 2 cells", line);
    double c = 0.0;
    double d = 0.0;
    auto r1 = std::from_chars(row.data(), row.data() + semi, c);
    auto r2 = std::from_chars(row.data() + semi + 1, row.data() + row.size(), d);
    if (r1.ec != std::errc() || r2.ec != std::errc() || r2.ptr != row.data() + row.size()) {
      throw ParseError("non-numeric cell", line);
    }
    curve.centers.push_back(c);
    curve.densities.push_back(d);
  }
  if (curve.centers.empty()) throw EmptyInputError("density CSV has no rows");
  // Reconstruct the grid from the first and last centers.
  if (curve.centers.size() == 1) {
    throw FormatError("density CSV with a single bin does not determine its range");
  }
  const double width = (curve.centers.back() - curve.centers.front()) /
                       static_cast<double>(curve.centers.size() - 1);
  curve.lo = curve.centers.front() - 0.5 * width;
  curve.hi = curve.centers.back() + 0.5 * width;
  return curve;
}

}  // namespace fallsynth
