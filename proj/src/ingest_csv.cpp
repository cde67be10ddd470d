#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "fallsynth/error.hpp"
#include "fallsynth/ingest.hpp"

namespace fallsynth {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_cell(std::string_view cell, std::size_t line) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc() || ptr != last) {
    throw ParseError("non-numeric cell '" + std::string(cell) + "'", line);
  }
  if (!std::isfinite(value)) throw ParseError("non-finite cell '" + std::string(cell) + "'", line);
  return value;
}

}  // namespace

AccelSeries read_accel_csv(std::string_view text, double sampling_rate) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  AccelSeries series;
  series.sampling_rate = sampling_rate;

  std::size_t line_no = 0;
  bool saw_header = false;
  std::size_t pending_blank = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (!saw_header) {
      if (line != "x;y;z") {
        throw FormatError("expected header 'x;y;z', got '" + std::string(line) + "'");
      }
      saw_header = true;
      continue;
    }
    if (trim(line).empty()) {
      ++pending_blank;
      continue;
    }
    if (pending_blank > 0) {
      throw ParseError("blank line inside data", line_no - 1);
    }

    Sample s{};
    std::size_t cells = 0;
    std::string_view rest = line;
    while (true) {
      const std::size_t semi = rest.find(';');
      const std::string_view cell = rest.substr(0, semi);
      if (cells == kAxes) throw ParseError("expected 3 cells", line_no);
      s[cells++] = parse_cell(cell, line_no);
      if (semi == std::string_view::npos) break;
      rest = rest.substr(semi + 1);
    }
    if (cells != kAxes) throw ParseError("expected 3 cells", line_no);
    series.samples.push_back(s);
  }

  if (!saw_header) throw FormatError("missing header 'x;y;z'");
  if (series.samples.empty()) throw EmptyInputError("accelerometer CSV has no samples");
  series.validate();
  return series;
}

std::string write_accel_csv(const AccelSeries& series) {
  std::string out = "x;y;z\n";
  out.reserve(out.size() + series.samples.size() * 32);
  char buf[128];
  for (const Sample& s : series.samples) {
    const int n = std::snprintf(buf, sizeof buf, "%.6f;%.6f;%.6f\n", s[0], s[1], s[2]);
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

AccelSeries load_accel_csv(const std::filesystem::path& path, double sampling_rate) {
  try {
    return read_accel_csv(read_text_file(path), sampling_rate);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.detail(), e.line());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const EmptyInputError& e) {
    throw EmptyInputError(path.string() + ": " + e.what());
  }
}

void save_accel_csv(const std::filesystem::path& path, const AccelSeries& series) {
  write_text_file(path, write_accel_csv(series));
}

}  // namespace fallsynth
