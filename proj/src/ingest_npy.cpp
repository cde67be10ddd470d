#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "fallsynth/error.hpp"
#include "fallsynth/ingest.hpp"

namespace fallsynth {
namespace {

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;

struct NpyHeader {
  std::string descr;
  bool fortran_order = false;
  std::vector<std::size_t> shape;
};

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  if (shape.size() == 1) s += ",";
  return s + ")";
}

// Value text following "'key':" in the header dict.
std::string_view dict_value(std::string_view dict, std::string_view key) {
  const std::string quoted = "'" + std::string(key) + "'";
  std::size_t pos = dict.find(quoted);
  if (pos == std::string_view::npos) throw FormatError("NPY header lacks '" + std::string(key) + "'");
  pos = dict.find(':', pos + quoted.size());
  if (pos == std::string_view::npos) throw FormatError("NPY header is malformed");
  std::string_view rest = dict.substr(pos + 1);
  while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
  return rest;
}

NpyHeader parse_header(std::string_view dict) {
  NpyHeader h;

  std::string_view descr = dict_value(dict, "descr");
  if (descr.empty() || (descr.front() != '\'' && descr.front() != '"')) {
    throw FormatError("NPY descr is not a string");
  }
  const char quote = descr.front();
  const std::size_t end = descr.find(quote, 1);
  if (end == std::string_view::npos) throw FormatError("NPY descr is unterminated");
  h.descr = std::string(descr.substr(1, end - 1));

  std::string_view order = dict_value(dict, "fortran_order");
  if (order.substr(0, 4) == "True") {
    h.fortran_order = true;
  } else if (order.substr(0, 5) != "False") {
    throw FormatError("NPY fortran_order is not a boolean");
  }

  std::string_view shape = dict_value(dict, "shape");
  if (shape.empty() || shape.front() != '(') throw FormatError("NPY shape is not a tuple");
  const std::size_t close = shape.find(')');
  if (close == std::string_view::npos) throw FormatError("NPY shape is unterminated");
  std::string_view body = shape.substr(1, close - 1);
  while (!body.empty()) {
    while (!body.empty() && (body.front() == ' ' || body.front() == ',')) body.remove_prefix(1);
    if (body.empty()) break;
    std::size_t n = 0;
    std::size_t used = 0;
    while (used < body.size() && body[used] >= '0' && body[used] <= '9') {
      n = n * 10 + static_cast<std::size_t>(body[used] - '0');
      ++used;
    }
    if (used == 0) throw FormatError("NPY shape has a non-integer dimension");
    h.shape.push_back(n);
    body.remove_prefix(used);
  }
  return h;
}

template <typename T>
T load_le(const std::byte* p) {
  T value;
  std::memcpy(&value, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    auto bits = std::bit_cast<std::array<std::byte, sizeof(T)>>(value);
    std::reverse(bits.begin(), bits.end());
    value = std::bit_cast<T>(bits);
  }
  return value;
}

}  // namespace

JointTrajectory read_motion_array(std::span<const std::byte> bytes, double frame_rate) {
  if (bytes.size() < kMagicLen + 4 ||
      std::memcmp(bytes.data(), kMagic, kMagicLen) != 0) {
    throw FormatError("not an NPY file (bad magic)");
  }
  const auto major = static_cast<unsigned>(bytes[6]);
  const auto minor = static_cast<unsigned>(bytes[7]);
  if (major != 1 || minor != 0) {
    throw FormatError("unsupported NPY version " + std::to_string(major) + "." +
                      std::to_string(minor) + ", expected 1.0");
  }
  const std::size_t header_len = static_cast<std::size_t>(load_le<std::uint16_t>(bytes.data() + 8));
  const std::size_t data_offset = 10 + header_len;
  if (bytes.size() < data_offset) throw FormatError("NPY header is truncated");

  const std::string_view dict(reinterpret_cast<const char*>(bytes.data() + 10), header_len);
  const NpyHeader header = parse_header(dict);

  std::size_t item = 0;
  if (header.descr == "<f8") {
    item = 8;
  } else if (header.descr == "<f4") {
    item = 4;
  } else {
    throw ShapeError("unsupported dtype '" + header.descr + "' with shape " +
                     shape_string(header.shape) + ", expected <f4 or <f8");
  }
  if (header.fortran_order) {
    throw ShapeError("Fortran-order array with shape " + shape_string(header.shape) +
                     " is not supported, expected C order");
  }

  const auto& s = header.shape;
  const bool joints_by_xyz = s.size() == 3 && s[1] == kSmplJoints && s[2] == 3;
  const bool flat = s.size() == 2 && s[1] == kSmplJoints * 3;
  if (!joints_by_xyz && !flat) {
    throw ShapeError("incompatible motion array shape " + shape_string(s) +
                     ", expected (F, 22, 3) or (F, 66)");
  }
  const std::size_t frames = s[0];
  const std::size_t count = frames * kSmplJoints * 3;
  if (bytes.size() - data_offset < count * item) {
    throw FormatError("NPY data is truncated: need " + std::to_string(count * item) +
                      " bytes, have " + std::to_string(bytes.size() - data_offset));
  }

  std::vector<double> positions(count);
  const std::byte* data = bytes.data() + data_offset;
  for (std::size_t i = 0; i < count; ++i) {
    positions[i] = item == 8 ? load_le<double>(data + i * 8)
                             : static_cast<double>(load_le<float>(data + i * 4));
  }
  return JointTrajectory(frames, std::move(positions), frame_rate);
}

JointTrajectory load_motion_array(const std::filesystem::path& path, double frame_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return read_motion_array(std::as_bytes(std::span<const char>(raw)), frame_rate);
}

std::vector<std::byte> write_motion_array(const JointTrajectory& trajectory) {
  std::string dict = "{'descr': '<f8', 'fortran_order': False, 'shape': (" +
                     std::to_string(trajectory.frames()) + ", 22, 3), }";
  // magic(6) + version(2) + len(2) + dict + padding + '\n' is a multiple of 64.
  const std::size_t unpadded = 10 + dict.size() + 1;
  dict.append((64 - unpadded % 64) % 64, ' ');
  dict.push_back('\n');

  std::vector<std::byte> out;
  const auto positions = trajectory.positions();
  out.reserve(10 + dict.size() + positions.size() * 8);
  for (std::size_t i = 0; i < kMagicLen; ++i) out.push_back(static_cast<std::byte>(kMagic[i]));
  out.push_back(std::byte{1});
  out.push_back(std::byte{0});
  const auto len = static_cast<std::uint16_t>(dict.size());
  out.push_back(static_cast<std::byte>(len & 0xff));
  out.push_back(static_cast<std::byte>(len >> 8));
  for (char c : dict) out.push_back(static_cast<std::byte>(c));
  for (double v : positions) {
    auto bits = std::bit_cast<std::array<std::byte, 8>>(v);
    if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
    out.insert(out.end(), bits.begin(), bits.end());
  }
  return out;
}

}  // namespace fallsynth
