#include <cmath>
#include <limits>

#include "bytes.hpp"
#include "vt/error.hpp"
#include "vt/io.hpp"

namespace vt::io {

using detail::load_le;
using detail::store_le;

namespace {
constexpr std::string_view kMagic = "VTAF";
constexpr std::uint16_t kVersion = 1;
}  // namespace

std::string encode_feature_file(const Matrix& values, double frame_rate_hz) {
  if (!(frame_rate_hz > 0.0) || !std::isfinite(static_cast<float>(frame_rate_hz))) {
    throw FormatError("bad_rate", "feature frame rate must be positive and finite");
  }
  if (values.rows() > std::numeric_limits<std::uint32_t>::max() ||
      values.cols() > std::numeric_limits<std::uint32_t>::max()) {
    throw FormatError("too_large", "feature matrix too large");
  }
  std::string out;
  out.reserve(kFeatureHeaderBytes + 4 * static_cast<std::size_t>(values.size()));
  out += kMagic;
  store_le<std::uint16_t>(out, kVersion);
  store_le<std::uint32_t>(out, static_cast<std::uint32_t>(values.rows()));
  store_le<std::uint32_t>(out, static_cast<std::uint32_t>(values.cols()));
  store_le<float>(out, static_cast<float>(frame_rate_hz));
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      auto f = static_cast<float>(values(r, c));
      if (!std::isfinite(f)) {
        throw FormatError("non_finite", "feature value at (" + std::to_string(r) + "," + std::to_string(c) +
                                            ") is not a finite f32");
      }
      store_le<float>(out, f);
    }
  }
  return out;
}

FeatureData decode_feature_file(std::string_view bytes) {
  if (bytes.size() < kFeatureHeaderBytes) {
    throw FormatError("truncated", "feature file shorter than its 18-byte header");
  }
  if (bytes.substr(0, 4) != kMagic) throw FormatError("bad_magic", "feature file magic is not VTAF");
  const char* p = bytes.data();
  auto version = load_le<std::uint16_t>(p + 4);
  if (version != kVersion) {
    throw FormatError("bad_version", "unsupported feature file version " + std::to_string(version));
  }
  auto rows = load_le<std::uint32_t>(p + 6);
  auto cols = load_le<std::uint32_t>(p + 10);
  auto rate = load_le<float>(p + 14);
  const std::uint64_t expected = kFeatureHeaderBytes + 4ull * rows * cols;
  if (bytes.size() != expected) {
    throw FormatError("truncated", "feature file is " + std::to_string(bytes.size()) + " bytes, header implies " +
                                       std::to_string(expected));
  }
  if (!(rate > 0.0f) || !std::isfinite(rate)) throw FormatError("bad_rate", "feature frame rate not positive");

  FeatureData out;
  out.frame_rate_hz = rate;
  out.values.resize(rows, cols);
  const char* q = p + kFeatureHeaderBytes;
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c, q += 4) {
      float f = load_le<float>(q);
      if (!std::isfinite(f)) {
        throw FormatError("non_finite", "non-finite payload value at (" + std::to_string(r) + "," +
                                            std::to_string(c) + ")");
      }
      out.values(r, c) = f;
    }
  }
  return out;
}

void write_feature_file(const std::filesystem::path& path, const Matrix& values, double frame_rate_hz) {
  write_file_bytes(path, encode_feature_file(values, frame_rate_hz));
}

FeatureData read_feature_file(const std::filesystem::path& path) {
  try {
    return decode_feature_file(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace vt::io
