#include <algorithm>
#include <cctype>
#include <cmath>

#include "vt/error.hpp"
#include "vt/io.hpp"

namespace vt::io {
namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string_view next_token(std::string_view bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  return bytes.substr(start, pos - start);
}

int parse_positive(std::string_view tok, const char* what) {
  if (tok.empty()) throw FormatError("bad_header", std::string("PGM header: missing ") + what);
  long v = 0;
  for (char c : tok) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw FormatError("bad_header", std::string("PGM header: invalid ") + what);
    }
    v = v * 10 + (c - '0');
    if (v > 1'000'000) throw FormatError("bad_header", std::string("PGM header: ") + what + " too large");
  }
  if (v <= 0) throw FormatError("bad_header", std::string("PGM header: ") + what + " must be positive");
  return static_cast<int>(v);
}

}  // namespace

GrayImage decode_pgm(std::string_view bytes) {
  std::size_t pos = 0;
  std::string_view magic = next_token(bytes, pos);
  if (magic != "P5") {
    throw FormatError("unsupported_format", "only binary PGM (P5) is supported, found '" + std::string(magic) + "'");
  }
  int width = parse_positive(next_token(bytes, pos), "width");
  int height = parse_positive(next_token(bytes, pos), "height");
  int maxval = parse_positive(next_token(bytes, pos), "maxval");
  if (maxval > 65535) throw FormatError("bad_header", "PGM maxval exceeds 65535");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw FormatError("truncated", "PGM header not terminated");
  }
  ++pos;  // single whitespace before the raster

  const std::size_t sample_bytes = maxval > 255 ? 2 : 1;
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (bytes.size() - pos != n * sample_bytes) {
    throw FormatError("truncated", "PGM raster has " + std::to_string(bytes.size() - pos) + " bytes, expected " +
                                       std::to_string(n * sample_bytes));
  }
  GrayImage img(width, height);
  const auto* raster = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  for (std::size_t i = 0; i < n; ++i) {
    unsigned v = sample_bytes == 2 ? (unsigned{raster[2 * i]} << 8) | raster[2 * i + 1] : raster[i];
    if (v > static_cast<unsigned>(maxval)) throw FormatError("bad_sample", "PGM sample exceeds maxval");
    img.pixels[i] = static_cast<float>(static_cast<double>(v) / maxval);
  }
  return img;
}

GrayImage read_pgm(const std::filesystem::path& path) {
  try {
    return decode_pgm(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(e.code(), path.string() + ": " + e.what());
  }
}

std::string encode_pgm(const GrayImage& img, int maxval) {
  if (maxval < 1 || maxval > 65535) throw FormatError("bad_header", "PGM maxval must be in [1, 65535]");
  std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n" +
                    std::to_string(maxval) + "\n";
  for (float p : img.pixels) {
    double c = std::clamp(static_cast<double>(p), 0.0, 1.0);
    auto v = static_cast<unsigned>(std::lround(c * maxval));
    if (maxval > 255) out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v & 0xFF));
  }
  return out;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img, int maxval) {
  write_file_bytes(path, encode_pgm(img, maxval));
}

}  // namespace vt::io
