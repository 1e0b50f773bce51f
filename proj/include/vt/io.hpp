#pragma once

// Readers and writers for corpus artifacts. Every reader validates its input
// fully and raises FormatError (with a stable code) instead of coercing.

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vt/datamodel.hpp"

namespace vt::io {

std::string read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::string_view bytes);

// ---- audio -----------------------------------------------------------------

// Mono PCM (16/24/32-bit integer or 32-bit float) at exactly 16 kHz.
// Integer samples are scaled by 2^-(bits-1).
std::vector<double> read_wav_mono16k(const std::filesystem::path& path);
std::vector<double> decode_wav_mono16k(std::string_view bytes);
// 16-bit PCM; samples are clamped to [-1, 1) before quantization.
std::string encode_wav_pcm16(std::span<const double> samples, int sample_rate = kAudioRateHz);
void write_wav_pcm16(const std::filesystem::path& path, std::span<const double> samples,
                     int sample_rate = kAudioRateHz);

// ---- phone labels ----------------------------------------------------------

// One segment per line: start_s<TAB>end_s<TAB>label. Output sorted by start.
std::vector<PhoneSegment> parse_phone_labels(std::string_view text);
std::vector<PhoneSegment> read_phone_labels(const std::filesystem::path& path);
std::string format_phone_labels(std::span<const PhoneSegment> phones);
void write_phone_labels(const std::filesystem::path& path, std::span<const PhoneSegment> phones);

// ---- feature files ---------------------------------------------------------

inline constexpr std::size_t kFeatureHeaderBytes = 18;

struct FeatureData {
  Matrix values;  // T x F
  double frame_rate_hz = kFrameRateHz;
};

// "VTAF", u16 version, u32 rows, u32 cols, f32 rate, rows*cols f32 payload,
// all little-endian. Values must be finite (and representable as f32).
std::string encode_feature_file(const Matrix& values, double frame_rate_hz);
FeatureData decode_feature_file(std::string_view bytes);
void write_feature_file(const std::filesystem::path& path, const Matrix& values, double frame_rate_hz);
FeatureData read_feature_file(const std::filesystem::path& path);

// ---- contours --------------------------------------------------------------

// In memory, frames are in millimeters; on disk coordinates are pixels and are
// scaled by pixel_mm on read.
struct ContourDocument {
  std::string acquisition_id;
  std::string session_id;
  double pixel_mm = kReferencePixelMm;
  std::vector<ContourFrame> frames;
};

ContourDocument parse_contours(std::string_view json_text);
std::string dump_contours(const ContourDocument& doc);
ContourDocument read_contours(const std::filesystem::path& path);
void write_contours(const std::filesystem::path& path, const ContourDocument& doc);

// ---- images ----------------------------------------------------------------

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;  // row-major, intensities in [0, 1]

  GrayImage() = default;
  GrayImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, 0.0f) {}
  float& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  float at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

// Binary PGM (P5) only; maxval up to 65535 (two-byte samples are big-endian).
GrayImage decode_pgm(std::string_view bytes);
GrayImage read_pgm(const std::filesystem::path& path);
std::string encode_pgm(const GrayImage& img, int maxval = 65535);
void write_pgm(const std::filesystem::path& path, const GrayImage& img, int maxval = 65535);

}  // namespace vt::io
