#pragma once

// Shared domain types. Coordinates are millimeters in image space: origin
// top-left, x to the right, y downward.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace vt {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr int kContourPoints = 50;
inline constexpr int kCoordsPerArticulator = 2 * kContourPoints;
inline constexpr int kNumPredicted = 8;
inline constexpr int kNumArticulatorIds = 10;
inline constexpr int kFrameVectorSize = kNumPredicted * kCoordsPerArticulator;
inline constexpr double kFrameRateHz = 50.0;
inline constexpr int kAudioRateHz = 16000;
inline constexpr double kReferencePixelMm = 1.62;
inline constexpr int kCorpusImageSize = 136;

// Integer codes are part of the file formats; do not reorder.
enum class ArticulatorId : int {
  kArytenoid = 0,
  kEpiglottis = 1,
  kLowerLip = 2,
  kPharyngealWall = 3,
  kVelumMidline = 4,
  kTongue = 5,
  kUpperLip = 6,
  kVocalFolds = 7,
  kLowerIncisor = 8,  // landmark
  kUpperIncisor = 9,  // landmark, includes the hard palate
};

inline constexpr std::array<ArticulatorId, kNumPredicted> kPredictedArticulators = {
    ArticulatorId::kArytenoid,      ArticulatorId::kEpiglottis,
    ArticulatorId::kLowerLip,       ArticulatorId::kPharyngealWall,
    ArticulatorId::kVelumMidline,   ArticulatorId::kTongue,
    ArticulatorId::kUpperLip,       ArticulatorId::kVocalFolds,
};

constexpr int code(ArticulatorId id) { return static_cast<int>(id); }
constexpr bool is_predicted(ArticulatorId id) { return code(id) < kNumPredicted; }

std::string_view articulator_name(ArticulatorId id);
std::optional<ArticulatorId> articulator_from_name(std::string_view name);
ArticulatorId articulator_from_code(int code);

enum class Axis : int { kX = 0, kY = 1 };

// Position of one coordinate inside a flattened 800-vector:
// [articulator code * 100] + [0 for X, 50 for Y] + point.
constexpr int flat_index(ArticulatorId id, int point, Axis axis) {
  return code(id) * kCoordsPerArticulator + static_cast<int>(axis) * kContourPoints + point;
}

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

using Contour = std::array<Point, kContourPoints>;

struct ContourFrame {
  int frame_index = 0;
  std::array<std::optional<Contour>, kNumArticulatorIds> contours{};

  double time_s() const { return frame_index / kFrameRateHz; }
  bool has(ArticulatorId id) const { return contours[code(id)].has_value(); }
  // Throws StructuralError naming the articulator when absent.
  const Contour& at(ArticulatorId id) const;
  Contour& set(ArticulatorId id, const Contour& c) { return contours[code(id)].emplace(c); }

  // All predicted articulators present and every coordinate finite.
  void validate() const;

  friend bool operator==(const ContourFrame&, const ContourFrame&) = default;
};

struct PhoneSegment {
  std::string label;
  double start_s = 0.0;
  double end_s = 0.0;
  friend bool operator==(const PhoneSegment&, const PhoneSegment&) = default;
};

struct PixelGeometry {
  double pixel_mm = kReferencePixelMm;
  int width = kCorpusImageSize;
  int height = kCorpusImageSize;
};

struct Acquisition {
  std::string id;
  std::string session_id;
  std::vector<ContourFrame> frames;
  std::vector<double> audio;  // mono, kAudioRateHz
  std::vector<PhoneSegment> phones;

  double audio_duration_s() const { return static_cast<double>(audio.size()) / kAudioRateHz; }
  // Frames strictly increasing; phones ordered, non-overlapping and (when audio
  // is loaded) inside the audio duration.
  void validate() const;
};

Vector flatten_frame(const ContourFrame& frame);
ContourFrame unflatten_frame(std::span<const double> v, int frame_index = 0);

// Row t of the result is flatten_frame(frames[t]).
Matrix flatten_frames(std::span<const ContourFrame> frames);
std::vector<ContourFrame> unflatten_frames(const Matrix& m, int first_index = 0);

}  // namespace vt
