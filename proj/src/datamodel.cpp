#include "vt/datamodel.hpp"

#include <cmath>

#include "vt/error.hpp"

namespace vt {
namespace {

constexpr std::array<std::string_view, kNumArticulatorIds> kNames = {
    "arytenoid", "epiglottis",  "lower_lip",     "pharyngeal_wall", "velum_midline",
    "tongue",    "upper_lip",   "vocal_folds",   "lower_incisor",   "upper_incisor",
};

}  // namespace

std::string_view articulator_name(ArticulatorId id) { return kNames.at(code(id)); }

std::optional<ArticulatorId> articulator_from_name(std::string_view name) {
  for (int i = 0; i < kNumArticulatorIds; ++i) {
    if (kNames[i] == name) return static_cast<ArticulatorId>(i);
  }
  return std::nullopt;
}

ArticulatorId articulator_from_code(int c) {
  if (c < 0 || c >= kNumArticulatorIds) {
    throw StructuralError("articulator code out of range: " + std::to_string(c));
  }
  return static_cast<ArticulatorId>(c);
}

const Contour& ContourFrame::at(ArticulatorId id) const {
  const auto& c = contours[code(id)];
  if (!c) {
    throw StructuralError("frame " + std::to_string(frame_index) + " is missing articulator '" +
                          std::string(articulator_name(id)) + "'");
  }
  return *c;
}

void ContourFrame::validate() const {
  for (ArticulatorId id : kPredictedArticulators) at(id);
  for (int a = 0; a < kNumArticulatorIds; ++a) {
    if (!contours[a]) continue;
    for (const Point& p : *contours[a]) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw StructuralError("frame " + std::to_string(frame_index) + ": non-finite coordinate in '" +
                              std::string(kNames[a]) + "'");
      }
    }
  }
}

void Acquisition::validate() const {
  for (std::size_t i = 0; i < frames.size(); ++i) {
    frames[i].validate();
    if (i > 0 && frames[i].frame_index <= frames[i - 1].frame_index) {
      throw StructuralError("acquisition " + id + ": frame indices not strictly increasing at position " +
                            std::to_string(i));
    }
  }
  for (std::size_t i = 0; i < phones.size(); ++i) {
    const PhoneSegment& p = phones[i];
    if (!(p.start_s >= 0.0 && p.end_s > p.start_s)) {
      throw StructuralError("acquisition " + id + ": invalid phone segment " + std::to_string(i));
    }
    if (i > 0 && p.start_s < phones[i - 1].end_s) {
      throw StructuralError("acquisition " + id + ": overlapping phone segments " + std::to_string(i - 1) +
                            " and " + std::to_string(i));
    }
    if (!audio.empty() && p.end_s > audio_duration_s() + 1e-9) {
      throw StructuralError("acquisition " + id + ": phone segment " + std::to_string(i) +
                            " extends past the audio");
    }
  }
}

Vector flatten_frame(const ContourFrame& frame) {
  Vector v(kFrameVectorSize);
  for (ArticulatorId id : kPredictedArticulators) {
    const Contour& c = frame.at(id);
    for (int p = 0; p < kContourPoints; ++p) {
      v[flat_index(id, p, Axis::kX)] = c[p].x;
      v[flat_index(id, p, Axis::kY)] = c[p].y;
    }
  }
  return v;
}

ContourFrame unflatten_frame(std::span<const double> v, int frame_index) {
  if (v.size() != static_cast<std::size_t>(kFrameVectorSize)) {
    throw StructuralError("flattened frame must have " + std::to_string(kFrameVectorSize) +
                          " values, got " + std::to_string(v.size()));
  }
  ContourFrame f;
  f.frame_index = frame_index;
  for (ArticulatorId id : kPredictedArticulators) {
    Contour c;
    for (int p = 0; p < kContourPoints; ++p) {
      c[p] = {v[flat_index(id, p, Axis::kX)], v[flat_index(id, p, Axis::kY)]};
    }
    f.set(id, c);
  }
  return f;
}

Matrix flatten_frames(std::span<const ContourFrame> frames) {
  Matrix m(static_cast<Eigen::Index>(frames.size()), kFrameVectorSize);
  for (std::size_t t = 0; t < frames.size(); ++t) m.row(t) = flatten_frame(frames[t]).transpose();
  return m;
}

std::vector<ContourFrame> unflatten_frames(const Matrix& m, int first_index) {
  std::vector<ContourFrame> out;
  out.reserve(m.rows());
  for (Eigen::Index t = 0; t < m.rows(); ++t) {
    out.push_back(unflatten_frame(std::span<const double>(m.row(t).data(), m.cols()),
                                  first_index + static_cast<int>(t)));
  }
  return out;
}

}  // namespace vt
