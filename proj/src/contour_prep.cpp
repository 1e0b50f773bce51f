#include "vt/contour_prep.hpp"

#include <algorithm>

#include "vt/error.hpp"

namespace vt::contour_prep {

Matrix moving_mean(const Matrix& x, int radius) {
  const Eigen::Index T = x.rows();
  Matrix out(T, x.cols());
  for (Eigen::Index t = 0; t < T; ++t) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, t - radius);
    const Eigen::Index hi = std::min<Eigen::Index>(T - 1, t + radius);
    out.row(t) = x.middleRows(lo, hi - lo + 1).colwise().sum() / static_cast<double>(hi - lo + 1);
  }
  return out;
}

std::vector<NormalizedAcquisition> normalize_session(std::span<const Matrix* const> acquisitions, int radius) {
  if (acquisitions.empty()) throw StructuralError("session has no acquisitions");
  const Eigen::Index cols = acquisitions.front()->cols();
  std::vector<NormalizedAcquisition> out(acquisitions.size());
  Eigen::Index rows = 0;
  Vector ss = Vector::Zero(cols);
  for (std::size_t i = 0; i < acquisitions.size(); ++i) {
    const Matrix& x = *acquisitions[i];
    if (x.cols() != cols) throw StructuralError("acquisitions in one session differ in width");
    out[i].state.moving_mean = moving_mean(x, radius);
    out[i].state.window_radius = radius;
    out[i].normalized = x - out[i].state.moving_mean;  // residual for now
    ss += out[i].normalized.array().square().matrix().colwise().sum().transpose();
    rows += x.rows();
  }
  if (rows < 2) throw StructuralError("session needs at least 2 frames");

  Vector std = (ss / static_cast<double>(rows)).cwiseSqrt();
  std::vector<int> floored;
  for (Eigen::Index c = 0; c < cols; ++c) {
    if (!(std[c] >= kStdFloor)) {
      std[c] = kStdFloor;
      floored.push_back(static_cast<int>(c));
    }
  }
  for (auto& acq : out) {
    acq.normalized = (acq.normalized.array().rowwise() / std.transpose().array()).matrix();
    acq.state.std = std;
    acq.state.floored_columns = floored;
  }
  return out;
}

NormalizedAcquisition normalize_contours(const Matrix& x, int radius) {
  const Matrix* one[] = {&x};
  return std::move(normalize_session(one, radius).front());
}

Matrix denormalize_contours(const Matrix& y, const ContourNormState& state) {
  if (y.rows() != state.moving_mean.rows() || y.cols() != state.moving_mean.cols() || y.cols() != state.std.size()) {
    throw StructuralError("normalized contours (" + std::to_string(y.rows()) + "x" + std::to_string(y.cols()) +
                          ") do not match the stored state (" + std::to_string(state.moving_mean.rows()) + "x" +
                          std::to_string(state.moving_mean.cols()) + ")");
  }
  return (y.array().rowwise() * state.std.transpose().array()).matrix() + state.moving_mean;
}

}  // namespace vt::contour_prep
