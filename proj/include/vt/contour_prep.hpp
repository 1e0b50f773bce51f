#pragma once

// Contour trajectory normalization: each coordinate has its +-30 frame moving
// average removed and is divided by the per-session standard deviation of the
// resulting residual. The moving mean is kept so predictions can be mapped
// back to millimeters.

#include <span>
#include <vector>

#include "vt/datamodel.hpp"

namespace vt::contour_prep {

inline constexpr int kWindowRadius = 30;
inline constexpr double kStdFloor = 1e-8;

// Row t = mean of rows max(0, t-r) .. min(T-1, t+r).
Matrix moving_mean(const Matrix& x, int radius = kWindowRadius);

struct ContourNormState {
  Matrix moving_mean;  // T x 800, one row per frame
  Vector std;          // 800, shared by the whole session
  int window_radius = kWindowRadius;
  std::vector<int> floored_columns;
};

struct NormalizedAcquisition {
  Matrix normalized;
  ContourNormState state;
};

// Normalizes every acquisition of one session with a pooled residual std.
std::vector<NormalizedAcquisition> normalize_session(std::span<const Matrix* const> acquisitions,
                                                     int radius = kWindowRadius);
// Single-acquisition session.
NormalizedAcquisition normalize_contours(const Matrix& x, int radius = kWindowRadius);

Matrix denormalize_contours(const Matrix& y, const ContourNormState& state);

}  // namespace vt::contour_prep
