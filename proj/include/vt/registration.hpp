#pragma once

// Rigid alignment of MRI frames against a session reference: a static-anatomy
// mask restricts the similarity to head structures that should not move, and
// an exhaustive grid search picks the transform with the highest masked NCC.

#include <cstdint>
#include <vector>

#include "vt/io.hpp"

namespace vt::registration {

using io::GrayImage;

// Rotation (degrees) about `center` followed by translation (pixels).
struct RigidTransform {
  double dx = 0.0;
  double dy = 0.0;
  double theta_deg = 0.0;
  friend bool operator==(const RigidTransform&, const RigidTransform&) = default;
};

struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> cells;  // 1 = static head region

  Mask() = default;
  Mask(int w, int h, bool value = false)
      : width(w), height(h), cells(static_cast<std::size_t>(w) * h, value ? 1 : 0) {}
  bool at(int x, int y) const { return cells[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v) { cells[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
  std::size_t count() const;

  // Pixels with intensity >= threshold are in the mask.
  static Mask from_image(const GrayImage& img, float threshold = 0.5f);
};

struct SearchGrid {
  double max_shift_px = 4.0;
  double shift_step_px = 1.0;
  double max_theta_deg = 4.0;
  double theta_step_deg = 0.5;

  std::vector<RigidTransform> points() const;
};

struct Registration {
  RigidTransform transform;
  double score = 0.0;
};

// Pearson correlation of the two images over masked pixels. Throws
// NumericError when either image is constant under the mask.
double ncc_masked(const GrayImage& a, const GrayImage& b, const Mask& m);

// Output pixel p takes the input at T^-1(p) with T(q) = R(q - c) + c + d, using
// bilinear sampling and zero outside the image. The identity is bit-exact.
GrayImage apply_rigid(const GrayImage& img, const RigidTransform& t, double center_x, double center_y);
GrayImage apply_rigid(const GrayImage& img, const RigidTransform& t);  // about the image center

// Transform to apply to `img` so that it best matches `ref`. Ties go to the
// smallest (|theta|, |dx|+|dy|, dy, dx).
Registration register_image(const GrayImage& img, const GrayImage& ref, const Mask& mask,
                            const SearchGrid& grid = {});

// Strict ordering used for tie-breaking between equal scores.
bool preferred_on_tie(const RigidTransform& a, const RigidTransform& b);

}  // namespace vt::registration
