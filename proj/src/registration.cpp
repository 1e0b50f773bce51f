#include "vt/registration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

#include "vt/error.hpp"
#include "vt/parallel.hpp"

namespace vt::registration {
namespace {

void check_shapes(const GrayImage& a, const GrayImage& b, const Mask& m) {
  if (a.width != b.width || a.height != b.height || a.width != m.width || a.height != m.height) {
    throw StructuralError("image/mask shapes differ");
  }
}

double sample_bilinear(const GrayImage& img, double sx, double sy) {
  const double fx0 = std::floor(sx);
  const double fy0 = std::floor(sy);
  const double fx = sx - fx0;
  const double fy = sy - fy0;
  const int x0 = static_cast<int>(fx0);
  const int y0 = static_cast<int>(fy0);
  auto px = [&](int x, int y) -> double {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return 0.0;
    return img.at(x, y);
  };
  return px(x0, y0) * (1.0 - fx) * (1.0 - fy) + px(x0 + 1, y0) * fx * (1.0 - fy) +
         px(x0, y0 + 1) * (1.0 - fx) * fy + px(x0 + 1, y0 + 1) * fx * fy;
}

// Maps an output pixel back to its source location under t.
struct InverseMap {
  double cos_t, sin_t, cx, cy, dx, dy;

  InverseMap(const RigidTransform& t, double center_x, double center_y)
      : cos_t(std::cos(t.theta_deg * std::numbers::pi / 180.0)),
        sin_t(std::sin(t.theta_deg * std::numbers::pi / 180.0)),
        cx(center_x),
        cy(center_y),
        dx(t.dx),
        dy(t.dy) {}

  void operator()(double x, double y, double& sx, double& sy) const {
    const double ux = x - cx - dx;
    const double uy = y - cy - dy;
    sx = cos_t * ux + sin_t * uy + cx;
    sy = -sin_t * ux + cos_t * uy + cy;
  }
};

bool is_identity(const RigidTransform& t) { return t.dx == 0.0 && t.dy == 0.0 && t.theta_deg == 0.0; }

// NCC of two equally long sample lists; NaN when undefined.
double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<double> grid_axis(double max_abs, double step) {
  if (!(step > 0.0) || !(max_abs >= 0.0)) throw UsageError("search grid steps must be positive");
  const auto n = static_cast<int>(std::floor(2.0 * max_abs / step + 1e-9));
  std::vector<double> v;
  for (int i = 0; i <= n; ++i) v.push_back(-max_abs + i * step);
  return v;
}

}  // namespace

std::size_t Mask::count() const {
  std::size_t n = 0;
  for (auto c : cells) n += c != 0;
  return n;
}

Mask Mask::from_image(const GrayImage& img, float threshold) {
  Mask m(img.width, img.height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) m.cells[i] = img.pixels[i] >= threshold ? 1 : 0;
  return m;
}

std::vector<RigidTransform> SearchGrid::points() const {
  std::vector<RigidTransform> out;
  const auto thetas = grid_axis(max_theta_deg, theta_step_deg);
  const auto shifts = grid_axis(max_shift_px, shift_step_px);
  for (double th : thetas)
    for (double dy : shifts)
      for (double dx : shifts) out.push_back({dx, dy, th});
  return out;
}

double ncc_masked(const GrayImage& a, const GrayImage& b, const Mask& m) {
  check_shapes(a, b, m);
  std::vector<double> va, vb;
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      if (!m.at(x, y)) continue;
      va.push_back(a.at(x, y));
      vb.push_back(b.at(x, y));
    }
  }
  if (va.size() < 2) throw NumericError("NCC needs at least 2 masked pixels");
  double r = correlation(va, vb);
  if (std::isnan(r)) throw NumericError("NCC undefined: zero variance under the mask");
  return r;
}

GrayImage apply_rigid(const GrayImage& img, const RigidTransform& t, double center_x, double center_y) {
  if (is_identity(t)) return img;
  GrayImage out(img.width, img.height);
  const InverseMap inv(t, center_x, center_y);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double sx, sy;
      inv(x, y, sx, sy);
      out.at(x, y) = static_cast<float>(sample_bilinear(img, sx, sy));
    }
  }
  return out;
}

GrayImage apply_rigid(const GrayImage& img, const RigidTransform& t) {
  return apply_rigid(img, t, (img.width - 1) / 2.0, (img.height - 1) / 2.0);
}

bool preferred_on_tie(const RigidTransform& a, const RigidTransform& b) {
  auto key = [](const RigidTransform& t) {
    return std::make_tuple(std::abs(t.theta_deg), std::abs(t.dx) + std::abs(t.dy), t.dy, t.dx);
  };
  return key(a) < key(b);
}

Registration register_image(const GrayImage& img, const GrayImage& ref, const Mask& mask, const SearchGrid& grid) {
  check_shapes(img, ref, mask);
  std::vector<std::pair<int, int>> pixels;
  std::vector<double> ref_values;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (!mask.at(x, y)) continue;
      pixels.emplace_back(x, y);
      ref_values.push_back(ref.at(x, y));
    }
  }
  if (pixels.size() < 2) throw NumericError("registration mask needs at least 2 pixels");

  const auto candidates = grid.points();
  std::vector<double> scores(candidates.size());
  const double cx = (img.width - 1) / 2.0;
  const double cy = (img.height - 1) / 2.0;
  parallel_for(candidates.size(), [&](std::size_t k) {
    const RigidTransform& t = candidates[k];
    const InverseMap inv(t, cx, cy);
    std::vector<double> warped(pixels.size());
    for (std::size_t i = 0; i < pixels.size(); ++i) {
      double sx, sy;
      inv(pixels[i].first, pixels[i].second, sx, sy);
      // Round through float so scores match ncc_masked(apply_rigid(img, t), ...).
      warped[i] = is_identity(t) ? img.at(pixels[i].first, pixels[i].second)
                                 : static_cast<float>(sample_bilinear(img, sx, sy));
    }
    scores[k] = correlation(warped, ref_values);
  });

  std::size_t best = candidates.size();
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (std::isnan(scores[k])) continue;
    if (best == candidates.size() || scores[k] > scores[best] ||
        (scores[k] == scores[best] && preferred_on_tie(candidates[k], candidates[best]))) {
      best = k;
    }
  }
  if (best == candidates.size()) throw NumericError("NCC undefined at every grid point");
  return {candidates[best], scores[best]};
}

}  // namespace vt::registration
