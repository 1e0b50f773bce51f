#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "vt/datamodel.hpp"

namespace fixture {

inline vt::ContourFrame random_frame(std::mt19937_64& rng, int index = 0, double lo = 0.0, double hi = 100.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  vt::ContourFrame f;
  f.frame_index = index;
  for (int a = 0; a < vt::kNumArticulatorIds; ++a) {
    vt::Contour c;
    for (auto& p : c) p = {u(rng), u(rng)};
    f.contours[a] = c;
  }
  return f;
}

inline vt::Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  vt::Matrix m(rows, cols);
  for (double& v : m.reshaped()) v = nd(rng);
  return m;
}

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("vt_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& p) const { return path_ / p; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixture
