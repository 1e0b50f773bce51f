#include <doctest.h>

#include <random>

#include "oracles/oracles.hpp"
#include "support/fixtures.hpp"
#include "vt/contour_prep.hpp"

using namespace vt;
using namespace vt::contour_prep;

TEST_CASE("moving mean") {
  const Matrix c = Matrix::Constant(50, 3, 2.5);
  CHECK((moving_mean(c) - c).cwiseAbs().maxCoeff() <= 1e-15);
  std::mt19937_64 rng(1);
  const Matrix one = fixture::random_matrix(rng, 1, 5);
  CHECK(moving_mean(one) == one);
  const Matrix r = fixture::random_matrix(rng, 100, 7);
  for (int radius : {1, 5, 30}) {
    CHECK((moving_mean(r, radius) - Matrix(oracle::moving_mean(r, radius))).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("normalize and denormalize") {
  std::mt19937_64 rng(2);
  Matrix x = fixture::random_matrix(rng, 150, 800, 3.0);
  x.array() += 40.0;
  const auto n = normalize_contours(x);
  CHECK(n.state.moving_mean.rows() == 150);
  CHECK(n.state.window_radius == 30);
  CHECK((denormalize_contours(n.normalized, n.state) - x).cwiseAbs().maxCoeff() <= 1e-10);

  // Residual std of y is one.
  for (int c = 0; c < 800; c += 37) {
    const double sd = std::sqrt(n.normalized.col(c).squaredNorm() / 150.0);
    CHECK(std::abs(sd - 1.0) <= 1e-9);
  }

  CHECK(denormalize_contours(Matrix::Zero(150, 800), n.state) == n.state.moving_mean);
  const Matrix twice = denormalize_contours(2.0 * n.normalized, n.state) - n.state.moving_mean;
  const Matrix once = denormalize_contours(n.normalized, n.state) - n.state.moving_mean;
  CHECK((twice - 2.0 * once).cwiseAbs().maxCoeff() <= 1e-10);

  CHECK_THROWS(denormalize_contours(Matrix::Zero(149, 800), n.state));
}

TEST_CASE("adding a constant to a coordinate leaves y unchanged") {
  std::mt19937_64 rng(3);
  Matrix x = fixture::random_matrix(rng, 80, 800);
  const auto a = normalize_contours(x);
  x.col(17).array() += 12.0;
  const auto b = normalize_contours(x);
  CHECK((a.normalized - b.normalized).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("constant trajectories are floored to zero") {
  const Matrix x = Matrix::Constant(40, 800, 7.0);
  const auto n = normalize_contours(x);
  CHECK(n.normalized.cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(n.state.floored_columns.size() == 800);
  CHECK(n.state.std.minCoeff() >= kStdFloor);
}

TEST_CASE("session std is pooled") {
  std::mt19937_64 rng(4);
  const Matrix a = fixture::random_matrix(rng, 60, 800, 1.0);
  const Matrix b = fixture::random_matrix(rng, 90, 800, 4.0);
  const std::vector<const Matrix*> session = {&a, &b};
  const auto out = normalize_session(session);
  REQUIRE(out.size() == 2);
  CHECK(out[0].state.std == out[1].state.std);
  const Matrix ra = a - moving_mean(a), rb = b - moving_mean(b);
  for (int c = 0; c < 800; c += 91) {
    const double pooled = std::sqrt((ra.col(c).squaredNorm() + rb.col(c).squaredNorm()) / 150.0);
    CHECK(out[0].state.std[c] == doctest::Approx(pooled).epsilon(1e-12));
    const double sd = std::sqrt((out[0].normalized.col(c).squaredNorm() + out[1].normalized.col(c).squaredNorm()) / 150.0);
    CHECK(std::abs(sd - 1.0) <= 1e-9);
  }
}
