#include <doctest.h>

#include <random>

#include "support/fixtures.hpp"
#include "vt/datamodel.hpp"
#include "vt/error.hpp"

using namespace vt;

TEST_CASE("articulator names and codes") {
  CHECK(code(ArticulatorId::kTongue) == 5);
  CHECK(code(ArticulatorId::kUpperIncisor) == 9);
  for (int c = 0; c < kNumArticulatorIds; ++c) {
    const auto id = articulator_from_code(c);
    CHECK(articulator_from_name(articulator_name(id)) == id);
    CHECK(is_predicted(id) == (c < kNumPredicted));
  }
  CHECK_FALSE(articulator_from_name("nose").has_value());
  CHECK_THROWS_AS(articulator_from_code(10), StructuralError);
}

TEST_CASE("flatten index map") {
  // Every (articulator, point, axis) lands on a distinct slot inside its own
  // 100-wide block, X before Y.
  std::vector<int> hits(kFrameVectorSize, 0);
  for (ArticulatorId id : kPredictedArticulators) {
    for (int p = 0; p < kContourPoints; ++p) {
      const int ix = flat_index(id, p, Axis::kX);
      const int iy = flat_index(id, p, Axis::kY);
      CHECK(ix == code(id) * 100 + p);
      CHECK(iy == code(id) * 100 + 50 + p);
      ++hits[ix];
      ++hits[iy];
    }
  }
  for (int h : hits) CHECK(h == 1);

  ContourFrame f;
  for (ArticulatorId id : kPredictedArticulators) f.set(id, Contour{});
  Contour tongue{};
  tongue[3] = {12.5, 40.1};
  f.set(ArticulatorId::kTongue, tongue);
  const Vector v = flatten_frame(f);
  CHECK(v[5 * 100 + 3] == 12.5);
  CHECK(v[5 * 100 + 53] == 40.1);
}

TEST_CASE("flatten of all-zero frame") {
  ContourFrame f;
  for (ArticulatorId id : kPredictedArticulators) f.set(id, Contour{});
  const Vector v = flatten_frame(f);
  CHECK(v.size() == kFrameVectorSize);
  CHECK(v.isZero(0.0));
}

TEST_CASE("flatten and unflatten are exact inverses") {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 20; ++k) {
    auto f = fixture::random_frame(rng, k);
    f.contours[code(ArticulatorId::kLowerIncisor)].reset();
    f.contours[code(ArticulatorId::kUpperIncisor)].reset();
    const Vector fv = flatten_frame(f);
    CHECK(unflatten_frame(std::span<const double>(fv.data(), fv.size()), k) == f);

    const Vector v = fixture::random_matrix(rng, 1, kFrameVectorSize).row(0).transpose();
    CHECK(flatten_frame(unflatten_frame(std::span<const double>(v.data(), v.size()))) == v);
  }
}

TEST_CASE("flatten_frames stacks rows") {
  std::mt19937_64 rng(2);
  std::vector<ContourFrame> frames;
  for (int t = 0; t < 4; ++t) frames.push_back(fixture::random_frame(rng, t));
  const Matrix m = flatten_frames(frames);
  CHECK(m.rows() == 4);
  CHECK(m.cols() == kFrameVectorSize);
  for (int t = 0; t < 4; ++t) CHECK(m.row(t).transpose() == flatten_frame(frames[t]));
  const auto back = unflatten_frames(m, 7);
  CHECK(back[2].frame_index == 9);
  CHECK(flatten_frame(back[3]) == flatten_frame(frames[3]));
}

TEST_CASE("structural errors") {
  ContourFrame f;
  for (ArticulatorId id : kPredictedArticulators) f.set(id, Contour{});
  f.contours[code(ArticulatorId::kVelumMidline)].reset();
  try {
    flatten_frame(f);
    FAIL("expected an error");
  } catch (const StructuralError& e) {
    CHECK(std::string(e.what()).find("velum_midline") != std::string::npos);
  }
  const std::vector<double> short_vec(799, 0.0);
  CHECK_THROWS_AS(unflatten_frame(short_vec), StructuralError);
}

TEST_CASE("frame and acquisition validation") {
  std::mt19937_64 rng(3);
  Acquisition acq;
  acq.id = "a";
  acq.frames = {fixture::random_frame(rng, 0), fixture::random_frame(rng, 1)};
  CHECK_NOTHROW(acq.validate());
  acq.frames[1].frame_index = 0;
  CHECK_THROWS_AS(acq.validate(), StructuralError);
  acq.frames[1].frame_index = 1;

  Contour bad{};
  bad[4].x = std::nan("");
  acq.frames[0].set(ArticulatorId::kTongue, bad);
  CHECK_THROWS_AS(acq.frames[0].validate(), StructuralError);
  acq.frames[0] = fixture::random_frame(rng, 0);

  acq.audio.assign(16000, 0.0);
  acq.phones = {{"a", 0.0, 0.5}, {"b", 0.4, 0.8}};
  CHECK_THROWS_AS(acq.validate(), StructuralError);
  acq.phones = {{"a", 0.0, 0.5}, {"b", 0.5, 1.2}};
  CHECK_THROWS_AS(acq.validate(), StructuralError);
  acq.phones = {{"a", 0.0, 0.5}, {"b", 0.5, 1.0}};
  CHECK_NOTHROW(acq.validate());
  CHECK(acq.audio_duration_s() == 1.0);
  CHECK(acq.frames[1].time_s() == 1.0 / 50);
}
