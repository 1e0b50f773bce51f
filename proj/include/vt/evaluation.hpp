#pragma once

// Error metrics on denormalized contours, tract-variable agreement, outlier
// flagging and phone-level aggregation for significance testing.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vt/datamodel.hpp"
#include "vt/statistics.hpp"
#include "vt/tract_variables.hpp"

namespace vt::eval {

// T x (cols / 100): RMSE over each articulator's 100 coordinates per frame.
Matrix frame_articulator_rmse(const Matrix& pred, const Matrix& truth);
// Row means of frame_articulator_rmse.
std::vector<double> frame_mean_rmse(const Matrix& per_articulator);

double mean(std::span<const double> x);
double population_std(std::span<const double> x);
double median(std::span<const double> x);
// Linear interpolation between order statistics at position p * (n - 1).
double quantile_inclusive(std::span<const double> x, double p);

double pearson(std::span<const double> x, std::span<const double> y);

// Zero counts as open (+1).
double velum_sign_accuracy(std::span<const double> pred_scores, std::span<const double> truth_scores);

enum class OutlierRule { kWhisker, kStrictQ3 };

struct Outliers {
  std::vector<std::size_t> ids;  // positions in the input, ascending
  double threshold = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  OutlierRule rule = OutlierRule::kWhisker;
};

// Whisker: x > Q3 + 1.5 (Q3 - Q1). Strict: x > Q3.
Outliers flag_outliers(std::span<const double> frame_rmse, OutlierRule rule = OutlierRule::kWhisker);

struct PhoneAggregate {
  std::vector<double> values;       // one per phone segment with frames
  std::vector<std::string> labels;
  std::size_t skipped_segments = 0;  // segments containing no frame center
};

// Frame i (index frame_index[i]) has its center at (frame_index + 0.5) / rate.
PhoneAggregate aggregate_by_phone(std::span<const double> frame_scores, std::span<const int> frame_index,
                                  std::span<const PhoneSegment> phones, double frame_rate = kFrameRateHz);
PhoneAggregate aggregate_by_phone(std::span<const double> frame_scores, std::span<const PhoneSegment> phones,
                                  double frame_rate = kFrameRateHz);

// Copies articulators missing from `pred` (the fixed landmarks) out of `truth`.
std::vector<ContourFrame> with_landmarks(std::span<const ContourFrame> pred, std::span<const ContourFrame> truth);

struct EvalInput {
  std::string id;
  std::vector<int> frame_index;  // one per row
  Matrix pred;                   // T x 800, mm
  std::vector<ContourFrame> truth_frames;  // all articulators incl. landmarks, mm
  std::vector<PhoneSegment> phones;
};

struct ArticulatorStats {
  std::string name;
  double rmse_mean = 0.0;
  double rmse_std = 0.0;
  double rmse_median = 0.0;
};

struct TvAgreement {
  std::string name;
  std::optional<double> pearson;  // empty when undefined (constant series)
};

struct FrameId {
  std::string acquisition;
  int frame = 0;
};

struct EvalReport {
  std::vector<ArticulatorStats> articulators;
  double overall_mean = 0.0;
  double overall_median = 0.0;
  std::size_t n_frames = 0;
  std::vector<TvAgreement> tvs;
  std::optional<double> vel_accuracy;
  Outliers outliers;
  std::vector<FrameId> outlier_frames;
  std::size_t n_phone_samples = 0;
  std::size_t skipped_phone_segments = 0;
  std::optional<stats::NormalityTest> normality;  // of phone-aggregated frame RMSE
  std::vector<double> frame_rmse;                 // mean over articulators, in input order
  std::vector<double> phone_rmse;                 // phone-aggregated frame_rmse
};

struct EvalOptions {
  tv::TvConfig tvs = tv::TvConfig::defaults();
  const tv::VelumPcaModel* pca = nullptr;  // fitted on the truth frames when null
  OutlierRule outlier_rule = OutlierRule::kWhisker;
};

EvalReport evaluate(std::span<const EvalInput> inputs, const EvalOptions& options = {});

// JSON text; includes the published reference numbers as constants.
std::string report_to_json(const EvalReport& report);

}  // namespace vt::eval
