#include "vt/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json_util.hpp"
#include "vt/error.hpp"

namespace vt::eval {
namespace {

using detail::json;

std::vector<double> sorted_copy(std::span<const double> x) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  return s;
}

double quantile_sorted(const std::vector<double>& s, double p) {
  const double pos = p * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

Matrix frame_articulator_rmse(const Matrix& pred, const Matrix& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
    throw StructuralError("prediction is " + std::to_string(pred.rows()) + "x" + std::to_string(pred.cols()) +
                          " but truth is " + std::to_string(truth.rows()) + "x" + std::to_string(truth.cols()));
  }
  if (pred.cols() % kCoordsPerArticulator != 0) {
    throw StructuralError("contour matrices must have a multiple of 100 columns");
  }
  const Eigen::Index n_art = pred.cols() / kCoordsPerArticulator;
  Matrix out(pred.rows(), n_art);
  for (Eigen::Index t = 0; t < pred.rows(); ++t) {
    for (Eigen::Index a = 0; a < n_art; ++a) {
      const auto d = pred.row(t).segment(a * kCoordsPerArticulator, kCoordsPerArticulator) -
                     truth.row(t).segment(a * kCoordsPerArticulator, kCoordsPerArticulator);
      out(t, a) = std::sqrt(d.squaredNorm() / kCoordsPerArticulator);
    }
  }
  return out;
}

std::vector<double> frame_mean_rmse(const Matrix& per_articulator) {
  std::vector<double> out(per_articulator.rows());
  for (Eigen::Index t = 0; t < per_articulator.rows(); ++t) out[t] = per_articulator.row(t).mean();
  return out;
}

double mean(std::span<const double> x) {
  if (x.empty()) throw NumericError("mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double population_std(std::span<const double> x) {
  const double m = mean(x);
  double s = 0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size()));
}

double median(std::span<const double> x) {
  if (x.empty()) throw NumericError("median of an empty sample");
  return quantile_sorted(sorted_copy(x), 0.5);
}

double quantile_inclusive(std::span<const double> x, double p) {
  if (x.empty()) throw NumericError("quantile of an empty sample");
  if (p < 0 || p > 1) throw UsageError("quantile level must be in [0,1]");
  return quantile_sorted(sorted_copy(x), p);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw StructuralError("pearson: series lengths differ");
  if (x.size() < 2) throw NumericError("pearson: needs at least 2 samples");
  const double mx = mean(x), my = mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0) || !(syy > 0)) throw NumericError("pearson: correlation undefined for a constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double velum_sign_accuracy(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) throw StructuralError("velum accuracy: series lengths differ");
  if (pred.empty()) throw NumericError("velum accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += (pred[i] >= 0) == (truth[i] >= 0);
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

Outliers flag_outliers(std::span<const double> x, OutlierRule rule) {
  if (x.size() < 4) throw NumericError("outlier flagging needs at least 4 values");
  const auto s = sorted_copy(x);
  Outliers o;
  o.rule = rule;
  o.q1 = quantile_sorted(s, 0.25);
  o.q3 = quantile_sorted(s, 0.75);
  o.threshold = rule == OutlierRule::kWhisker ? o.q3 + 1.5 * (o.q3 - o.q1) : o.q3;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > o.threshold) o.ids.push_back(i);
  }
  return o;
}

PhoneAggregate aggregate_by_phone(std::span<const double> scores, std::span<const int> frame_index,
                                  std::span<const PhoneSegment> phones, double rate) {
  if (scores.size() != frame_index.size()) throw StructuralError("phone aggregation: one frame index per score");
  PhoneAggregate out;
  for (const auto& seg : phones) {
    double sum = 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double c = (frame_index[i] + 0.5) / rate;
      if (c >= seg.start_s && c < seg.end_s) {
        sum += scores[i];
        ++count;
      }
    }
    if (count == 0) {
      ++out.skipped_segments;
      continue;
    }
    out.values.push_back(sum / static_cast<double>(count));
    out.labels.push_back(seg.label);
  }
  return out;
}

PhoneAggregate aggregate_by_phone(std::span<const double> scores, std::span<const PhoneSegment> phones,
                                  double rate) {
  std::vector<int> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  return aggregate_by_phone(scores, idx, phones, rate);
}

std::vector<ContourFrame> with_landmarks(std::span<const ContourFrame> pred, std::span<const ContourFrame> truth) {
  if (pred.size() != truth.size()) {
    throw StructuralError("prediction has " + std::to_string(pred.size()) + " frames but truth has " +
                          std::to_string(truth.size()));
  }
  std::vector<ContourFrame> out(pred.begin(), pred.end());
  for (std::size_t t = 0; t < out.size(); ++t) {
    for (int a = 0; a < kNumArticulatorIds; ++a) {
      if (!out[t].contours[a]) out[t].contours[a] = truth[t].contours[a];
    }
  }
  return out;
}

EvalReport evaluate(std::span<const EvalInput> inputs, const EvalOptions& options) {
  EvalReport r;
  std::vector<std::vector<double>> per_art(kNumPredicted);
  std::vector<FrameId> ids;
  std::vector<ContourFrame> all_truth, all_pred;
  std::vector<double> phone_values;
  for (const auto& in : inputs) {
    const Matrix truth = flatten_frames(in.truth_frames);
    if (static_cast<Eigen::Index>(in.frame_index.size()) != in.pred.rows()) {
      throw StructuralError(in.id + ": frame index count does not match prediction rows");
    }
    const Matrix rm = frame_articulator_rmse(in.pred, truth);
    const auto fm = frame_mean_rmse(rm);
    for (Eigen::Index t = 0; t < rm.rows(); ++t) {
      for (int a = 0; a < kNumPredicted; ++a) per_art[a].push_back(rm(t, a));
      ids.push_back({in.id, in.frame_index[t]});
    }
    r.frame_rmse.insert(r.frame_rmse.end(), fm.begin(), fm.end());
    auto agg = aggregate_by_phone(fm, in.frame_index, in.phones);
    r.phone_rmse.insert(r.phone_rmse.end(), agg.values.begin(), agg.values.end());
    r.skipped_phone_segments += agg.skipped_segments;

    auto pred_frames = unflatten_frames(in.pred);
    for (std::size_t t = 0; t < pred_frames.size(); ++t) pred_frames[t].frame_index = in.frame_index[t];
    auto full = with_landmarks(pred_frames, in.truth_frames);
    all_pred.insert(all_pred.end(), full.begin(), full.end());
    all_truth.insert(all_truth.end(), in.truth_frames.begin(), in.truth_frames.end());
  }
  r.n_frames = r.frame_rmse.size();
  if (r.n_frames == 0) throw StructuralError("nothing to evaluate");

  for (int a = 0; a < kNumPredicted; ++a) {
    r.articulators.push_back({std::string(articulator_name(kPredictedArticulators[a])), mean(per_art[a]),
                              population_std(per_art[a]), median(per_art[a])});
  }
  r.overall_mean = mean(r.frame_rmse);
  r.overall_median = median(r.frame_rmse);

  std::optional<tv::VelumPcaModel> fitted;
  const tv::VelumPcaModel* pca = options.pca;
  if (!pca && all_truth.size() >= 50) {
    try {
      fitted = tv::fit_velum_pca(all_truth, options.tvs.get("VEL"));
      pca = &*fitted;
    } catch (const NumericError&) {
    }
  }
  const auto tv_truth = tv::compute_all_tvs(all_truth, options.tvs, pca);
  const auto tv_pred = tv::compute_all_tvs(all_pred, options.tvs, pca);
  for (const auto& name : tv::tv_names(pca != nullptr)) {
    TvAgreement ag{name, std::nullopt};
    try {
      ag.pearson = pearson(tv_pred.at(name), tv_truth.at(name));
    } catch (const NumericError&) {
    }
    r.tvs.push_back(ag);
  }
  if (pca) r.vel_accuracy = velum_sign_accuracy(tv_pred.at("VEL_PCA"), tv_truth.at("VEL_PCA"));

  if (r.n_frames >= 4) {
    r.outliers = flag_outliers(r.frame_rmse, options.outlier_rule);
    for (auto i : r.outliers.ids) r.outlier_frames.push_back(ids[i]);
  }
  r.n_phone_samples = r.phone_rmse.size();
  if (r.phone_rmse.size() >= 20) {
    try {
      r.normality = stats::dagostino_normality(r.phone_rmse);
    } catch (const NumericError&) {
    }
  }
  return r;
}

std::string report_to_json(const EvalReport& r) {
  json arts = json::array();
  for (const auto& a : r.articulators) {
    arts.push_back({{"name", a.name}, {"rmse_mean", a.rmse_mean}, {"rmse_std", a.rmse_std}, {"rmse_median", a.rmse_median}});
  }
  json tvs = json::object();
  for (const auto& t : r.tvs) tvs[t.name] = optional_number(t.pearson);
  json outlier_frames = json::array();
  for (const auto& f : r.outlier_frames) outlier_frames.push_back({{"acquisition", f.acquisition}, {"frame", f.frame}});
  json significance = json::array();
  if (r.normality) {
    significance.push_back({{"test_name", "dagostino_k2"},
                            {"statistic", r.normality->statistic},
                            {"p_value", r.normality->p_value},
                            {"n", r.normality->n}});
  }
  json j{
      {"articulators", arts},
      {"overall", {{"rmse_mean", r.overall_mean}, {"rmse_median", r.overall_median}, {"n_frames", r.n_frames}}},
      {"tv_pearson", tvs},
      {"vel_accuracy", optional_number(r.vel_accuracy)},
      {"outliers",
       {{"rule", r.outliers.rule == OutlierRule::kWhisker ? "q3_plus_1.5iqr" : "q3"},
        {"threshold", r.outliers.threshold},
        {"q1", r.outliers.q1},
        {"q3", r.outliers.q3},
        {"count", r.outlier_frames.size()},
        {"frames", outlier_frames}}},
      {"phone_samples", {{"n", r.n_phone_samples}, {"skipped_segments", r.skipped_phone_segments}}},
      {"significance", significance},
      {"reference",
       {{"rmse_mean_mm", 1.48},
        {"rmse_median_mm", 1.27},
        {"tv_pearson_range", {0.84, 0.92}},
        {"velum_pc1_explained_variance", 0.57},
        {"pixel_mm", kReferencePixelMm}}},
  };
  return j.dump(2) + "\n";
}

}  // namespace vt::eval
