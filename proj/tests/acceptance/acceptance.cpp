// Runs the acceptance criteria and prints one PASS/FAIL line for each.
// Usage: acceptance [criterion numbers...]   (all when none given)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "oracles/oracles.hpp"
#include "vt/cli.hpp"
#include "vt/contour_prep.hpp"
#include "vt/evaluation.hpp"
#include "vt/experiment.hpp"
#include "vt/features.hpp"
#include "vt/io.hpp"
#include "vt/network.hpp"
#include "vt/registration.hpp"
#include "vt/statistics.hpp"
#include "vt/synth.hpp"
#include "vt/tract_variables.hpp"
#include "vt/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("vt_acceptance_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int vt_run(std::vector<std::string> args) {
  args.insert(args.begin(), "vt");
  return vt::cli::run(args);
}

// ---- 1 -----------------------------------------------------------------------

Outcome gradient_check() {
  const vt::nn::ModelDims dims{4, 3, 3, 3, vt::kFrameVectorSize};
  vt::nn::BiLstmModel model = vt::nn::BiLstmModel::initialize(dims, 7);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  // Random biases too, so no parameter sits at a special point.
  for (double& p : model.params()) p += 0.1 * nd(rng);
  vt::Matrix x(5, 4), y(5, vt::kFrameVectorSize);
  for (double& v : x.reshaped()) v = nd(rng);
  for (double& v : y.reshaped()) v = 0.5 * nd(rng);

  const auto g = vt::nn::backward(model, x, y);
  const double h = 1e-5;
  const double floor = 1e-6;
  double worst = 0;
  std::string worst_name;
  for (const auto& t : model.tensors()) {
    for (std::size_t k = 0; k < t.size(); ++k) {
      const std::size_t i = t.offset + k;
      const double keep = model.params()[i];
      model.params()[i] = keep + h;
      const double up = vt::nn::mse_loss(vt::nn::forward(model, x), y);
      model.params()[i] = keep - h;
      const double down = vt::nn::mse_loss(vt::nn::forward(model, x), y);
      model.params()[i] = keep;
      const double num = (up - down) / (2 * h);
      const double rel = std::abs(num - g.values[i]) / std::max({std::abs(num), std::abs(g.values[i]), floor});
      if (rel > worst) {
        worst = rel;
        worst_name = t.name;
      }
    }
  }
  return {worst <= 1e-4, std::to_string(model.size()) + " parameters, worst relative error " + fmt("%.2e", worst) +
                             " (" + worst_name + ")"};
}

// ---- 2 -----------------------------------------------------------------------

std::vector<vt::nn::EpochRecord> overfit_run() {
  vt::synth::SynthOptions opts;
  opts.seed = 3;
  opts.acquisitions = 1;
  opts.sessions = 1;
  opts.frames = 200;
  opts.contour_noise_mm = 0.0;
  const auto data = vt::synth::generate(opts);
  const auto& acq = data[0].acquisition;

  const vt::Matrix raw = vt::features::extract(vt::features::FeatureKind::kLcc30, acq.audio);
  const vt::Matrix* m = &raw;
  const auto stats = vt::features::fit_stats(std::span(&m, 1), acq.session_id);
  vt::nn::Sample s;
  s.id = acq.id;
  s.features = vt::features::apply_norm(raw, stats);
  s.targets = vt::contour_prep::normalize_contours(vt::flatten_frames(acq.frames)).normalized;

  vt::nn::TrainConfig cfg;
  cfg.epochs = 300;
  cfg.batch_size = 1;
  cfg.adam.learning_rate = 5e-3;
  cfg.early_stop_patience = 300;
  cfg.seed = 5;
  const vt::nn::ModelDims dims{30, 64, 64, 64, vt::kFrameVectorSize};
  const std::vector<vt::nn::Sample> set{s};
  auto r = vt::nn::train(vt::nn::BiLstmModel::initialize(dims, cfg.seed), set, set, cfg);
  return r.history;
}

Outcome overfit() {
  const auto a = overfit_run();
  const auto b = overfit_run();
  double best = INFINITY;
  int reached = 0;
  for (const auto& e : a) {
    best = std::min(best, e.train_loss);
    if (!reached && e.train_loss < 1e-3) reached = e.epoch;
  }
  const bool same = a == b;
  return {reached > 0 && same, "lowest training loss " + fmt("%.3e", best) +
                                   (reached ? " (below 1e-3 at epoch " + std::to_string(reached) + ")" : "") +
                                   ", histories " + (same ? "bit-identical" : "DIFFER")};
}

// ---- 3 -----------------------------------------------------------------------

double report_rmse(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in).at("overall").at("rmse_mean").get<double>();
}

Outcome pipeline() {
  const fs::path d = scratch("pipeline");
  const std::string s = d.string();
  auto ok = [](int code) { return code == 0; };
  bool good = ok(vt_run({"--seed", "1", "synth-corpus", "--out", s + "/corpus", "--acquisitions", "20"})) &&
              ok(vt_run({"extract", "--kind", "lcc30", "--in", s + "/corpus/wav", "--out", s + "/feat"})) &&
              ok(vt_run({"normalize", "--in", s + "/feat", "--out", s + "/featn", "--stats", s + "/stats.json",
                         "--corpus", s + "/corpus/corpus.json"})) &&
              ok(vt_run({"prep-contours", "--in", s + "/corpus/contours", "--out", s + "/norm", "--state",
                         s + "/state"})) &&
              ok(vt_run({"--seed", "2", "split", "--corpus", s + "/corpus/corpus.json", "--out", s + "/split.json"}));
  if (!good) return {false, "pipeline step failed"};
  {
    std::ofstream cfg(d / "train.json");
    cfg << R"({"model": {"dense1": 64, "dense2": 64, "lstm": 64},
               "train": {"epochs": 60, "batch_size": 10, "learning_rate": 0.003, "patience": 10, "seed": 4}})";
  }
  if (!ok(vt_run({"train", "--features", s + "/featn", "--contours", s + "/norm", "--split", s + "/split.json",
                  "--config", s + "/train.json", "--phones", s + "/corpus/phones", "--out", s + "/model"}))) {
    return {false, "train failed"};
  }
  std::ifstream split_in(d / "split.json");
  const auto test = json::parse(split_in).at("test").get<std::vector<std::string>>();
  for (const auto& id : test) {
    const std::vector<std::string> common = {"--features", s + "/featn/" + id + ".vtaf", "--state", s + "/state",
                                             "--phones", s + "/corpus/phones/" + id + ".lab"};
    auto model_args = common, base_args = common;
    model_args.insert(model_args.begin(), {"infer", "--ckpt", s + "/model/best.ckpt"});
    model_args.insert(model_args.end(), {"--out", s + "/pred/" + id + ".json"});
    base_args.insert(base_args.begin(), {"infer", "--baseline", s + "/model/train_summary.json"});
    base_args.insert(base_args.end(), {"--out", s + "/base/" + id + ".json"});
    if (!ok(vt_run(model_args)) || !ok(vt_run(base_args))) return {false, "infer failed for " + id};
  }
  for (const char* which : {"pred", "base"}) {
    if (!ok(vt_run({"eval", "--pred", s + "/" + which, "--truth", s + "/corpus/contours", "--phones",
                    s + "/corpus/phones", "--out", s + "/" + which + "_report.json"}))) {
      return {false, std::string("eval failed on ") + which};
    }
  }
  const double model = report_rmse(d / "pred_report.json");
  const double base = report_rmse(d / "base_report.json");
  const double gain = 1.0 - model / base;
  fs::remove_all(d);
  return {gain >= 0.3, "test RMSE " + fmt("%.3f", model) + " mm vs constant-mean " + fmt("%.3f", base) +
                           " mm, reduction " + fmt("%.1f", 100 * gain) + "%"};
}

// ---- 4 -----------------------------------------------------------------------

Outcome ablation() {
  const fs::path d = scratch("ablation");
  vt::synth::SynthOptions opts;
  opts.seed = 21;
  opts.acquisitions = 20;
  vt::synth::synth_corpus(d / "corpus", opts);

  vt::experiment::ExperimentConfig cfg;
  cfg.corpus = d / "corpus" / "corpus.json";
  cfg.out = d / "out";
  cfg.conditions = {{"lcc30", "lcc30", {}}};
  cfg.settings.widths = {64, 64, 64};
  cfg.settings.train.epochs = 60;
  cfg.settings.train.adam.learning_rate = 3e-3;
  cfg.settings.train.seed = 9;
  cfg.split_seed = 8;
  cfg.fractions = {0.25, 0.5, 1.0};
  const auto report = vt::experiment::run_ablation_experiment(cfg);

  std::vector<double> rmse;
  std::string detail;
  for (const auto& c : report.conditions) {
    rmse.push_back(c.report.overall_mean);
    detail += (detail.empty() ? "" : ", ") + c.name + " " + fmt("%.3f", c.report.overall_mean) + " mm";
  }
  int inversions = 0;
  bool within = true;
  for (std::size_t i = 1; i < rmse.size(); ++i) {
    if (rmse[i] > rmse[i - 1]) {
      ++inversions;
      within = within && rmse[i] <= 1.02 * rmse[i - 1];
    }
  }
  fs::remove_all(d);
  return {rmse.size() == 3 && inversions <= 1 && within,
          detail + ", " + std::to_string(inversions) + " inversion(s)"};
}

// ---- 5 -----------------------------------------------------------------------

vt::ContourFrame random_frame(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 100.0);
  vt::ContourFrame f;
  for (int a = 0; a < vt::kNumArticulatorIds; ++a) {
    vt::Contour c;
    for (auto& p : c) p = {u(rng), u(rng)};
    f.contours[a] = c;
  }
  return f;
}

double brute_min_distance(const vt::ContourFrame& f, const vt::tv::TvDefinition& def) {
  double best = INFINITY;
  const auto& a = f.at(def.a);
  const auto& b = f.at(def.b);
  for (int i = 0; i < vt::kContourPoints; ++i) {
    for (int j = 0; j < vt::kContourPoints; ++j) {
      if (i < def.range_a.first || i > def.range_a.last || j < def.range_b.first || j > def.range_b.last) continue;
      best = std::min(best, std::hypot(a[i].x - b[j].x, a[i].y - b[j].y));
    }
  }
  return best;
}

double explicit_larynx_height(const vt::ContourFrame& f) {
  const auto& wall = f.at(vt::ArticulatorId::kPharyngealWall);
  Eigen::Matrix<double, 50, 2> w;
  for (int i = 0; i < 50; ++i) w.row(i) << wall[i].x, wall[i].y;
  const Eigen::Matrix<double, 50, 2> c = w.rowwise() - w.colwise().mean();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(c.transpose() * c);
  Eigen::Vector2d axis = es.eigenvectors().col(1);
  if (axis.y() < 0) axis = -axis;
  Eigen::Vector2d glottis = Eigen::Vector2d::Zero();
  for (const auto& p : f.at(vt::ArticulatorId::kVocalFolds)) glottis += Eigen::Vector2d(p.x, p.y) / 50.0;
  // Most posterior palate point: largest x when the face looks toward -x.
  const auto& palate = f.at(vt::ArticulatorId::kUpperIncisor);
  int ref = 0;
  for (int i = 1; i < 50; ++i) {
    if (palate[i].x > palate[ref].x) ref = i;
  }
  return std::abs((glottis - Eigen::Vector2d(palate[ref].x, palate[ref].y)).dot(axis));
}

Outcome tv_oracles() {
  std::mt19937_64 rng(5);
  const auto cfg = vt::tv::TvConfig::defaults();
  long mismatches = 0, checks = 0;
  double lh_err = 0;
  std::uniform_real_distribution<double> tilt(-0.5, 0.5), jitter(-1.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    auto f = random_frame(rng);
    // The wall is an elongated, roughly vertical polyline.
    const double ang = tilt(rng);
    vt::Contour wall;
    for (int i = 0; i < vt::kContourPoints; ++i) {
      wall[i] = {70 + i * std::sin(ang) + jitter(rng), 20 + i * std::cos(ang) + jitter(rng)};
    }
    f.set(vt::ArticulatorId::kPharyngealWall, wall);
    for (const auto& def : cfg.definitions) {
      if (def.mode != vt::tv::TvMode::kMinDistance) continue;
      ++checks;
      if (vt::tv::tv_min_distance(f, def) != brute_min_distance(f, def)) ++mismatches;
    }
    lh_err = std::max(lh_err, std::abs(vt::tv::larynx_height(f) - explicit_larynx_height(f)));
  }
  return {mismatches == 0 && lh_err <= 1e-12, std::to_string(checks) + " min-distance checks, " +
                                                  std::to_string(mismatches) + " mismatches; larynx height max error " +
                                                  fmt("%.1e", lh_err)};
}

// ---- 6 -----------------------------------------------------------------------

Outcome velum_pca() {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd;
  vt::Vector d(vt::tv::kVelumPcaDims), base(vt::tv::kVelumPcaDims);
  for (double& v : d) v = nd(rng);
  d.normalize();
  for (double& v : base) v = 40 + 10 * nd(rng);

  std::vector<vt::ContourFrame> frames;
  const int n = 400;
  vt::Matrix raw(n, vt::tv::kVelumPcaDims);
  for (int t = 0; t < n; ++t) {
    const double a = 3 * nd(rng);
    vt::Vector v = base + a * d;
    for (double& e : v) e += 1e-4 * nd(rng);
    raw.row(t) = v.transpose();
    auto f = random_frame(rng);
    vt::Contour velum = f.at(vt::ArticulatorId::kVelumMidline);
    for (int i = 0; i < vt::tv::kVelumPcaPoints; ++i) velum[i] = {v[i], v[vt::tv::kVelumPcaPoints + i]};
    f.set(vt::ArticulatorId::kVelumMidline, velum);
    frames.push_back(f);
  }
  const auto model = vt::tv::fit_velum_pca(frames);

  // Standardizing coordinate j divides the direction by its std.
  const vt::Vector mean = raw.colwise().mean().transpose();
  vt::Matrix z = raw.rowwise() - mean.transpose();
  const vt::Vector sd = (z.colwise().squaredNorm() / n).cwiseSqrt().transpose();
  for (int j = 0; j < z.cols(); ++j) z.col(j) /= sd[j];
  const vt::Vector expected = d.cwiseQuotient(sd).normalized();
  const double cosang = std::min(1.0, std::abs(model.component.dot(expected)));
  const double angle = std::acos(cosang);

  const Eigen::MatrixXd corr = (z.transpose() * z) / n;
  const auto oracle = oracle::power_iteration(corr);
  const double sign = oracle.vector.dot(model.component) < 0 ? -1.0 : 1.0;
  const double vec_err = (sign * oracle.vector - model.component).cwiseAbs().maxCoeff();
  const double val_err = std::abs(oracle.value - model.eigenvalue);
  const bool pass = angle <= 1e-3 && model.explained_variance_ratio >= 0.99 && vec_err <= 1e-9 && val_err <= 1e-9;
  return {pass, "angle " + fmt("%.1e", angle) + " rad, explained " + fmt("%.5f", model.explained_variance_ratio) +
                    ", eigenvector error " + fmt("%.1e", vec_err) + ", eigenvalue error " + fmt("%.1e", val_err)};
}

// ---- 7 -----------------------------------------------------------------------

vt::io::GrayImage blob_image(std::mt19937_64& rng, int size) {
  std::uniform_real_distribution<double> u(0.2 * size, 0.8 * size), s(2.0, 6.0), a(0.2, 1.0);
  vt::io::GrayImage img(size, size);
  for (int k = 0; k < 6; ++k) {
    const double cx = u(rng), cy = u(rng), sigma = s(rng), amp = a(rng);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        img.at(x, y) += static_cast<float>(amp * std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) /
                                                           (2 * sigma * sigma)));
      }
    }
  }
  return img;
}

Outcome registration() {
  std::mt19937_64 rng(23);
  const vt::registration::SearchGrid grid;
  const auto points = grid.points();
  std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
  const int size = 40;
  vt::registration::Mask mask(size, size, false);
  for (int y = 6; y < size - 6; ++y) {
    for (int x = 6; x < size - 6; ++x) mask.set(x, y, true);
  }
  int recovered = 0;
  double self_err = 0;
  for (int k = 0; k < 100; ++k) {
    const auto img = blob_image(rng, size);
    const auto truth = points[pick(rng)];
    const auto ref = vt::registration::apply_rigid(img, truth);
    const auto r = vt::registration::register_image(img, ref, mask, grid);
    if (r.transform == truth) ++recovered;
    self_err = std::max(self_err, std::abs(vt::registration::ncc_masked(img, img, mask) - 1.0));
  }
  return {recovered == 100 && self_err <= 1e-12,
          std::to_string(recovered) + "/100 transforms recovered, self-NCC error " + fmt("%.1e", self_err)};
}

// ---- 8 -----------------------------------------------------------------------

Outcome statistics() {
  const std::vector<double> a6{1, 2, 3, 4, 5, 6}, z6(6, 0.0);
  const auto w6 = vt::stats::wilcoxon_signed_rank(a6, z6);

  std::mt19937_64 rng(31);
  std::normal_distribution<double> nd;
  std::vector<double> a(60), b(60), diff(60);
  for (int i = 0; i < 60; ++i) {
    a[i] = nd(rng);
    b[i] = a[i] + 0.3 + nd(rng);
    diff[i] = a[i] - b[i];
  }
  const auto w60 = vt::stats::wilcoxon_signed_rank(a, b);
  const double mc = oracle::wilcoxon_monte_carlo_p(oracle::abs_ranks(diff), w60.statistic, 1000000, 37);

  std::mt19937_64 g1(41), g2(43);
  std::exponential_distribution<double> ed(1.0);
  std::vector<double> ex(500), no(5000);
  for (double& v : ex) v = ed(g1);
  for (double& v : no) v = nd(g2);
  const auto pe = vt::stats::dagostino_normality(ex);
  const auto pn = vt::stats::dagostino_normality(no);

  const bool pass = std::abs(w6.p_value - 0.03125) < 1e-15 && std::abs(w60.p_value - mc) <= 0.01 &&
                    pe.p_value < 1e-6 && pn.p_value > 0.001;
  return {pass, "n=6 p " + fmt("%.5f", w6.p_value) + "; n=60 p " + fmt("%.4f", w60.p_value) + " vs Monte-Carlo " +
                    fmt("%.4f", mc) + "; exponential p " + fmt("%.1e", pe.p_value) + ", normal p " +
                    fmt("%.3f", pn.p_value)};
}

// ---- 9 -----------------------------------------------------------------------

Outcome dsp() {
  std::mt19937_64 rng(47);
  std::normal_distribution<double> nd;
  const int frames = 100;
  std::vector<double> audio(400 + 160 * (frames - 1));
  for (double& v : audio) v = 0.1 * nd(rng);
  const vt::features::StftConfig cfg;
  const vt::Matrix m = vt::features::mfcc(audio, cfg);
  const vt::Matrix l = vt::features::lcc(audio, cfg);
  double mfcc_err = 0, lcc_err = 0;
  for (int t = 0; t < frames; ++t) {
    const auto w = oracle::frame(audio, t);
    const auto om = oracle::mfcc_frame(w);
    const auto ol = oracle::cepstrum(w, 30);
    for (int k = 0; k < 13; ++k) mfcc_err = std::max(mfcc_err, std::abs(m(t, k) - om[k]));
    for (int k = 0; k < 30; ++k) lcc_err = std::max(lcc_err, std::abs(l(t, k) - ol[k]));
  }

  const vt::Matrix dct = vt::features::dct_matrix(26, 26);
  const double ortho = (dct.transpose() * dct - vt::Matrix::Identity(26, 26)).cwiseAbs().maxCoeff();

  // Silence: constant log-mel, so only c0 survives.
  const std::vector<double> silence(16000, 0.0);
  const vt::Matrix ms = vt::features::mfcc(silence, cfg);
  double silence_err = 0;
  bool frames_equal = true;
  for (int t = 0; t < ms.rows(); ++t) {
    frames_equal = frames_equal && ms.row(t) == ms.row(0);
    for (int k = 1; k < 13; ++k) silence_err = std::max(silence_err, std::abs(ms(t, k)));
  }
  // Impulse: flat magnitude spectrum, so only c0 survives.
  std::vector<double> impulse(512, 0.0);
  impulse[0] = 2.0;
  const auto ci = vt::features::real_cepstrum(impulse, 30);
  double impulse_err = 0;
  for (int k = 1; k < 30; ++k) impulse_err = std::max(impulse_err, std::abs(ci[k]));
  const bool c0_ok = std::abs(ci[0] - std::log(2.0)) < 1e-15;

  const bool pass = mfcc_err <= 1e-6 && lcc_err <= 1e-9 && ortho <= 1e-12 && frames_equal && silence_err <= 1e-12 &&
                    impulse_err <= 1e-15 && c0_ok;
  return {pass, "MFCC max error " + fmt("%.1e", mfcc_err) + ", LCC " + fmt("%.1e", lcc_err) + ", DCT orthonormality " +
                    fmt("%.1e", ortho) + ", silence c1..c12 " + fmt("%.1e", silence_err) + ", impulse c1..c29 " +
                    fmt("%.1e", impulse_err)};
}

// ---- 10 ----------------------------------------------------------------------

Outcome round_trips() {
  std::mt19937_64 rng(53);
  std::normal_distribution<double> nd;
  std::vector<std::string> failures;

  vt::Matrix feat(7, 13);
  for (double& v : feat.reshaped()) v = static_cast<float>(nd(rng));
  const std::string bytes = vt::io::encode_feature_file(feat, 50.0);
  const auto back = vt::io::decode_feature_file(bytes);
  if (back.values != feat || back.frame_rate_hz != 50.0 || vt::io::encode_feature_file(back.values, 50.0) != bytes) {
    failures.push_back("feature file");
  }

  vt::io::ContourDocument doc;
  doc.acquisition_id = "a1";
  doc.session_id = "s1";
  doc.pixel_mm = 1.62;
  for (int t = 0; t < 4; ++t) {
    auto f = random_frame(rng);
    f.frame_index = 3 * t + 1;
    doc.frames.push_back(f);
  }
  const auto doc2 = vt::io::parse_contours(vt::io::dump_contours(doc));
  double contour_err = 0;
  for (std::size_t t = 0; t < doc.frames.size(); ++t) {
    contour_err = std::max(contour_err, (vt::flatten_frame(doc.frames[t]) - vt::flatten_frame(doc2.frames[t]))
                                            .cwiseAbs()
                                            .maxCoeff());
  }
  if (contour_err > 1e-9 || doc2.frames.size() != doc.frames.size()) failures.push_back("contour file");

  vt::nn::TrainConfig tc;
  const vt::nn::ModelDims dims{6, 5, 4, 3, 800};
  auto state = vt::nn::start_training(vt::nn::BiLstmModel::initialize(dims, 3), tc);
  for (double& v : state.model.params()) v += nd(rng);
  const auto ck = vt::nn::checkpoint_from_state(state, tc);
  const std::string cbytes = vt::nn::encode_checkpoint(ck);
  const auto ck2 = vt::nn::decode_checkpoint(cbytes);
  if (!(ck2.model == ck.model) || vt::nn::encode_checkpoint(ck2) != cbytes) failures.push_back("checkpoint");

  vt::Matrix x(120, 800);
  for (double& v : x.reshaped()) v = 30 + 5 * nd(rng);
  const auto norm = vt::contour_prep::normalize_contours(x);
  const double norm_err = (vt::contour_prep::denormalize_contours(norm.normalized, norm.state) - x).cwiseAbs().maxCoeff();
  if (norm_err > 1e-10) failures.push_back("contour normalization");

  std::string detail = "contour file error " + fmt("%.1e", contour_err) + ", normalization error " + fmt("%.1e", norm_err);
  for (const auto& f : failures) detail += "; FAILED " + f;
  return {failures.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    std::string name;
    std::function<Outcome()> run;
    double limit_s;  // 0 = no runtime bound
  };
  const std::vector<Criterion> criteria = {
      {"gradient check", gradient_check, 10},
      {"overfit sanity", overfit, 120},
      {"synthetic pipeline", pipeline, 900},
      {"ablation shape", ablation, 0},
      {"tract-variable oracles", tv_oracles, 0},
      {"velum PCA", velum_pca, 0},
      {"registration", registration, 0},
      {"statistics", statistics, 0},
      {"DSP oracles", dsp, 0},
      {"round trips", round_trips, 0},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (criteria[i].limit_s > 0 && secs >= criteria[i].limit_s) {
      o.pass = false;
      o.detail += "; over the " + fmt("%.0f", criteria[i].limit_s) + " s limit";
    }
    std::printf("criterion %2d %-24s %s  %s  [%.1f s]\n", id, criteria[i].name.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
