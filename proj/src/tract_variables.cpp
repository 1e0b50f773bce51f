#include "vt/tract_variables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "json_util.hpp"
#include "vt/error.hpp"

namespace vt::tv {
namespace {

using detail::json;

constexpr std::string_view kDistanceNames[] = {"LA", "LD", "TTCD", "TBCD", "TRCD", "VEL"};

const Contour& need(const ContourFrame& f, ArticulatorId id) { return f.at(id); }

double dist(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::string mode_name(TvMode m) { return m == TvMode::kMinDistance ? "min_distance" : "axis_projection"; }

TvMode parse_mode(const std::string& s) {
  if (s == "min_distance") return TvMode::kMinDistance;
  if (s == "axis_projection") return TvMode::kAxisProjection;
  throw FormatError("schema", "tract variable mode must be min_distance or axis_projection, got '" + s + "'");
}

ArticulatorId parse_articulator(const std::string& s) {
  auto id = articulator_from_name(s);
  if (!id) throw FormatError("unknown_articulator", "unknown articulator '" + s + "'");
  return *id;
}

json range_json(ArticulatorId id, const PointRange& r) {
  return json{{"articulator", std::string(articulator_name(id))}, {"first", r.first}, {"last", r.last}};
}

void parse_range(const json& j, ArticulatorId& id, PointRange& r, const std::string& where) {
  detail::check_keys(j, {"articulator", "first", "last"}, {}, where);
  id = parse_articulator(detail::get_as<std::string>(j, "articulator", where));
  r.first = detail::get_as<int>(j, "first", where);
  r.last = detail::get_as<int>(j, "last", where);
}

double pearson_or_zero(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0 || syy <= 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

void TvDefinition::validate() const {
  for (const PointRange* r : {&range_a, &range_b}) {
    if (r->first < 0 || r->last >= kContourPoints || r->first > r->last) {
      throw UsageError("tract variable " + name + ": point range [" + std::to_string(r->first) + "," +
                       std::to_string(r->last) + "] is empty or outside [0,49]");
    }
  }
  if (a == b && mode != TvMode::kAxisProjection) {
    throw UsageError("tract variable " + name + ": both ranges are on the same articulator");
  }
}

TvConfig TvConfig::defaults() {
  using A = ArticulatorId;
  TvConfig c;
  c.definitions = {
      {"LA", A::kUpperLip, {25, 49}, A::kLowerLip, {0, 24}, TvMode::kMinDistance},
      {"LD", A::kLowerLip, {0, 24}, A::kUpperIncisor, {0, 49}, TvMode::kMinDistance},
      {"TTCD", A::kTongue, {40, 49}, A::kUpperIncisor, {0, 49}, TvMode::kMinDistance},
      {"TBCD", A::kTongue, {20, 39}, A::kUpperIncisor, {0, 49}, TvMode::kMinDistance},
      {"TRCD", A::kTongue, {0, 19}, A::kPharyngealWall, {0, 49}, TvMode::kMinDistance},
      {"VEL", A::kVelumMidline, {0, 24}, A::kPharyngealWall, {0, 49}, TvMode::kMinDistance},
      {"LH", A::kVocalFolds, {0, 49}, A::kUpperIncisor, {0, 49}, TvMode::kAxisProjection},
  };
  return c;
}

const TvDefinition& TvConfig::get(std::string_view name) const {
  for (const auto& d : definitions) {
    if (d.name == name) return d;
  }
  throw UsageError("tract variable configuration has no definition for " + std::string(name));
}

void TvConfig::validate() const {
  if (anterior_x_sign != 1.0 && anterior_x_sign != -1.0) throw UsageError("anterior_x_sign must be +1 or -1");
  for (const auto& d : definitions) d.validate();
  for (auto n : kDistanceNames) {
    if (get(n).mode != TvMode::kMinDistance) throw UsageError(std::string(n) + " must use min_distance");
  }
  if (get("LH").mode != TvMode::kAxisProjection) throw UsageError("LH must use axis_projection");
  for (std::size_t i = 0; i < definitions.size(); ++i) {
    for (std::size_t j = i + 1; j < definitions.size(); ++j) {
      if (definitions[i].name == definitions[j].name) throw UsageError("duplicate tract variable " + definitions[i].name);
    }
  }
}

TvConfig parse_tv_config(std::string_view json_text) {
  const std::string where = "tract variable definitions";
  json root = detail::parse_json(json_text, where);
  detail::check_keys(root, {"definitions"}, {"anterior_x_sign"}, where);
  TvConfig cfg;
  cfg.anterior_x_sign = root.value("anterior_x_sign", -1.0);
  if (!root["definitions"].is_array()) throw FormatError("schema", where + ": definitions must be an array");
  for (const auto& j : root["definitions"]) {
    detail::check_keys(j, {"name", "a", "b", "mode"}, {}, where);
    TvDefinition d;
    d.name = detail::get_as<std::string>(j, "name", where);
    parse_range(j["a"], d.a, d.range_a, where + " " + d.name + ".a");
    parse_range(j["b"], d.b, d.range_b, where + " " + d.name + ".b");
    d.mode = parse_mode(detail::get_as<std::string>(j, "mode", where));
    cfg.definitions.push_back(d);
  }
  cfg.validate();
  return cfg;
}

std::string dump_tv_config(const TvConfig& cfg) {
  json defs = json::array();
  for (const auto& d : cfg.definitions) {
    defs.push_back({{"name", d.name},
                    {"a", range_json(d.a, d.range_a)},
                    {"b", range_json(d.b, d.range_b)},
                    {"mode", mode_name(d.mode)}});
  }
  return json{{"anterior_x_sign", cfg.anterior_x_sign}, {"definitions", defs}}.dump(2) + "\n";
}

MinDistance min_distance_pair(const ContourFrame& frame, const TvDefinition& def) {
  def.validate();
  const Contour& ca = need(frame, def.a);
  const Contour& cb = need(frame, def.b);
  MinDistance best{std::numeric_limits<double>::infinity(), 0, 0};
  for (int i = def.range_a.first; i <= def.range_a.last; ++i) {
    for (int j = def.range_b.first; j <= def.range_b.last; ++j) {
      const double d = dist(ca[i], cb[j]);
      if (d < best.distance) best = {d, i, j};
    }
  }
  return best;
}

double tv_min_distance(const ContourFrame& frame, const TvDefinition& def) {
  return min_distance_pair(frame, def).distance;
}

double tv_lip_protrusion(const ContourFrame& frame, double s) {
  const Contour& lip = need(frame, ArticulatorId::kUpperLip);
  const Contour& inc = need(frame, ArticulatorId::kUpperIncisor);
  double lip_front = -std::numeric_limits<double>::infinity();
  double ref_front = -std::numeric_limits<double>::infinity();
  for (const Point& p : lip) lip_front = std::max(lip_front, s * p.x);
  for (const Point& p : inc) ref_front = std::max(ref_front, s * p.x);
  return lip_front - ref_front;
}

double tv_trcl(const ContourFrame& frame, const TvDefinition& trcd) {
  const Contour& wall = need(frame, trcd.b);
  const int k = min_distance_pair(frame, trcd).index_b;
  // Ties on the end height keep point 0 as the origin.
  const bool from_start = wall[0].y <= wall[kContourPoints - 1].y;
  double s = 0.0;
  if (from_start) {
    for (int i = 0; i < k; ++i) s += dist(wall[i], wall[i + 1]);
  } else {
    for (int i = kContourPoints - 1; i > k; --i) s += dist(wall[i], wall[i - 1]);
  }
  return s;
}

Point pharyngeal_axis(const ContourFrame& frame) {
  const Contour& wall = need(frame, ArticulatorId::kPharyngealWall);
  double mx = 0, my = 0;
  for (const Point& p : wall) {
    mx += p.x;
    my += p.y;
  }
  mx /= kContourPoints;
  my /= kContourPoints;
  double sxx = 0, sxy = 0, syy = 0;
  for (const Point& p : wall) {
    sxx += (p.x - mx) * (p.x - mx);
    sxy += (p.x - mx) * (p.y - my);
    syy += (p.y - my) * (p.y - my);
  }
  if (sxx + syy <= 1e-24) throw NumericError("pharyngeal wall is degenerate (all points coincide)");
  // Major axis of the 2x2 scatter matrix in closed form.
  const double half_diff = 0.5 * (sxx - syy);
  const double lambda = 0.5 * (sxx + syy) + std::hypot(half_diff, sxy);
  double vx, vy;
  if (std::abs(sxy) > 0) {
    vx = sxy;
    vy = lambda - sxx;
  } else if (sxx >= syy) {
    vx = 1;
    vy = 0;
  } else {
    vx = 0;
    vy = 1;
  }
  const double n = std::hypot(vx, vy);
  vx /= n;
  vy /= n;
  if (vy < 0 || (vy == 0 && vx < 0)) {
    vx = -vx;
    vy = -vy;
  }
  return {vx, vy};
}

double larynx_height(const ContourFrame& frame, const TvDefinition& def, double s) {
  const Contour& folds = need(frame, def.a);
  const Contour& palate = need(frame, def.b);
  double cx = 0, cy = 0;
  for (int i = def.range_a.first; i <= def.range_a.last; ++i) {
    cx += folds[i].x;
    cy += folds[i].y;
  }
  cx /= def.range_a.size();
  cy /= def.range_a.size();
  int ref = def.range_b.first;
  for (int i = def.range_b.first + 1; i <= def.range_b.last; ++i) {
    if (-s * palate[i].x > -s * palate[ref].x) ref = i;
  }
  const Point axis = pharyngeal_axis(frame);
  return std::abs((cx - palate[ref].x) * axis.x + (cy - palate[ref].y) * axis.y);
}

double larynx_height(const ContourFrame& frame) {
  const TvConfig cfg = TvConfig::defaults();
  return larynx_height(frame, cfg.get("LH"), cfg.anterior_x_sign);
}

Vector velum_vector(const ContourFrame& frame) {
  const Contour& v = need(frame, ArticulatorId::kVelumMidline);
  Vector out(kVelumPcaDims);
  for (int i = 0; i < kVelumPcaPoints; ++i) {
    out[i] = v[i].x;
    out[kVelumPcaPoints + i] = v[i].y;
  }
  return out;
}

VelumPcaModel fit_velum_pca(std::span<const ContourFrame> frames, const TvDefinition& vel) {
  const int n = static_cast<int>(frames.size());
  if (n < 50) throw NumericError("velum PCA needs at least 50 frames, got " + std::to_string(n));
  Eigen::MatrixXd x(n, kVelumPcaDims);
  for (int t = 0; t < n; ++t) x.row(t) = velum_vector(frames[t]).transpose();

  VelumPcaModel m;
  m.mean = x.colwise().mean().transpose();
  x.rowwise() -= m.mean.transpose();
  m.std = (x.colwise().squaredNorm() / n).cwiseSqrt().transpose();
  const double scale = std::max(1.0, m.mean.cwiseAbs().maxCoeff());
  for (int j = 0; j < kVelumPcaDims; ++j) {
    if (!(m.std[j] > 1e-12 * scale)) {
      throw NumericError("velum PCA: coordinate " + std::to_string(j) + " has zero variance");
    }
  }
  for (int j = 0; j < kVelumPcaDims; ++j) x.col(j) /= m.std[j];
  const Eigen::MatrixXd cov = (x.transpose() * x) / n;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw NumericError("velum PCA: eigendecomposition failed");
  const auto& ev = es.eigenvalues();  // ascending
  if (ev[0] <= 1e-12 * ev[kVelumPcaDims - 1]) throw NumericError("velum PCA: covariance is rank-deficient");
  m.eigenvalue = ev[kVelumPcaDims - 1];
  m.explained_variance_ratio = m.eigenvalue / ev.sum();
  m.component = es.eigenvectors().col(kVelumPcaDims - 1);
  m.component.normalize();
  // Eigenvector sign is arbitrary; fix it before choosing the polarity.
  int k = 0;
  m.component.cwiseAbs().maxCoeff(&k);
  if (m.component[k] < 0) m.component = -m.component;

  std::vector<double> score(n), distance(n);
  for (int t = 0; t < n; ++t) {
    score[t] = m.component.dot(x.row(t).transpose());
    distance[t] = tv_min_distance(frames[t], vel);
  }
  m.polarity = pearson_or_zero(score, distance) < 0 ? -1 : 1;
  return m;
}

VelumPcaModel fit_velum_pca(std::span<const ContourFrame> frames) {
  return fit_velum_pca(frames, TvConfig::defaults().get("VEL"));
}

double velum_pc1_score(const Vector& velum, const VelumPcaModel& model) {
  return model.polarity * model.component.dot((velum - model.mean).cwiseQuotient(model.std));
}

double velum_pc1_score(const ContourFrame& frame, const VelumPcaModel& model) {
  return velum_pc1_score(velum_vector(frame), model);
}

std::string dump_velum_pca(const VelumPcaModel& m) {
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  json j{{"mean", vec(m.mean)},
         {"std", vec(m.std)},
         {"component", vec(m.component)},
         {"eigenvalue", m.eigenvalue},
         {"explained_variance_ratio", m.explained_variance_ratio},
         {"polarity", m.polarity}};
  return j.dump(2) + "\n";
}

VelumPcaModel parse_velum_pca(std::string_view json_text) {
  const std::string where = "velum PCA model";
  json j = detail::parse_json(json_text, where);
  detail::check_keys(j, {"mean", "std", "component", "eigenvalue", "explained_variance_ratio", "polarity"}, {}, where);
  auto vec = [&](const char* key) {
    auto v = detail::get_as<std::vector<double>>(j, key, where);
    if (v.size() != static_cast<std::size_t>(kVelumPcaDims)) {
      throw FormatError("length", where + ": '" + key + "' must have 50 values");
    }
    return Vector(Eigen::Map<const Vector>(v.data(), kVelumPcaDims));
  };
  VelumPcaModel m;
  m.mean = vec("mean");
  m.std = vec("std");
  m.component = vec("component");
  m.eigenvalue = detail::get_as<double>(j, "eigenvalue", where);
  m.explained_variance_ratio = detail::get_as<double>(j, "explained_variance_ratio", where);
  m.polarity = detail::get_as<int>(j, "polarity", where);
  if (m.polarity != 1 && m.polarity != -1) throw FormatError("schema", where + ": polarity must be +1 or -1");
  if (std::abs(m.component.norm() - 1.0) > 1e-9) throw FormatError("schema", where + ": component is not unit norm");
  if ((m.std.array() <= 0).any()) throw FormatError("schema", where + ": std must be positive");
  return m;
}

std::vector<std::string> tv_names(bool with_pca) {
  std::vector<std::string> names = {"LA", "LP", "LD", "TTCD", "TBCD", "TRCD", "TRCL", "VEL", "LH"};
  if (with_pca) names.push_back("VEL_PCA");
  return names;
}

std::map<std::string, std::vector<double>> compute_all_tvs(std::span<const ContourFrame> frames,
                                                           const TvConfig& cfg, const VelumPcaModel* pca) {
  cfg.validate();
  std::map<std::string, std::vector<double>> out;
  for (const auto& name : tv_names(pca != nullptr)) out[name].resize(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const ContourFrame& f = frames[t];
    for (auto n : kDistanceNames) out[std::string(n)][t] = tv_min_distance(f, cfg.get(n));
    out["LP"][t] = tv_lip_protrusion(f, cfg.anterior_x_sign);
    out["TRCL"][t] = tv_trcl(f, cfg.get("TRCD"));
    out["LH"][t] = larynx_height(f, cfg.get("LH"), cfg.anterior_x_sign);
    if (pca) out["VEL_PCA"][t] = velum_pc1_score(f, *pca);
  }
  return out;
}

}  // namespace vt::tv
