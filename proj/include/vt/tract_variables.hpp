#pragma once

// Tract variables computed per frame from contours in millimeters.

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vt/datamodel.hpp"

namespace vt::tv {

enum class TvMode { kMinDistance, kAxisProjection };

struct PointRange {
  int first = 0;
  int last = kContourPoints - 1;  // inclusive
  int size() const { return last - first + 1; }
  friend bool operator==(const PointRange&, const PointRange&) = default;
};

struct TvDefinition {
  std::string name;
  ArticulatorId a = ArticulatorId::kUpperLip;
  PointRange range_a;
  ArticulatorId b = ArticulatorId::kLowerLip;
  PointRange range_b;
  TvMode mode = TvMode::kMinDistance;

  void validate() const;
  friend bool operator==(const TvDefinition&, const TvDefinition&) = default;
};

// Point ranges are corpus conventions and live in a JSON file; defaults() is
// what `vt tract-vars` uses without --defs.
struct TvConfig {
  std::vector<TvDefinition> definitions;  // LA LD TTCD TBCD TRCD VEL LH
  // -1 when the face looks toward -x (the corpus convention), +1 otherwise.
  double anterior_x_sign = -1.0;

  static TvConfig defaults();
  const TvDefinition& get(std::string_view name) const;
  void validate() const;
};

TvConfig parse_tv_config(std::string_view json_text);
std::string dump_tv_config(const TvConfig& cfg);

struct MinDistance {
  double distance = 0.0;
  int index_a = 0;  // absolute point indices
  int index_b = 0;
};

// Smallest Euclidean distance between the two point ranges; ties go to the
// smallest (index_a, index_b).
MinDistance min_distance_pair(const ContourFrame& frame, const TvDefinition& def);
double tv_min_distance(const ContourFrame& frame, const TvDefinition& def);

// Signed displacement of the foremost upper-lip point ahead of the foremost
// upper-incisor point along the anterior direction.
double tv_lip_protrusion(const ContourFrame& frame, double anterior_x_sign = -1.0);

// Arc length along the pharyngeal wall, from its topmost end, to the wall point
// realizing the TRCD minimum.
double tv_trcl(const ContourFrame& frame, const TvDefinition& trcd);

// Unit principal direction of the pharyngeal-wall points, oriented toward +y.
Point pharyngeal_axis(const ContourFrame& frame);

// |(centroid(vocal folds) - palate reference) . axis| where the palate
// reference is the most posterior point of def.range_b on def.b.
double larynx_height(const ContourFrame& frame, const TvDefinition& def, double anterior_x_sign = -1.0);
double larynx_height(const ContourFrame& frame);

inline constexpr int kVelumPcaPoints = 25;
inline constexpr int kVelumPcaDims = 2 * kVelumPcaPoints;

// [x0..x24, y0..y24] of the velum midline.
Vector velum_vector(const ContourFrame& frame);

struct VelumPcaModel {
  Vector mean;       // 50
  Vector std;        // 50
  Vector component;  // 50, unit norm, raw eigenvector
  double eigenvalue = 0.0;
  double explained_variance_ratio = 0.0;
  int polarity = 1;  // +1 or -1; scores are multiplied by it

  Vector oriented_component() const { return polarity * component; }
};

// PC1 of the standardized velum vectors. Polarity makes the score correlate
// positively with the VEL distance. Throws NumericError on degenerate data.
VelumPcaModel fit_velum_pca(std::span<const ContourFrame> frames, const TvDefinition& vel);
VelumPcaModel fit_velum_pca(std::span<const ContourFrame> frames);

double velum_pc1_score(const Vector& velum, const VelumPcaModel& model);
double velum_pc1_score(const ContourFrame& frame, const VelumPcaModel& model);

std::string dump_velum_pca(const VelumPcaModel& model);
VelumPcaModel parse_velum_pca(std::string_view json_text);

// Output order of compute_all_tvs.
std::vector<std::string> tv_names(bool with_pca);

// name -> one value per frame. VEL_PCA is added when a model is given.
std::map<std::string, std::vector<double>> compute_all_tvs(std::span<const ContourFrame> frames,
                                                           const TvConfig& cfg,
                                                           const VelumPcaModel* pca = nullptr);

}  // namespace vt::tv
