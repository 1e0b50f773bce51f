#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vt/network.hpp"

namespace vt::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam() = default;
  Adam(std::size_t n, const AdamConfig& cfg) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> params, std::span<const double> grad);

  const AdamConfig& config() const { return cfg_; }
  std::uint64_t steps() const { return t_; }
  const std::vector<double>& first_moment() const { return m_; }
  const std::vector<double>& second_moment() const { return v_; }
  void restore(std::uint64_t steps, std::vector<double> m, std::vector<double> v);

 private:
  AdamConfig cfg_;
  std::uint64_t t_ = 0;
  std::vector<double> m_, v_;
};

// Stops after `patience` consecutive epochs without a strict improvement of
// the validation loss.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience = 10) : patience_(patience) {}

  // Returns true when training should stop after this epoch.
  bool observe(int epoch, double val_loss);

  double best_loss() const { return best_; }
  int best_epoch() const { return best_epoch_; }
  int stale_epochs() const { return stale_; }
  int patience() const { return patience_; }
  void restore(double best, int best_epoch, int stale) {
    best_ = best;
    best_epoch_ = best_epoch;
    stale_ = stale;
  }

 private:
  int patience_;
  double best_ = std::numeric_limits<double>::infinity();
  int best_epoch_ = 0;
  int stale_ = 0;
};

struct TrainConfig {
  int epochs = 300;
  int batch_size = 10;
  AdamConfig adam;
  int early_stop_patience = 10;
  std::uint64_t seed = 0;
  std::optional<double> clip_global_norm;  // off by default

  void validate() const;
};

// Hash of the training configuration and model shape, stored in checkpoints.
std::uint64_t config_hash(const TrainConfig& cfg, const ModelDims& dims);

// One utterance: normalized features and normalized contour targets.
struct Sample {
  std::string id;
  Matrix features;  // T x F
  Matrix targets;   // T x 800
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

// Everything needed to continue a run bit-exactly.
struct TrainerState {
  BiLstmModel model;
  Adam adam;
  int epochs_done = 0;
  EarlyStopping stopping;
  BiLstmModel best_model;
  std::vector<EpochRecord> history;
  bool finished = false;
};

TrainerState start_training(BiLstmModel initial, const TrainConfig& cfg);

struct TrainOptions {
  // Stop (without finishing) once this many epochs are done; resumable.
  std::optional<int> pause_after_epoch;
  std::function<void(const TrainerState&)> on_epoch;
};

// Frame-weighted mean of mse_loss over a set of utterances.
double dataset_loss(const BiLstmModel& model, std::span<const Sample> samples);

// Mini-batches of `batch_size` utterances in a per-epoch seeded order. Each
// batch's gradient is the frame-weighted mean over its utterances, summed in
// utterance-id order. Throws NumericError on a non-finite loss.
void train(TrainerState& state, std::span<const Sample> train_set, std::span<const Sample> val_set,
           const TrainConfig& cfg, const TrainOptions& options = {});

struct TrainResult {
  BiLstmModel best_model;
  int best_epoch = 0;
  double best_val_loss = 0.0;
  std::vector<EpochRecord> history;
  bool early_stopped = false;
};

TrainResult train(const BiLstmModel& initial, std::span<const Sample> train_set, std::span<const Sample> val_set,
                  const TrainConfig& cfg);

// Order in which epoch `epoch` (1-based) visits n utterances.
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch);

// ---- checkpoints -------------------------------------------------------------

struct Checkpoint {
  BiLstmModel model;
  std::uint64_t adam_steps = 0;
  std::vector<double> adam_m, adam_v;
  std::uint32_t epoch = 0;
  double val_loss = 0.0;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;

  // Present in resumable checkpoints.
  struct Resume {
    double best_val = 0.0;
    std::int32_t best_epoch = 0;
    std::int32_t stale = 0;
    BiLstmModel best_model;
    std::vector<EpochRecord> history;
    bool finished = false;
  };
  std::optional<Resume> resume;
};

std::string encode_checkpoint(const Checkpoint& ck);
Checkpoint decode_checkpoint(std::string_view bytes);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::filesystem::path& path);

Checkpoint checkpoint_from_state(const TrainerState& state, const TrainConfig& cfg);
TrainerState state_from_checkpoint(const Checkpoint& ck, const TrainConfig& cfg);
// Best-model checkpoint (no resume section).
Checkpoint best_checkpoint(const TrainerState& state, const TrainConfig& cfg);

}  // namespace vt::nn
