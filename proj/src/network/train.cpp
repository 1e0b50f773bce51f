#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "vt/error.hpp"
#include "vt/hash.hpp"
#include "vt/parallel.hpp"
#include "vt/training.hpp"

namespace vt::nn {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

void require_finite(double v, int epoch, const char* what) {
  if (!std::isfinite(v)) {
    throw NumericError(std::string("training diverged: non-finite ") + what + " loss at epoch " +
                       std::to_string(epoch));
  }
}

// Sums the per-utterance summed-loss gradients of `members` (in the given
// order) into `grad`; returns {summed loss, frames}.
std::pair<double, double> batch_gradient(const BiLstmModel& model, std::span<const Sample> samples,
                                         const std::vector<std::size_t>& members, std::vector<double>& grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  double loss = 0.0, frames = 0.0;
  const std::size_t wave = std::max<std::size_t>(1, thread_count());
  std::vector<std::vector<double>> buffers(std::min(wave, members.size()));
  std::vector<double> losses(buffers.size());
  for (std::size_t start = 0; start < members.size(); start += wave) {
    const std::size_t count = std::min(wave, members.size() - start);
    parallel_for(count, [&](std::size_t k) {
      const Sample& s = samples[members[start + k]];
      buffers[k].assign(model.size(), 0.0);
      losses[k] = accumulate_summed_gradient(model, s.features, s.targets, buffers[k]);
    });
    for (std::size_t k = 0; k < count; ++k) {
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += buffers[k][i];
      loss += losses[k];
      frames += static_cast<double>(samples[members[start + k]].features.rows());
    }
  }
  return {loss, frames};
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs <= 0 || batch_size <= 0 || early_stop_patience <= 0) {
    throw UsageError("epochs, batch_size and patience must be positive");
  }
  if (!(adam.learning_rate > 0.0) || !(adam.beta1 >= 0.0 && adam.beta1 < 1.0) ||
      !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) || !(adam.epsilon > 0.0)) {
    throw UsageError("invalid Adam hyperparameters");
  }
  if (clip_global_norm && !(*clip_global_norm > 0.0)) throw UsageError("clip_global_norm must be positive");
}

std::uint64_t config_hash(const TrainConfig& cfg, const ModelDims& dims) {
  std::ostringstream os;
  os.precision(17);
  os << "epochs=" << cfg.epochs << ";batch=" << cfg.batch_size << ";lr=" << cfg.adam.learning_rate
     << ";b1=" << cfg.adam.beta1 << ";b2=" << cfg.adam.beta2 << ";eps=" << cfg.adam.epsilon
     << ";patience=" << cfg.early_stop_patience << ";seed=" << cfg.seed
     << ";clip=" << (cfg.clip_global_norm ? *cfg.clip_global_norm : 0.0) << ";dims=" << dims.input << ","
     << dims.dense1 << "," << dims.dense2 << "," << dims.lstm << "," << dims.output;
  return fnv1a64(os.str());
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(epoch))));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  return order;
}

TrainerState start_training(BiLstmModel initial, const TrainConfig& cfg) {
  cfg.validate();
  TrainerState s;
  s.adam = Adam(initial.size(), cfg.adam);
  s.best_model = initial;
  s.model = std::move(initial);
  s.stopping = EarlyStopping(cfg.early_stop_patience);
  return s;
}

double dataset_loss(const BiLstmModel& model, std::span<const Sample> samples) {
  if (samples.empty()) throw StructuralError("cannot compute the loss of an empty set");
  std::vector<double> sums(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    const Sample& s = samples[i];
    sums[i] = mse_loss(forward(model, s.features), s.targets) * static_cast<double>(s.features.rows());
  });
  double loss = 0.0, frames = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    loss += sums[i];
    frames += static_cast<double>(samples[i].features.rows());
  }
  return loss / frames;
}

void train(TrainerState& state, std::span<const Sample> train_set, std::span<const Sample> val_set,
           const TrainConfig& cfg, const TrainOptions& options) {
  cfg.validate();
  if (train_set.empty() || val_set.empty()) throw StructuralError("training and validation sets must be non-empty");
  std::vector<double> grad(state.model.size());
  const auto batch = static_cast<std::size_t>(cfg.batch_size);

  while (!state.finished && state.epochs_done < cfg.epochs) {
    const int epoch = state.epochs_done + 1;
    const auto order = epoch_order(train_set.size(), cfg.seed, epoch);
    double epoch_loss = 0.0, epoch_frames = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      std::vector<std::size_t> members(order.begin() + static_cast<std::ptrdiff_t>(start),
                                       order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + batch)));
      std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
        return std::tie(train_set[a].id, a) < std::tie(train_set[b].id, b);
      });
      auto [loss, frames] = batch_gradient(state.model, train_set, members, grad);
      require_finite(loss, epoch, "training");
      for (double& g : grad) g /= frames;
      if (cfg.clip_global_norm) {
        double norm = 0.0;
        for (double g : grad) norm += g * g;
        norm = std::sqrt(norm);
        if (norm > *cfg.clip_global_norm) {
          const double scale = *cfg.clip_global_norm / norm;
          for (double& g : grad) g *= scale;
        }
      }
      state.adam.step(state.model.params(), grad);
      epoch_loss += loss;
      epoch_frames += frames;
    }
    const double val = dataset_loss(state.model, val_set);
    require_finite(val, epoch, "validation");
    state.history.push_back({epoch, epoch_loss / epoch_frames, val});
    const bool stop = state.stopping.observe(epoch, val);
    if (state.stopping.best_epoch() == epoch) state.best_model = state.model;
    state.epochs_done = epoch;
    if (stop || epoch >= cfg.epochs) state.finished = true;
    if (options.on_epoch) options.on_epoch(state);
    if (options.pause_after_epoch && epoch >= *options.pause_after_epoch) return;
  }
  state.finished = true;
}

TrainResult train(const BiLstmModel& initial, std::span<const Sample> train_set, std::span<const Sample> val_set,
                  const TrainConfig& cfg) {
  TrainerState state = start_training(initial, cfg);
  train(state, train_set, val_set, cfg);
  TrainResult r;
  r.best_model = state.best_model;
  r.best_epoch = state.stopping.best_epoch();
  r.best_val_loss = state.stopping.best_loss();
  r.history = state.history;
  r.early_stopped = state.epochs_done < cfg.epochs;
  return r;
}

}  // namespace vt::nn
