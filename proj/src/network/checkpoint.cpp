#include "../io/bytes.hpp"
#include "vt/error.hpp"
#include "vt/io.hpp"
#include "vt/training.hpp"

namespace vt::nn {
namespace {

using io::detail::load_le;
using io::detail::store_le;

constexpr std::string_view kMagic = "VTCK";
constexpr std::uint16_t kVersion = 1;

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v = load_le<T>(bytes_.data() + pos_);
    pos_ += sizeof(T);
    return v;
  }
  std::vector<double> doubles(std::size_t n) {
    if (n > (bytes_.size() - pos_) / 8) throw FormatError("truncated", "checkpoint truncated");
    std::vector<double> v(n);
    for (auto& x : v) x = get<double>();
    return v;
  }
  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("truncated", "checkpoint truncated");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

void put_doubles(std::string& out, std::span<const double> v) {
  for (double x : v) store_le<double>(out, x);
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& ck) {
  const std::size_t n = ck.model.size();
  if (ck.adam_m.size() != n || ck.adam_v.size() != n) throw StructuralError("checkpoint: Adam moment size mismatch");
  std::string out;
  out.reserve(64 + 24 * n);
  out += kMagic;
  store_le<std::uint16_t>(out, kVersion);
  const ModelDims& d = ck.model.dims();
  for (int v : {d.input, d.dense1, d.dense2, d.lstm, d.output}) store_le<std::uint32_t>(out, static_cast<std::uint32_t>(v));
  store_le<std::uint64_t>(out, ck.seed);
  store_le<std::uint64_t>(out, ck.config_hash);
  store_le<std::uint32_t>(out, ck.epoch);
  store_le<double>(out, ck.val_loss);
  store_le<std::uint64_t>(out, n);
  put_doubles(out, ck.model.params());
  store_le<std::uint64_t>(out, ck.adam_steps);
  put_doubles(out, ck.adam_m);
  put_doubles(out, ck.adam_v);
  store_le<std::uint8_t>(out, ck.resume ? 1 : 0);
  if (ck.resume) {
    const auto& r = *ck.resume;
    if (r.best_model.size() != n) throw StructuralError("checkpoint: best model size mismatch");
    store_le<double>(out, r.best_val);
    store_le<std::int32_t>(out, r.best_epoch);
    store_le<std::int32_t>(out, r.stale);
    store_le<std::uint8_t>(out, r.finished ? 1 : 0);
    put_doubles(out, r.best_model.params());
    store_le<std::uint32_t>(out, static_cast<std::uint32_t>(r.history.size()));
    for (const auto& h : r.history) {
      store_le<std::int32_t>(out, h.epoch);
      store_le<double>(out, h.train_loss);
      store_le<double>(out, h.val_loss);
    }
  }
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(4) != kMagic) throw FormatError("bad_magic", "checkpoint magic is not VTCK");
  if (auto v = in.get<std::uint16_t>(); v != kVersion) {
    throw FormatError("bad_version", "unsupported checkpoint version " + std::to_string(v));
  }
  ModelDims d;
  d.input = static_cast<int>(in.get<std::uint32_t>());
  d.dense1 = static_cast<int>(in.get<std::uint32_t>());
  d.dense2 = static_cast<int>(in.get<std::uint32_t>());
  d.lstm = static_cast<int>(in.get<std::uint32_t>());
  d.output = static_cast<int>(in.get<std::uint32_t>());
  Checkpoint ck;
  try {
    ck.model = BiLstmModel(d);
  } catch (const Error& e) {
    throw FormatError("bad_dims", std::string("checkpoint: ") + e.what());
  }
  ck.seed = in.get<std::uint64_t>();
  ck.config_hash = in.get<std::uint64_t>();
  ck.epoch = in.get<std::uint32_t>();
  ck.val_loss = in.get<double>();
  const auto n = in.get<std::uint64_t>();
  if (n != ck.model.size()) throw FormatError("bad_dims", "checkpoint parameter count does not match its dims");
  auto params = in.doubles(n);
  std::copy(params.begin(), params.end(), ck.model.params().begin());
  ck.adam_steps = in.get<std::uint64_t>();
  ck.adam_m = in.doubles(n);
  ck.adam_v = in.doubles(n);
  if (in.get<std::uint8_t>() == 1) {
    Checkpoint::Resume r;
    r.best_val = in.get<double>();
    r.best_epoch = in.get<std::int32_t>();
    r.stale = in.get<std::int32_t>();
    r.finished = in.get<std::uint8_t>() == 1;
    r.best_model = BiLstmModel(d);
    auto best = in.doubles(n);
    std::copy(best.begin(), best.end(), r.best_model.params().begin());
    const auto count = in.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < count; ++i) {
      EpochRecord h;
      h.epoch = in.get<std::int32_t>();
      h.train_loss = in.get<double>();
      h.val_loss = in.get<double>();
      r.history.push_back(h);
    }
    ck.resume = std::move(r);
  }
  if (!in.done()) throw FormatError("trailing_bytes", "checkpoint has trailing bytes");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  io::write_file_bytes(path, encode_checkpoint(ck));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  try {
    return decode_checkpoint(io::read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(e.code(), path.string() + ": " + e.what());
  }
}

Checkpoint checkpoint_from_state(const TrainerState& state, const TrainConfig& cfg) {
  Checkpoint ck;
  ck.model = state.model;
  ck.adam_steps = state.adam.steps();
  ck.adam_m = state.adam.first_moment();
  ck.adam_v = state.adam.second_moment();
  ck.epoch = static_cast<std::uint32_t>(state.epochs_done);
  ck.val_loss = state.history.empty() ? 0.0 : state.history.back().val_loss;
  ck.config_hash = config_hash(cfg, state.model.dims());
  ck.seed = cfg.seed;
  Checkpoint::Resume r;
  r.best_val = state.stopping.best_loss();
  r.best_epoch = state.stopping.best_epoch();
  r.stale = state.stopping.stale_epochs();
  r.best_model = state.best_model;
  r.history = state.history;
  r.finished = state.finished;
  ck.resume = std::move(r);
  return ck;
}

TrainerState state_from_checkpoint(const Checkpoint& ck, const TrainConfig& cfg) {
  if (!ck.resume) throw StructuralError("checkpoint has no resume section");
  if (ck.config_hash != config_hash(cfg, ck.model.dims())) {
    throw StructuralError("checkpoint was written with a different training configuration");
  }
  TrainerState s = start_training(ck.model, cfg);
  s.adam.restore(ck.adam_steps, ck.adam_m, ck.adam_v);
  s.epochs_done = static_cast<int>(ck.epoch);
  s.stopping.restore(ck.resume->best_val, ck.resume->best_epoch, ck.resume->stale);
  s.best_model = ck.resume->best_model;
  s.history = ck.resume->history;
  s.finished = ck.resume->finished;
  return s;
}

Checkpoint best_checkpoint(const TrainerState& state, const TrainConfig& cfg) {
  Checkpoint ck;
  ck.model = state.best_model;
  ck.adam_steps = state.adam.steps();
  ck.adam_m.assign(state.model.size(), 0.0);
  ck.adam_v.assign(state.model.size(), 0.0);
  ck.epoch = static_cast<std::uint32_t>(state.stopping.best_epoch());
  ck.val_loss = state.stopping.best_loss();
  ck.config_hash = config_hash(cfg, state.model.dims());
  ck.seed = cfg.seed;
  return ck;
}

}  // namespace vt::nn
