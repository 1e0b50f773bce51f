#include <fstream>
#include <iomanip>
#include <sstream>

#include "commands.hpp"
#include "vt/error.hpp"
#include "vt/experiment.hpp"
#include "vt/hash.hpp"
#include "vt/io.hpp"
#include "vt/training.hpp"

namespace vt::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Meta {
  std::string id, session;
  double pixel_mm = kReferencePixelMm;
  std::vector<int> frame_index;
};

Meta read_meta(const fs::path& path) {
  const json j = read_json(path);
  try {
    return {j.at("acquisition_id").get<std::string>(), j.at("session_id").get<std::string>(),
            j.at("pixel_mm").get<double>(), j.at("frame_index").get<std::vector<int>>()};
  } catch (const json::exception& e) {
    throw FormatError("schema", path.string() + ": " + e.what());
  }
}

// Feature rows are picked at the target frame indices (frames past the end of
// the features are tolerated up to the usual mismatch).
Matrix gather_rows(const Matrix& feats, std::vector<int>& frame_index, const std::string& id) {
  std::size_t keep = 0;
  while (keep < frame_index.size() && frame_index[keep] < feats.rows()) ++keep;
  const auto dropped = frame_index.size() - keep;
  const int last = keep ? frame_index[keep - 1] : -1;
  if (keep == 0 || dropped > static_cast<std::size_t>(experiment::kMaxLengthMismatch) ||
      feats.rows() - (last + 1) > experiment::kMaxLengthMismatch) {
    throw StructuralError(id + ": " + std::to_string(feats.rows()) + " feature rows do not match " +
                          std::to_string(frame_index.size()) + " contour frames");
  }
  frame_index.resize(keep);
  Matrix out(static_cast<Eigen::Index>(keep), feats.cols());
  for (std::size_t t = 0; t < keep; ++t) out.row(static_cast<Eigen::Index>(t)) = feats.row(frame_index[t]);
  return out;
}

experiment::PreparedAcquisition load_training_acq(const std::string& id, const fs::path& feat_dir,
                                                   const fs::path& norm_dir, const fs::path& phone_dir) {
  experiment::PreparedAcquisition a;
  const Meta meta = read_meta(norm_dir / (id + ".meta.json"));
  a.id = id;
  a.session_id = meta.session;
  a.frame_index = meta.frame_index;
  const auto targets = io::read_feature_file(norm_dir / (id + ".vtaf")).values;
  if (targets.rows() != static_cast<Eigen::Index>(a.frame_index.size()) || targets.cols() != kFrameVectorSize) {
    throw StructuralError(id + ": normalized targets do not match their metadata");
  }
  auto fd = io::read_feature_file(feat_dir / (id + ".vtaf"));
  a.features = gather_rows(features::align_to_50hz(fd.values, fd.frame_rate_hz), a.frame_index, id);
  a.targets = targets.topRows(static_cast<Eigen::Index>(a.frame_index.size()));
  if (!phone_dir.empty()) a.phones = io::read_phone_labels(phone_dir / (id + ".lab"));
  return a;
}

std::string history_csv(const std::vector<nn::EpochRecord>& h) {
  std::ostringstream os;
  os << std::setprecision(17) << "epoch,train_loss,val_loss\n";
  for (const auto& r : h) os << r.epoch << ',' << r.train_loss << ',' << r.val_loss << '\n';
  return os.str();
}

void cmd_train(const fs::path& feat_dir, const fs::path& norm_dir, const fs::path& split_path,
               const fs::path& config_path, const fs::path& out, const fs::path& phone_dir, bool resume) {
  auto settings = config_path.empty() ? experiment::TrainSettings{}
                                      : experiment::parse_train_settings(io::read_file_bytes(config_path));
  if (globals().seed_given || config_path.empty()) settings.train.seed = globals().seed;
  const auto split = experiment::parse_split(io::read_file_bytes(split_path));

  auto load = [&](const std::vector<std::string>& ids) {
    std::vector<nn::Sample> samples;
    for (const auto& id : ids) {
      auto a = load_training_acq(id, feat_dir, norm_dir, phone_dir);
      auto utts = experiment::utterances(a.id, a.frame_index, a.phones, settings.silence);
      auto s = experiment::make_samples(a, utts);
      samples.insert(samples.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
    }
    return samples;
  };
  const auto train_set = load(split.train);
  const auto val_set = load(split.val);
  if (train_set.empty() || val_set.empty()) throw StructuralError("no non-silent training or validation frames");
  log(LogLevel::kInfo, std::to_string(train_set.size()) + " training and " + std::to_string(val_set.size()) +
                           " validation utterances");

  nn::ModelDims dims;
  dims.input = static_cast<int>(train_set.front().features.cols());
  dims.dense1 = settings.widths.dense1;
  dims.dense2 = settings.widths.dense2;
  dims.lstm = settings.widths.lstm;
  fs::create_directories(out);
  const fs::path last = out / "last.ckpt";
  nn::TrainerState state = resume ? nn::state_from_checkpoint(nn::load_checkpoint(last), settings.train)
                                  : nn::start_training(nn::BiLstmModel::initialize(dims, settings.train.seed),
                                                       settings.train);
  if (state.model.dims() != dims) throw StructuralError("checkpoint model shape does not match the configuration");

  nn::TrainOptions opts;
  opts.on_epoch = [&](const nn::TrainerState& s) {
    const auto& h = s.history.back();
    log(LogLevel::kInfo, "epoch " + std::to_string(h.epoch) + " train " + std::to_string(h.train_loss) + " val " +
                             std::to_string(h.val_loss));
    nn::save_checkpoint(last, nn::checkpoint_from_state(s, settings.train));
  };
  nn::train(state, train_set, val_set, settings.train, opts);

  const std::string best = nn::encode_checkpoint(nn::best_checkpoint(state, settings.train));
  io::write_file_bytes(out / "best.ckpt", best);
  nn::save_checkpoint(last, nn::checkpoint_from_state(state, settings.train));
  io::write_file_bytes(out / "history.csv", history_csv(state.history));

  Vector mean = Vector::Zero(kFrameVectorSize);
  double frames = 0;
  for (const auto& s : train_set) {
    mean += s.targets.colwise().sum().transpose();
    frames += static_cast<double>(s.targets.rows());
  }
  mean /= frames;
  write_json(out / "train_summary.json",
             {{"best_epoch", state.stopping.best_epoch()},
              {"best_val_loss", state.stopping.best_loss()},
              {"epochs_done", state.epochs_done},
              {"early_stopped", state.epochs_done < settings.train.epochs},
              {"checkpoint_sha256", sha256_hex(best)},
              {"train_utterances", train_set.size()},
              {"train_frames", frames},
              {"target_mean", std::vector<double>(mean.data(), mean.data() + mean.size())}});
  json resolved = json::parse(experiment::dump_train_settings(settings));
  resolved.update({{"command", "train"}, {"features", feat_dir}, {"contours", norm_dir}, {"split", split_path},
                   {"config", config_path}, {"out", out}, {"phones", phone_dir}, {"resume", resume}});
  write_resolved_config(out, true, resolved);
}

void cmd_infer(const fs::path& ckpt_path, const fs::path& baseline_path, const fs::path& feat_path,
               const fs::path& state_dir, const fs::path& phones_path, const fs::path& out) {
  if (ckpt_path.empty() == baseline_path.empty()) throw UsageError("infer needs exactly one of --ckpt or --baseline");
  const std::string id = feat_path.stem().string();
  const Meta meta = read_meta(state_dir / (id + ".state.json"));
  experiment::PreparedAcquisition a;
  a.id = id;
  a.session_id = meta.session;
  a.frame_index = meta.frame_index;
  auto fd = io::read_feature_file(feat_path);
  a.features = gather_rows(features::align_to_50hz(fd.values, fd.frame_rate_hz), a.frame_index, id);
  const auto n = static_cast<Eigen::Index>(a.frame_index.size());
  a.state.moving_mean = io::read_feature_file(state_dir / (id + ".mean.vtaf")).values.topRows(n);
  const Matrix std_row = io::read_feature_file(state_dir / (meta.session + ".std.vtaf")).values;
  if (std_row.rows() != 1 || std_row.cols() != kFrameVectorSize || a.state.moving_mean.cols() != kFrameVectorSize) {
    throw StructuralError(id + ": normalization state has the wrong shape");
  }
  a.state.std = std_row.row(0).transpose();
  a.targets = Matrix::Zero(n, kFrameVectorSize);
  if (!phones_path.empty()) a.phones = io::read_phone_labels(phones_path);
  const auto utts = experiment::utterances(a.id, a.frame_index, a.phones);

  Matrix pred;
  if (!ckpt_path.empty()) {
    const auto ck = nn::load_checkpoint(ckpt_path);
    if (ck.model.dims().input != a.features.cols()) {
      throw StructuralError("model expects " + std::to_string(ck.model.dims().input) + " features, file has " +
                            std::to_string(a.features.cols()));
    }
    pred = experiment::predict_mm(ck.model, a, utts);
  } else {
    const json summary = read_json(baseline_path);
    const auto m = summary.at("target_mean").get<std::vector<double>>();
    if (m.size() != static_cast<std::size_t>(kFrameVectorSize)) throw FormatError("schema", "target_mean must have 800 values");
    pred = experiment::constant_prediction_mm(Eigen::Map<const Vector>(m.data(), kFrameVectorSize), a, utts);
  }
  io::ContourDocument doc;
  doc.acquisition_id = id;
  doc.session_id = meta.session;
  doc.pixel_mm = meta.pixel_mm;
  Eigen::Index row = 0;
  for (const auto& u : utts) {
    for (std::size_t i = u.begin; i < u.end; ++i, ++row) {
      doc.frames.push_back(unflatten_frame(std::span<const double>(pred.row(row).data(), kFrameVectorSize),
                                           a.frame_index[i]));
    }
  }
  io::write_contours(out, doc);
  write_resolved_config(out, false,
                        {{"command", "infer"}, {"ckpt", ckpt_path}, {"baseline", baseline_path}, {"features", feat_path},
                         {"state", state_dir}, {"phones", phones_path}, {"out", out}});
}

}  // namespace

void add_model_commands(CLI::App& app) {
  {
    auto* c = app.add_subcommand("train", "Train the Bi-LSTM regressor");
    auto feat = std::make_shared<std::string>(), norm = std::make_shared<std::string>();
    auto split = std::make_shared<std::string>(), cfg = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>(), phones = std::make_shared<std::string>();
    auto resume = std::make_shared<bool>(false);
    c->add_option("--features", *feat, "Normalized feature directory")->required();
    c->add_option("--contours", *norm, "Normalized contour directory (from prep-contours)")->required();
    c->add_option("--split", *split, "split.json")->required();
    c->add_option("--config", *cfg, "Training configuration (JSON)");
    c->add_option("--out", *out, "Output directory")->required();
    c->add_option("--phones", *phones, "Phone label directory used for silence removal");
    c->add_flag("--resume", *resume, "Continue from <out>/last.ckpt");
    c->callback([=] { cmd_train(*feat, *norm, *split, *cfg, *out, *phones, *resume); });
  }
  {
    auto* c = app.add_subcommand("infer", "Predict contours for one feature file");
    auto ckpt = std::make_shared<std::string>(), base = std::make_shared<std::string>();
    auto feat = std::make_shared<std::string>(), state = std::make_shared<std::string>();
    auto phones = std::make_shared<std::string>(), out = std::make_shared<std::string>();
    c->add_option("--ckpt", *ckpt, "Model checkpoint");
    c->add_option("--baseline", *base, "train_summary.json: predict the training mean instead of a model");
    c->add_option("--features", *feat, "Normalized feature file <id>.vtaf")->required();
    c->add_option("--state", *state, "Contour normalization state directory")->required();
    c->add_option("--phones", *phones, "Phone labels; silent frames are skipped");
    c->add_option("--out", *out, "Predicted contour file (.json)")->required();
    c->callback([=] { cmd_infer(*ckpt, *base, *feat, *state, *phones, *out); });
  }
}

}  // namespace vt::cli
