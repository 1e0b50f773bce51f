#include "vt/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "json_util.hpp"
#include "vt/error.hpp"
#include "vt/hash.hpp"
#include "vt/io.hpp"

namespace vt::experiment {
namespace {

using detail::json;
namespace fs = std::filesystem;

const PreparedAcquisition& find(std::span<const PreparedAcquisition> data, const std::string& id) {
  for (const auto& a : data) {
    if (a.id == id) return a;
  }
  throw StructuralError("acquisition '" + id + "' is not in the data set");
}

std::vector<Utterance> utterances_of(std::span<const PreparedAcquisition> data, const std::vector<std::string>& ids,
                                     const std::set<std::string>& silence) {
  std::vector<Utterance> out;
  for (const auto& id : ids) {
    const auto& a = find(data, id);
    auto u = utterances(a.id, a.frame_index, a.phones, silence);
    out.insert(out.end(), u.begin(), u.end());
  }
  return out;
}

std::vector<nn::Sample> samples_of(std::span<const PreparedAcquisition> data, std::span<const Utterance> utts) {
  std::vector<nn::Sample> out;
  for (const auto& u : utts) {
    auto s = make_samples(find(data, u.acquisition), std::span<const Utterance>(&u, 1));
    out.insert(out.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
  }
  return out;
}

std::vector<std::string> string_list(const json& j, const std::string& key, const std::string& where) {
  auto v = detail::get_as<std::vector<std::string>>(j, key, where);
  return v;
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

void write_text(const fs::path& path, const std::string& text) { io::write_file_bytes(path, text); }

std::string history_csv(const std::vector<nn::EpochRecord>& h) {
  std::ostringstream os;
  os << std::setprecision(17) << "epoch,train_loss,val_loss\n";
  for (const auto& r : h) os << r.epoch << ',' << r.train_loss << ',' << r.val_loss << '\n';
  return os.str();
}

json report_json(const eval::EvalReport& r) { return json::parse(eval::report_to_json(r)); }

std::string label_fraction(double f) {
  std::ostringstream os;
  os << std::round(f * 1000.0) / 10.0 << "%";
  return os.str();
}

std::string label_minutes(double m) {
  std::ostringstream os;
  os << m << "min";
  return os.str();
}

}  // namespace

// ---- splits ----------------------------------------------------------------

Split make_split(std::vector<std::string> ids, std::uint64_t seed) {
  const std::size_t n = ids.size();
  if (n < 3) throw StructuralError("a split needs at least 3 acquisitions, got " + std::to_string(n));
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw StructuralError("duplicate acquisition ids");
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(ids[i - 1], ids[rng() % i]);
  const std::size_t k = std::max<std::size_t>(1, n / 10);
  Split s;
  s.seed = seed;
  s.test.assign(ids.begin(), ids.begin() + k);
  s.val.assign(ids.begin() + k, ids.begin() + 2 * k);
  s.train.assign(ids.begin() + 2 * k, ids.end());
  for (auto* part : {&s.train, &s.val, &s.test}) std::sort(part->begin(), part->end());
  return s;
}

std::string dump_split(const Split& s) {
  return json{{"seed", s.seed}, {"train", s.train}, {"val", s.val}, {"test", s.test}}.dump(2) + "\n";
}

Split parse_split(std::string_view text) {
  const std::string where = "split file";
  json j = detail::parse_json(text, where);
  detail::check_keys(j, {"seed", "train", "val", "test"}, {}, where);
  Split s;
  s.seed = detail::get_as<std::uint64_t>(j, "seed", where);
  s.train = string_list(j, "train", where);
  s.val = string_list(j, "val", where);
  s.test = string_list(j, "test", where);
  std::set<std::string> seen;
  for (const auto* part : {&s.train, &s.val, &s.test}) {
    for (const auto& id : *part) {
      if (!seen.insert(id).second) throw FormatError("schema", where + ": '" + id + "' appears twice");
    }
  }
  if (s.train.empty() || s.val.empty() || s.test.empty()) throw FormatError("schema", where + ": empty partition");
  return s;
}

// ---- silence and utterances -------------------------------------------------

std::set<std::string> default_silence_labels() { return {"sil", "sp", ""}; }

std::vector<std::size_t> remove_silence(std::span<const int> frame_index, std::span<const PhoneSegment> phones,
                                        const std::set<std::string>& silence) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < frame_index.size(); ++i) {
    const double c = (frame_index[i] + 0.5) / kFrameRateHz;
    bool silent = false;
    for (const auto& p : phones) {
      if (silence.count(p.label) && c >= p.start_s && c < p.end_s) {
        silent = true;
        break;
      }
    }
    if (!silent) kept.push_back(i);
  }
  return kept;
}

std::string Utterance::id() const {
  std::ostringstream os;
  os << acquisition << '#' << std::setw(8) << std::setfill('0') << begin;
  return os.str();
}

std::vector<Utterance> utterances(const std::string& acquisition, std::span<const int> frame_index,
                                  std::span<const PhoneSegment> phones, const std::set<std::string>& silence) {
  const auto kept = remove_silence(frame_index, phones, silence);
  std::vector<Utterance> out;
  for (std::size_t k = 0; k < kept.size();) {
    std::size_t j = k;
    while (j + 1 < kept.size() && kept[j + 1] == kept[j] + 1 && frame_index[kept[j + 1]] == frame_index[kept[j]] + 1) {
      ++j;
    }
    out.push_back({acquisition, kept[k], kept[j] + 1});
    k = j + 1;
  }
  return out;
}

std::vector<std::size_t> build_subset(std::span<const Utterance> pool, double seconds, std::uint64_t seed) {
  double total = 0;
  for (const auto& u : pool) total += u.duration_s();
  if (seconds > total + 1e-9) {
    throw StructuralError("requested " + std::to_string(seconds) + " s of speech but only " + std::to_string(total) +
                          " s are available");
  }
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pool[a].id() < pool[b].id(); });
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  std::vector<std::size_t> out;
  double acc = 0;
  for (std::size_t i : order) {
    if (acc >= seconds - 1e-9) break;
    out.push_back(i);
    acc += pool[i].duration_s();
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---- corpus ------------------------------------------------------------------

Corpus read_corpus(const fs::path& corpus_json) {
  const std::string where = corpus_json.string();
  json j = detail::parse_json(io::read_file_bytes(corpus_json), where);
  detail::check_keys(j, {"acquisitions"}, {}, where);
  Corpus c;
  c.root = corpus_json.parent_path();
  std::set<std::string> seen;
  for (const auto& e : j["acquisitions"]) {
    detail::check_keys(e, {"id", "session_id", "wav", "contours", "phones"}, {}, where);
    CorpusEntry ce;
    ce.id = detail::get_as<std::string>(e, "id", where);
    ce.session_id = detail::get_as<std::string>(e, "session_id", where);
    ce.wav = detail::get_as<std::string>(e, "wav", where);
    ce.contours = detail::get_as<std::string>(e, "contours", where);
    ce.phones = detail::get_as<std::string>(e, "phones", where);
    if (!seen.insert(ce.id).second) throw FormatError("schema", where + ": duplicate id '" + ce.id + "'");
    c.entries.push_back(ce);
  }
  return c;
}

void write_corpus(const fs::path& corpus_json, const Corpus& corpus) {
  json arr = json::array();
  for (const auto& e : corpus.entries) {
    arr.push_back({{"id", e.id},
                   {"session_id", e.session_id},
                   {"wav", e.wav.generic_string()},
                   {"contours", e.contours.generic_string()},
                   {"phones", e.phones.generic_string()}});
  }
  write_text(corpus_json, json{{"acquisitions", arr}}.dump(2) + "\n");
}

std::vector<RawAcquisition> load_corpus(const Corpus& corpus, const Condition& cond) {
  std::vector<RawAcquisition> out(corpus.entries.size());
  for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
    const auto& e = corpus.entries[i];
    auto& r = out[i];
    r.id = e.id;
    r.session_id = e.session_id;
    auto doc = io::read_contours(resolve(corpus.root, e.contours));
    r.frames = std::move(doc.frames);
    r.phones = io::read_phone_labels(resolve(corpus.root, e.phones));
    if (cond.kind == "features") {
      auto f = io::read_feature_file(cond.feature_dir / (e.id + ".vtaf"));
      r.features = features::align_to_50hz(f.values, f.frame_rate_hz);
    } else {
      const auto kind = features::parse_kind(cond.kind);
      r.features = features::extract(kind, io::read_wav_mono16k(resolve(corpus.root, e.wav)));
    }
  }
  return out;
}

// ---- prepared data -------------------------------------------------------------

std::vector<PreparedAcquisition> prepare(std::vector<RawAcquisition> raw) {
  std::vector<PreparedAcquisition> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto& r = raw[i];
    auto& p = out[i];
    p.id = r.id;
    p.session_id = r.session_id;
    p.phones = std::move(r.phones);
    const auto rows = static_cast<int>(r.features.rows());
    std::vector<ContourFrame> kept;
    for (auto& f : r.frames) {
      if (f.frame_index < rows) kept.push_back(std::move(f));
    }
    const int dropped = static_cast<int>(r.frames.size() - kept.size());
    const int last = kept.empty() ? -1 : kept.back().frame_index;
    if (kept.empty() || dropped > kMaxLengthMismatch || rows - (last + 1) > kMaxLengthMismatch) {
      throw StructuralError(r.id + ": " + std::to_string(rows) + " feature rows do not match " +
                            std::to_string(r.frames.size()) + " contour frames");
    }
    for (const auto& f : kept) f.validate();
    p.features.resize(static_cast<Eigen::Index>(kept.size()), r.features.cols());
    for (std::size_t t = 0; t < kept.size(); ++t) {
      p.frame_index.push_back(kept[t].frame_index);
      p.features.row(static_cast<Eigen::Index>(t)) = r.features.row(kept[t].frame_index);
    }
    p.truth = std::move(kept);
    p.targets = flatten_frames(p.truth);
  }

  std::map<std::string, std::vector<std::size_t>> sessions;
  for (std::size_t i = 0; i < out.size(); ++i) sessions[out[i].session_id].push_back(i);
  for (const auto& [session, members] : sessions) {
    std::vector<const Matrix*> feats, contours;
    for (auto i : members) {
      feats.push_back(&out[i].features);
      contours.push_back(&out[i].targets);
    }
    const auto stats = features::fit_stats(feats, session);
    auto norm = contour_prep::normalize_session(contours);
    for (std::size_t k = 0; k < members.size(); ++k) {
      auto& p = out[members[k]];
      p.features = features::apply_norm(p.features, stats);
      p.targets = std::move(norm[k].normalized);
      p.state = std::move(norm[k].state);
    }
  }
  return out;
}

std::vector<nn::Sample> make_samples(const PreparedAcquisition& acq, std::span<const Utterance> utts) {
  std::vector<nn::Sample> out;
  for (const auto& u : utts) {
    if (u.acquisition != acq.id) throw StructuralError("utterance " + u.id() + " does not belong to " + acq.id);
    const auto b = static_cast<Eigen::Index>(u.begin), n = static_cast<Eigen::Index>(u.frames());
    out.push_back({u.id(), acq.features.middleRows(b, n), acq.targets.middleRows(b, n)});
  }
  return out;
}

namespace {

Matrix denormalize_rows(const Matrix& y, const PreparedAcquisition& acq, const Utterance& u) {
  const auto b = static_cast<Eigen::Index>(u.begin), n = static_cast<Eigen::Index>(u.frames());
  return (y.array().rowwise() * acq.state.std.transpose().array()).matrix() + acq.state.moving_mean.middleRows(b, n);
}

std::size_t total_frames(std::span<const Utterance> utts) {
  std::size_t n = 0;
  for (const auto& u : utts) n += u.frames();
  return n;
}

}  // namespace

Matrix predict_mm(const nn::BiLstmModel& model, const PreparedAcquisition& acq, std::span<const Utterance> utts) {
  Matrix out(static_cast<Eigen::Index>(total_frames(utts)), acq.targets.cols());
  Eigen::Index row = 0;
  for (const auto& u : utts) {
    const auto b = static_cast<Eigen::Index>(u.begin), n = static_cast<Eigen::Index>(u.frames());
    out.middleRows(row, n) = denormalize_rows(nn::forward(model, acq.features.middleRows(b, n)), acq, u);
    row += n;
  }
  return out;
}

Matrix constant_prediction_mm(const Vector& normalized_mean, const PreparedAcquisition& acq,
                              std::span<const Utterance> utts) {
  Matrix out(static_cast<Eigen::Index>(total_frames(utts)), acq.targets.cols());
  Eigen::Index row = 0;
  for (const auto& u : utts) {
    const auto n = static_cast<Eigen::Index>(u.frames());
    Matrix y = normalized_mean.transpose().replicate(n, 1);
    out.middleRows(row, n) = denormalize_rows(y, acq, u);
    row += n;
  }
  return out;
}

eval::EvalInput eval_input(const PreparedAcquisition& acq, std::span<const Utterance> utts, Matrix pred_mm) {
  eval::EvalInput in;
  in.id = acq.id;
  in.pred = std::move(pred_mm);
  in.phones = acq.phones;
  for (const auto& u : utts) {
    for (std::size_t i = u.begin; i < u.end; ++i) {
      in.frame_index.push_back(acq.frame_index[i]);
      in.truth_frames.push_back(acq.truth[i]);
    }
  }
  return in;
}

// ---- configs --------------------------------------------------------------------

namespace {

TrainSettings settings_from_json(const json& j, const std::string& where) {
  TrainSettings s;
  if (j.contains("model")) {
    const json& m = j["model"];
    detail::check_keys(m, {}, {"dense1", "dense2", "lstm"}, where + " model");
    s.widths.dense1 = m.value("dense1", s.widths.dense1);
    s.widths.dense2 = m.value("dense2", s.widths.dense2);
    s.widths.lstm = m.value("lstm", s.widths.lstm);
  }
  if (j.contains("train")) {
    const json& t = j["train"];
    detail::check_keys(t, {},
                       {"epochs", "batch_size", "learning_rate", "beta1", "beta2", "epsilon", "patience",
                        "clip_global_norm", "seed"},
                       where + " train");
    auto& c = s.train;
    c.epochs = t.value("epochs", c.epochs);
    c.batch_size = t.value("batch_size", c.batch_size);
    c.adam.learning_rate = t.value("learning_rate", c.adam.learning_rate);
    c.adam.beta1 = t.value("beta1", c.adam.beta1);
    c.adam.beta2 = t.value("beta2", c.adam.beta2);
    c.adam.epsilon = t.value("epsilon", c.adam.epsilon);
    c.early_stop_patience = t.value("patience", c.early_stop_patience);
    c.seed = t.value("seed", c.seed);
    if (t.contains("clip_global_norm") && !t["clip_global_norm"].is_null()) {
      c.clip_global_norm = detail::get_as<double>(t, "clip_global_norm", where);
    }
  }
  if (j.contains("silence_labels")) {
    auto v = string_list(j, "silence_labels", where);
    s.silence = std::set<std::string>(v.begin(), v.end());
  }
  if (s.widths.dense1 <= 0 || s.widths.dense2 <= 0 || s.widths.lstm <= 0) {
    throw UsageError(where + ": layer widths must be positive");
  }
  s.train.validate();
  return s;
}

json settings_to_json(const TrainSettings& s) {
  const auto& c = s.train;
  return json{{"model", {{"dense1", s.widths.dense1}, {"dense2", s.widths.dense2}, {"lstm", s.widths.lstm}}},
              {"train",
               {{"epochs", c.epochs},
                {"batch_size", c.batch_size},
                {"learning_rate", c.adam.learning_rate},
                {"beta1", c.adam.beta1},
                {"beta2", c.adam.beta2},
                {"epsilon", c.adam.epsilon},
                {"patience", c.early_stop_patience},
                {"clip_global_norm", c.clip_global_norm ? json(*c.clip_global_norm) : json(nullptr)},
                {"seed", c.seed}}},
              {"silence_labels", std::vector<std::string>(s.silence.begin(), s.silence.end())}};
}

}  // namespace

TrainSettings parse_train_settings(std::string_view text) {
  const std::string where = "training config";
  json j = detail::parse_json(text, where);
  detail::check_keys(j, {}, {"model", "train", "silence_labels"}, where);
  return settings_from_json(j, where);
}

std::string dump_train_settings(const TrainSettings& s) { return settings_to_json(s).dump(2) + "\n"; }

ExperimentConfig parse_experiment_config(std::string_view text, const std::string& mode, const fs::path& base) {
  const std::string where = mode == "ablate" ? "ablation config" : "comparison config";
  json j = detail::parse_json(text, where);
  if (mode == "ablate") {
    detail::check_keys(j, {"corpus", "out", "conditions"},
                       {"model", "train", "silence_labels", "split_seed", "fractions", "minutes"}, where);
  } else {
    detail::check_keys(j, {"corpus", "out", "conditions"}, {"model", "train", "silence_labels", "split_seed"}, where);
  }
  ExperimentConfig c;
  c.corpus = resolve(base, detail::get_as<std::string>(j, "corpus", where));
  c.out = resolve(base, detail::get_as<std::string>(j, "out", where));
  c.split_seed = j.value("split_seed", std::uint64_t{0});
  json sj = json::object();
  for (const char* k : {"model", "train", "silence_labels"}) {
    if (j.contains(k)) sj[k] = j[k];
  }
  c.settings = settings_from_json(sj, where);
  if (!j["conditions"].is_array() || j["conditions"].empty()) throw FormatError("schema", where + ": no conditions");
  for (const auto& cj : j["conditions"]) {
    detail::check_keys(cj, {"name", "kind"}, {"feature_dir"}, where + " condition");
    Condition cond;
    cond.name = detail::get_as<std::string>(cj, "name", where);
    cond.kind = detail::get_as<std::string>(cj, "kind", where);
    if (cond.kind == "features") {
      if (!cj.contains("feature_dir")) throw FormatError("schema", where + ": condition " + cond.name + " needs feature_dir");
      cond.feature_dir = resolve(base, detail::get_as<std::string>(cj, "feature_dir", where));
    } else {
      features::parse_kind(cond.kind);
    }
    c.conditions.push_back(cond);
  }
  if (mode == "ablate") {
    if (c.conditions.size() != 1) throw UsageError(where + ": ablation takes exactly one condition");
    if (j.contains("fractions")) c.fractions = detail::get_as<std::vector<double>>(j, "fractions", where);
    if (j.contains("minutes")) c.minutes = detail::get_as<std::vector<double>>(j, "minutes", where);
    if (c.fractions.empty() && c.minutes.empty()) c.fractions = {0.25, 0.5, 1.0};
    for (double f : c.fractions) {
      if (!(f > 0 && f <= 1)) throw UsageError(where + ": fractions must be in (0,1]");
    }
    for (double m : c.minutes) {
      if (!(m > 0)) throw UsageError(where + ": minutes must be positive");
    }
  }
  return c;
}

std::string dump_experiment_config(const ExperimentConfig& c, const std::string& mode) {
  json j = settings_to_json(c.settings);
  j["corpus"] = c.corpus.generic_string();
  j["out"] = c.out.generic_string();
  j["split_seed"] = c.split_seed;
  json conds = json::array();
  for (const auto& cond : c.conditions) {
    json cj{{"name", cond.name}, {"kind", cond.kind}};
    if (cond.kind == "features") cj["feature_dir"] = cond.feature_dir.generic_string();
    conds.push_back(cj);
  }
  j["conditions"] = conds;
  if (mode == "ablate") {
    j["fractions"] = c.fractions;
    j["minutes"] = c.minutes;
  }
  return j.dump(2) + "\n";
}

// ---- drivers ------------------------------------------------------------------------

ConditionResult run_condition(const std::string& name, std::span<const PreparedAcquisition> data, const Split& split,
                              std::span<const Utterance> train_utts, const TrainSettings& settings,
                              const fs::path& out_dir) {
  fs::create_directories(out_dir);
  ConditionResult res;
  res.name = name;
  res.train_utterances = train_utts.size();
  for (const auto& u : train_utts) res.train_seconds_of_speech += u.duration_s();

  const auto train_set = samples_of(data, train_utts);
  const auto val_utts = utterances_of(data, split.val, settings.silence);
  const auto val_set = samples_of(data, val_utts);
  if (train_set.empty() || val_set.empty()) throw StructuralError(name + ": empty training or validation set");

  nn::ModelDims dims;
  dims.input = static_cast<int>(train_set.front().features.cols());
  dims.dense1 = settings.widths.dense1;
  dims.dense2 = settings.widths.dense2;
  dims.lstm = settings.widths.lstm;
  dims.output = kFrameVectorSize;
  auto state = nn::start_training(nn::BiLstmModel::initialize(dims, settings.train.seed), settings.train);
  nn::train(state, train_set, val_set, settings.train);
  const auto best = nn::best_checkpoint(state, settings.train);
  const std::string bytes = nn::encode_checkpoint(best);
  io::write_file_bytes(out_dir / "best.ckpt", bytes);
  write_text(out_dir / "history.csv", history_csv(state.history));
  res.checkpoint_sha256 = sha256_hex(bytes);
  res.best_epoch = state.stopping.best_epoch();
  res.best_val_loss = state.stopping.best_loss();

  Vector target_mean = Vector::Zero(kFrameVectorSize);
  double frames = 0;
  for (const auto& s : train_set) {
    target_mean += s.targets.colwise().sum().transpose();
    frames += static_cast<double>(s.targets.rows());
  }
  target_mean /= frames;

  std::vector<eval::EvalInput> inputs, baseline;
  res.phone_scores.assign(kNumPredicted, {});
  for (const auto& id : split.test) {
    const auto& acq = find(data, id);
    const auto utts = utterances(acq.id, acq.frame_index, acq.phones, settings.silence);
    if (utts.empty()) continue;
    inputs.push_back(eval_input(acq, utts, predict_mm(state.best_model, acq, utts)));
    baseline.push_back(eval_input(acq, utts, constant_prediction_mm(target_mean, acq, utts)));
    const auto& in = inputs.back();
    const Matrix per = eval::frame_articulator_rmse(in.pred, flatten_frames(in.truth_frames));
    for (int a = 0; a < kNumPredicted; ++a) {
      std::vector<double> colv(static_cast<std::size_t>(per.rows()));
      for (Eigen::Index t = 0; t < per.rows(); ++t) colv[t] = per(t, a);
      auto agg = eval::aggregate_by_phone(colv, in.frame_index, in.phones);
      res.phone_scores[a].insert(res.phone_scores[a].end(), agg.values.begin(), agg.values.end());
    }
  }
  res.report = eval::evaluate(inputs);
  res.baseline = eval::evaluate(baseline);
  write_text(out_dir / "report.json", eval::report_to_json(res.report));
  return res;
}

namespace {

std::vector<PairwiseTest> pairwise_tests(const std::vector<ConditionResult>& conds) {
  std::vector<PairwiseTest> out;
  for (std::size_t i = 0; i < conds.size(); ++i) {
    for (std::size_t j = i + 1; j < conds.size(); ++j) {
      for (int a = 0; a < kNumPredicted; ++a) {
        PairwiseTest t;
        t.a = conds[i].name;
        t.b = conds[j].name;
        t.articulator = std::string(articulator_name(kPredictedArticulators[a]));
        try {
          t.result = stats::wilcoxon_signed_rank(conds[i].phone_scores[a], conds[j].phone_scores[a]);
        } catch (const NumericError& e) {
          t.note = e.what();
        }
        out.push_back(t);
      }
    }
  }
  return out;
}

struct Loaded {
  std::vector<PreparedAcquisition> data;
  Split split;
};

Loaded load_and_split(const ExperimentConfig& cfg, const Condition& cond) {
  Loaded l;
  l.data = prepare(load_corpus(read_corpus(cfg.corpus), cond));
  std::vector<std::string> ids;
  for (const auto& a : l.data) ids.push_back(a.id);
  l.split = make_split(ids, cfg.split_seed);
  return l;
}

}  // namespace

ExperimentReport run_embedding_experiment(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.mode = "compare";
  fs::create_directories(cfg.out);
  for (const auto& cond : cfg.conditions) {
    auto l = load_and_split(cfg, cond);
    rep.split = l.split;
    const auto train_utts = utterances_of(l.data, l.split.train, cfg.settings.silence);
    rep.conditions.push_back(run_condition(cond.name, l.data, l.split, train_utts, cfg.settings, cfg.out / cond.name));
  }
  write_text(cfg.out / "split.json", dump_split(rep.split));
  rep.pairwise = pairwise_tests(rep.conditions);
  return rep;
}

ExperimentReport run_ablation_experiment(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.mode = "ablate";
  fs::create_directories(cfg.out);
  auto l = load_and_split(cfg, cfg.conditions.front());
  rep.split = l.split;
  write_text(cfg.out / "split.json", dump_split(rep.split));
  const auto pool = utterances_of(l.data, l.split.train, cfg.settings.silence);
  double total = 0;
  for (const auto& u : pool) total += u.duration_s();

  std::vector<std::pair<double, std::string>> targets;
  for (double f : cfg.fractions) targets.emplace_back(f * total, label_fraction(f));
  for (double m : cfg.minutes) targets.emplace_back(std::min(m * 60.0, total), label_minutes(m));
  std::stable_sort(targets.begin(), targets.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [seconds, label] : targets) {
    std::vector<Utterance> subset;
    for (auto i : build_subset(pool, seconds, cfg.split_seed ^ 0xab1a7e5eedull)) subset.push_back(pool[i]);
    rep.conditions.push_back(run_condition(label, l.data, l.split, subset, cfg.settings, cfg.out / label));
  }
  rep.pairwise = pairwise_tests(rep.conditions);
  return rep;
}

std::string experiment_report_json(const ExperimentReport& r) {
  json conds = json::array();
  for (const auto& c : r.conditions) {
    conds.push_back({{"name", c.name},
                     {"train_seconds_of_speech", c.train_seconds_of_speech},
                     {"train_utterances", c.train_utterances},
                     {"best_epoch", c.best_epoch},
                     {"best_val_loss", c.best_val_loss},
                     {"checkpoint_sha256", c.checkpoint_sha256},
                     {"report", report_json(c.report)},
                     {"baseline_rmse_mean", c.baseline.overall_mean},
                     {"baseline_rmse_median", c.baseline.overall_median}});
  }
  json pw = json::array();
  for (const auto& p : r.pairwise) {
    json e{{"a", p.a}, {"b", p.b}, {"articulator", p.articulator}, {"test_name", "wilcoxon_signed_rank"}};
    if (p.result) {
      e["statistic"] = p.result->statistic;
      e["p_value"] = p.result->p_value;
      e["n"] = p.result->n;
      e["significant"] = p.result->significant;
      e["exact"] = p.result->exact;
    } else {
      e["degenerate"] = true;
      e["note"] = p.note;
    }
    pw.push_back(e);
  }
  json j{{"mode", r.mode}, {"split", json::parse(dump_split(r.split))}, {"conditions", conds}, {"pairwise", pw}};
  return j.dump(2) + "\n";
}

std::string experiment_table_csv(const ExperimentReport& r) {
  std::ostringstream os;
  os << std::setprecision(10) << "condition,articulator,rmse_mean,rmse_median\n";
  for (const auto& c : r.conditions) {
    for (const auto& a : c.report.articulators) os << c.name << ',' << a.name << ',' << a.rmse_mean << ',' << a.rmse_median << '\n';
    os << c.name << ",overall," << c.report.overall_mean << ',' << c.report.overall_median << '\n';
  }
  return os.str();
}

}  // namespace vt::experiment
