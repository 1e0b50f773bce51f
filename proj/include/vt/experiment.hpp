#pragma once

// Splits, silence removal, utterance subsets and the two experiment drivers
// (input-representation comparison and training-set-size ablation).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "vt/contour_prep.hpp"
#include "vt/evaluation.hpp"
#include "vt/features.hpp"
#include "vt/network.hpp"
#include "vt/training.hpp"

namespace vt::experiment {

// ---- splits ----------------------------------------------------------------

struct Split {
  std::uint64_t seed = 0;
  std::vector<std::string> train, val, test;
};

// val = test = floor(n / 10), at least 1 each; the rest trains. Acquisitions
// are shuffled with the seed first (sorted ids in, so input order is
// irrelevant). Needs n >= 3.
Split make_split(std::vector<std::string> ids, std::uint64_t seed);
std::string dump_split(const Split& s);
Split parse_split(std::string_view json_text);

// ---- silence and utterances -------------------------------------------------

std::set<std::string> default_silence_labels();

// Positions i whose frame center (frame_index[i] + 0.5) / 50 lies outside every
// silence-labeled segment.
std::vector<std::size_t> remove_silence(std::span<const int> frame_index, std::span<const PhoneSegment> phones,
                                        const std::set<std::string>& silence = default_silence_labels());

// Maximal runs of kept positions with consecutive frame indices.
struct Utterance {
  std::string acquisition;
  std::size_t begin = 0;  // positions, half-open
  std::size_t end = 0;
  std::size_t frames() const { return end - begin; }
  double duration_s() const { return static_cast<double>(frames()) / kFrameRateHz; }
  std::string id() const;  // "<acquisition>#<begin, zero-padded>"
};

std::vector<Utterance> utterances(const std::string& acquisition, std::span<const int> frame_index,
                                  std::span<const PhoneSegment> phones,
                                  const std::set<std::string>& silence = default_silence_labels());

// Indices into `pool`: utterances taken in a seed-shuffled order until their
// total duration reaches `seconds` (the crossing utterance is included). The
// same seed yields nested subsets for increasing targets.
std::vector<std::size_t> build_subset(std::span<const Utterance> pool, double seconds, std::uint64_t seed);

// ---- corpus on disk -----------------------------------------------------------

// corpus.json: {"acquisitions": [{"id", "session_id", "wav", "contours", "phones"}]}
// with paths relative to the file.
struct CorpusEntry {
  std::string id;
  std::string session_id;
  std::filesystem::path wav, contours, phones;
};

struct Corpus {
  std::filesystem::path root;
  std::vector<CorpusEntry> entries;
};

Corpus read_corpus(const std::filesystem::path& corpus_json);
void write_corpus(const std::filesystem::path& corpus_json, const Corpus& corpus);

// ---- prepared data ---------------------------------------------------------

// Feature rows and contour frames disagreeing by at most this many rows are
// truncated to the shorter length; larger mismatches are errors.
inline constexpr int kMaxLengthMismatch = 2;

struct PreparedAcquisition {
  std::string id;
  std::string session_id;
  std::vector<int> frame_index;
  std::vector<ContourFrame> truth;  // mm, all articulators
  std::vector<PhoneSegment> phones;
  Matrix features;                   // session-normalized, T x F
  Matrix targets;                    // normalized contours, T x 800
  contour_prep::ContourNormState state;
};

struct RawAcquisition {
  std::string id;
  std::string session_id;
  std::vector<ContourFrame> frames;
  std::vector<PhoneSegment> phones;
  Matrix features;  // 50 Hz, not normalized
};

// Truncates to a common length, fits feature statistics and contour
// normalization per session, and normalizes everything.
std::vector<PreparedAcquisition> prepare(std::vector<RawAcquisition> raw);

std::vector<nn::Sample> make_samples(const PreparedAcquisition& acq, std::span<const Utterance> utts);

// Model output for each utterance's frames, denormalized with the
// acquisition's own state; rows follow the utterances.
Matrix predict_mm(const nn::BiLstmModel& model, const PreparedAcquisition& acq, std::span<const Utterance> utts);
// Same, predicting the constant `normalized_mean` for every frame.
Matrix constant_prediction_mm(const Vector& normalized_mean, const PreparedAcquisition& acq,
                              std::span<const Utterance> utts);

eval::EvalInput eval_input(const PreparedAcquisition& acq, std::span<const Utterance> utts, Matrix pred_mm);

// ---- experiment drivers -------------------------------------------------------

struct ModelWidths {
  int dense1 = 300;
  int dense2 = 300;
  int lstm = 300;
};

// Model widths, optimizer settings and silence labels shared by `vt train`
// and the experiment configs:
// {"model": {...}, "train": {...}, "silence_labels": [...]}, all optional.
struct TrainSettings {
  ModelWidths widths;
  nn::TrainConfig train;
  std::set<std::string> silence = default_silence_labels();
};

TrainSettings parse_train_settings(std::string_view json_text);
std::string dump_train_settings(const TrainSettings& s);

struct Condition {
  std::string name;
  std::string kind;                    // mfcc39 | lcc30 | features
  std::filesystem::path feature_dir;   // kind == features: <id>.vtaf files
};

struct ExperimentConfig {
  std::filesystem::path corpus;  // corpus.json
  std::filesystem::path out;
  std::vector<Condition> conditions;
  TrainSettings settings;
  std::uint64_t split_seed = 0;
  // Ablation only: fractions of the training speech time and/or minutes.
  std::vector<double> fractions;
  std::vector<double> minutes;
};

// mode: "compare" or "ablate". Unknown keys are rejected; relative paths are
// resolved against base_dir.
ExperimentConfig parse_experiment_config(std::string_view json_text, const std::string& mode,
                                         const std::filesystem::path& base_dir = {});
std::string dump_experiment_config(const ExperimentConfig& cfg, const std::string& mode);

struct ConditionResult {
  std::string name;
  double train_seconds_of_speech = 0.0;
  std::size_t train_utterances = 0;
  int best_epoch = 0;
  double best_val_loss = 0.0;
  std::string checkpoint_sha256;
  eval::EvalReport report;
  eval::EvalReport baseline;                       // constant training-mean predictor
  std::vector<std::vector<double>> phone_scores;   // per articulator, phone-aggregated RMSE
};

struct PairwiseTest {
  std::string a, b, articulator;
  std::optional<stats::WilcoxonResult> result;  // empty when degenerate
  std::string note;
};

struct ExperimentReport {
  std::string mode;
  Split split;
  std::vector<ConditionResult> conditions;
  std::vector<PairwiseTest> pairwise;
};

// Trains one model on `train_utts` of `data` and evaluates it on the test
// acquisitions. Writes best.ckpt and history.csv under out_dir.
ConditionResult run_condition(const std::string& name, std::span<const PreparedAcquisition> data, const Split& split,
                              std::span<const Utterance> train_utts, const TrainSettings& settings,
                              const std::filesystem::path& out_dir);

ExperimentReport run_embedding_experiment(const ExperimentConfig& cfg);
ExperimentReport run_ablation_experiment(const ExperimentConfig& cfg);

std::string experiment_report_json(const ExperimentReport& r);
std::string experiment_table_csv(const ExperimentReport& r);

// Loads contours, phones and features (computing MFCC/LCC from the wav files
// when the condition asks for them) for every corpus entry.
std::vector<RawAcquisition> load_corpus(const Corpus& corpus, const Condition& cond);

}  // namespace vt::experiment
