#include <map>

#include "commands.hpp"
#include "vt/contour_prep.hpp"
#include "vt/error.hpp"
#include "vt/experiment.hpp"
#include "vt/features.hpp"
#include "vt/io.hpp"
#include "vt/parallel.hpp"
#include "vt/registration.hpp"
#include "vt/synth.hpp"

namespace vt::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<double> to_vec(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector from_json_vec(const json& j, const std::string& where) {
  if (!j.is_array()) throw FormatError("schema", where + ": expected an array");
  auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// ---- extract -------------------------------------------------------------------

void cmd_extract(const std::string& kind_name, const fs::path& in, const fs::path& out) {
  const auto kind = features::parse_kind(kind_name);
  if (kind == features::FeatureKind::kEmbedding768) {
    throw UsageError("embeddings are produced by the external extractor, not by `vt extract`");
  }
  const auto wavs = list_files(in, ".wav");
  if (wavs.empty()) throw StructuralError("no .wav files in " + in.string());
  fs::create_directories(out);
  parallel_for(wavs.size(), [&](std::size_t i) {
    const auto audio = io::read_wav_mono16k(wavs[i]);
    io::write_feature_file(out / (wavs[i].stem().string() + ".vtaf"), features::extract(kind, audio), kFrameRateHz);
  });
  log(LogLevel::kInfo, "extracted " + std::to_string(wavs.size()) + " files");
  write_resolved_config(out, true, {{"command", "extract"}, {"kind", kind_name}, {"in", in}, {"out", out}});
}

// ---- normalize -------------------------------------------------------------------

json stats_json(const std::map<std::string, features::SessionStats>& stats) {
  json sessions = json::object();
  for (const auto& [id, s] : stats) {
    sessions[id] = {{"mean", to_vec(s.mean)}, {"std", to_vec(s.std)}, {"floored_columns", s.floored_columns}};
  }
  return {{"sessions", sessions}};
}

std::map<std::string, features::SessionStats> stats_from_json(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("sessions") || !j["sessions"].is_object()) {
    throw FormatError("schema", where + ": expected {\"sessions\": {...}}");
  }
  std::map<std::string, features::SessionStats> out;
  for (const auto& [id, s] : j["sessions"].items()) {
    features::SessionStats st;
    st.session_id = id;
    st.mean = from_json_vec(s.at("mean"), where);
    st.std = from_json_vec(s.at("std"), where);
    st.floored_columns = s.at("floored_columns").get<std::vector<int>>();
    if (st.mean.size() != st.std.size()) throw FormatError("schema", where + ": mean/std size mismatch");
    out.emplace(id, st);
  }
  return out;
}

void cmd_normalize(const fs::path& in, const fs::path& out, const fs::path& stats_path, const fs::path& corpus_path,
                   bool apply_only) {
  std::map<std::string, std::string> session_of;
  if (!corpus_path.empty()) {
    for (const auto& e : experiment::read_corpus(corpus_path).entries) session_of[e.id] = e.session_id;
  }
  const auto files = list_files(in, ".vtaf");
  if (files.empty()) throw StructuralError("no .vtaf files in " + in.string());
  std::vector<std::string> ids, sessions;
  std::vector<io::FeatureData> data;
  for (const auto& f : files) {
    ids.push_back(f.stem().string());
    data.push_back(io::read_feature_file(f));
    if (!corpus_path.empty() && !session_of.count(ids.back())) {
      throw StructuralError("'" + ids.back() + "' is not listed in " + corpus_path.string());
    }
    sessions.push_back(corpus_path.empty() ? "default" : session_of[ids.back()]);
  }
  std::map<std::string, features::SessionStats> stats;
  if (apply_only) {
    stats = stats_from_json(read_json(stats_path), stats_path.string());
  } else {
    std::vector<features::SessionMatrix> groups;
    for (std::size_t i = 0; i < data.size(); ++i) groups.push_back({sessions[i], &data[i].values});
    stats = features::fit_session_stats(groups);
    write_json(stats_path, stats_json(stats));
  }
  fs::create_directories(out);
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto it = stats.find(sessions[i]);
    if (it == stats.end()) throw StructuralError("no statistics for session '" + sessions[i] + "'");
    io::write_feature_file(out / files[i].filename(), features::apply_norm(data[i].values, it->second),
                           data[i].frame_rate_hz);
  }
  write_resolved_config(out, true,
                        {{"command", "normalize"}, {"in", in}, {"out", out}, {"stats", stats_path},
                         {"corpus", corpus_path}, {"apply_only", apply_only}});
}

// ---- prep-contours ----------------------------------------------------------------

void cmd_prep_contours(const fs::path& in, const fs::path& out, const fs::path& state_dir, int radius) {
  const auto files = list_files(in, ".json");
  if (files.empty()) throw StructuralError("no contour files in " + in.string());
  std::vector<io::ContourDocument> docs;
  std::vector<Matrix> mats;
  for (const auto& f : files) {
    docs.push_back(io::read_contours(f));
    for (const auto& fr : docs.back().frames) fr.validate();
    mats.push_back(flatten_frames(docs.back().frames));
  }
  std::map<std::string, std::vector<std::size_t>> sessions;
  for (std::size_t i = 0; i < docs.size(); ++i) sessions[docs[i].session_id].push_back(i);
  fs::create_directories(out);
  fs::create_directories(state_dir);
  for (const auto& [session, members] : sessions) {
    std::vector<const Matrix*> ms;
    for (auto i : members) ms.push_back(&mats[i]);
    const auto norm = contour_prep::normalize_session(ms, radius);
    Matrix std_row = norm.front().state.std.transpose();
    io::write_feature_file(state_dir / (session + ".std.vtaf"), std_row, kFrameRateHz);
    for (std::size_t k = 0; k < members.size(); ++k) {
      const auto& doc = docs[members[k]];
      std::vector<int> index;
      for (const auto& fr : doc.frames) index.push_back(fr.frame_index);
      const json meta{{"acquisition_id", doc.acquisition_id},
                      {"session_id", doc.session_id},
                      {"pixel_mm", doc.pixel_mm},
                      {"window_radius", radius},
                      {"frame_index", index},
                      {"floored_columns", norm[k].state.floored_columns}};
      io::write_feature_file(out / (doc.acquisition_id + ".vtaf"), norm[k].normalized, kFrameRateHz);
      write_json(out / (doc.acquisition_id + ".meta.json"), meta);
      io::write_feature_file(state_dir / (doc.acquisition_id + ".mean.vtaf"), norm[k].state.moving_mean, kFrameRateHz);
      write_json(state_dir / (doc.acquisition_id + ".state.json"), meta);
    }
  }
  write_resolved_config(out, true,
                        {{"command", "prep-contours"}, {"in", in}, {"out", out}, {"state", state_dir},
                         {"window_radius", radius}});
}

// ---- split ----------------------------------------------------------------------------

void cmd_split(const fs::path& contours, const fs::path& corpus, const fs::path& out) {
  std::vector<std::string> ids;
  if (!corpus.empty()) {
    for (const auto& e : experiment::read_corpus(corpus).entries) ids.push_back(e.id);
  } else if (!contours.empty()) {
    for (const auto& f : list_files(contours, ".json")) {
      auto stem = f.stem().string();
      const std::string suffix = ".meta";
      if (stem.size() > suffix.size() && stem.ends_with(suffix)) stem.resize(stem.size() - suffix.size());
      ids.push_back(stem);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  } else {
    throw UsageError("split needs --corpus or --contours");
  }
  const auto split = experiment::make_split(ids, globals().seed);
  io::write_file_bytes(out, experiment::dump_split(split));
  write_resolved_config(out, false, {{"command", "split"}, {"contours", contours}, {"corpus", corpus}, {"out", out}});
}

// ---- register -----------------------------------------------------------------------------

void cmd_register(const fs::path& ref_path, const fs::path& mask_path, const fs::path& in, const fs::path& out,
                  const fs::path& report_path, const registration::SearchGrid& grid) {
  const auto ref = io::read_pgm(ref_path);
  const auto mask = registration::Mask::from_image(io::read_pgm(mask_path));
  if (mask.width != ref.width || mask.height != ref.height) throw StructuralError("mask and reference sizes differ");
  const auto files = list_files(in, ".pgm");
  fs::create_directories(out);
  json items = json::array();
  for (const auto& f : files) {
    const auto img = io::read_pgm(f);
    if (img.width != ref.width || img.height != ref.height) {
      throw StructuralError(f.string() + ": image size differs from the reference");
    }
    const auto r = registration::register_image(img, ref, mask, grid);
    io::write_pgm(out / f.filename(), registration::apply_rigid(img, r.transform));
    items.push_back({{"image", f.filename().string()},
                     {"dx", r.transform.dx},
                     {"dy", r.transform.dy},
                     {"theta_deg", r.transform.theta_deg},
                     {"score", r.score}});
  }
  write_json(report_path, {{"reference", ref_path.filename().string()}, {"images", items}});
  write_resolved_config(out, true,
                        {{"command", "register"}, {"ref", ref_path}, {"mask", mask_path}, {"in", in}, {"out", out},
                         {"report", report_path}, {"max_shift_px", grid.max_shift_px},
                         {"shift_step_px", grid.shift_step_px}, {"max_theta_deg", grid.max_theta_deg},
                         {"theta_step_deg", grid.theta_step_deg}});
}

// ---- synth-corpus ---------------------------------------------------------------------------

void cmd_synth(const fs::path& out, synth::SynthOptions opts) {
  opts.seed = globals().seed;
  synth::synth_corpus(out, opts);
  write_resolved_config(out, true,
                        {{"command", "synth-corpus"}, {"out", out}, {"acquisitions", opts.acquisitions},
                         {"frames", opts.frames}, {"sessions", opts.sessions},
                         {"contour_noise_mm", opts.contour_noise_mm}});
}

}  // namespace

void add_data_commands(CLI::App& app) {
  {
    auto* c = app.add_subcommand("extract", "Compute MFCC (39) or LCC (30) features at 50 Hz from .wav files");
    auto kind = std::make_shared<std::string>();
    auto in = std::make_shared<std::string>(), out = std::make_shared<std::string>();
    c->add_option("--kind", *kind, "mfcc39|lcc30")->required()->check(CLI::IsMember({"mfcc39", "lcc30"}));
    c->add_option("--in", *in, "Directory of .wav files")->required();
    c->add_option("--out", *out, "Output directory for .vtaf files")->required();
    c->callback([=] { cmd_extract(*kind, *in, *out); });
  }
  {
    auto* c = app.add_subcommand("normalize", "Per-session z-normalization of feature files");
    auto in = std::make_shared<std::string>(), out = std::make_shared<std::string>();
    auto stats = std::make_shared<std::string>(), corpus = std::make_shared<std::string>();
    auto apply = std::make_shared<bool>(false);
    c->add_option("--in", *in, "Directory of .vtaf files")->required();
    c->add_option("--out", *out, "Output directory")->required();
    c->add_option("--stats", *stats, "Session statistics (written, or read with --apply-only)")->required();
    c->add_option("--corpus", *corpus, "corpus.json giving each acquisition's session");
    c->add_flag("--apply-only", *apply, "Use existing statistics instead of fitting");
    c->callback([=] { cmd_normalize(*in, *out, *stats, *corpus, *apply); });
  }
  {
    auto* c = app.add_subcommand("prep-contours", "Moving-average contour normalization per session");
    auto in = std::make_shared<std::string>(), out = std::make_shared<std::string>();
    auto state = std::make_shared<std::string>();
    auto radius = std::make_shared<int>(contour_prep::kWindowRadius);
    c->add_option("--in", *in, "Directory of contour .json files")->required();
    c->add_option("--out", *out, "Normalized targets (.vtaf + .meta.json)")->required();
    c->add_option("--state", *state, "Normalization state directory")->required();
    c->add_option("--window-radius", *radius, "Moving-average radius in frames")->check(CLI::PositiveNumber);
    c->callback([=] { cmd_prep_contours(*in, *out, *state, *radius); });
  }
  {
    auto* c = app.add_subcommand("split", "Random 80/10/10 split by acquisition");
    auto contours = std::make_shared<std::string>(), corpus = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    c->add_option("--contours", *contours, "Directory of normalized targets or contour files");
    c->add_option("--corpus", *corpus, "corpus.json");
    c->add_option("--out", *out, "split.json")->required();
    c->callback([=] { cmd_split(*contours, *corpus, *out); });
  }
  {
    auto* c = app.add_subcommand("register", "Rigid registration of PGM frames to a reference");
    auto ref = std::make_shared<std::string>(), mask = std::make_shared<std::string>();
    auto in = std::make_shared<std::string>(), out = std::make_shared<std::string>();
    auto rep = std::make_shared<std::string>();
    auto grid = std::make_shared<registration::SearchGrid>();
    c->add_option("--ref", *ref, "Reference image")->required();
    c->add_option("--mask", *mask, "Static-anatomy mask image")->required();
    c->add_option("--in", *in, "Directory of .pgm frames")->required();
    c->add_option("--out", *out, "Output directory for aligned frames")->required();
    c->add_option("--report", *rep, "Per-image transforms (JSON)")->required();
    c->add_option("--max-shift", grid->max_shift_px, "Largest shift in pixels");
    c->add_option("--shift-step", grid->shift_step_px, "Shift step in pixels");
    c->add_option("--max-theta", grid->max_theta_deg, "Largest rotation in degrees");
    c->add_option("--theta-step", grid->theta_step_deg, "Rotation step in degrees");
    c->callback([=] { cmd_register(*ref, *mask, *in, *out, *rep, *grid); });
  }
  {
    auto* c = app.add_subcommand("synth-corpus", "Write a synthetic corpus with a planted acoustic link");
    auto out = std::make_shared<std::string>();
    auto opts = std::make_shared<synth::SynthOptions>();
    c->add_option("--out", *out, "Output directory")->required();
    c->add_option("--acquisitions", opts->acquisitions, "Number of acquisitions")->check(CLI::PositiveNumber);
    c->add_option("--frames", opts->frames, "Frames per acquisition")->check(CLI::PositiveNumber);
    c->add_option("--sessions", opts->sessions, "Number of sessions")->check(CLI::PositiveNumber);
    c->add_option("--noise-mm", opts->contour_noise_mm, "Contour jitter (mm)")->check(CLI::NonNegativeNumber);
    c->callback([=] { cmd_synth(*out, *opts); });
  }
}

}  // namespace vt::cli
