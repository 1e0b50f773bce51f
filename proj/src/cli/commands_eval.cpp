#include <fstream>
#include <iostream>
#include <iomanip>
#include <map>
#include <sstream>

#include "commands.hpp"
#include "vt/error.hpp"
#include "vt/evaluation.hpp"
#include "vt/experiment.hpp"
#include "vt/io.hpp"
#include "vt/statistics.hpp"
#include "vt/tract_variables.hpp"

namespace vt::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

tv::TvConfig load_defs(const fs::path& p) {
  return p.empty() ? tv::TvConfig::defaults() : tv::parse_tv_config(io::read_file_bytes(p));
}

// ---- eval ---------------------------------------------------------------------------

void cmd_eval(const fs::path& pred_dir, const fs::path& truth_dir, const fs::path& phone_dir, const fs::path& out,
              const fs::path& boxplot, const fs::path& pca_path, const fs::path& defs_path, const std::string& rule) {
  const auto preds = list_files(pred_dir, ".json");
  if (preds.empty()) throw StructuralError("no prediction files in " + pred_dir.string());
  std::vector<eval::EvalInput> inputs;
  for (const auto& p : preds) {
    const auto pd = io::read_contours(p);
    const auto td = io::read_contours(truth_dir / p.filename());
    if (pd.frames.size() > td.frames.size()) {
      throw StructuralError(p.filename().string() + ": prediction has " + std::to_string(pd.frames.size()) +
                            " frames but truth has " + std::to_string(td.frames.size()));
    }
    std::map<int, const ContourFrame*> by_index;
    for (const auto& f : td.frames) by_index[f.frame_index] = &f;
    eval::EvalInput in;
    in.id = pd.acquisition_id;
    for (const auto& f : pd.frames) {
      auto it = by_index.find(f.frame_index);
      if (it == by_index.end()) {
        throw StructuralError(p.filename().string() + ": frame " + std::to_string(f.frame_index) + " has no truth");
      }
      f.validate();
      in.frame_index.push_back(f.frame_index);
      in.truth_frames.push_back(*it->second);
    }
    in.pred = flatten_frames(pd.frames);
    if (!phone_dir.empty()) in.phones = io::read_phone_labels(phone_dir / (p.stem().string() + ".lab"));
    inputs.push_back(std::move(in));
  }
  eval::EvalOptions opts;
  opts.tvs = load_defs(defs_path);
  opts.outlier_rule = rule == "q3" ? eval::OutlierRule::kStrictQ3 : eval::OutlierRule::kWhisker;
  std::optional<tv::VelumPcaModel> pca;
  if (!pca_path.empty()) {
    pca = tv::parse_velum_pca(io::read_file_bytes(pca_path));
    opts.pca = &*pca;
  }
  const auto report = eval::evaluate(inputs, opts);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  io::write_file_bytes(out, eval::report_to_json(report));
  if (!boxplot.empty()) {
    std::ostringstream os;
    os << std::setprecision(10) << "acquisition,frame,mean_rmse\n";
    std::size_t k = 0;
    for (const auto& in : inputs) {
      for (int f : in.frame_index) os << in.id << ',' << f << ',' << report.frame_rmse[k++] << '\n';
    }
    io::write_file_bytes(boxplot, os.str());
  }
  write_resolved_config(out, false,
                        {{"command", "eval"}, {"pred", pred_dir}, {"truth", truth_dir}, {"phones", phone_dir},
                         {"out", out}, {"emit_boxplot", boxplot}, {"pca", pca_path}, {"defs", defs_path},
                         {"outlier_rule", rule}});
}

// ---- tract-vars ----------------------------------------------------------------------

void cmd_tract_vars(const fs::path& contours, const fs::path& defs_path, const fs::path& pca_path, bool fit_pca,
                    const fs::path& out) {
  const auto doc = io::read_contours(contours);
  const auto cfg = load_defs(defs_path);
  std::optional<tv::VelumPcaModel> pca;
  if (fit_pca) {
    if (pca_path.empty()) throw UsageError("--fit-pca needs --pca to write the model to");
    pca = tv::fit_velum_pca(doc.frames, cfg.get("VEL"));
    io::write_file_bytes(pca_path, tv::dump_velum_pca(*pca));
  } else if (!pca_path.empty()) {
    pca = tv::parse_velum_pca(io::read_file_bytes(pca_path));
  }
  const auto series = tv::compute_all_tvs(doc.frames, cfg, pca ? &*pca : nullptr);
  std::ostringstream os;
  os << std::setprecision(12) << "frame,name,value\n";
  for (std::size_t t = 0; t < doc.frames.size(); ++t) {
    for (const auto& name : tv::tv_names(pca.has_value())) {
      os << doc.frames[t].frame_index << ',' << name << ',' << series.at(name)[t] << '\n';
    }
  }
  io::write_file_bytes(out, os.str());
  write_resolved_config(out, false,
                        {{"command", "tract-vars"}, {"contours", contours}, {"defs", defs_path}, {"pca", pca_path},
                         {"fit_pca", fit_pca}, {"out", out},
                         {"definitions", json::parse(tv::dump_tv_config(cfg))}});
}

// ---- experiments -----------------------------------------------------------------------

void cmd_experiment(const std::string& mode, const fs::path& config) {
  auto cfg = experiment::parse_experiment_config(io::read_file_bytes(config), mode, config.parent_path());
  if (globals().seed_given) cfg.settings.train.seed = globals().seed;
  const auto rep = mode == "ablate" ? experiment::run_ablation_experiment(cfg) : experiment::run_embedding_experiment(cfg);
  io::write_file_bytes(cfg.out / "report.json", experiment::experiment_report_json(rep));
  io::write_file_bytes(cfg.out / "table.csv", experiment::experiment_table_csv(rep));
  json resolved = json::parse(experiment::dump_experiment_config(cfg, mode));
  resolved["command"] = mode == "ablate" ? "ablate" : "compare-embeddings";
  write_resolved_config(cfg.out, true, resolved);
}

// ---- stats ----------------------------------------------------------------------------------

std::vector<double> read_numbers(const fs::path& p) {
  std::istringstream in(io::read_file_bytes(p));
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw FormatError("number", p.string() + ": not a number: '" + tok + "'");
    }
  }
  return out;
}

void cmd_stats(const std::string& test, const fs::path& a, const fs::path& b, double alpha, const fs::path& out) {
  json j;
  const auto xa = read_numbers(a);
  if (test == "dagostino") {
    const auto r = stats::dagostino_normality(xa);
    j = {{"test_name", "dagostino_k2"}, {"statistic", r.statistic}, {"p_value", r.p_value}, {"n", r.n},
         {"z_skew", r.z_skew}, {"z_kurtosis", r.z_kurtosis}};
  } else {
    if (b.empty()) throw UsageError("wilcoxon needs --b");
    const auto r = stats::wilcoxon_signed_rank(xa, read_numbers(b), alpha);
    j = {{"test_name", "wilcoxon_signed_rank"}, {"statistic", r.statistic}, {"w_plus", r.w_plus},
         {"w_minus", r.w_minus}, {"p_value", r.p_value}, {"n", r.n}, {"significant", r.significant},
         {"alpha", alpha}, {"exact", r.exact}};
  }
  if (out.empty()) {
    std::cout << j.dump(2) << std::endl;
  } else {
    write_json(out, j);
    write_resolved_config(out, false, {{"command", "stats"}, {"test", test}, {"a", a}, {"b", b}, {"alpha", alpha}, {"out", out}});
  }
}

}  // namespace

void add_eval_commands(CLI::App& app) {
  {
    auto* c = app.add_subcommand("eval", "Evaluate predicted contours against ground truth");
    auto pred = std::make_shared<std::string>(), truth = std::make_shared<std::string>();
    auto phones = std::make_shared<std::string>(), out = std::make_shared<std::string>();
    auto box = std::make_shared<std::string>(), pca = std::make_shared<std::string>();
    auto defs = std::make_shared<std::string>();
    auto rule = std::make_shared<std::string>("whisker");
    c->add_option("--pred", *pred, "Directory of predicted contour files")->required();
    c->add_option("--truth", *truth, "Directory of ground-truth contour files")->required();
    c->add_option("--phones", *phones, "Directory of phone label files");
    c->add_option("--out", *out, "report.json")->required();
    c->add_option("--emit-boxplot", *box, "Per-frame mean RMSE (CSV)");
    c->add_option("--pca", *pca, "Velum PCA model (fitted on the truth when absent)");
    c->add_option("--defs", *defs, "Tract variable definitions (JSON)");
    c->add_option("--outlier-rule", *rule, "whisker|q3")->check(CLI::IsMember({"whisker", "q3"}));
    c->callback([=] { cmd_eval(*pred, *truth, *phones, *out, *box, *pca, *defs, *rule); });
  }
  {
    auto* c = app.add_subcommand("tract-vars", "Tract variables of one contour file (CSV: frame,name,value)");
    auto contours = std::make_shared<std::string>(), defs = std::make_shared<std::string>();
    auto pca = std::make_shared<std::string>(), out = std::make_shared<std::string>();
    auto fit = std::make_shared<bool>(false);
    c->add_option("--contours", *contours, "Contour file")->required();
    c->add_option("--defs", *defs, "Tract variable definitions (JSON)");
    c->add_option("--pca", *pca, "Velum PCA model (read, or written with --fit-pca)");
    c->add_flag("--fit-pca", *fit, "Fit the velum PCA on these contours");
    c->add_option("--out", *out, "Output CSV")->required();
    c->callback([=] { cmd_tract_vars(*contours, *defs, *pca, *fit, *out); });
  }
  for (const auto& [name, mode, help] :
       {std::tuple{"ablate", "ablate", "Training-set size ablation"},
        std::tuple{"compare-embeddings", "compare", "Compare input representations"}}) {
    auto* c = app.add_subcommand(name, help);
    auto cfg = std::make_shared<std::string>();
    c->add_option("--config", *cfg, "Experiment configuration (JSON)")->required();
    const std::string m = mode;
    c->callback([=] { cmd_experiment(m, *cfg); });
  }
  {
    auto* c = app.add_subcommand("stats", "Wilcoxon signed-rank or D'Agostino normality test");
    auto test = std::make_shared<std::string>(), a = std::make_shared<std::string>();
    auto b = std::make_shared<std::string>(), out = std::make_shared<std::string>();
    auto alpha = std::make_shared<double>(0.05);
    c->add_option("--test", *test, "wilcoxon|dagostino")->required()->check(CLI::IsMember({"wilcoxon", "dagostino"}));
    c->add_option("--a", *a, "Whitespace-separated numbers")->required();
    c->add_option("--b", *b, "Paired sample (wilcoxon)");
    c->add_option("--alpha", *alpha, "Significance level");
    c->add_option("--out", *out, "Result JSON (stdout when absent)");
    c->callback([=] { cmd_stats(*test, *a, *b, *alpha, *out); });
  }
}

}  // namespace vt::cli
