#include <doctest.h>

#include <fstream>
#include <iostream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "support/fixtures.hpp"
#include "vt/cli.hpp"
#include "vt/io.hpp"

using nlohmann::json;

namespace {

struct Result {
  int code = 0;
  std::string out, err;
};

Result vt_run(std::vector<std::string> args) {
  args.insert(args.begin(), "vt");
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  Result r;
  r.code = vt::cli::run(args);
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// The last stderr line, parsed.
json error_line(const std::string& err) {
  std::istringstream in(err);
  std::string line, last;
  while (std::getline(in, line)) {
    if (!line.empty()) last = line;
  }
  return json::parse(last);
}

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p) << s;
}

std::string slurp(const std::filesystem::path& p) { return vt::io::read_file_bytes(p); }

vt::io::ContourDocument doc(int frames, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  vt::io::ContourDocument d;
  d.acquisition_id = "a1";
  d.session_id = "s1";
  for (int i = 0; i < frames; ++i) d.frames.push_back(fixture::random_frame(rng, i, 20, 80));
  return d;
}

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(vt_run({"--help"}).code == 0);
  CHECK(vt_run({"eval", "--help"}).code == 0);

  for (const auto& args : std::vector<std::vector<std::string>>{
           {}, {"no-such-command"}, {"eval", "--truth", "x"}, {"--log-level", "loud", "split", "--out", "x"},
           {"stats", "--test", "ttest", "--a", "x"}}) {
    const auto r = vt_run(args);
    CHECK(r.code == 1);
    const auto j = error_line(r.err);
    CHECK(j["error"] == "usage");
    CHECK(j["exit_code"] == 1);
  }
}

TEST_CASE("eval with mismatched frame counts exits 2") {
  fixture::TempDir dir("cli_eval");
  vt::io::write_contours(dir / "truth/a1.json", doc(30, 1));
  vt::io::write_contours(dir / "pred/a1.json", doc(35, 2));
  const auto r = vt_run({"eval", "--pred", (dir / "pred").string(), "--truth", (dir / "truth").string(), "--out",
                         (dir / "report.json").string()});
  CHECK(r.code == 2);
  const auto j = error_line(r.err);
  CHECK(j["error"] == "structural");
  CHECK(!std::filesystem::exists(dir / "report.json"));

  // Predictions may cover a subset of the truth frames.
  vt::io::write_contours(dir / "pred/a1.json", doc(25, 2));
  const auto ok = vt_run({"eval", "--pred", (dir / "pred").string(), "--truth", (dir / "truth").string(), "--out",
                          (dir / "report.json").string()});
  CHECK(ok.code == 0);
  CHECK(json::parse(slurp(dir / "report.json"))["overall"]["n_frames"] == 25);
}

TEST_CASE("malformed input reports its format code") {
  fixture::TempDir dir("cli_fmt");
  write_text(dir / "truth/a1.json", "{\"frames\": ");
  vt::io::write_contours(dir / "pred/a1.json", doc(5, 2));
  const auto r = vt_run({"eval", "--pred", (dir / "pred").string(), "--truth", (dir / "truth").string(), "--out",
                         (dir / "report.json").string()});
  CHECK(r.code == 2);
  const auto j = error_line(r.err);
  CHECK(j["error"] == "format");
  CHECK(j["code"] == "json");
}

TEST_CASE("stats on degenerate input exits 3") {
  fixture::TempDir dir("cli_stats");
  write_text(dir / "a.txt", "1 2 3 4 5 6 7");
  write_text(dir / "short.txt", "1 2 3");
  auto r = vt_run({"stats", "--test", "wilcoxon", "--a", (dir / "a.txt").string(), "--b", (dir / "a.txt").string()});
  CHECK(r.code == 3);
  CHECK(error_line(r.err)["error"] == "numeric");
  r = vt_run({"stats", "--test", "dagostino", "--a", (dir / "short.txt").string()});
  CHECK(r.code == 3);
  r = vt_run({"stats", "--test", "wilcoxon", "--a", (dir / "a.txt").string(), "--b", (dir / "short.txt").string()});
  CHECK(r.code == 2);
}

TEST_CASE("stats writes a result and its resolved config") {
  fixture::TempDir dir("cli_stats_ok");
  write_text(dir / "a.txt", "1.83 0.50 1.62 2.48 1.68 1.88 1.55 3.06 1.30");
  write_text(dir / "b.txt", "0.878 0.647 0.598 2.05 1.06 1.29 1.06 3.14 1.29");
  const auto out = (dir / "w.json").string();
  const auto r = vt_run({"--seed", "7", "stats", "--test", "wilcoxon", "--a", (dir / "a.txt").string(), "--b",
                         (dir / "b.txt").string(), "--out", out});
  REQUIRE(r.code == 0);
  const auto j = json::parse(slurp(out));
  CHECK(j.dump().find("0.0390625") != std::string::npos);
  const auto cfg = json::parse(slurp(out + ".config.json"));
  CHECK(cfg["seed"] == 7);
  CHECK(cfg["test"] == "wilcoxon");
}

TEST_CASE("outputs are reproducible across runs") {
  fixture::TempDir dir("cli_repro");
  const auto s = dir.path().string();
  for (const char* tag : {"x", "y"}) {
    const std::string t = s + "/" + tag;
    REQUIRE(vt_run({"--seed", "3", "synth-corpus", "--out", t + "/corpus", "--acquisitions", "3", "--frames", "40"})
                .code == 0);
    REQUIRE(vt_run({"prep-contours", "--in", t + "/corpus/contours", "--out", t + "/norm", "--state", t + "/state"})
                .code == 0);
    REQUIRE(vt_run({"extract", "--kind", "mfcc39", "--in", t + "/corpus/wav", "--out", t + "/feat"}).code == 0);
  }
  std::size_t compared = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir / "x")) {
    if (!e.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(e.path(), dir / "x");
    auto a = slurp(e.path()), b = slurp(dir / "y" / rel.string());
    if (rel.filename() == "resolved_config.json" || rel.string().ends_with(".config.json")) {
      // Paths differ between the two runs; everything else must not.
      auto ja = json::parse(a), jb = json::parse(b);
      for (auto* j : {&ja, &jb}) {
        for (auto& [k, v] : j->items()) {
          if (v.is_string() && v.get<std::string>().find(s) != std::string::npos) v = "<path>";
        }
      }
      CHECK(ja == jb);
    } else {
      CHECK_MESSAGE(a == b, rel.string());
    }
    ++compared;
  }
  CHECK(compared > 10);
  CHECK(std::filesystem::exists(dir / "x/feat/resolved_config.json"));
}
