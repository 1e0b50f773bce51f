#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "support/fixtures.hpp"
#include "vt/error.hpp"
#include "vt/experiment.hpp"
#include "vt/synth.hpp"

using namespace vt;
using namespace vt::experiment;

namespace {

std::vector<std::string> ids(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back("acq" + std::to_string(1000 + i));
  return out;
}

std::string code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const FormatError& e) {
    return e.code();
  }
  return "";
}

std::vector<int> iota_frames(int n, int start = 0) {
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), start);
  return v;
}

}  // namespace

TEST_CASE("split sizes") {
  for (auto [n, k] : {std::pair{3, 1}, {10, 1}, {19, 1}, {20, 2}, {153, 15}}) {
    const auto s = make_split(ids(n), 5);
    CHECK(s.test.size() == static_cast<std::size_t>(k));
    CHECK(s.val.size() == static_cast<std::size_t>(k));
    CHECK(s.train.size() == static_cast<std::size_t>(n - 2 * k));
    std::set<std::string> all(s.train.begin(), s.train.end());
    all.insert(s.val.begin(), s.val.end());
    all.insert(s.test.begin(), s.test.end());
    CHECK(all.size() == static_cast<std::size_t>(n));
  }
  CHECK_THROWS_AS(make_split(ids(2), 1), StructuralError);
  CHECK_THROWS_AS(make_split({"a", "b", "a"}, 1), StructuralError);
}

TEST_CASE("split is seeded and ignores input order") {
  auto v = ids(40);
  const auto a = make_split(v, 11);
  std::reverse(v.begin(), v.end());
  const auto b = make_split(v, 11);
  CHECK(a.train == b.train);
  CHECK(a.val == b.val);
  CHECK(a.test == b.test);
  const auto c = make_split(v, 12);
  CHECK((c.test != a.test || c.val != a.val));

  const auto back = parse_split(dump_split(a));
  CHECK(back.seed == a.seed);
  CHECK(back.train == a.train);
  CHECK(back.test == a.test);
  CHECK(code_of([] { parse_split(R"({"seed":1,"train":["a"],"val":["a"],"test":["b"]})"); }) == "schema");
  CHECK(code_of([] { parse_split(R"({"seed":1,"train":["a"],"val":["b"],"test":["c"],"x":1})"); }) == "schema");
}

TEST_CASE("remove_silence keeps frames whose center is outside silence") {
  const auto frames = iota_frames(100);
  SUBCASE("no silence") {
    const std::vector<PhoneSegment> phones = {{"a", 0.0, 1.0}, {"b", 1.0, 2.0}};
    CHECK(remove_silence(frames, phones).size() == 100);
  }
  SUBCASE("fully silent") {
    const std::vector<PhoneSegment> phones = {{"sil", 0.0, 2.0}};
    CHECK(remove_silence(frames, phones).empty());
  }
  SUBCASE("interval oracle") {
    const std::vector<PhoneSegment> phones = {
        {"sil", 0.0, 0.31}, {"a", 0.31, 0.8}, {"sp", 0.8, 0.85}, {"b", 0.85, 1.5}, {"sil", 1.5, 2.0}};
    const auto kept = remove_silence(frames, phones);
    std::vector<std::size_t> expect;
    for (int i = 0; i < 100; ++i) {
      const double c = (i + 0.5) * 0.02;
      const bool sil = c < 0.31 || (c >= 0.8 && c < 0.85) || c >= 1.5;
      if (!sil) expect.push_back(static_cast<std::size_t>(i));
    }
    CHECK(kept == expect);

    const auto utts = utterances("x", frames, phones);
    REQUIRE(utts.size() == 2);
    CHECK(utts[0].begin == 15);
    CHECK(utts[0].end == 40);
    CHECK(utts[1].begin == 42);
    CHECK(utts[1].end == 75);
    CHECK(utts[0].duration_s() == doctest::Approx(0.5));
    CHECK(utts[0].id() == "x#00000015");
  }
  SUBCASE("custom labels") {
    const std::vector<PhoneSegment> phones = {{"pau", 0.0, 1.0}};
    CHECK(remove_silence(frames, phones).size() == 100);
    CHECK(remove_silence(frames, phones, {"pau"}).size() == 50);
  }
}

TEST_CASE("utterances split at gaps in the frame index") {
  std::vector<int> frames;
  for (int i = 0; i < 20; ++i) frames.push_back(i < 10 ? i : i + 10);
  const auto utts = utterances("y", frames, std::vector<PhoneSegment>{});
  REQUIRE(utts.size() == 2);
  CHECK(utts[0].frames() == 10);
  CHECK(utts[1].begin == 10);
  CHECK(utts[1].end == 20);
}

TEST_CASE("build_subset is nested and reaches the target") {
  std::mt19937_64 rng(3);
  std::vector<Utterance> pool;
  std::size_t pos = 0;
  double total = 0;
  for (int i = 0; i < 60; ++i) {
    const std::size_t len = 5 + rng() % 40;
    pool.push_back({"a" + std::to_string(i % 4), pos, pos + len});
    pos += len;
    total += static_cast<double>(len) / 50.0;
  }
  std::vector<std::size_t> prev;
  for (double frac : {0.1, 0.25, 0.5, 0.75, 1.0}) {
    const double target = frac * total;
    const auto sub = build_subset(pool, target, 17);
    double got = 0, longest = 0;
    for (auto i : sub) {
      got += pool[i].duration_s();
      longest = std::max(longest, pool[i].duration_s());
    }
    CHECK(got >= target - 1e-9);
    CHECK(got < target + longest + 1e-9);
    CHECK(std::includes(sub.begin(), sub.end(), prev.begin(), prev.end()));
    prev = sub;
  }
  CHECK(prev.size() == pool.size());
  CHECK(build_subset(pool, 0.3 * total, 17) == build_subset(pool, 0.3 * total, 17));
  CHECK_THROWS_AS(build_subset(pool, total + 1.0, 17), StructuralError);
}

TEST_CASE("train settings parse and reject unknown keys") {
  const auto s = parse_train_settings(
      R"({"model":{"dense1":8,"lstm":5},"train":{"epochs":7,"learning_rate":0.01,"seed":3},"silence_labels":["pau"]})");
  CHECK(s.widths.dense1 == 8);
  CHECK(s.widths.dense2 == 300);
  CHECK(s.widths.lstm == 5);
  CHECK(s.train.epochs == 7);
  CHECK(s.train.adam.learning_rate == 0.01);
  CHECK(s.train.seed == 3);
  CHECK(s.silence == std::set<std::string>{"pau"});

  const auto back = parse_train_settings(dump_train_settings(s));
  CHECK(back.widths.dense1 == 8);
  CHECK(back.train.epochs == 7);
  CHECK(back.silence == s.silence);

  const auto d = parse_train_settings("{}");
  CHECK(d.widths.lstm == 300);
  CHECK(d.train.batch_size == 10);
  CHECK(d.train.adam.learning_rate == 1e-3);
  CHECK(d.silence == default_silence_labels());

  CHECK(code_of([] { parse_train_settings(R"({"modle":{}})"); }) == "schema");
  CHECK(code_of([] { parse_train_settings(R"({"train":{"epoch":3}})"); }) == "schema");
  CHECK_THROWS_AS(parse_train_settings(R"({"model":{"lstm":0}})"), UsageError);
}

TEST_CASE("experiment config parsing") {
  const auto c = parse_experiment_config(
      R"({"corpus":"c/corpus.json","out":"o","conditions":[{"name":"m","kind":"mfcc39"}],"fractions":[0.5,1]})",
      "ablate", "/base");
  CHECK(c.corpus == std::filesystem::path("/base/c/corpus.json"));
  CHECK(c.out == std::filesystem::path("/base/o"));
  CHECK(c.fractions == std::vector<double>{0.5, 1.0});
  const auto back = parse_experiment_config(dump_experiment_config(c, "ablate"), "ablate");
  CHECK(back.corpus == c.corpus);
  CHECK(back.fractions == c.fractions);

  CHECK(code_of([] {
          parse_experiment_config(R"({"corpus":"c","out":"o","conditions":[{"name":"m","kind":"lcc30"}],"fractions":[1]})",
                                  "compare");
        }) == "schema");
  CHECK(code_of([] {
          parse_experiment_config(R"({"corpus":"c","out":"o","conditions":[{"name":"e","kind":"features"}]})", "compare");
        }) == "schema");
  CHECK_THROWS_AS(parse_experiment_config(R"({"corpus":"c","out":"o","conditions":[{"name":"a","kind":"lcc30"},
      {"name":"b","kind":"lcc30"}]})",
                                          "ablate"),
                  UsageError);
  CHECK_THROWS_AS(parse_experiment_config(
                      R"({"corpus":"c","out":"o","conditions":[{"name":"a","kind":"lcc30"}],"fractions":[1.5]})", "ablate"),
                  UsageError);
}

TEST_CASE("prepare truncates small length mismatches and rejects large ones") {
  std::mt19937_64 rng(9);
  auto make = [&](int frames, int rows, const std::string& id) {
    RawAcquisition r;
    r.id = id;
    r.session_id = "s";
    for (int i = 0; i < frames; ++i) r.frames.push_back(fixture::random_frame(rng, i, 10, 90));
    r.features = fixture::random_matrix(rng, rows, 3);
    return r;
  };
  SUBCASE("equal and within tolerance") {
    std::vector<RawAcquisition> raw;
    raw.push_back(make(70, 70, "a"));
    raw.push_back(make(70, 68, "b"));
    raw.push_back(make(68, 70, "c"));
    const auto p = prepare(std::move(raw));
    CHECK(p[0].features.rows() == 70);
    CHECK(p[1].features.rows() == 68);
    CHECK(p[1].truth.size() == 68);
    CHECK(p[2].features.rows() == 68);
    CHECK(p[2].targets.rows() == 68);
    CHECK(p[2].targets.cols() == 800);

    // Pooled session statistics: features have zero mean and unit population std.
    Eigen::Index n = 0;
    Vector sum = Vector::Zero(3), sq = Vector::Zero(3);
    for (const auto& a : p) {
      sum += a.features.colwise().sum().transpose();
      sq += a.features.array().square().colwise().sum().matrix().transpose();
      n += a.features.rows();
    }
    for (int j = 0; j < 3; ++j) {
      const double mean = sum(j) / static_cast<double>(n);
      CHECK(std::abs(mean) < 1e-12);
      CHECK(sq(j) / static_cast<double>(n) - mean * mean == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("too many extra feature rows") {
    std::vector<RawAcquisition> raw;
    raw.push_back(make(60, 63, "a"));
    CHECK_THROWS_AS(prepare(std::move(raw)), StructuralError);
  }
  SUBCASE("too many extra contour frames") {
    std::vector<RawAcquisition> raw;
    raw.push_back(make(63, 60, "a"));
    CHECK_THROWS_AS(prepare(std::move(raw)), StructuralError);
  }
}

TEST_CASE("corpus files round trip") {
  fixture::TempDir dir("corpus");
  Corpus c;
  c.root = dir.path();
  c.entries.push_back({"a1", "s1", "wav/a1.wav", "contours/a1.json", "phones/a1.lab"});
  c.entries.push_back({"a2", "s2", "wav/a2.wav", "contours/a2.json", "phones/a2.lab"});
  write_corpus(dir / "corpus.json", c);
  const auto back = read_corpus(dir / "corpus.json");
  REQUIRE(back.entries.size() == 2);
  CHECK(back.entries[1].id == "a2");
  CHECK(back.entries[1].session_id == "s2");
  CHECK(back.entries[0].wav == std::filesystem::path("wav/a1.wav"));
}

TEST_CASE("identical conditions give a degenerate pairwise test") {
  fixture::TempDir dir("cmp");
  synth::SynthOptions so;
  so.seed = 4;
  so.acquisitions = 4;
  so.frames = 80;
  synth::synth_corpus(dir / "corpus", so);
  auto cfg = parse_experiment_config(R"({"corpus":"corpus/corpus.json","out":"out","split_seed":1,
      "model":{"dense1":4,"dense2":4,"lstm":3},"train":{"epochs":2,"seed":1},
      "conditions":[{"name":"a","kind":"lcc30"},{"name":"b","kind":"lcc30"}]})",
                                     "compare", dir.path());
  const auto rep = run_embedding_experiment(cfg);
  REQUIRE(rep.conditions.size() == 2);
  CHECK(rep.conditions[0].checkpoint_sha256 == rep.conditions[1].checkpoint_sha256);
  CHECK(rep.conditions[0].report.overall_mean == rep.conditions[1].report.overall_mean);
  REQUIRE(!rep.pairwise.empty());
  for (const auto& t : rep.pairwise) {
    CHECK(!t.result.has_value());
    CHECK(!t.note.empty());
  }
  CHECK(std::filesystem::exists(cfg.out / "a" / "best.ckpt"));
}
