// Copyright 2026 The MAIQ Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "maiq/scoreboard.hpp"
#include "support/fixtures.hpp"
#include "support/probe.hpp"

using namespace maiq;
using namespace maiq::testing;
namespace fs = std::filesystem;

namespace {

double rounded2(double v) { return std::round(v * 100.0) / 100.0; }

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("topk breaks ties by ascending index and nests") {
  std::vector<float> one_hot(30, 0.0f);
  one_hot[7] = 1.0f;
  const std::vector<int> top3 = topk(one_hot, 3);
  CHECK(top3 == std::vector<int>{7, 0, 1});

  std::vector<float> distinct(30);
  for (int i = 0; i < 30; ++i) distinct[static_cast<size_t>(i)] = static_cast<float>((i * 17) % 30);
  const std::vector<int> all = topk(distinct, 30);
  std::set<int> seen(all.begin(), all.end());
  CHECK(seen.size() == 30);

  SplitMix64 rng(501);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<float> p(30);
    for (auto& v : p) v = static_cast<float>(rng.next_unit());
    CHECK(topk(p, 1)[0] == topk(p, 3)[0]);
  }
  CHECK_THROWS_AS(topk(one_hot, 0), Error);
  CHECK_THROWS_AS(topk(one_hot, 31), Error);
}

TEST_CASE("final_score reproduces every published leaderboard row") {
  for (const LeaderboardRow& row : kReferenceLeaderboard) {
    const double score = final_score(row.top1, row.top3, row.runtime_ms);
    CAPTURE(row.team);
    CHECK(std::abs(rounded2(score) - row.printed_score) <= 0.01 + 1e-9);
  }
  CHECK(format_score(final_score(95.00, 99.50, 4.44)) == "163.08");
  ScoringConfig four;
  four.display_decimals = 4;
  CHECK(format_score(1.0 / 3.0, four) == "0.3333");
}

TEST_CASE("final_score is monotone and scales inversely with runtime") {
  const double base = final_score(90.0, 95.0, 10.0);
  CHECK(final_score(90.5, 95.0, 10.0) > base);
  CHECK(final_score(90.0, 95.5, 10.0) > base);
  CHECK(final_score(90.0, 95.0, 11.0) < base);
  // doubling runtime halves the score exactly
  CHECK(final_score(90.0, 95.0, 20.0) == doctest::Approx(base / 2.0).epsilon(1e-12));
  CHECK_THROWS_AS(final_score(90.0, 95.0, 0.0), Error);
  CHECK_THROWS_AS(final_score(90.0, 95.0, -3.0), Error);
}

TEST_CASE("score ratios are independent of the normalization constant") {
  // score_a/score_b = 2^((t1a+t3a)-(t1b+t3b)) * rb/ra for any C
  for (double log2c : {100.0, 185.0, 250.0}) {
    ScoringConfig cfg;
    cfg.log2_c = log2c;
    const LeaderboardRow& a = kReferenceLeaderboard[0];
    const LeaderboardRow& b = kReferenceLeaderboard[3];
    const double ratio = final_score(a.top1, a.top3, a.runtime_ms, cfg) /
                         final_score(b.top1, b.top3, b.runtime_ms, cfg);
    const double expected =
        std::exp2((a.top1 + a.top3) - (b.top1 + b.top3)) * (b.runtime_ms / a.runtime_ms);
    CHECK(ratio == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("render_leaderboard sorts by score with stable ties") {
  std::vector<ScoreRow> rows;
  for (const LeaderboardRow& r : kReferenceLeaderboard) {
    rows.push_back({r.team, r.top1, r.top3, r.runtime_ms,
                    final_score(r.top1, r.top3, r.runtime_ms)});
  }
  // feed shuffled
  std::swap(rows[0], rows[5]);
  std::swap(rows[2], rows[8]);
  const std::string table = render_leaderboard(rows);
  const size_t byte_scene = table.find("ByteScene");
  const size_t evai = table.find("EVAI");
  const size_t neptune = table.find("neptuneai");
  const size_t sidiki = table.find("Sidiki");
  REQUIRE(byte_scene != std::string::npos);
  CHECK(byte_scene < evai);
  CHECK(evai < neptune);
  CHECK(neptune < sidiki);  // pre-rounding score ordering

  std::vector<ScoreRow> tied = {{"first", 90, 95, 10, 1.0}, {"second", 90, 95, 10, 1.0}};
  const std::string tied_table = render_leaderboard(tied);
  CHECK(tied_table.find("first") < tied_table.find("second"));

  const std::string single = render_leaderboard({{"only", 1, 2, 3, 4}});
  CHECK(single.find("only") != std::string::npos);
}

TEST_CASE("evaluate scores the color probe perfectly and flags mismatched labels") {
  TempDir dir("maiq_scoreboard_eval");
  SyntheticSpec spec;
  spec.images_per_class = 2;
  spec.noise_amplitude = 8;
  spec.seed = 99;
  generate_synthetic(spec, dir.path);
  const Corpus corpus = scan_corpus(dir.path, CategoryRegistry::camsdd());

  ModelGraph probe = build_preset(PresetId::TINY, 31);
  install_color_probe(probe, synthetic_signatures());
  const EvalReport report = evaluate(probe, corpus);
  CHECK(report.n == 60);
  CHECK(report.top1 == 1.0);
  CHECK(report.top3 == 1.0);
  for (int c = 0; c < 30; ++c) {
    CHECK(report.confusion[static_cast<size_t>(c)][static_cast<size_t>(c)] == 2);
    CHECK(report.per_class_accuracy(c) == 1.0);
  }
  CHECK(report.top1 <= report.top3);

  // threads do not change the outcome
  const EvalReport threaded = evaluate(probe, corpus, 4);
  CHECK(threaded.top1 == report.top1);
  CHECK(threaded.confusion == report.confusion);

  ModelGraph renamed = probe;
  renamed.labels[0] = "Selfie";
  try {
    static_cast<void>(evaluate(renamed, corpus));
    FAIL("expected LabelMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Err::LabelMismatch);
  }
}

TEST_CASE("evaluate rejects an empty corpus") {
  Corpus empty;
  empty.registry = CategoryRegistry::camsdd();
  const ModelGraph probe = build_preset(PresetId::TINY, 33);
  try {
    static_cast<void>(evaluate(probe, empty));
    FAIL("expected EmptyCorpus");
  } catch (const Error& e) {
    CHECK(e.code() == Err::EmptyCorpus);
  }
}

TEST_CASE("a constant-output model scores 1/30 on a balanced corpus") {
  TempDir dir("maiq_scoreboard_const");
  SyntheticSpec spec;
  spec.images_per_class = 2;
  spec.noise_amplitude = 4;
  spec.seed = 100;
  generate_synthetic(spec, dir.path);
  const Corpus corpus = scan_corpus(dir.path, CategoryRegistry::camsdd());

  ModelGraph constant = build_preset(PresetId::TINY, 32);
  install_constant_output(constant);
  const EvalReport report = evaluate(constant, corpus);
  // ties resolve to the lowest indices, so exactly class 0 is ever right
  CHECK(report.top1 == doctest::Approx(1.0 / 30));
  CHECK(report.top3 == doctest::Approx(3.0 / 30));

  // structural report invariants: trace/n = top1, rows sum to class counts
  int64_t trace = 0;
  for (int c = 0; c < 30; ++c) {
    trace += report.confusion[static_cast<size_t>(c)][static_cast<size_t>(c)];
    int64_t row = 0;
    for (int p = 0; p < 30; ++p) row += report.confusion[static_cast<size_t>(c)][static_cast<size_t>(p)];
    CHECK(row == corpus.per_class_count[static_cast<size_t>(c)]);
  }
  CHECK(static_cast<double>(trace) / static_cast<double>(report.n) == report.top1);
}

TEST_CASE("report_json carries the documented fields") {
  EvalReport report;
  report.n = 4;
  report.top1 = 0.75;
  report.top3 = 1.0;
  report.confusion[2][2] = 3;
  report.confusion[2][5] = 1;
  const std::string doc =
      report_json(report, std::vector<std::string>(camsdd_category_names().begin(),
                                                   camsdd_category_names().end()),
                  5.0, 6553.6);
  CHECK(doc.find("\"n\": 4") != std::string::npos);
  CHECK(doc.find("\"top1\": 0.75") != std::string::npos);
  CHECK(doc.find("\"final_score\": 6553.6") != std::string::npos);
  CHECK(doc.find("\"confusion\"") != std::string::npos);
  CHECK(doc.find("\"per_class_accuracy\"") != std::string::npos);
  // deterministic rendering
  CHECK(doc == report_json(report,
                           std::vector<std::string>(camsdd_category_names().begin(),
                                                    camsdd_category_names().end()),
                           5.0, 6553.6));
}
