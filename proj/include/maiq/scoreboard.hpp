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

#ifndef MAIQ_SCOREBOARD_HPP_
#define MAIQ_SCOREBOARD_HPP_

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "maiq/dataset.hpp"
#include "maiq/graph.hpp"

namespace maiq {

struct EvalReport {
  int64_t n = 0;
  double top1 = 0.0;  // fraction in [0,1]
  double top3 = 0.0;
  std::array<std::array<int64_t, kCategoryCount>, kCategoryCount> confusion{};  // [true][pred]

  double per_class_accuracy(int cls) const;
};

// Challenge score: 2^(top1_pct + top3_pct - log2C) / runtime_ms, accuracies
// in percentage points. log2C defaults to 185, which reproduces the
// published leaderboard.
struct ScoringConfig {
  double log2_c = 185.0;
  int display_decimals = 2;
};

struct ScoreRow {
  std::string name;
  double top1_pct = 0.0;
  double top3_pct = 0.0;
  double runtime_ms = 0.0;
  double final_score = 0.0;
};

// k indices by descending probability, ties broken by ascending index.
std::vector<int> topk(const std::vector<float>& probs, int k);

// Classifies every corpus image. The model label table must match the corpus
// registry (LabelMismatch). Deterministic for any worker count.
EvalReport evaluate(const ModelGraph& model, const Corpus& corpus, int threads = 1);

// Throws NonPositiveRuntime. Evaluated in log space.
double final_score(double top1_pct, double top3_pct, double runtime_ms,
                   const ScoringConfig& cfg = {});

// Score rendered at the configured precision ("163.08").
std::string format_score(double score, const ScoringConfig& cfg = {});

// Fixed-width text table sorted by final_score descending (stable ties).
std::string render_leaderboard(std::vector<ScoreRow> rows);

// Machine-readable report document (shared by evaluate and bench outputs).
std::string report_json(const EvalReport& report, const std::vector<std::string>& labels,
                        std::optional<double> runtime_ms, std::optional<double> score);

}  // namespace maiq

#endif  // MAIQ_SCOREBOARD_HPP_
