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

#include "maiq/scoreboard.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "maiq/runtime.hpp"

namespace maiq {

double EvalReport::per_class_accuracy(int cls) const {
  const auto& row = confusion[static_cast<size_t>(cls)];
  const int64_t total = std::accumulate(row.begin(), row.end(), int64_t{0});
  return total > 0 ? static_cast<double>(row[static_cast<size_t>(cls)]) / total : 0.0;
}

std::vector<int> topk(const std::vector<float>& probs, int k) {
  if (k < 1 || k > static_cast<int>(probs.size())) {
    throw Error(Err::InvalidArgument, "k out of range");
  }
  std::vector<int> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const float pa = probs[static_cast<size_t>(a)], pb = probs[static_cast<size_t>(b)];
    return pa != pb ? pa > pb : a < b;
  });
  order.resize(static_cast<size_t>(k));
  return order;
}

EvalReport evaluate(const ModelGraph& model, const Corpus& corpus, int threads) {
  if (model.labels.size() != corpus.registry.names().size() ||
      !std::equal(model.labels.begin(), model.labels.end(), corpus.registry.names().begin())) {
    throw Error(Err::LabelMismatch, "model label table disagrees with corpus registry");
  }
  if (corpus.entries.empty()) throw Error(Err::EmptyCorpus, "no images to evaluate");

  const size_t n = corpus.entries.size();
  // Workers fill disjoint prediction slots; counting happens afterwards in
  // index order, so the report is identical for any worker count.
  std::vector<std::array<int, 3>> top3(n);
  auto work = [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) {
      const LabeledImage img = corpus.load(i);
      const std::vector<float> probs = model.infer(img.pixels);
      const std::vector<int> best = topk(probs, 3);
      top3[i] = {best[0], best[1], best[2]};
    }
  };
  const int workers = std::max(1, threads);
  if (workers == 1 || n < 2) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const size_t chunk = (n + workers - 1) / static_cast<size_t>(workers);
    for (int t = 1; t < workers; ++t) {
      const size_t lo = chunk * static_cast<size_t>(t);
      if (lo >= n) break;
      pool.emplace_back(work, lo, std::min(n, lo + chunk));
    }
    work(0, std::min(n, chunk));
    for (auto& th : pool) th.join();
  }

  EvalReport report;
  report.n = static_cast<int64_t>(n);
  int64_t hit1 = 0, hit3 = 0;
  for (size_t i = 0; i < n; ++i) {
    const int label = corpus.entries[i].label;
    const auto& best = top3[i];
    if (best[0] == label) ++hit1;
    if (best[0] == label || best[1] == label || best[2] == label) ++hit3;
    ++report.confusion[static_cast<size_t>(label)][static_cast<size_t>(best[0])];
  }
  report.top1 = static_cast<double>(hit1) / static_cast<double>(n);
  report.top3 = static_cast<double>(hit3) / static_cast<double>(n);
  return report;
}

double final_score(double top1_pct, double top3_pct, double runtime_ms,
                   const ScoringConfig& cfg) {
  if (!(runtime_ms > 0.0)) throw Error(Err::NonPositiveRuntime, "runtime must be positive");
  // 2^(top1+top3) overflows long before the quotient does; keep the whole
  // expression in log2 space.
  const double exponent = top1_pct + top3_pct - cfg.log2_c - std::log2(runtime_ms);
  return std::exp2(exponent);
}

std::string format_score(double score, const ScoringConfig& cfg) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", cfg.display_decimals, score);
  return buf;
}

std::string render_leaderboard(std::vector<ScoreRow> rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ScoreRow& a, const ScoreRow& b) { return a.final_score > b.final_score; });
  size_t name_w = 4;
  for (const auto& r : rows) name_w = std::max(name_w, r.name.size());
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-*s  %8s  %8s  %12s  %12s\n", static_cast<int>(name_w),
                "Team", "Top-1,%", "Top-3,%", "Runtime, ms", "Final Score");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%-*s  %8.2f  %8.2f  %12.2f  %12.2f\n",
                  static_cast<int>(name_w), r.name.c_str(), r.top1_pct, r.top3_pct, r.runtime_ms,
                  r.final_score);
    out << line;
  }
  return out.str();
}

std::string report_json(const EvalReport& report, const std::vector<std::string>& labels,
                        std::optional<double> runtime_ms, std::optional<double> score) {
  nlohmann::json doc;
  doc["n"] = report.n;
  doc["top1"] = report.top1;
  doc["top3"] = report.top3;
  doc["labels"] = labels;
  std::vector<double> per_class(kCategoryCount);
  for (int c = 0; c < kCategoryCount; ++c) per_class[static_cast<size_t>(c)] = report.per_class_accuracy(c);
  doc["per_class_accuracy"] = per_class;
  doc["confusion"] = report.confusion;
  if (runtime_ms) doc["runtime_ms"] = *runtime_ms;
  if (score) doc["final_score"] = *score;
  return doc.dump(2) + "\n";
}

}  // namespace maiq
