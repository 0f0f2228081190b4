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

#include "maiq/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace maiq {

void compute_stats(const std::vector<double>& latencies_ms, double& median, double& mean,
                   double& stddev, double& min_v) {
  std::vector<double> sorted = latencies_ms;
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  median = n % 2 == 1 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
  min_v = sorted.front();
  double sum = 0.0;
  for (double v : sorted) sum += v;
  mean = sum / static_cast<double>(n);
  double var = 0.0;
  for (double v : sorted) var += (v - mean) * (v - mean);
  stddev = std::sqrt(var / static_cast<double>(n));
}

BenchReport benchmark(const ModelGraph& model, const Tensor& image, const BenchOptions& opt) {
  if (opt.runs < 3) throw Error(Err::InvalidArgument, "benchmark needs runs >= 3");
  if (opt.warmup < 0) throw Error(Err::InvalidArgument, "warmup must be >= 0");

  using clock = std::chrono::steady_clock;
  const Tensor preprocessed = opt.include_preprocessing ? Tensor() : model.preprocess(image);
  auto run_once = [&]() {
    return opt.include_preprocessing ? model.infer(image)
                                     : model.infer_preprocessed(preprocessed);
  };

  for (int i = 0; i < opt.warmup; ++i) run_once();

  BenchReport report;
  report.warmup_runs = opt.warmup;
  report.timed_runs = opt.runs;
  report.includes_preprocessing = opt.include_preprocessing;
  std::vector<float> first_output;
  for (int i = 0; i < opt.runs; ++i) {
    const auto t0 = clock::now();
    const std::vector<float> out = run_once();
    const auto t1 = clock::now();
    report.latencies_ms.push_back(
        std::chrono::duration<double, std::milli>(t1 - t0).count());
    if (i == 0) {
      first_output = out;
    } else if (out != first_output) {
      report.outputs_identical = false;
    }
  }
  compute_stats(report.latencies_ms, report.median_ms, report.mean_ms, report.std_ms,
                report.min_ms);
  report.fps = 1000.0 / report.median_ms;
  return report;
}

std::string bench_report_text(const BenchReport& r) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line),
                "%s: median %.3f ms | mean %.3f ms | std %.3f ms | min %.3f ms | %.1f fps "
                "(%d runs, %d warmup)\n",
                r.includes_preprocessing ? "inclusive (resize+normalize+net)" : "exclusive (net only)",
                r.median_ms, r.mean_ms, r.std_ms, r.min_ms, r.fps, r.timed_runs, r.warmup_runs);
  out << line;
  return out.str();
}

std::string bench_report_json(const BenchReport& r) {
  nlohmann::json doc;
  doc["warmup_runs"] = r.warmup_runs;
  doc["timed_runs"] = r.timed_runs;
  doc["latencies_ms"] = r.latencies_ms;
  doc["median_ms"] = r.median_ms;
  doc["mean_ms"] = r.mean_ms;
  doc["std_ms"] = r.std_ms;
  doc["min_ms"] = r.min_ms;
  doc["fps"] = r.fps;
  doc["includes_preprocessing"] = r.includes_preprocessing;
  doc["outputs_identical"] = r.outputs_identical;
  return doc.dump(2) + "\n";
}

}  // namespace maiq
