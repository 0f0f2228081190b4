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

#ifndef MAIQ_BENCH_HPP_
#define MAIQ_BENCH_HPP_

#include <string>
#include <vector>

#include "maiq/graph.hpp"

namespace maiq {

struct BenchReport {
  int warmup_runs = 0;
  int timed_runs = 0;
  std::vector<double> latencies_ms;  // one per timed run
  double median_ms = 0.0;
  double mean_ms = 0.0;
  double std_ms = 0.0;
  double min_ms = 0.0;
  double fps = 0.0;  // 1000 / median
  bool includes_preprocessing = true;
  bool outputs_identical = true;  // every timed run produced the same bytes
};

struct BenchOptions {
  int warmup = 5;
  int runs = 50;
  bool include_preprocessing = true;
};

// Aggregates for a latency list; BenchReport stores exactly these.
void compute_stats(const std::vector<double>& latencies_ms, double& median, double& mean,
                   double& stddev, double& min_v);

// Monotonic-clock timing of repeated inference on one input; warmup runs are
// discarded. runs >= 3 required (InvalidArgument).
BenchReport benchmark(const ModelGraph& model, const Tensor& image, const BenchOptions& opt = {});

std::string bench_report_text(const BenchReport& r);
std::string bench_report_json(const BenchReport& r);

}  // namespace maiq

#endif  // MAIQ_BENCH_HPP_
