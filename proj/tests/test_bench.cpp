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

#include "doctest.h"
#include "maiq/bench.hpp"
#include "maiq/dataset.hpp"

using namespace maiq;

namespace {

Tensor some_image() {
  Tensor t = Tensor::real({1, kImageHeight, kImageWidth, 3});
  for (size_t i = 0; i < t.f32().size(); ++i) t.f32()[i] = static_cast<float>(i % 256);
  return t;
}

}  // namespace

TEST_CASE("compute_stats pins the documented median and fps") {
  double median = 0, mean = 0, stddev = 0, min_v = 0;
  compute_stats({4.0, 5.0, 6.0}, median, mean, stddev, min_v);
  CHECK(median == 5.0);
  CHECK(mean == doctest::Approx(5.0));
  CHECK(min_v == 4.0);
  CHECK(1000.0 / median == doctest::Approx(200.0));

  compute_stats({1.0, 2.0, 3.0, 10.0}, median, mean, stddev, min_v);
  CHECK(median == 2.5);  // even count averages the middle pair
  CHECK(min_v == 1.0);
}

TEST_CASE("benchmark records one latency per run with consistent aggregates") {
  const ModelGraph g = build_preset(PresetId::TINY, 51);
  const Tensor img = some_image();
  const BenchReport r = benchmark(g, img, {1, 3, true});
  CHECK(r.timed_runs == 3);
  CHECK(r.warmup_runs == 1);
  REQUIRE(r.latencies_ms.size() == 3);
  for (double v : r.latencies_ms) CHECK(v > 0.0);
  CHECK(r.fps == doctest::Approx(1000.0 / r.median_ms));
  CHECK(r.includes_preprocessing);
  CHECK(r.outputs_identical);

  // invariants: min <= median <= mean + 3*std, and the stored aggregates
  // match a recomputation from the raw list
  CHECK(r.min_ms <= r.median_ms);
  CHECK(r.median_ms <= r.mean_ms + 3.0 * r.std_ms + 1e-12);
  double median = 0, mean = 0, stddev = 0, min_v = 0;
  compute_stats(r.latencies_ms, median, mean, stddev, min_v);
  CHECK(r.median_ms == median);
  CHECK(r.mean_ms == mean);
  CHECK(r.std_ms == stddev);
  CHECK(r.min_ms == min_v);
}

TEST_CASE("benchmark can exclude preprocessing") {
  const ModelGraph g = build_preset(PresetId::TINY, 52);
  const BenchReport r = benchmark(g, some_image(), {0, 3, false});
  CHECK_FALSE(r.includes_preprocessing);
  CHECK(r.outputs_identical);
  CHECK(r.latencies_ms.size() == 3);
}

TEST_CASE("benchmark validates its run count") {
  const ModelGraph g = build_preset(PresetId::TINY, 53);
  CHECK_THROWS_AS(benchmark(g, some_image(), {0, 2, true}), Error);
}

TEST_CASE("bench reports render to text and json") {
  const ModelGraph g = build_preset(PresetId::TINY, 54);
  const BenchReport r = benchmark(g, some_image(), {0, 3, true});
  const std::string text = bench_report_text(r);
  CHECK(text.find("median") != std::string::npos);
  CHECK(text.find("fps") != std::string::npos);
  const std::string doc = bench_report_json(r);
  CHECK(doc.find("\"median_ms\"") != std::string::npos);
  CHECK(doc.find("\"latencies_ms\"") != std::string::npos);
  CHECK(doc.find("\"outputs_identical\": true") != std::string::npos);
}
