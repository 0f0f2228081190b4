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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "maiq/bench.hpp"
#include "maiq/dataset.hpp"
#include "maiq/graph.hpp"
#include "maiq/runtime.hpp"
#include "maiq/scoreboard.hpp"

namespace {

using namespace maiq;

// Deterministic benchmark input: a fixed gradient at the canonical corpus
// resolution, so `bench` needs no image on disk.
Tensor gradient_image() {
  Tensor t = Tensor::real({1, kImageHeight, kImageWidth, 3});
  auto data = t.f32();
  for (int64_t y = 0; y < kImageHeight; ++y) {
    for (int64_t x = 0; x < kImageWidth; ++x) {
      float* p = data.data() + (y * kImageWidth + x) * 3;
      p[0] = static_cast<float>(x % 256);
      p[1] = static_cast<float>(y % 256);
      p[2] = static_cast<float>((x + y) % 256);
    }
  }
  return t;
}

ImageSource corpus_source(const Corpus& corpus) {
  auto index = std::make_shared<size_t>(0);
  return [&corpus, index]() -> std::optional<Tensor> {
    if (*index >= corpus.entries.size()) return std::nullopt;
    return corpus.load((*index)++).pixels;
  };
}

int run_build(const std::string& preset, uint64_t seed, const std::string& out) {
  const auto id = preset_from_name(preset);
  if (!id) throw Error(Err::InvalidArgument, "unknown preset: " + preset);
  const ModelGraph g = build_preset(*id, seed);
  g.save(out);
  std::printf("preset=%s seed=%llu params=%lld bytes=%lld -> %s\n", preset.c_str(),
              static_cast<unsigned long long>(seed),
              static_cast<long long>(g.param_count()),
              static_cast<long long>(serialized_size(g)), out.c_str());
  return 0;
}

int run_quantize(const std::string& model, const std::string& calib, const std::string& out) {
  const ModelGraph g = ModelGraph::load(model);
  const Corpus corpus = scan_corpus(calib);
  const ModelGraph q = quantize_model(g, corpus_source(corpus));
  q.save(out);
  std::printf("calibrated on %zu images, bytes=%lld -> %s\n", corpus.entries.size(),
              static_cast<long long>(serialized_size(q)), out.c_str());
  return 0;
}

int run_classify(const std::string& model, const std::string& image, int top) {
  const ModelGraph g = ModelGraph::load(model);
  const Tensor pixels = decode_image(image);
  const std::vector<float> probs = g.infer(pixels);
  const std::vector<int> best = topk(probs, top);
  for (size_t i = 0; i < best.size(); ++i) {
    const int cls = best[i];
    const std::string& name = g.labels.empty() ? std::to_string(cls)
                                               : g.labels[static_cast<size_t>(cls)];
    std::printf("%zu. %s %.6f\n", i + 1, name.c_str(), probs[static_cast<size_t>(cls)]);
  }
  return 0;
}

int run_evaluate(const std::string& model, const std::string& data,
                 std::optional<double> runtime_ms, const std::string& json_path, double log2c) {
  const ModelGraph g = ModelGraph::load(model);
  // the corpus carries its own registry (labels.txt override or canonical);
  // evaluate() rejects models whose label table disagrees
  const Corpus corpus = scan_corpus(data);
  const EvalReport report = evaluate(g, corpus, runtime::threads());
  std::printf("n=%lld\n", static_cast<long long>(report.n));
  std::printf("top1=%.2f\n", report.top1 * 100.0);
  std::printf("top3=%.2f\n", report.top3 * 100.0);
  std::optional<double> score;
  if (runtime_ms) {
    ScoringConfig cfg;
    cfg.log2_c = log2c;
    score = final_score(report.top1 * 100.0, report.top3 * 100.0, *runtime_ms, cfg);
    std::printf("runtime_ms=%.2f\n", *runtime_ms);
    std::printf("final_score=%s\n", format_score(*score, cfg).c_str());
    ScoreRow row{std::filesystem::path(model).stem().string(), report.top1 * 100.0,
                 report.top3 * 100.0, *runtime_ms, *score};
    std::fputs(render_leaderboard({row}).c_str(), stdout);
  }
  if (!json_path.empty()) {
    std::ofstream out(json_path, std::ios::trunc);
    if (!out) throw Error(Err::IoFailure, "cannot open " + json_path);
    out << report_json(report, g.labels, runtime_ms, score);
  }
  return 0;
}

int run_bench(const std::string& model, int runs, int warmup, int threads,
              const std::string& json_path) {
  runtime::set_threads(threads);
  const ModelGraph g = ModelGraph::load(model);
  const Tensor image = gradient_image();
  const BenchReport inclusive = benchmark(g, image, {warmup, runs, true});
  const BenchReport exclusive = benchmark(g, image, {warmup, runs, false});
  std::printf("model=%s threads=%d\n", model.c_str(), runtime::threads());
  std::fputs(bench_report_text(inclusive).c_str(), stdout);
  std::fputs(bench_report_text(exclusive).c_str(), stdout);
  if (!json_path.empty()) {
    std::ofstream out(json_path, std::ios::trunc);
    if (!out) throw Error(Err::IoFailure, "cannot open " + json_path);
    out << "{\n\"inclusive\": " << bench_report_json(inclusive)
        << ",\n\"exclusive\": " << bench_report_json(exclusive) << "}\n";
  }
  return 0;
}

int run_score(double top1, double top3, double runtime_ms, double log2c) {
  ScoringConfig cfg;
  cfg.log2_c = log2c;
  std::printf("%s\n", format_score(final_score(top1, top3, runtime_ms, cfg), cfg).c_str());
  return 0;
}

int run_synth(const std::string& out, int per_class, uint64_t seed, int noise) {
  SyntheticSpec spec;
  spec.images_per_class = per_class;
  spec.seed = seed;
  spec.noise_amplitude = noise;
  generate_synthetic(spec, out);
  std::printf("wrote %d images to %s\n", per_class * kCategoryCount, out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"INT8 scene-classification engine and challenge harness"};
  app.require_subcommand(1);

  std::string preset = "bytescene", model, out, calib, image, data, json_path;
  uint64_t seed = 1;
  int top = 3, runs = 50, warmup = 5, threads = maiq::runtime::threads();
  int per_class = 10, noise = 8;
  double top1 = 0.0, top3 = 0.0, runtime_ms = 0.0, log2c = 185.0;
  std::optional<double> eval_runtime;

  auto* build = app.add_subcommand("build", "Build a preset model with random weights");
  build->add_option("--preset", preset, "bytescene|evai|tiny")->required();
  build->add_option("--seed", seed, "weight init seed");
  build->add_option("--out", out, "output model path")->required();

  auto* quantize = app.add_subcommand("quantize", "Post-training quantize a model");
  quantize->add_option("--model", model, "REAL-mode model path")->required();
  quantize->add_option("--calib", calib, "calibration corpus directory")->required();
  quantize->add_option("--out", out, "output model path")->required();

  auto* classify = app.add_subcommand("classify", "Classify one image");
  classify->add_option("--model", model, "model path")->required();
  classify->add_option("--image", image, "P6/PNG image path")->required();
  classify->add_option("--top", top, "predictions to print")->check(CLI::Range(1, 30));

  auto* eval = app.add_subcommand("evaluate", "Evaluate a model over a corpus");
  eval->add_option("--model", model, "model path")->required();
  eval->add_option("--data", data, "corpus directory")->required();
  auto* rt_opt = eval->add_option("--runtime-ms", runtime_ms, "externally measured runtime");
  eval->add_option("--json", json_path, "write machine-readable report here");
  eval->add_option("--log2c", log2c, "score normalization exponent");

  auto* bench_cmd = app.add_subcommand("bench", "Measure inference latency");
  bench_cmd->add_option("--model", model, "model path")->required();
  bench_cmd->add_option("--runs", runs, "timed runs")->check(CLI::Range(3, 100000));
  bench_cmd->add_option("--warmup", warmup, "warmup runs")->check(CLI::Range(0, 100000));
  bench_cmd->add_option("--threads", threads, "worker threads");
  bench_cmd->add_option("--json", json_path, "write machine-readable report here");

  auto* score_cmd = app.add_subcommand("score", "Challenge final score from metrics");
  score_cmd->add_option("--top1", top1, "top-1 accuracy, percent")->required();
  score_cmd->add_option("--top3", top3, "top-3 accuracy, percent")->required();
  score_cmd->add_option("--runtime-ms", runtime_ms, "runtime in ms")->required();
  score_cmd->add_option("--log2c", log2c, "score normalization exponent");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("--out", out, "corpus root directory")->required();
  synth->add_option("--per-class", per_class, "images per category")->check(CLI::Range(1, 100000));
  synth->add_option("--seed", seed, "generation seed");
  synth->add_option("--noise", noise, "pixel noise amplitude")->check(CLI::Range(0, 31));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (build->parsed()) return run_build(preset, seed, out);
    if (quantize->parsed()) return run_quantize(model, calib, out);
    if (classify->parsed()) return run_classify(model, image, top);
    if (eval->parsed()) {
      if (rt_opt->count() > 0) eval_runtime = runtime_ms;
      return run_evaluate(model, data, eval_runtime, json_path, log2c);
    }
    if (bench_cmd->parsed()) return run_bench(model, runs, warmup, threads, json_path);
    if (score_cmd->parsed()) return run_score(top1, top3, runtime_ms, log2c);
    if (synth->parsed()) return run_synth(out, per_class, seed, noise);
  } catch (const maiq::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
