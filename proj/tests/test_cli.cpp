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
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "maiq/dataset.hpp"

using namespace maiq;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  static const std::string cli = MAIQ_CLI_PATH;
  const fs::path capture = fs::temp_directory_path() / "maiq_cli_test_out.txt";
  const std::string cmd = cli + " " + args + " > " + capture.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(capture);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

struct Workspace {
  fs::path path;
  Workspace() : path(fs::temp_directory_path() / "maiq_cli_test") {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~Workspace() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("score prints the two-decimal challenge score") {
  const CliResult r = run_cli("score --top1 95.00 --top3 99.50 --runtime-ms 4.44");
  CHECK(r.exit_code == 0);
  CHECK(r.output == "163.08\n");

  const CliResult custom = run_cli("score --top1 100 --top3 100 --runtime-ms 5 --log2c 185");
  CHECK(custom.exit_code == 0);
  CHECK(custom.output == "6553.60\n");
}

TEST_CASE("usage errors exit with status 2") {
  CHECK(run_cli("unknown-subcommand").exit_code == 2);
  CHECK(run_cli("score --top1 1").exit_code == 2);  // missing required flags
  CHECK(run_cli("build --preset tiny").exit_code == 2);
  CHECK(run_cli("").exit_code == 2);
}

TEST_CASE("domain errors exit with status 1 and name the failure") {
  const CliResult r = run_cli("classify --model /nonexistent.maiq --image /nonexistent.ppm");
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("IoFailure") != std::string::npos);

  const CliResult s = run_cli("score --top1 90 --top3 95 --runtime-ms 0");
  CHECK(s.exit_code == 1);
  CHECK(s.output.find("NonPositiveRuntime") != std::string::npos);

  const CliResult b = run_cli("build --preset nosuch --out /tmp/x.maiq");
  CHECK(b.exit_code == 1);
}

TEST_CASE("build then classify yields labeled predictions with probabilities") {
  Workspace ws;
  const fs::path model = ws.path / "tiny.maiq";
  const fs::path corpus = ws.path / "corpus";
  CHECK(run_cli("build --preset tiny --seed 1 --out " + model.string()).exit_code == 0);
  CHECK(run_cli("synth --out " + corpus.string() + " --per-class 1 --seed 2").exit_code == 0);

  const Corpus scanned = scan_corpus(corpus, CategoryRegistry::camsdd());
  const CliResult r =
      run_cli("classify --model " + model.string() + " --image " +
              scanned.entries.front().path.string() + " --top 3");
  CHECK(r.exit_code == 0);
  // three "rank. label probability" lines
  int lines = 0;
  std::stringstream ss(r.output);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    ++lines;
    CHECK(line.find('.') != std::string::npos);
    CHECK(line.find("0.") != std::string::npos);  // a probability
  }
  CHECK(lines == 3);
}

TEST_CASE("evaluate reports LabelMismatch when the corpus registry disagrees") {
  Workspace ws;
  const fs::path model = ws.path / "tiny.maiq";
  const fs::path corpus = ws.path / "corpus";
  CHECK(run_cli("build --preset tiny --seed 1 --out " + model.string()).exit_code == 0);
  CHECK(run_cli("synth --out " + corpus.string() + " --per-class 1 --seed 2").exit_code == 0);

  // reverse the corpus registry via labels.txt
  std::ofstream labels(corpus / "labels.txt");
  const auto& names = camsdd_category_names();
  for (int i = 29; i >= 0; --i) labels << names[static_cast<size_t>(i)] << "\n";
  labels.close();

  const CliResult r =
      run_cli("evaluate --model " + model.string() + " --data " + corpus.string());
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("LabelMismatch") != std::string::npos);
}

TEST_CASE("bench emits text and machine-readable reports") {
  Workspace ws;
  const fs::path model = ws.path / "tiny.maiq";
  const fs::path json = ws.path / "bench.json";
  CHECK(run_cli("build --preset tiny --seed 1 --out " + model.string()).exit_code == 0);
  const CliResult r = run_cli("bench --model " + model.string() +
                              " --runs 3 --warmup 0 --threads 1 --json " + json.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("median") != std::string::npos);
  CHECK(r.output.find("inclusive") != std::string::npos);
  CHECK(r.output.find("exclusive") != std::string::npos);
  std::ifstream in(json);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str().find("\"median_ms\"") != std::string::npos);
}

TEST_CASE("MAIQ_THREADS changes workers but never the report") {
  Workspace ws;
  const fs::path model = ws.path / "tiny.maiq";
  const fs::path corpus = ws.path / "corpus";
  CHECK(run_cli("build --preset tiny --seed 6 --out " + model.string()).exit_code == 0);
  CHECK(run_cli("synth --out " + corpus.string() + " --per-class 2 --seed 8").exit_code == 0);
  const CliResult serial =
      run_cli("evaluate --model " + model.string() + " --data " + corpus.string());
  static const std::string cli = MAIQ_CLI_PATH;
  const fs::path capture = fs::temp_directory_path() / "maiq_cli_threads_out.txt";
  const std::string cmd = "MAIQ_THREADS=4 " + cli + " evaluate --model " + model.string() +
                          " --data " + corpus.string() + " > " + capture.string() + " 2>&1";
  CHECK(std::system(cmd.c_str()) == 0);
  std::ifstream in(capture);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == serial.output);
}

TEST_CASE("evaluate with a runtime prints a one-row leaderboard") {
  Workspace ws;
  const fs::path model = ws.path / "evai.maiq";
  const fs::path corpus = ws.path / "corpus";
  CHECK(run_cli("build --preset evai --seed 1 --out " + model.string()).exit_code == 0);
  CHECK(run_cli("synth --out " + corpus.string() + " --per-class 1 --seed 4").exit_code == 0);
  const CliResult r = run_cli("evaluate --model " + model.string() + " --data " +
                              corpus.string() + " --runtime-ms 3.35");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("n=30") != std::string::npos);
  CHECK(r.output.find("top1=") != std::string::npos);
  CHECK(r.output.find("top3=") != std::string::npos);
  CHECK(r.output.find("final_score=") != std::string::npos);
  CHECK(r.output.find("Final Score") != std::string::npos);  // leaderboard header
}
