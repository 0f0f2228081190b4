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

#ifndef MAIQ_TESTS_SUPPORT_FIXTURES_HPP_
#define MAIQ_TESTS_SUPPORT_FIXTURES_HPP_

#include <array>
#include <string>
#include <vector>

#include "maiq/tensor.hpp"

namespace maiq::testing {

// Published MAI 2021 quantized camera-scene-detection standings:
// (team, top-1 %, top-3 %, runtime ms, printed final score).
struct LeaderboardRow {
  const char* team;
  double top1, top3, runtime_ms, printed_score;
};

inline constexpr std::array<LeaderboardRow, 10> kReferenceLeaderboard = {{
    {"ByteScene", 95.00, 99.50, 4.44, 163.08},
    {"EVAI", 93.00, 98.00, 3.35, 19.10},
    {"MobileNet-V2", 94.17, 98.67, 16.38, 13.99},
    {"ALONG", 94.67, 99.50, 64.45, 8.94},
    {"Team Horizon", 92.33, 98.67, 7.70, 8.31},
    {"Airia-Det", 93.00, 99.00, 17.51, 7.31},
    {"DataArt Perceptrons", 91.50, 97.67, 54.13, 0.33},
    {"PyImageSearch", 89.67, 97.83, 45.88, 0.12},
    {"neptuneai", 83.67, 94.67, 4.17, 0.00},
    {"Sidiki", 78.00, 93.83, 1.74, 0.00},
}};

// The 24 per-row input shapes of the bytescene backbone table, in (h, w, c).
inline std::vector<Shape> bytescene_row_input_shapes() {
  std::vector<Shape> rows = {
      {1, 128, 128, 3},  // conv2d 3x3 s2
      {1, 64, 64, 16},   {1, 64, 64, 16}, {1, 32, 32, 24}, {1, 16, 16, 32},
      {1, 16, 16, 32},   {1, 16, 16, 32}, {1, 8, 8, 64},   {1, 8, 8, 64},
      {1, 8, 8, 64},     {1, 8, 8, 96},   {1, 8, 8, 96},   {1, 8, 8, 96},
  };
  for (int i = 0; i < 7; ++i) rows.push_back({1, 4, 4, 192});  // bneck rows 14-20
  rows.push_back({1, 4, 4, 192});    // conv2d 1x1 -> 1024
  rows.push_back({1, 4, 4, 1024});   // global avgpool
  rows.push_back({1, 1, 1, 1024});   // fc relu6 1280
  rows.push_back({1, 1, 1, 1280});   // fc 30
  return rows;
}

}  // namespace maiq::testing

#endif  // MAIQ_TESTS_SUPPORT_FIXTURES_HPP_
