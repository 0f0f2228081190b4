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

#ifndef MAIQ_TESTS_SUPPORT_PROBE_HPP_
#define MAIQ_TESTS_SUPPORT_PROBE_HPP_

#include <array>

#include "maiq/dataset.hpp"
#include "maiq/graph.hpp"

namespace maiq::testing {

// Rewrites the weights of a REAL-mode `tiny` graph into a hand-constructed
// color probe: every conv averages one of the RGB planes through the net
// (channel c carries color c mod 3 as 2*color + 2), and the final FC scores
// nearest-centroid distances against the synthetic class signatures. On the
// synthetic corpus this classifier is exact by construction.
void install_color_probe(ModelGraph& g,
                         const std::array<std::array<uint8_t, 3>, kCategoryCount>& signatures);

// Zeroes the final FC so every image yields identical logits (uniform
// softmax); top-k then always picks the lowest class indices.
void install_constant_output(ModelGraph& g);

}  // namespace maiq::testing

#endif  // MAIQ_TESTS_SUPPORT_PROBE_HPP_
