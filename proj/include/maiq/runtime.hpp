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

#ifndef MAIQ_RUNTIME_HPP_
#define MAIQ_RUNTIME_HPP_

#include <cstdint>
#include <functional>

namespace maiq::runtime {

// Worker count for within-kernel and per-image parallelism. Defaults to
// MAIQ_THREADS from the environment, else 1.
int threads();
void set_threads(int n);

// Split [begin, end) into contiguous chunks, one per worker. Results must
// not depend on the partition: callers write disjoint output ranges and do
// no cross-chunk reductions. work_per_item estimates the operations behind
// one index; ranges whose total work cannot amortize a thread spawn run
// inline.
void parallel_for(int64_t begin, int64_t end, int64_t work_per_item,
                  const std::function<void(int64_t, int64_t)>& body);

}  // namespace maiq::runtime

#endif  // MAIQ_RUNTIME_HPP_
