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

#include "maiq/runtime.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace maiq::runtime {

namespace {

int initial_threads() {
  if (const char* env = std::getenv("MAIQ_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

std::atomic<int> g_threads{0};

}  // namespace

int threads() {
  int n = g_threads.load(std::memory_order_relaxed);
  if (n == 0) {
    n = initial_threads();
    g_threads.store(n, std::memory_order_relaxed);
  }
  return n;
}

void set_threads(int n) { g_threads.store(n < 1 ? 1 : n, std::memory_order_relaxed); }

void parallel_for(int64_t begin, int64_t end, int64_t work_per_item,
                  const std::function<void(int64_t, int64_t)>& body) {
  const int64_t total = end - begin;
  if (total <= 0) return;
  const int n = threads();
  // a spawn costs tens of microseconds; stay inline until the split wins
  constexpr int64_t kMinWorkToFanOut = 1 << 18;
  if (n <= 1 || total < 2 * n || total * work_per_item < kMinWorkToFanOut) {
    body(begin, end);
    return;
  }
  const int64_t chunk = (total + n - 1) / n;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<size_t>(n - 1));
  for (int t = 1; t < n; ++t) {
    const int64_t lo = begin + t * chunk;
    const int64_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back(body, lo, hi);
  }
  body(begin, std::min(end, begin + chunk));
  for (auto& w : workers) w.join();
}

}  // namespace maiq::runtime
