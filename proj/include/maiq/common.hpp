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

#ifndef MAIQ_COMMON_HPP_
#define MAIQ_COMMON_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace maiq {

// Every failure the engine can report. CLI maps Error to exit code 1.
enum class Err : uint8_t {
  NonFinite,
  MultiplierOutOfRange,
  ShapeMismatch,
  EmptyCalibrationSet,
  BadMagic,
  UnsupportedVersion,
  ChecksumMismatch,
  TruncatedFile,
  UnknownCategoryFolder,
  EmptyCorpus,
  UnsupportedFormat,
  CorruptImage,
  IoFailure,
  LabelMismatch,
  NonPositiveRuntime,
  InvalidArgument,
};

const char* err_name(Err e);

class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& what)
      : std::runtime_error(std::string(err_name(code)) + ": " + what), code_(code) {}

  Err code() const { return code_; }

 private:
  Err code_;
};

// CRC-32 (IEEE 802.3, reflected polynomial 0xEDB88320).
uint32_t crc32(const void* data, size_t len, uint32_t seed = 0);

// Deterministic 64-bit PRNG (splitmix64). Used wherever byte-identical
// output across platforms is required; never use std:: distributions for
// anything that ends up in an artifact.
struct SplitMix64 {
  uint64_t state;

  explicit SplitMix64(uint64_t seed) : state(seed) {}

  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1): 53 mantissa bits, exactly representable.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  uint64_t next_below(uint64_t n) { return next() % n; }
};

}  // namespace maiq

#endif  // MAIQ_COMMON_HPP_
