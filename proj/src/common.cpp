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

#include "maiq/common.hpp"

#include <array>

namespace maiq {

const char* err_name(Err e) {
  switch (e) {
    case Err::NonFinite: return "NonFinite";
    case Err::MultiplierOutOfRange: return "MultiplierOutOfRange";
    case Err::ShapeMismatch: return "ShapeMismatch";
    case Err::EmptyCalibrationSet: return "EmptyCalibrationSet";
    case Err::BadMagic: return "BadMagic";
    case Err::UnsupportedVersion: return "UnsupportedVersion";
    case Err::ChecksumMismatch: return "ChecksumMismatch";
    case Err::TruncatedFile: return "TruncatedFile";
    case Err::UnknownCategoryFolder: return "UnknownCategoryFolder";
    case Err::EmptyCorpus: return "EmptyCorpus";
    case Err::UnsupportedFormat: return "UnsupportedFormat";
    case Err::CorruptImage: return "CorruptImage";
    case Err::IoFailure: return "IoFailure";
    case Err::LabelMismatch: return "LabelMismatch";
    case Err::NonPositiveRuntime: return "NonPositiveRuntime";
    case Err::InvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

namespace {

std::array<uint32_t, 256> make_crc_table() {
  std::array<uint32_t, 256> table{};
  for (uint32_t i = 0; i < 256; ++i) {
    uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    table[i] = c;
  }
  return table;
}

}  // namespace

uint32_t crc32(const void* data, size_t len, uint32_t seed) {
  static const std::array<uint32_t, 256> table = make_crc_table();
  uint32_t c = seed ^ 0xFFFFFFFFu;
  const auto* p = static_cast<const uint8_t*>(data);
  for (size_t i = 0; i < len; ++i) c = table[(c ^ p[i]) & 0xFFu] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

}  // namespace maiq
