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

#include "maiq/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace maiq {

size_t dtype_size(DType d) {
  switch (d) {
    case DType::REAL32: return 4;
    case DType::INT8: return 1;
    case DType::INT32: return 4;
  }
  return 0;
}

QuantParams QuantParams::per_tensor(float scale, int32_t zero_point) {
  QuantParams q;
  q.granularity = Granularity::PER_TENSOR;
  q.scales = {scale};
  q.zero_points = {zero_point};
  return q;
}

QuantParams QuantParams::per_channel(std::vector<float> scales, std::vector<int32_t> zero_points) {
  QuantParams q;
  q.granularity = Granularity::PER_CHANNEL;
  q.scales = std::move(scales);
  q.zero_points = std::move(zero_points);
  return q;
}

bool QuantParams::valid() const {
  if (scales.empty() || scales.size() != zero_points.size()) return false;
  if (granularity == Granularity::PER_TENSOR && scales.size() != 1) return false;
  for (float s : scales) {
    if (!(s > 0.0f) || !std::isfinite(s)) return false;
  }
  for (int32_t zp : zero_points) {
    if (zp < -128 || zp > 127) return false;
  }
  return true;
}

namespace memstat {

namespace {
thread_local int64_t g_current = 0;
thread_local int64_t g_peak = 0;
}  // namespace

int64_t current_bytes() { return g_current; }
int64_t peak_bytes() { return g_peak; }
void reset_peak() { g_peak = g_current; }

void add(int64_t bytes) {
  g_current += bytes;
  g_peak = std::max(g_peak, g_current);
}
void sub(int64_t bytes) { g_current -= bytes; }

}  // namespace memstat

Tensor::Buffer::Buffer(size_t n) : data(new std::byte[n]()), bytes(n) {
  memstat::add(static_cast<int64_t>(n));
}

Tensor::Buffer::Buffer(Buffer&& o) noexcept : data(o.data), bytes(o.bytes) {
  o.data = nullptr;
  o.bytes = 0;
}

Tensor::Buffer& Tensor::Buffer::operator=(Buffer&& o) noexcept {
  if (this != &o) {
    this->~Buffer();
    data = o.data;
    bytes = o.bytes;
    o.data = nullptr;
    o.bytes = 0;
  }
  return *this;
}

Tensor::Buffer::~Buffer() {
  if (data != nullptr) {
    memstat::sub(static_cast<int64_t>(bytes));
    delete[] data;
    data = nullptr;
    bytes = 0;
  }
}

Tensor::Tensor(const Shape& s, DType d, std::optional<QuantParams> q)
    : shape_(s), dtype_(d), qparams_(std::move(q)) {
  if (s.n < 0 || s.h < 0 || s.w < 0 || s.c < 0) {
    throw Error(Err::ShapeMismatch, "negative tensor extent");
  }
  const bool integer = d != DType::REAL32;
  if (integer != qparams_.has_value()) {
    throw Error(Err::InvalidArgument, "qparams present iff dtype is integer");
  }
  if (qparams_ && !qparams_->valid()) {
    throw Error(Err::InvalidArgument, "invalid quantization params");
  }
  buf_ = Buffer(static_cast<size_t>(s.elements()) * dtype_size(d));
}

Tensor::Tensor(const Tensor& o) : shape_(o.shape_), dtype_(o.dtype_), qparams_(o.qparams_) {
  buf_ = Buffer(o.buf_.bytes);
  std::memcpy(buf_.data, o.buf_.data, buf_.bytes);
}

Tensor& Tensor::operator=(const Tensor& o) {
  if (this != &o) {
    Tensor tmp(o);
    *this = std::move(tmp);
  }
  return *this;
}

Tensor Tensor::real(const Shape& s) { return Tensor(s, DType::REAL32, std::nullopt); }
Tensor Tensor::int8(const Shape& s, QuantParams q) { return Tensor(s, DType::INT8, std::move(q)); }
Tensor Tensor::int32(const Shape& s, QuantParams q) { return Tensor(s, DType::INT32, std::move(q)); }

void Tensor::set_qparams(QuantParams q) {
  if (dtype_ == DType::REAL32) {
    throw Error(Err::InvalidArgument, "real tensors carry no qparams");
  }
  if (!q.valid()) throw Error(Err::InvalidArgument, "invalid quantization params");
  qparams_ = std::move(q);
}

std::span<float> Tensor::f32() {
  return {reinterpret_cast<float*>(buf_.data), static_cast<size_t>(elements())};
}
std::span<const float> Tensor::f32() const {
  return {reinterpret_cast<const float*>(buf_.data), static_cast<size_t>(elements())};
}
std::span<int8_t> Tensor::i8() {
  return {reinterpret_cast<int8_t*>(buf_.data), static_cast<size_t>(elements())};
}
std::span<const int8_t> Tensor::i8() const {
  return {reinterpret_cast<const int8_t*>(buf_.data), static_cast<size_t>(elements())};
}
std::span<int32_t> Tensor::i32() {
  return {reinterpret_cast<int32_t*>(buf_.data), static_cast<size_t>(elements())};
}
std::span<const int32_t> Tensor::i32() const {
  return {reinterpret_cast<const int32_t*>(buf_.data), static_cast<size_t>(elements())};
}

}  // namespace maiq
