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

#ifndef MAIQ_TENSOR_HPP_
#define MAIQ_TENSOR_HPP_

#include <cstdint>
#include <cstring>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "maiq/common.hpp"

namespace maiq {

enum class DType : uint8_t {
  REAL32 = 0,
  INT8 = 1,
  INT32 = 2,  // biases and accumulators only
};

size_t dtype_size(DType d);

// Dense 4-D extents, row-major in (batch, height, width, channels) order.
struct Shape {
  int64_t n = 0, h = 0, w = 0, c = 0;

  int64_t elements() const { return n * h * w * c; }
  bool operator==(const Shape& o) const = default;
};

enum class Granularity : uint8_t { PER_TENSOR = 0, PER_CHANNEL = 1 };

// Affine quantization descriptor: real ~= (code - zero_point) * scale.
// PER_CHANNEL lists one (scale, zero_point) pair per slice of the axis the
// owning tensor quantizes over: the channel axis for activations and
// depthwise filters, the leading (output-channel) axis for conv/FC weights.
// Weight quantization is symmetric, so per-channel zero points are all 0.
struct QuantParams {
  Granularity granularity = Granularity::PER_TENSOR;
  std::vector<float> scales{1.0f};
  std::vector<int32_t> zero_points{0};

  static QuantParams per_tensor(float scale, int32_t zero_point);
  static QuantParams per_channel(std::vector<float> scales, std::vector<int32_t> zero_points);

  float scale(int64_t channel = 0) const {
    return granularity == Granularity::PER_TENSOR ? scales[0]
                                                  : scales[static_cast<size_t>(channel)];
  }
  int32_t zero_point(int64_t channel = 0) const {
    return granularity == Granularity::PER_TENSOR ? zero_points[0]
                                                  : zero_points[static_cast<size_t>(channel)];
  }
  int64_t channels() const { return static_cast<int64_t>(scales.size()); }

  bool valid() const;
  bool operator==(const QuantParams& o) const = default;
};

// Running min/max over observed real tensors, one collector per activation
// edge. Single-writer.
struct CalibrationStats {
  float min_v = 0.0f;
  float max_v = 0.0f;
  int64_t count = 0;

  void observe_value(float v);
  QuantParams to_params() const;  // via params_from_range
};

// Byte counters for tensor buffers allocated on the current thread. The
// graph executor's peak-memory invariant is checked against these.
namespace memstat {
int64_t current_bytes();
int64_t peak_bytes();
void reset_peak();
}  // namespace memstat

// Dense 4-D activation/weight container. Data is a row-major (b,h,w,c)
// buffer; quantization parameters are present exactly when the dtype is an
// integer type. Immutable by convention after it leaves its producer.
class Tensor {
 public:
  Tensor() = default;
  Tensor(const Tensor& o);
  Tensor& operator=(const Tensor& o);
  Tensor(Tensor&&) noexcept = default;
  Tensor& operator=(Tensor&&) noexcept = default;
  ~Tensor() = default;

  static Tensor real(const Shape& s);
  static Tensor int8(const Shape& s, QuantParams q);
  static Tensor int32(const Shape& s, QuantParams q);

  const Shape& shape() const { return shape_; }
  DType dtype() const { return dtype_; }
  int64_t elements() const { return shape_.elements(); }
  int64_t byte_size() const { return static_cast<int64_t>(buf_.bytes); }
  bool empty() const { return buf_.data == nullptr; }

  bool has_qparams() const { return qparams_.has_value(); }
  const QuantParams& qparams() const { return *qparams_; }
  void set_qparams(QuantParams q);

  std::span<float> f32();
  std::span<const float> f32() const;
  std::span<int8_t> i8();
  std::span<const int8_t> i8() const;
  std::span<int32_t> i32();
  std::span<const int32_t> i32() const;

  const void* raw() const { return buf_.data; }
  void* raw() { return buf_.data; }

  int64_t index(int64_t b, int64_t y, int64_t x, int64_t c) const {
    return ((b * shape_.h + y) * shape_.w + x) * shape_.c + c;
  }

 private:
  Tensor(const Shape& s, DType d, std::optional<QuantParams> q);

  // Owning byte buffer; allocations feed the memstat counters.
  struct Buffer {
    Buffer() = default;
    explicit Buffer(size_t n);
    Buffer(Buffer&& o) noexcept;
    Buffer& operator=(Buffer&& o) noexcept;
    Buffer(const Buffer&) = delete;
    Buffer& operator=(const Buffer&) = delete;
    ~Buffer();

    std::byte* data = nullptr;
    size_t bytes = 0;
  };

  Shape shape_{};
  DType dtype_ = DType::REAL32;
  std::optional<QuantParams> qparams_;
  Buffer buf_;
};

}  // namespace maiq

#endif  // MAIQ_TENSOR_HPP_
