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

#include "maiq/quant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace maiq {

int64_t div_round_half_away(int64_t num, int64_t den) {
  const int64_t mag = num >= 0 ? num : -num;
  const int64_t q = (2 * mag + den) / (2 * den);
  return num >= 0 ? q : -q;
}

int8_t quantize_value(float r, const QuantParams& q, int64_t channel) {
  const float scale = q.scale(channel);
  const int32_t zp = q.zero_point(channel);
  if (std::isnan(r)) return static_cast<int8_t>(zp);
  // Single-precision division, like the codes the scheme models.
  const double scaled = static_cast<double>(r / scale);
  // Saturate before the integer conversion; huge inputs stay well-defined.
  if (scaled >= 127.0 - zp + 0.5) return 127;
  if (scaled <= -128.0 - zp - 0.5) return -128;
  const int64_t code = round_half_away(scaled) + zp;
  return static_cast<int8_t>(std::clamp<int64_t>(code, -128, 127));
}

float dequantize_value(int8_t code, const QuantParams& q, int64_t channel) {
  return static_cast<float>((static_cast<int32_t>(code) - q.zero_point(channel)) *
                            static_cast<double>(q.scale(channel)));
}

QuantParams params_from_range(float rmin, float rmax) {
  if (!std::isfinite(rmin) || !std::isfinite(rmax)) {
    throw Error(Err::NonFinite, "calibration range is not finite");
  }
  if (rmin > rmax) std::swap(rmin, rmax);
  if (rmin == rmax) return QuantParams::per_tensor(1.0f, 0);
  // Widen so real 0 is representable: the zero point must be a valid code
  // for zero padding to be exact.
  rmin = std::min(rmin, 0.0f);
  rmax = std::max(rmax, 0.0f);
  const double scale = (static_cast<double>(rmax) - rmin) / 255.0;
  const int64_t zp = round_half_away(-128.0 - rmin / scale);
  return QuantParams::per_tensor(static_cast<float>(scale),
                                 static_cast<int32_t>(std::clamp<int64_t>(zp, -128, 127)));
}

QuantParams weight_params_per_channel(const Tensor& w, WeightAxis axis) {
  const Shape& s = w.shape();
  const int64_t channels = axis == WeightAxis::OUTPUT ? s.n : s.c;
  std::vector<float> absmax(static_cast<size_t>(channels), 0.0f);
  const auto data = w.f32();
  const int64_t total = w.elements();
  if (axis == WeightAxis::OUTPUT) {
    const int64_t slice = total / channels;
    for (int64_t i = 0; i < total; ++i) {
      float& m = absmax[static_cast<size_t>(i / slice)];
      m = std::max(m, std::abs(data[static_cast<size_t>(i)]));
    }
  } else {
    for (int64_t i = 0; i < total; ++i) {
      float& m = absmax[static_cast<size_t>(i % channels)];
      m = std::max(m, std::abs(data[static_cast<size_t>(i)]));
    }
  }
  std::vector<float> scales(absmax.size());
  for (size_t c = 0; c < absmax.size(); ++c) {
    scales[c] = absmax[c] > 0.0f ? absmax[c] / 127.0f : 1.0f / 256.0f;
  }
  return QuantParams::per_channel(std::move(scales),
                                  std::vector<int32_t>(absmax.size(), 0));
}

Tensor quantize_weights(const Tensor& w, WeightAxis axis) {
  QuantParams qp = weight_params_per_channel(w, axis);
  Tensor out = Tensor::int8(w.shape(), qp);
  const auto src = w.f32();
  auto dst = out.i8();
  const int64_t total = w.elements();
  const int64_t channels = qp.channels();
  const int64_t slice = axis == WeightAxis::OUTPUT ? total / channels : 0;
  for (int64_t i = 0; i < total; ++i) {
    const int64_t ch = axis == WeightAxis::OUTPUT ? i / slice : i % channels;
    dst[static_cast<size_t>(i)] = quantize_value(src[static_cast<size_t>(i)], qp, ch);
  }
  return out;
}

Tensor quantize_bias(const Tensor& bias, float input_scale, const QuantParams& weight_params) {
  const int64_t n = bias.elements();
  std::vector<float> scales(static_cast<size_t>(n));
  for (int64_t c = 0; c < n; ++c) {
    const float ws = weight_params.scale(weight_params.channels() == 1 ? 0 : c);
    scales[static_cast<size_t>(c)] = input_scale * ws;
  }
  QuantParams qp = QuantParams::per_channel(scales, std::vector<int32_t>(scales.size(), 0));
  Tensor out = Tensor::int32(bias.shape(), qp);
  const auto src = bias.f32();
  auto dst = out.i32();
  for (int64_t c = 0; c < n; ++c) {
    const double v = std::clamp(static_cast<double>(src[static_cast<size_t>(c)]) /
                                    scales[static_cast<size_t>(c)],
                                -2147483648.0, 2147483647.0);
    dst[static_cast<size_t>(c)] = static_cast<int32_t>(round_half_away(v));
  }
  return out;
}

Tensor dequantize_weights(const Tensor& w, WeightAxis axis) {
  if (axis == WeightAxis::CHANNELS) return dequantize_tensor(w);
  Tensor out = Tensor::real(w.shape());
  const auto src = w.i8();
  auto dst = out.f32();
  const QuantParams& qp = w.qparams();
  const int64_t slice = w.elements() / qp.channels();
  for (size_t i = 0; i < src.size(); ++i) {
    const int64_t ch = static_cast<int64_t>(i) / slice;
    dst[i] = dequantize_value(src[i], qp, ch);
  }
  return out;
}

double RequantMultiplier::to_real() const {
  return std::ldexp(static_cast<double>(mantissa), -31 - shift);
}

RequantMultiplier compute_requant(double m) {
  if (!(m > 0.0) || m >= 1.0 || !std::isfinite(m)) {
    throw Error(Err::MultiplierOutOfRange, "requant multiplier must be in (0, 1)");
  }
  int exponent = 0;
  const double m0 = std::frexp(m, &exponent);  // m = m0 * 2^exponent, m0 in [0.5, 1)
  int64_t mantissa = round_half_away(m0 * 2147483648.0);  // m0 * 2^31
  int shift = -exponent;
  if (mantissa == (int64_t{1} << 31)) {  // m0 rounded up to 1.0
    mantissa >>= 1;
    --shift;
  }
  RequantMultiplier rm;
  rm.mantissa = static_cast<int32_t>(mantissa);
  rm.shift = shift;
  return rm;
}

// Doubling high-multiply with symmetric rounding; the int32*int32 product
// fits int64 with one bit to spare, which the doubling consumes.
static int32_t saturating_rounding_doubling_high_mul(int32_t a, int32_t b) {
  if (a == std::numeric_limits<int32_t>::min() && b == std::numeric_limits<int32_t>::min()) {
    return std::numeric_limits<int32_t>::max();
  }
  const int64_t ab = static_cast<int64_t>(a) * b;
  const int64_t nudge = ab >= 0 ? (int64_t{1} << 30) : 1 - (int64_t{1} << 30);
  return static_cast<int32_t>((ab + nudge) / (int64_t{1} << 31));
}

static int32_t rounding_shift_right(int32_t x, int shift) {
  if (shift <= 0) return x;
  if (shift > 62) return 0;  // vanishing multipliers round everything to 0
  const int64_t x64 = x;
  const int64_t mask = (int64_t{1} << shift) - 1;
  const int64_t remainder = x64 & mask;
  const int64_t threshold = (mask >> 1) + (x64 < 0 ? 1 : 0);
  return static_cast<int32_t>((x64 >> shift) + (remainder > threshold ? 1 : 0));
}

int32_t requant_scale_int32(int32_t x, const RequantMultiplier& rm) {
  return rounding_shift_right(saturating_rounding_doubling_high_mul(x, rm.mantissa), rm.shift);
}

int8_t apply_requant(int32_t acc, const RequantMultiplier& rm, int32_t out_zero_point) {
  const int32_t scaled = requant_scale_int32(acc, rm) + out_zero_point;
  return static_cast<int8_t>(std::clamp<int32_t>(scaled, -128, 127));
}

void CalibrationStats::observe_value(float v) {
  if (count == 0) {
    min_v = max_v = v;
  } else {
    min_v = std::min(min_v, v);
    max_v = std::max(max_v, v);
  }
}

QuantParams CalibrationStats::to_params() const { return params_from_range(min_v, max_v); }

void observe(CalibrationStats& stats, const Tensor& t) {
  if (t.dtype() != DType::REAL32) {
    throw Error(Err::InvalidArgument, "calibration observes real tensors");
  }
  const auto data = t.f32();
  float lo = std::numeric_limits<float>::infinity();
  float hi = -std::numeric_limits<float>::infinity();
  for (float v : data) {
    if (std::isnan(v)) throw Error(Err::NonFinite, "NaN in observed tensor");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (t.elements() > 0) {
    if (stats.count == 0) {
      stats.min_v = lo;
      stats.max_v = hi;
    } else {
      stats.min_v = std::min(stats.min_v, lo);
      stats.max_v = std::max(stats.max_v, hi);
    }
  }
  ++stats.count;
}

Tensor quantize_tensor(const Tensor& real, const QuantParams& q) {
  Tensor out = Tensor::int8(real.shape(), q);
  const auto src = real.f32();
  auto dst = out.i8();
  const int64_t c = real.shape().c;
  if (q.granularity == Granularity::PER_TENSOR) {
    for (size_t i = 0; i < src.size(); ++i) dst[i] = quantize_value(src[i], q, 0);
  } else {
    for (size_t i = 0; i < src.size(); ++i) {
      dst[i] = quantize_value(src[i], q, static_cast<int64_t>(i) % c);
    }
  }
  return out;
}

Tensor dequantize_tensor(const Tensor& q) {
  Tensor out = Tensor::real(q.shape());
  auto dst = out.f32();
  const QuantParams& qp = q.qparams();
  const int64_t c = q.shape().c;
  if (q.dtype() == DType::INT8) {
    const auto src = q.i8();
    if (qp.granularity == Granularity::PER_TENSOR) {
      const float s = qp.scale();
      const int32_t zp = qp.zero_point();
      for (size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<float>(src[i] - zp) * s;
    } else {
      for (size_t i = 0; i < src.size(); ++i) {
        const int64_t ch = static_cast<int64_t>(i) % c;
        dst[i] = static_cast<float>(src[i] - qp.zero_point(ch)) * qp.scale(ch);
      }
    }
  } else if (q.dtype() == DType::INT32) {
    const auto src = q.i32();
    for (size_t i = 0; i < src.size(); ++i) {
      const int64_t ch = qp.channels() == 1 ? 0 : static_cast<int64_t>(i) % qp.channels();
      dst[i] = static_cast<float>(static_cast<double>(src[i]) * qp.scale(ch));
    }
  } else {
    throw Error(Err::InvalidArgument, "dequantize expects an integer tensor");
  }
  return out;
}

}  // namespace maiq
