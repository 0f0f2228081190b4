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

#ifndef MAIQ_QUANT_HPP_
#define MAIQ_QUANT_HPP_

#include <cstdint>

#include "maiq/tensor.hpp"

namespace maiq {

// Rounding everywhere a real becomes a code: half away from zero.
inline int64_t round_half_away(double v) {
  return static_cast<int64_t>(v >= 0.0 ? v + 0.5 : v - 0.5);
}

// Integer division with round-half-away-from-zero; divisor > 0.
int64_t div_round_half_away(int64_t num, int64_t den);

// clamp(round(r / scale) + zero_point, -128, 127). Saturating, no errors.
int8_t quantize_value(float r, const QuantParams& q, int64_t channel = 0);

// (code - zero_point) * scale.
float dequantize_value(int8_t code, const QuantParams& q, int64_t channel = 0);

// Asymmetric per-tensor params covering [rmin, rmax]. The range is widened
// to include 0 first, so real 0 always lands exactly on the zero point
// (conv padding relies on this). Degenerate rmin == rmax == 0 yields
// scale 1, zero_point 0. Throws NonFinite for non-finite inputs.
QuantParams params_from_range(float rmin, float rmax);

// Which tensor axis a per-channel weight quantization runs over: the leading
// (output-channel) axis for conv/FC weights, the channel axis for depthwise
// filters.
enum class WeightAxis : uint8_t { OUTPUT = 0, CHANNELS = 1 };

// Symmetric per-channel weight params: scale = absmax/127 per slice, zero
// points all 0. All-zero slices get scale 1/256 so downstream requantization
// multipliers stay inside compute_requant's (0, 1) domain.
QuantParams weight_params_per_channel(const Tensor& w, WeightAxis axis);

// Per-channel symmetric INT8 weights with params attached.
Tensor quantize_weights(const Tensor& w, WeightAxis axis);

// INT32 bias at scale input_scale * weight_scale[c], zero point 0.
Tensor quantize_bias(const Tensor& bias, float input_scale, const QuantParams& weight_params);

// Inverse of quantize_weights for the given axis.
Tensor dequantize_weights(const Tensor& w, WeightAxis axis);

// Real multiplier M in (0,1) decomposed as m0 * 2^-shift with m0 in [0.5, 1)
// held as a Q31 mantissa. Reconstruction error is <= 2^-30 relative.
struct RequantMultiplier {
  int32_t mantissa = 0;  // in [2^30, 2^31 - 1]
  int32_t shift = 0;     // >= 0

  double to_real() const;
};

// Throws MultiplierOutOfRange unless 0 < m < 1.
RequantMultiplier compute_requant(double m);

// Saturating rounding doubling high-multiply of x by rm.mantissa followed by
// a rounding right shift by rm.shift. Bit-exact scalar reference for all
// integer rescaling in the engine; |result - round(x*M)| <= 1.
int32_t requant_scale_int32(int32_t x, const RequantMultiplier& rm);

// requant_scale_int32, then + out_zero_point, clamped to [-128, 127].
int8_t apply_requant(int32_t acc, const RequantMultiplier& rm, int32_t out_zero_point);

// Update stats with every element of a REAL32 tensor; count increments once
// per call. Throws NonFinite if the tensor contains NaN.
void observe(CalibrationStats& stats, const Tensor& t);

// Whole-tensor helpers.
Tensor quantize_tensor(const Tensor& real, const QuantParams& q);
Tensor dequantize_tensor(const Tensor& q);

}  // namespace maiq

#endif  // MAIQ_QUANT_HPP_
