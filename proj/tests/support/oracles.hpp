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

// Brute-force references the kernel tests compare against. These stay
// deliberately naive (explicit loops, wide accumulators) and independent of
// the library's kernel implementations.

#ifndef MAIQ_TESTS_SUPPORT_ORACLES_HPP_
#define MAIQ_TESTS_SUPPORT_ORACLES_HPP_

#include "maiq/kernels.hpp"
#include "maiq/quant.hpp"
#include "maiq/tensor.hpp"

namespace maiq::testing {

// Exact round(x * mantissa / 2^(31+shift)) with half-away rounding, in
// 128-bit integer arithmetic.
int64_t requant_exact(int64_t x, const RequantMultiplier& rm);

Tensor ref_conv2d_q(const Tensor& input, const Tensor& weights, const Tensor& bias,
                    const ConvSpec& spec, const QuantParams& out_params, Activation act);
Tensor ref_depthwise_conv_q(const Tensor& input, const Tensor& weights, const Tensor& bias,
                            const ConvSpec& spec, const QuantParams& out_params, Activation act);
Tensor ref_fully_connected_q(const Tensor& input, const Tensor& weights, const Tensor& bias,
                             const QuantParams& out_params, Activation act);
Tensor ref_global_avgpool_q(const Tensor& input);

// Independent re-derivation of the documented add algorithm (shift-20
// headroom, doubling high-multiply rescales) in 128-bit arithmetic.
Tensor ref_residual_add_q(const Tensor& a, const Tensor& b, const QuantParams& out_params);

// Real-arithmetic squeeze-excite on dequantized operands.
Tensor ref_se_real(const Tensor& x_real, const Tensor& reduce_w_real, const Tensor& reduce_b_real,
                   const Tensor& expand_w_real, const Tensor& expand_b_real);

// Random quantized fixtures.
Tensor random_act_q8(const Shape& s, SplitMix64& rng);
Tensor random_conv_weights_q8(int64_t out_c, int64_t kh, int64_t kw, int64_t in_c,
                              SplitMix64& rng);
Tensor random_depthwise_weights_q8(int64_t kh, int64_t kw, int64_t c, SplitMix64& rng);
Tensor random_bias_i32(int64_t n, float in_scale, const QuantParams& w_params, SplitMix64& rng);
QuantParams random_out_params(SplitMix64& rng);

}  // namespace maiq::testing

#endif  // MAIQ_TESTS_SUPPORT_ORACLES_HPP_
