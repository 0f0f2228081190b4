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

#ifndef MAIQ_KERNELS_HPP_
#define MAIQ_KERNELS_HPP_

#include <functional>

#include "maiq/quant.hpp"
#include "maiq/tensor.hpp"

namespace maiq {

enum class Padding : uint8_t { SAME = 0, VALID = 1 };
enum class Activation : uint8_t { NONE = 0, RELU6 = 1 };

struct ConvSpec {
  int kernel_h = 3;
  int kernel_w = 3;
  int stride = 1;
  Padding padding = Padding::SAME;
  bool depthwise = false;
  int out_channels = 0;
};

// Inverted-residual bottleneck: 1x1 expand (ReLU6) -> 3x3 depthwise
// (ReLU6) -> optional squeeze-excite -> 1x1 linear project -> residual when
// stride == 1 and channels are unchanged.
struct BneckSpec {
  int expansion_size = 0;
  int stride = 1;  // 1 or 2
  bool use_se = false;
  int out_channels = 0;
};

struct ConvGeometry {
  int64_t out_h = 0, out_w = 0;
  int64_t pad_top = 0, pad_left = 0;
};

// SAME: out = ceil(in / stride), padding split low-before/high-after.
// VALID: out = (in - kernel) / stride + 1.
ConvGeometry conv_geometry(int64_t in_h, int64_t in_w, const ConvSpec& spec);

inline bool bneck_has_residual(const BneckSpec& spec, int64_t in_channels) {
  return spec.stride == 1 && in_channels == spec.out_channels;
}

// Squeeze-excite reduction width: expansion/4 rounded up to a multiple of 8.
int64_t se_reduce_width(int64_t expansion_size);

// Gate codes represent [0, 1): scale 1/256, zero point -128.
QuantParams hardsigmoid_out_params();

// ---------------------------------------------------------------------------
// Quantized kernels. Inputs/weights are INT8, biases INT32 quantized at
// input_scale * weight_scale, accumulation in INT32, output requantized to
// out_params (per-output-channel multipliers). All deterministic and
// bit-exact across runs and thread counts.
// ---------------------------------------------------------------------------

// weights (out_c, kh, kw, in_c), bias (1,1,1,out_c). Padding reads the input
// zero point, which is real 0 by construction.
Tensor conv2d_q(const Tensor& input, const Tensor& weights, const Tensor& bias,
                const ConvSpec& spec, const QuantParams& out_params,
                Activation act = Activation::NONE);

// weights (1, kh, kw, c): one filter per channel.
Tensor depthwise_conv_q(const Tensor& input, const Tensor& weights, const Tensor& bias,
                        const ConvSpec& spec, const QuantParams& out_params,
                        Activation act = Activation::NONE);

// input (b,1,1,in), weights (out,1,1,in), bias (1,1,1,out).
Tensor fully_connected_q(const Tensor& input, const Tensor& weights, const Tensor& bias,
                         const QuantParams& out_params, Activation act = Activation::NONE);

// Clamp codes to the representable images of real 0 and 6; qparams unchanged.
Tensor relu6_q(const Tensor& t);

// relu6(x + 3) / 6 through a 256-entry code lookup table; output params are
// hardsigmoid_out_params().
Tensor hardsigmoid_q(const Tensor& t);

// Per-channel mean with round-half-away-from-zero; qparams unchanged.
Tensor global_avgpool_q(const Tensor& t);

// 2x2 stride-2 max pool (SAME extents, padding excluded from the max);
// qparams unchanged.
Tensor maxpool2_q(const Tensor& t);

// Squeeze-excite: global pool -> FC reduce (ReLU6) -> FC expand ->
// HardSigmoid gate -> integer channel-wise multiply requantized to
// out_params.
Tensor se_block_q(const Tensor& t, const Tensor& reduce_w, const Tensor& reduce_b,
                  const Tensor& expand_w, const Tensor& expand_b,
                  const QuantParams& reduce_out_params, const QuantParams& expand_out_params,
                  const QuantParams& out_params);

// Element-wise add with both operands rescaled into a shared high-headroom
// accumulator before the final requantization.
Tensor residual_add_q(const Tensor& a, const Tensor& b, const QuantParams& out_params);

// Weight slot indices into a bottleneck's weight list. SE slots are -1 when
// the block has no squeeze-excite.
struct BneckSlots {
  int expand_w = 0, expand_b = 1, dw_w = 2, dw_b = 3;
  int se_reduce_w = -1, se_reduce_b = -1, se_expand_w = -1, se_expand_b = -1;
  int project_w = -1, project_b = -1;
  int count = 0;
};
BneckSlots bneck_slots(bool use_se);

// Calibrated activation edges inside a bottleneck, indexed by BneckEdge.
enum BneckEdge : int {
  kEdgeExpandOut = 0,
  kEdgeDwOut = 1,
  kEdgeSeReduceOut = 2,
  kEdgeSeExpandOut = 3,
  kEdgeSeMulOut = 4,
  kEdgeProjectOut = 5,
  kEdgeResidualOut = 6,
  kBneckEdgeCount = 7,
};

// Active edge slots for a bottleneck, in execution order.
std::vector<int> bneck_active_edges(const BneckSpec& spec, int64_t in_channels);

struct BneckEdgeParams {
  QuantParams edge[kBneckEdgeCount];
};

using EdgeCallback = std::function<void(int slot, const Tensor&)>;

// weights: the layer's weight list in bneck_slots order. Takes its input by
// value so non-residual blocks can release it right after the expansion.
Tensor bneck_q(Tensor input, const BneckSpec& spec, const std::vector<Tensor>& weights,
               const BneckEdgeParams& edges, const EdgeCallback& on_edge = {});

// ---------------------------------------------------------------------------
// Real-valued reference kernels (REAL32 weights and activations). Same
// operator semantics; used for calibration runs and REAL-mode inference.
// ---------------------------------------------------------------------------

Tensor conv2d_real(const Tensor& input, const Tensor& weights, const Tensor& bias,
                   const ConvSpec& spec, Activation act = Activation::NONE);
Tensor depthwise_conv_real(const Tensor& input, const Tensor& weights, const Tensor& bias,
                           const ConvSpec& spec, Activation act = Activation::NONE);
Tensor fully_connected_real(const Tensor& input, const Tensor& weights, const Tensor& bias,
                            Activation act = Activation::NONE);
Tensor relu6_real(const Tensor& t);
Tensor hardsigmoid_real(const Tensor& t);
Tensor global_avgpool_real(const Tensor& t);
Tensor maxpool2_real(const Tensor& t);
Tensor se_block_real(const Tensor& t, const Tensor& reduce_w, const Tensor& reduce_b,
                     const Tensor& expand_w, const Tensor& expand_b,
                     const EdgeCallback& on_edge = {});
Tensor residual_add_real(const Tensor& a, const Tensor& b);
Tensor bneck_real(Tensor input, const BneckSpec& spec, const std::vector<Tensor>& weights,
                  const EdgeCallback& on_edge = {});

// Bilinear interpolation with half-pixel centers; constants map to
// constants exactly. No-op copy when extents already match.
Tensor resize_bilinear(const Tensor& img, int64_t out_h, int64_t out_w);

// Max-subtracted exponential normalization over the channel axis. Throws
// NonFinite on non-finite logits.
Tensor softmax(const Tensor& logits);

namespace detail {
// Both convolution routes; conv2d_q picks one, tests pin their equality.
// Correctness is defined by the direct loop.
Tensor conv2d_q_direct(const Tensor& input, const Tensor& weights, const Tensor& bias,
                       const ConvSpec& spec, const QuantParams& out_params, Activation act);
Tensor conv2d_q_gemm(const Tensor& input, const Tensor& weights, const Tensor& bias,
                     const ConvSpec& spec, const QuantParams& out_params, Activation act);
}  // namespace detail

}  // namespace maiq

#endif  // MAIQ_KERNELS_HPP_
