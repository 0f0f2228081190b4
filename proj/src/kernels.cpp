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

#include "maiq/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "maiq/runtime.hpp"

namespace maiq {

ConvGeometry conv_geometry(int64_t in_h, int64_t in_w, const ConvSpec& spec) {
  ConvGeometry g;
  const int64_t s = spec.stride;
  if (spec.padding == Padding::SAME) {
    g.out_h = (in_h + s - 1) / s;
    g.out_w = (in_w + s - 1) / s;
    const int64_t pad_h = std::max<int64_t>((g.out_h - 1) * s + spec.kernel_h - in_h, 0);
    const int64_t pad_w = std::max<int64_t>((g.out_w - 1) * s + spec.kernel_w - in_w, 0);
    g.pad_top = pad_h / 2;
    g.pad_left = pad_w / 2;
  } else {
    if (in_h < spec.kernel_h || in_w < spec.kernel_w) {
      throw Error(Err::ShapeMismatch, "VALID convolution needs input >= kernel extents");
    }
    g.out_h = (in_h - spec.kernel_h) / s + 1;
    g.out_w = (in_w - spec.kernel_w) / s + 1;
    g.pad_top = 0;
    g.pad_left = 0;
  }
  return g;
}

int64_t se_reduce_width(int64_t expansion_size) {
  const int64_t quarter = std::max<int64_t>(expansion_size / 4, 1);
  return (quarter + 7) / 8 * 8;
}

QuantParams hardsigmoid_out_params() { return QuantParams::per_tensor(1.0f / 256.0f, -128); }

BneckSlots bneck_slots(bool use_se) {
  BneckSlots s;
  if (use_se) {
    s.se_reduce_w = 4;
    s.se_reduce_b = 5;
    s.se_expand_w = 6;
    s.se_expand_b = 7;
    s.project_w = 8;
    s.project_b = 9;
    s.count = 10;
  } else {
    s.project_w = 4;
    s.project_b = 5;
    s.count = 6;
  }
  return s;
}

std::vector<int> bneck_active_edges(const BneckSpec& spec, int64_t in_channels) {
  std::vector<int> edges = {kEdgeExpandOut, kEdgeDwOut};
  if (spec.use_se) {
    edges.push_back(kEdgeSeReduceOut);
    edges.push_back(kEdgeSeExpandOut);
    edges.push_back(kEdgeSeMulOut);
  }
  edges.push_back(kEdgeProjectOut);
  if (bneck_has_residual(spec, in_channels)) edges.push_back(kEdgeResidualOut);
  return edges;
}

namespace {

// Output code bounds: saturation plus an optional fused ReLU6 window.
struct CodeBounds {
  int32_t lo = -128;
  int32_t hi = 127;
};

CodeBounds act_bounds(Activation act, const QuantParams& out) {
  CodeBounds b;
  if (act == Activation::RELU6) {
    b.lo = quantize_value(0.0f, out, 0);
    b.hi = quantize_value(6.0f, out, 0);
  }
  return b;
}

std::vector<RequantMultiplier> output_multipliers(float in_scale, const QuantParams& wq,
                                                  const QuantParams& outq, int64_t out_channels) {
  std::vector<RequantMultiplier> ms(static_cast<size_t>(out_channels));
  const double so = outq.scale(0);
  for (int64_t c = 0; c < out_channels; ++c) {
    const double ws = wq.channels() == 1 ? wq.scale(0) : wq.scale(c);
    ms[static_cast<size_t>(c)] = compute_requant(static_cast<double>(in_scale) * ws / so);
  }
  return ms;
}

inline int8_t finish(int32_t acc, const RequantMultiplier& m, int32_t zp, const CodeBounds& b) {
  const int32_t v = requant_scale_int32(acc, m) + zp;
  return static_cast<int8_t>(std::clamp(v, b.lo, b.hi));
}

void check_conv_args(const Tensor& input, const Tensor& weights, const Tensor& bias,
                     const ConvSpec& spec, bool depthwise) {
  const Shape& in = input.shape();
  const Shape& w = weights.shape();
  if (w.h != spec.kernel_h || w.w != spec.kernel_w) {
    throw Error(Err::ShapeMismatch, "weight kernel extents disagree with spec");
  }
  if (depthwise) {
    if (spec.out_channels != in.c || w.c != in.c || w.n != 1) {
      throw Error(Err::ShapeMismatch, "depthwise filter count must equal input channels");
    }
  } else {
    if (w.c != in.c || w.n != spec.out_channels) {
      throw Error(Err::ShapeMismatch, "conv weight shape disagrees with input/spec");
    }
  }
  if (bias.elements() != spec.out_channels) {
    throw Error(Err::ShapeMismatch, "bias length must equal out_channels");
  }
}

}  // namespace

namespace detail {

Tensor conv2d_q_direct(const Tensor& input, const Tensor& weights, const Tensor& bias,
                       const ConvSpec& spec, const QuantParams& out_params, Activation act) {
  check_conv_args(input, weights, bias, spec, false);
  const Shape in = input.shape();
  const ConvGeometry g = conv_geometry(in.h, in.w, spec);
  Tensor out = Tensor::int8({in.n, g.out_h, g.out_w, spec.out_channels}, out_params);

  const auto ms = output_multipliers(input.qparams().scale(), weights.qparams(), out_params,
                                     spec.out_channels);
  const CodeBounds bounds = act_bounds(act, out_params);
  const int32_t zp_in = input.qparams().zero_point();
  const int32_t zp_out = out_params.zero_point();
  const int8_t* in_data = input.i8().data();
  const int8_t* w_data = weights.i8().data();
  const int32_t* b_data = bias.i32().data();
  int8_t* out_data = out.i8().data();

  const int64_t rows = in.n * g.out_h;
  const int64_t row_work = g.out_w * spec.out_channels * spec.kernel_h * spec.kernel_w * in.c;
  runtime::parallel_for(0, rows, row_work, [&](int64_t r0, int64_t r1) {
    for (int64_t r = r0; r < r1; ++r) {
      const int64_t b = r / g.out_h;
      const int64_t oy = r % g.out_h;
      for (int64_t ox = 0; ox < g.out_w; ++ox) {
        int8_t* dst = out_data + ((b * g.out_h + oy) * g.out_w + ox) * spec.out_channels;
        for (int64_t oc = 0; oc < spec.out_channels; ++oc) {
          int32_t acc = b_data[oc];
          for (int64_t ky = 0; ky < spec.kernel_h; ++ky) {
            const int64_t iy = oy * spec.stride - g.pad_top + ky;
            if (iy < 0 || iy >= in.h) continue;  // pad taps contribute zero
            for (int64_t kx = 0; kx < spec.kernel_w; ++kx) {
              const int64_t ix = ox * spec.stride - g.pad_left + kx;
              if (ix < 0 || ix >= in.w) continue;
              const int8_t* ip = in_data + ((b * in.h + iy) * in.w + ix) * in.c;
              const int8_t* wp = w_data + ((oc * spec.kernel_h + ky) * spec.kernel_w + kx) * in.c;
              for (int64_t ic = 0; ic < in.c; ++ic) {
                acc += (static_cast<int32_t>(ip[ic]) - zp_in) * wp[ic];
              }
            }
          }
          dst[oc] = finish(acc, ms[static_cast<size_t>(oc)], zp_out, bounds);
        }
      }
    }
  });
  return out;
}

// im2col + integer GEMM: patches are materialized per output row with the
// input zero point in padded positions, so sum(q*w) - zp*sum(w) equals the
// direct accumulation exactly (integer addition is order-free).
Tensor conv2d_q_gemm(const Tensor& input, const Tensor& weights, const Tensor& bias,
                     const ConvSpec& spec, const QuantParams& out_params, Activation act) {
  check_conv_args(input, weights, bias, spec, false);
  const Shape in = input.shape();
  const ConvGeometry g = conv_geometry(in.h, in.w, spec);
  Tensor out = Tensor::int8({in.n, g.out_h, g.out_w, spec.out_channels}, out_params);

  const auto ms = output_multipliers(input.qparams().scale(), weights.qparams(), out_params,
                                     spec.out_channels);
  const CodeBounds bounds = act_bounds(act, out_params);
  const int32_t zp_in = input.qparams().zero_point();
  const int32_t zp_out = out_params.zero_point();
  const int64_t k = spec.kernel_h * spec.kernel_w * in.c;
  const int8_t* in_data = input.i8().data();
  const int8_t* w_data = weights.i8().data();
  const int32_t* b_data = bias.i32().data();
  int8_t* out_data = out.i8().data();

  std::vector<int32_t> w_sums(static_cast<size_t>(spec.out_channels), 0);
  for (int64_t oc = 0; oc < spec.out_channels; ++oc) {
    int32_t s = 0;
    const int8_t* wp = w_data + oc * k;
    for (int64_t i = 0; i < k; ++i) s += wp[i];
    w_sums[static_cast<size_t>(oc)] = s;
  }

  const bool pointwise = spec.kernel_h == 1 && spec.kernel_w == 1 && spec.stride == 1;
  const int64_t rows = in.n * g.out_h;
  const int64_t row_work = g.out_w * k * spec.out_channels;
  runtime::parallel_for(0, rows, row_work, [&](int64_t r0, int64_t r1) {
    std::vector<int8_t> patches;
    if (!pointwise) patches.resize(static_cast<size_t>(g.out_w * k));
    for (int64_t r = r0; r < r1; ++r) {
      const int64_t b = r / g.out_h;
      const int64_t oy = r % g.out_h;
      const int8_t* row_patches = nullptr;
      if (pointwise) {
        row_patches = in_data + (b * in.h + oy) * in.w * in.c;
      } else {
        for (int64_t ox = 0; ox < g.out_w; ++ox) {
          int8_t* p = patches.data() + ox * k;
          for (int64_t ky = 0; ky < spec.kernel_h; ++ky) {
            const int64_t iy = oy * spec.stride - g.pad_top + ky;
            for (int64_t kx = 0; kx < spec.kernel_w; ++kx) {
              const int64_t ix = ox * spec.stride - g.pad_left + kx;
              int8_t* cell = p + (ky * spec.kernel_w + kx) * in.c;
              if (iy < 0 || iy >= in.h || ix < 0 || ix >= in.w) {
                std::fill(cell, cell + in.c, static_cast<int8_t>(zp_in));
              } else {
                const int8_t* ip = in_data + ((b * in.h + iy) * in.w + ix) * in.c;
                std::copy(ip, ip + in.c, cell);
              }
            }
          }
        }
        row_patches = patches.data();
      }
      int8_t* dst_row = out_data + (b * g.out_h + oy) * g.out_w * spec.out_channels;
      for (int64_t ox = 0; ox < g.out_w; ++ox) {
        const int8_t* p = row_patches + ox * k;
        int8_t* dst = dst_row + ox * spec.out_channels;
        for (int64_t oc = 0; oc < spec.out_channels; ++oc) {
          const int8_t* wp = w_data + oc * k;
          int32_t dot = 0;
          for (int64_t i = 0; i < k; ++i) {
            dot += static_cast<int32_t>(p[i]) * static_cast<int32_t>(wp[i]);
          }
          const int32_t acc = dot - zp_in * w_sums[static_cast<size_t>(oc)] + b_data[oc];
          dst[oc] = finish(acc, ms[static_cast<size_t>(oc)], zp_out, bounds);
        }
      }
    }
  });
  return out;
}

}  // namespace detail

Tensor conv2d_q(const Tensor& input, const Tensor& weights, const Tensor& bias,
                const ConvSpec& spec, const QuantParams& out_params, Activation act) {
  // The GEMM route wins once the patch dot is long enough to amortize the
  // im2col copy; pointwise convs take it copy-free.
  const int64_t k = spec.kernel_h * spec.kernel_w * input.shape().c;
  const bool pointwise = spec.kernel_h == 1 && spec.kernel_w == 1 && spec.stride == 1;
  if (pointwise || k >= 64) {
    return detail::conv2d_q_gemm(input, weights, bias, spec, out_params, act);
  }
  return detail::conv2d_q_direct(input, weights, bias, spec, out_params, act);
}

Tensor depthwise_conv_q(const Tensor& input, const Tensor& weights, const Tensor& bias,
                        const ConvSpec& spec, const QuantParams& out_params, Activation act) {
  check_conv_args(input, weights, bias, spec, true);
  const Shape in = input.shape();
  const ConvGeometry g = conv_geometry(in.h, in.w, spec);
  Tensor out = Tensor::int8({in.n, g.out_h, g.out_w, in.c}, out_params);

  const auto ms = output_multipliers(input.qparams().scale(), weights.qparams(), out_params, in.c);
  const CodeBounds bounds = act_bounds(act, out_params);
  const int32_t zp_in = input.qparams().zero_point();
  const int32_t zp_out = out_params.zero_point();
  const int8_t* in_data = input.i8().data();
  const int8_t* w_data = weights.i8().data();
  const int32_t* b_data = bias.i32().data();
  int8_t* out_data = out.i8().data();

  const int64_t rows = in.n * g.out_h;
  const int64_t row_work = g.out_w * in.c * spec.kernel_h * spec.kernel_w;
  runtime::parallel_for(0, rows, row_work, [&](int64_t r0, int64_t r1) {
    std::vector<int32_t> acc(static_cast<size_t>(in.c));
    for (int64_t r = r0; r < r1; ++r) {
      const int64_t b = r / g.out_h;
      const int64_t oy = r % g.out_h;
      for (int64_t ox = 0; ox < g.out_w; ++ox) {
        for (int64_t c = 0; c < in.c; ++c) acc[static_cast<size_t>(c)] = b_data[c];
        for (int64_t ky = 0; ky < spec.kernel_h; ++ky) {
          const int64_t iy = oy * spec.stride - g.pad_top + ky;
          if (iy < 0 || iy >= in.h) continue;
          for (int64_t kx = 0; kx < spec.kernel_w; ++kx) {
            const int64_t ix = ox * spec.stride - g.pad_left + kx;
            if (ix < 0 || ix >= in.w) continue;
            const int8_t* ip = in_data + ((b * in.h + iy) * in.w + ix) * in.c;
            const int8_t* wp = w_data + (ky * spec.kernel_w + kx) * in.c;
            for (int64_t c = 0; c < in.c; ++c) {
              acc[static_cast<size_t>(c)] += (static_cast<int32_t>(ip[c]) - zp_in) * wp[c];
            }
          }
        }
        int8_t* dst = out_data + ((b * g.out_h + oy) * g.out_w + ox) * in.c;
        for (int64_t c = 0; c < in.c; ++c) {
          dst[c] = finish(acc[static_cast<size_t>(c)], ms[static_cast<size_t>(c)], zp_out, bounds);
        }
      }
    }
  });
  return out;
}

Tensor fully_connected_q(const Tensor& input, const Tensor& weights, const Tensor& bias,
                         const QuantParams& out_params, Activation act) {
  const Shape in = input.shape();
  const Shape ws = weights.shape();
  const int64_t in_features = in.h * in.w * in.c;
  if (ws.h * ws.w * ws.c != in_features) {
    throw Error(Err::ShapeMismatch, "fc weight input width disagrees with input");
  }
  if (bias.elements() != ws.n) {
    throw Error(Err::ShapeMismatch, "fc bias length must equal output width");
  }
  Tensor out = Tensor::int8({in.n, 1, 1, ws.n}, out_params);

  const auto ms = output_multipliers(input.qparams().scale(), weights.qparams(), out_params, ws.n);
  const CodeBounds bounds = act_bounds(act, out_params);
  const int32_t zp_in = input.qparams().zero_point();
  const int32_t zp_out = out_params.zero_point();
  const int8_t* in_data = input.i8().data();
  const int8_t* w_data = weights.i8().data();
  const int32_t* b_data = bias.i32().data();
  int8_t* out_data = out.i8().data();

  for (int64_t b = 0; b < in.n; ++b) {
    const int8_t* ip = in_data + b * in_features;
    int8_t* dst = out_data + b * ws.n;
    runtime::parallel_for(0, ws.n, in_features, [&](int64_t o0, int64_t o1) {
      for (int64_t oc = o0; oc < o1; ++oc) {
        const int8_t* wp = w_data + oc * in_features;
        int32_t acc = b_data[oc];
        for (int64_t i = 0; i < in_features; ++i) {
          acc += (static_cast<int32_t>(ip[i]) - zp_in) * wp[i];
        }
        dst[oc] = finish(acc, ms[static_cast<size_t>(oc)], zp_out, bounds);
      }
    });
  }
  return out;
}

Tensor relu6_q(const Tensor& t) {
  const QuantParams& qp = t.qparams();
  const CodeBounds b = act_bounds(Activation::RELU6, qp);
  Tensor out = Tensor::int8(t.shape(), qp);
  const auto src = t.i8();
  auto dst = out.i8();
  for (size_t i = 0; i < src.size(); ++i) {
    dst[i] = static_cast<int8_t>(std::clamp<int32_t>(src[i], b.lo, b.hi));
  }
  return out;
}

Tensor hardsigmoid_q(const Tensor& t) {
  const QuantParams& in_qp = t.qparams();
  const QuantParams out_qp = hardsigmoid_out_params();
  // One 256-entry table per input-params pair covers every element.
  std::array<int8_t, 256> lut;
  for (int code = -128; code <= 127; ++code) {
    const float x = dequantize_value(static_cast<int8_t>(code), in_qp);
    const float y = std::clamp(x + 3.0f, 0.0f, 6.0f) / 6.0f;
    lut[static_cast<size_t>(code + 128)] = quantize_value(y, out_qp);
  }
  Tensor out = Tensor::int8(t.shape(), out_qp);
  const auto src = t.i8();
  auto dst = out.i8();
  for (size_t i = 0; i < src.size(); ++i) dst[i] = lut[static_cast<size_t>(src[i] + 128)];
  return out;
}

Tensor global_avgpool_q(const Tensor& t) {
  const Shape in = t.shape();
  if (in.h < 1 || in.w < 1) throw Error(Err::ShapeMismatch, "avgpool needs spatial extents");
  Tensor out = Tensor::int8({in.n, 1, 1, in.c}, t.qparams());
  const int8_t* src = t.i8().data();
  int8_t* dst = out.i8().data();
  const int64_t area = in.h * in.w;
  std::vector<int64_t> sums(static_cast<size_t>(in.c));
  for (int64_t b = 0; b < in.n; ++b) {
    std::fill(sums.begin(), sums.end(), 0);
    const int8_t* base = src + b * area * in.c;
    for (int64_t p = 0; p < area; ++p) {
      for (int64_t c = 0; c < in.c; ++c) sums[static_cast<size_t>(c)] += base[p * in.c + c];
    }
    for (int64_t c = 0; c < in.c; ++c) {
      dst[b * in.c + c] =
          static_cast<int8_t>(div_round_half_away(sums[static_cast<size_t>(c)], area));
    }
  }
  return out;
}

Tensor maxpool2_q(const Tensor& t) {
  const Shape in = t.shape();
  const int64_t oh = (in.h + 1) / 2, ow = (in.w + 1) / 2;
  Tensor out = Tensor::int8({in.n, oh, ow, in.c}, t.qparams());
  const int8_t* src = t.i8().data();
  int8_t* dst = out.i8().data();
  for (int64_t b = 0; b < in.n; ++b) {
    for (int64_t oy = 0; oy < oh; ++oy) {
      for (int64_t ox = 0; ox < ow; ++ox) {
        for (int64_t c = 0; c < in.c; ++c) {
          int8_t best = -128;
          bool seen = false;
          for (int64_t dy = 0; dy < 2; ++dy) {
            const int64_t iy = oy * 2 + dy;
            if (iy >= in.h) continue;
            for (int64_t dx = 0; dx < 2; ++dx) {
              const int64_t ix = ox * 2 + dx;
              if (ix >= in.w) continue;
              const int8_t v = src[((b * in.h + iy) * in.w + ix) * in.c + c];
              best = seen ? std::max(best, v) : v;
              seen = true;
            }
          }
          dst[((b * oh + oy) * ow + ox) * in.c + c] = best;
        }
      }
    }
  }
  return out;
}

namespace {

Tensor se_gate_multiply_q(const Tensor& t, const Tensor& gate, const QuantParams& out_params) {
  const Shape in = t.shape();
  Tensor out = Tensor::int8(in, out_params);
  const double m_real = static_cast<double>(t.qparams().scale()) * gate.qparams().scale() /
                        out_params.scale();
  const RequantMultiplier m = compute_requant(m_real);
  const int32_t zp_t = t.qparams().zero_point();
  const int32_t zp_g = gate.qparams().zero_point();
  const int32_t zp_out = out_params.zero_point();
  const int8_t* tp = t.i8().data();
  const int8_t* gp = gate.i8().data();
  int8_t* op = out.i8().data();
  const int64_t area = in.h * in.w;
  for (int64_t b = 0; b < in.n; ++b) {
    const int8_t* gb = gp + b * in.c;
    for (int64_t p = 0; p < area; ++p) {
      const int8_t* src = tp + (b * area + p) * in.c;
      int8_t* dst = op + (b * area + p) * in.c;
      for (int64_t c = 0; c < in.c; ++c) {
        const int32_t acc = (static_cast<int32_t>(src[c]) - zp_t) *
                            (static_cast<int32_t>(gb[c]) - zp_g);
        dst[c] = apply_requant(acc, m, zp_out);
      }
    }
  }
  return out;
}

Tensor se_block_q_impl(const Tensor& t, const Tensor& reduce_w, const Tensor& reduce_b,
                       const Tensor& expand_w, const Tensor& expand_b,
                       const QuantParams& reduce_out_params, const QuantParams& expand_out_params,
                       const QuantParams& out_params, const EdgeCallback& on_edge) {
  if (reduce_w.shape().c != t.shape().c || expand_w.shape().n != t.shape().c) {
    throw Error(Err::ShapeMismatch, "squeeze-excite widths disagree with input channels");
  }
  Tensor pooled = global_avgpool_q(t);
  Tensor reduced = fully_connected_q(pooled, reduce_w, reduce_b, reduce_out_params,
                                     Activation::RELU6);
  if (on_edge) on_edge(kEdgeSeReduceOut, reduced);
  Tensor expanded = fully_connected_q(reduced, expand_w, expand_b, expand_out_params,
                                      Activation::NONE);
  if (on_edge) on_edge(kEdgeSeExpandOut, expanded);
  Tensor gate = hardsigmoid_q(expanded);
  return se_gate_multiply_q(t, gate, out_params);
}

}  // namespace

Tensor se_block_q(const Tensor& t, const Tensor& reduce_w, const Tensor& reduce_b,
                  const Tensor& expand_w, const Tensor& expand_b,
                  const QuantParams& reduce_out_params, const QuantParams& expand_out_params,
                  const QuantParams& out_params) {
  return se_block_q_impl(t, reduce_w, reduce_b, expand_w, expand_b, reduce_out_params,
                         expand_out_params, out_params, {});
}

Tensor residual_add_q(const Tensor& a, const Tensor& b, const QuantParams& out_params) {
  if (!(a.shape() == b.shape())) {
    throw Error(Err::ShapeMismatch, "residual operands must share a shape");
  }
  // Both operands move to a shared scale with 20 bits of headroom, then one
  // multiplier brings the sum down to the output scale.
  constexpr int kLeftShift = 20;
  const double sa = a.qparams().scale();
  const double sb = b.qparams().scale();
  const double twice_max = 2.0 * std::max(sa, sb);
  const RequantMultiplier ma = compute_requant(sa / twice_max);
  const RequantMultiplier mb = compute_requant(sb / twice_max);
  const RequantMultiplier mo =
      compute_requant(twice_max / ((int64_t{1} << kLeftShift) * out_params.scale()));
  const int32_t zpa = a.qparams().zero_point();
  const int32_t zpb = b.qparams().zero_point();
  const int32_t zpo = out_params.zero_point();

  Tensor out = Tensor::int8(a.shape(), out_params);
  const auto pa = a.i8();
  const auto pb = b.i8();
  auto po = out.i8();
  for (size_t i = 0; i < pa.size(); ++i) {
    const int32_t av = (static_cast<int32_t>(pa[i]) - zpa) << kLeftShift;
    const int32_t bv = (static_cast<int32_t>(pb[i]) - zpb) << kLeftShift;
    const int32_t sum = requant_scale_int32(av, ma) + requant_scale_int32(bv, mb);
    po[i] = apply_requant(sum, mo, zpo);
  }
  return out;
}

Tensor bneck_q(Tensor input, const BneckSpec& spec, const std::vector<Tensor>& weights,
               const BneckEdgeParams& edges, const EdgeCallback& on_edge) {
  const BneckSlots sl = bneck_slots(spec.use_se);
  if (static_cast<int>(weights.size()) != sl.count) {
    throw Error(Err::ShapeMismatch, "bneck weight slot count disagrees with spec");
  }
  const bool residual = bneck_has_residual(spec, input.shape().c);
  const ConvSpec expand{1, 1, 1, Padding::SAME, false, spec.expansion_size};
  Tensor x = conv2d_q(input, weights[sl.expand_w], weights[sl.expand_b], expand,
                      edges.edge[kEdgeExpandOut], Activation::RELU6);
  if (!residual) input = Tensor();  // only the residual path needs the stash
  if (on_edge) on_edge(kEdgeExpandOut, x);

  const ConvSpec dw{3, 3, spec.stride, Padding::SAME, true, spec.expansion_size};
  Tensor y = depthwise_conv_q(x, weights[sl.dw_w], weights[sl.dw_b], dw, edges.edge[kEdgeDwOut],
                              Activation::RELU6);
  x = Tensor();
  if (on_edge) on_edge(kEdgeDwOut, y);

  if (spec.use_se) {
    Tensor gated = se_block_q_impl(
        y, weights[sl.se_reduce_w], weights[sl.se_reduce_b], weights[sl.se_expand_w],
        weights[sl.se_expand_b], edges.edge[kEdgeSeReduceOut], edges.edge[kEdgeSeExpandOut],
        edges.edge[kEdgeSeMulOut], on_edge);
    y = std::move(gated);
    if (on_edge) on_edge(kEdgeSeMulOut, y);
  }

  const ConvSpec project{1, 1, 1, Padding::SAME, false, spec.out_channels};
  Tensor z = conv2d_q(y, weights[sl.project_w], weights[sl.project_b], project,
                      edges.edge[kEdgeProjectOut], Activation::NONE);
  y = Tensor();
  if (on_edge) on_edge(kEdgeProjectOut, z);

  if (residual) {
    Tensor sum = residual_add_q(z, input, edges.edge[kEdgeResidualOut]);
    if (on_edge) on_edge(kEdgeResidualOut, sum);
    return sum;
  }
  return z;
}

// ---------------------------------------------------------------------------
// Real-valued reference kernels.
// ---------------------------------------------------------------------------

namespace {

inline float apply_act_real(float v, Activation act) {
  return act == Activation::RELU6 ? std::clamp(v, 0.0f, 6.0f) : v;
}

}  // namespace

Tensor conv2d_real(const Tensor& input, const Tensor& weights, const Tensor& bias,
                   const ConvSpec& spec, Activation act) {
  check_conv_args(input, weights, bias, spec, false);
  const Shape in = input.shape();
  const ConvGeometry g = conv_geometry(in.h, in.w, spec);
  Tensor out = Tensor::real({in.n, g.out_h, g.out_w, spec.out_channels});
  const float* in_data = input.f32().data();
  const float* w_data = weights.f32().data();
  const float* b_data = bias.f32().data();
  float* out_data = out.f32().data();

  const int64_t rows = in.n * g.out_h;
  const int64_t row_work = g.out_w * spec.out_channels * spec.kernel_h * spec.kernel_w * in.c;
  runtime::parallel_for(0, rows, row_work, [&](int64_t r0, int64_t r1) {
    for (int64_t r = r0; r < r1; ++r) {
      const int64_t b = r / g.out_h;
      const int64_t oy = r % g.out_h;
      for (int64_t ox = 0; ox < g.out_w; ++ox) {
        float* dst = out_data + ((b * g.out_h + oy) * g.out_w + ox) * spec.out_channels;
        for (int64_t oc = 0; oc < spec.out_channels; ++oc) {
          double acc = b_data[oc];
          for (int64_t ky = 0; ky < spec.kernel_h; ++ky) {
            const int64_t iy = oy * spec.stride - g.pad_top + ky;
            if (iy < 0 || iy >= in.h) continue;
            for (int64_t kx = 0; kx < spec.kernel_w; ++kx) {
              const int64_t ix = ox * spec.stride - g.pad_left + kx;
              if (ix < 0 || ix >= in.w) continue;
              const float* ip = in_data + ((b * in.h + iy) * in.w + ix) * in.c;
              const float* wp =
                  w_data + ((oc * spec.kernel_h + ky) * spec.kernel_w + kx) * in.c;
              for (int64_t ic = 0; ic < in.c; ++ic) {
                acc += static_cast<double>(ip[ic]) * wp[ic];
              }
            }
          }
          dst[oc] = apply_act_real(static_cast<float>(acc), act);
        }
      }
    }
  });
  return out;
}

Tensor depthwise_conv_real(const Tensor& input, const Tensor& weights, const Tensor& bias,
                           const ConvSpec& spec, Activation act) {
  check_conv_args(input, weights, bias, spec, true);
  const Shape in = input.shape();
  const ConvGeometry g = conv_geometry(in.h, in.w, spec);
  Tensor out = Tensor::real({in.n, g.out_h, g.out_w, in.c});
  const float* in_data = input.f32().data();
  const float* w_data = weights.f32().data();
  const float* b_data = bias.f32().data();
  float* out_data = out.f32().data();

  const int64_t rows = in.n * g.out_h;
  const int64_t row_work = g.out_w * in.c * spec.kernel_h * spec.kernel_w;
  runtime::parallel_for(0, rows, row_work, [&](int64_t r0, int64_t r1) {
    std::vector<double> acc(static_cast<size_t>(in.c));
    for (int64_t r = r0; r < r1; ++r) {
      const int64_t b = r / g.out_h;
      const int64_t oy = r % g.out_h;
      for (int64_t ox = 0; ox < g.out_w; ++ox) {
        for (int64_t c = 0; c < in.c; ++c) acc[static_cast<size_t>(c)] = b_data[c];
        for (int64_t ky = 0; ky < spec.kernel_h; ++ky) {
          const int64_t iy = oy * spec.stride - g.pad_top + ky;
          if (iy < 0 || iy >= in.h) continue;
          for (int64_t kx = 0; kx < spec.kernel_w; ++kx) {
            const int64_t ix = ox * spec.stride - g.pad_left + kx;
            if (ix < 0 || ix >= in.w) continue;
            const float* ip = in_data + ((b * in.h + iy) * in.w + ix) * in.c;
            const float* wp = w_data + (ky * spec.kernel_w + kx) * in.c;
            for (int64_t c = 0; c < in.c; ++c) {
              acc[static_cast<size_t>(c)] += static_cast<double>(ip[c]) * wp[c];
            }
          }
        }
        float* dst = out_data + ((b * g.out_h + oy) * g.out_w + ox) * in.c;
        for (int64_t c = 0; c < in.c; ++c) {
          dst[c] = apply_act_real(static_cast<float>(acc[static_cast<size_t>(c)]), act);
        }
      }
    }
  });
  return out;
}

Tensor fully_connected_real(const Tensor& input, const Tensor& weights, const Tensor& bias,
                            Activation act) {
  const Shape in = input.shape();
  const Shape ws = weights.shape();
  const int64_t in_features = in.h * in.w * in.c;
  if (ws.h * ws.w * ws.c != in_features) {
    throw Error(Err::ShapeMismatch, "fc weight input width disagrees with input");
  }
  Tensor out = Tensor::real({in.n, 1, 1, ws.n});
  const float* in_data = input.f32().data();
  const float* w_data = weights.f32().data();
  const float* b_data = bias.f32().data();
  float* out_data = out.f32().data();
  for (int64_t b = 0; b < in.n; ++b) {
    const float* ip = in_data + b * in_features;
    float* dst = out_data + b * ws.n;
    runtime::parallel_for(0, ws.n, in_features, [&](int64_t o0, int64_t o1) {
      for (int64_t oc = o0; oc < o1; ++oc) {
        const float* wp = w_data + oc * in_features;
        double acc = b_data[oc];
        for (int64_t i = 0; i < in_features; ++i) acc += static_cast<double>(ip[i]) * wp[i];
        dst[oc] = apply_act_real(static_cast<float>(acc), act);
      }
    });
  }
  return out;
}

Tensor relu6_real(const Tensor& t) {
  Tensor out = Tensor::real(t.shape());
  const auto src = t.f32();
  auto dst = out.f32();
  for (size_t i = 0; i < src.size(); ++i) dst[i] = std::clamp(src[i], 0.0f, 6.0f);
  return out;
}

Tensor hardsigmoid_real(const Tensor& t) {
  Tensor out = Tensor::real(t.shape());
  const auto src = t.f32();
  auto dst = out.f32();
  for (size_t i = 0; i < src.size(); ++i) {
    dst[i] = std::clamp(src[i] + 3.0f, 0.0f, 6.0f) / 6.0f;
  }
  return out;
}

Tensor global_avgpool_real(const Tensor& t) {
  const Shape in = t.shape();
  if (in.h < 1 || in.w < 1) throw Error(Err::ShapeMismatch, "avgpool needs spatial extents");
  Tensor out = Tensor::real({in.n, 1, 1, in.c});
  const float* src = t.f32().data();
  float* dst = out.f32().data();
  const int64_t area = in.h * in.w;
  std::vector<double> sums(static_cast<size_t>(in.c));
  for (int64_t b = 0; b < in.n; ++b) {
    std::fill(sums.begin(), sums.end(), 0.0);
    const float* base = src + b * area * in.c;
    for (int64_t p = 0; p < area; ++p) {
      for (int64_t c = 0; c < in.c; ++c) sums[static_cast<size_t>(c)] += base[p * in.c + c];
    }
    for (int64_t c = 0; c < in.c; ++c) {
      dst[b * in.c + c] = static_cast<float>(sums[static_cast<size_t>(c)] / area);
    }
  }
  return out;
}

Tensor maxpool2_real(const Tensor& t) {
  const Shape in = t.shape();
  const int64_t oh = (in.h + 1) / 2, ow = (in.w + 1) / 2;
  Tensor out = Tensor::real({in.n, oh, ow, in.c});
  const float* src = t.f32().data();
  float* dst = out.f32().data();
  for (int64_t b = 0; b < in.n; ++b) {
    for (int64_t oy = 0; oy < oh; ++oy) {
      for (int64_t ox = 0; ox < ow; ++ox) {
        for (int64_t c = 0; c < in.c; ++c) {
          float best = 0.0f;
          bool seen = false;
          for (int64_t dy = 0; dy < 2; ++dy) {
            const int64_t iy = oy * 2 + dy;
            if (iy >= in.h) continue;
            for (int64_t dx = 0; dx < 2; ++dx) {
              const int64_t ix = ox * 2 + dx;
              if (ix >= in.w) continue;
              const float v = src[((b * in.h + iy) * in.w + ix) * in.c + c];
              best = seen ? std::max(best, v) : v;
              seen = true;
            }
          }
          dst[((b * oh + oy) * ow + ox) * in.c + c] = best;
        }
      }
    }
  }
  return out;
}

Tensor se_block_real(const Tensor& t, const Tensor& reduce_w, const Tensor& reduce_b,
                     const Tensor& expand_w, const Tensor& expand_b, const EdgeCallback& on_edge) {
  if (reduce_w.shape().c != t.shape().c || expand_w.shape().n != t.shape().c) {
    throw Error(Err::ShapeMismatch, "squeeze-excite widths disagree with input channels");
  }
  Tensor pooled = global_avgpool_real(t);
  Tensor reduced = fully_connected_real(pooled, reduce_w, reduce_b, Activation::RELU6);
  if (on_edge) on_edge(kEdgeSeReduceOut, reduced);
  Tensor expanded = fully_connected_real(reduced, expand_w, expand_b, Activation::NONE);
  if (on_edge) on_edge(kEdgeSeExpandOut, expanded);
  Tensor gate = hardsigmoid_real(expanded);

  const Shape in = t.shape();
  Tensor out = Tensor::real(in);
  const float* tp = t.f32().data();
  const float* gp = gate.f32().data();
  float* op = out.f32().data();
  const int64_t area = in.h * in.w;
  for (int64_t b = 0; b < in.n; ++b) {
    const float* gb = gp + b * in.c;
    for (int64_t p = 0; p < area; ++p) {
      const float* src = tp + (b * area + p) * in.c;
      float* dst = op + (b * area + p) * in.c;
      for (int64_t c = 0; c < in.c; ++c) dst[c] = src[c] * gb[c];
    }
  }
  return out;
}

Tensor residual_add_real(const Tensor& a, const Tensor& b) {
  if (!(a.shape() == b.shape())) {
    throw Error(Err::ShapeMismatch, "residual operands must share a shape");
  }
  Tensor out = Tensor::real(a.shape());
  const auto pa = a.f32();
  const auto pb = b.f32();
  auto po = out.f32();
  for (size_t i = 0; i < pa.size(); ++i) po[i] = pa[i] + pb[i];
  return out;
}

Tensor bneck_real(Tensor input, const BneckSpec& spec, const std::vector<Tensor>& weights,
                  const EdgeCallback& on_edge) {
  const BneckSlots sl = bneck_slots(spec.use_se);
  if (static_cast<int>(weights.size()) != sl.count) {
    throw Error(Err::ShapeMismatch, "bneck weight slot count disagrees with spec");
  }
  const bool residual = bneck_has_residual(spec, input.shape().c);
  const ConvSpec expand{1, 1, 1, Padding::SAME, false, spec.expansion_size};
  Tensor x = conv2d_real(input, weights[sl.expand_w], weights[sl.expand_b], expand,
                         Activation::RELU6);
  if (!residual) input = Tensor();  // only the residual path needs the stash
  if (on_edge) on_edge(kEdgeExpandOut, x);

  const ConvSpec dw{3, 3, spec.stride, Padding::SAME, true, spec.expansion_size};
  Tensor y = depthwise_conv_real(x, weights[sl.dw_w], weights[sl.dw_b], dw, Activation::RELU6);
  x = Tensor();
  if (on_edge) on_edge(kEdgeDwOut, y);

  if (spec.use_se) {
    Tensor gated = se_block_real(y, weights[sl.se_reduce_w], weights[sl.se_reduce_b],
                                 weights[sl.se_expand_w], weights[sl.se_expand_b], on_edge);
    y = std::move(gated);
    if (on_edge) on_edge(kEdgeSeMulOut, y);
  }

  const ConvSpec project{1, 1, 1, Padding::SAME, false, spec.out_channels};
  Tensor z = conv2d_real(y, weights[sl.project_w], weights[sl.project_b], project,
                         Activation::NONE);
  y = Tensor();
  if (on_edge) on_edge(kEdgeProjectOut, z);

  if (residual) {
    Tensor sum = residual_add_real(z, input);
    if (on_edge) on_edge(kEdgeResidualOut, sum);
    return sum;
  }
  return z;
}

Tensor resize_bilinear(const Tensor& img, int64_t out_h, int64_t out_w) {
  if (img.dtype() != DType::REAL32) {
    throw Error(Err::InvalidArgument, "resize operates on real tensors");
  }
  const Shape in = img.shape();
  if (out_h < 1 || out_w < 1 || in.h < 1 || in.w < 1) {
    throw Error(Err::ShapeMismatch, "resize extents must be >= 1");
  }
  if (in.h == out_h && in.w == out_w) return img;

  // Half-pixel centers: src = (dst + 0.5) * in/out - 0.5, clamped to the
  // source. The a + f*(b-a) form keeps constant images exactly constant.
  struct Tap {
    int64_t i0, i1;
    float f;
  };
  auto make_taps = [](int64_t in_n, int64_t out_n) {
    std::vector<Tap> taps(static_cast<size_t>(out_n));
    const double scale = static_cast<double>(in_n) / static_cast<double>(out_n);
    for (int64_t d = 0; d < out_n; ++d) {
      double src = (d + 0.5) * scale - 0.5;
      src = std::clamp(src, 0.0, static_cast<double>(in_n - 1));
      const int64_t i0 = static_cast<int64_t>(src);
      taps[static_cast<size_t>(d)] = {i0, std::min(i0 + 1, in_n - 1),
                                      static_cast<float>(src - static_cast<double>(i0))};
    }
    return taps;
  };
  const auto ty = make_taps(in.h, out_h);
  const auto tx = make_taps(in.w, out_w);

  Tensor out = Tensor::real({in.n, out_h, out_w, in.c});
  const float* src = img.f32().data();
  float* dst = out.f32().data();
  for (int64_t b = 0; b < in.n; ++b) {
    for (int64_t y = 0; y < out_h; ++y) {
      const Tap& tyv = ty[static_cast<size_t>(y)];
      for (int64_t x = 0; x < out_w; ++x) {
        const Tap& txv = tx[static_cast<size_t>(x)];
        const float* r0 = src + ((b * in.h + tyv.i0) * in.w) * in.c;
        const float* r1 = src + ((b * in.h + tyv.i1) * in.w) * in.c;
        float* d = dst + ((b * out_h + y) * out_w + x) * in.c;
        for (int64_t c = 0; c < in.c; ++c) {
          const float a0 = r0[txv.i0 * in.c + c];
          const float a1 = r0[txv.i1 * in.c + c];
          const float b0 = r1[txv.i0 * in.c + c];
          const float b1 = r1[txv.i1 * in.c + c];
          const float top = a0 + txv.f * (a1 - a0);
          const float bot = b0 + txv.f * (b1 - b0);
          d[c] = top + tyv.f * (bot - top);
        }
      }
    }
  }
  return out;
}

Tensor softmax(const Tensor& logits) {
  if (logits.dtype() != DType::REAL32) {
    throw Error(Err::InvalidArgument, "softmax operates on real tensors");
  }
  const Shape in = logits.shape();
  Tensor out = Tensor::real(in);
  const float* src = logits.f32().data();
  float* dst = out.f32().data();
  const int64_t groups = in.n * in.h * in.w;
  for (int64_t g = 0; g < groups; ++g) {
    const float* s = src + g * in.c;
    float* d = dst + g * in.c;
    float max_v = -std::numeric_limits<float>::infinity();
    for (int64_t c = 0; c < in.c; ++c) {
      if (!std::isfinite(s[c])) throw Error(Err::NonFinite, "softmax input is not finite");
      max_v = std::max(max_v, s[c]);
    }
    double sum = 0.0;
    for (int64_t c = 0; c < in.c; ++c) {
      const double e = std::exp(static_cast<double>(s[c]) - max_v);
      d[c] = static_cast<float>(e);
      sum += e;
    }
    for (int64_t c = 0; c < in.c; ++c) d[c] = static_cast<float>(d[c] / sum);
  }
  return out;
}

}  // namespace maiq
