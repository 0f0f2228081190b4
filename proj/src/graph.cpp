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

#include "maiq/graph.hpp"

#include <cmath>
#include <map>
#include <utility>

#include "maiq/dataset.hpp"

namespace maiq {

namespace {

Shape layer_output_shape(const LayerSpec& spec, const Shape& in) {
  switch (spec.kind) {
    case LayerKind::CONV: {
      const ConvGeometry g = conv_geometry(in.h, in.w, spec.conv);
      const int64_t c = spec.conv.depthwise ? in.c : spec.conv.out_channels;
      return {in.n, g.out_h, g.out_w, c};
    }
    case LayerKind::BNECK: {
      const ConvSpec dw{3, 3, spec.bneck.stride, Padding::SAME, true, 0};
      const ConvGeometry g = conv_geometry(in.h, in.w, dw);
      return {in.n, g.out_h, g.out_w, spec.bneck.out_channels};
    }
    case LayerKind::FC:
      return {in.n, 1, 1, spec.fc_out};
    case LayerKind::GLOBAL_AVGPOOL:
      return {in.n, 1, 1, in.c};
    case LayerKind::MAXPOOL:
      return {in.n, (in.h + 1) / 2, (in.w + 1) / 2, in.c};
    case LayerKind::RESIZE:
      return {in.n, spec.resize_h, spec.resize_w, in.c};
    case LayerKind::SOFTMAX:
      return in;
  }
  throw Error(Err::InvalidArgument, "unknown layer kind");
}

void expect(bool cond, const char* what) {
  if (!cond) throw Error(Err::ShapeMismatch, what);
}

void check_weight_dtypes(const Layer& layer, Mode mode) {
  for (size_t i = 0; i < layer.weights.size(); ++i) {
    const bool is_bias = i % 2 == 1;
    const DType want = mode == Mode::QUANTIZED ? (is_bias ? DType::INT32 : DType::INT8)
                                               : DType::REAL32;
    if (layer.weights[i].dtype() != want) {
      throw Error(Err::ShapeMismatch, "weight dtype disagrees with graph mode");
    }
  }
}

int64_t expected_edge_count(const Layer& layer, const Shape& in, Mode mode) {
  if (mode != Mode::QUANTIZED) return 0;
  switch (layer.spec.kind) {
    case LayerKind::CONV:
    case LayerKind::FC:
      return 1;
    case LayerKind::BNECK:
      return static_cast<int64_t>(bneck_active_edges(layer.spec.bneck, in.c).size());
    default:
      return 0;
  }
}

BneckEdgeParams bneck_edge_struct(const Layer& layer, int64_t in_c) {
  BneckEdgeParams ep;
  const auto active = bneck_active_edges(layer.spec.bneck, in_c);
  for (size_t i = 0; i < active.size(); ++i) {
    ep.edge[active[i]] = layer.edge_params.at(i);
  }
  return ep;
}

}  // namespace

void ModelGraph::validate() const {
  expect(input.h >= 1 && input.w >= 1 && input.c >= 1, "input descriptor extents must be >= 1");
  Shape cur{1, input.h, input.w, input.c};
  if (mode == Mode::QUANTIZED && !input_params.valid()) {
    throw Error(Err::ShapeMismatch, "quantized graph lacks input params");
  }
  for (size_t li = 0; li < layers.size(); ++li) {
    const Layer& L = layers[li];
    const LayerSpec& s = L.spec;
    if (s.kind == LayerKind::RESIZE) {
      expect(li == 0, "resize layer is only valid at the graph head");
      expect(s.resize_h == input.h && s.resize_w == input.w,
             "head resize extents must match the input descriptor");
    }
    if (s.kind == LayerKind::SOFTMAX) {
      expect(li + 1 == layers.size(), "softmax is only valid as the last layer");
    }
    switch (s.kind) {
      case LayerKind::CONV: {
        expect(L.weights.size() == 2, "conv layer carries weight and bias");
        const Shape& ws = L.weights[0].shape();
        if (s.conv.depthwise) {
          expect(s.conv.out_channels == cur.c, "depthwise out_channels must equal in_channels");
          expect(ws.n == 1 && ws.c == cur.c, "depthwise filter shape");
        } else {
          expect(ws.n == s.conv.out_channels && ws.c == cur.c, "conv weight shape");
        }
        expect(ws.h == s.conv.kernel_h && ws.w == s.conv.kernel_w, "conv kernel extents");
        expect(L.weights[1].elements() == s.conv.out_channels, "conv bias length");
        break;
      }
      case LayerKind::BNECK: {
        const BneckSlots sl = bneck_slots(s.bneck.use_se);
        expect(static_cast<int>(L.weights.size()) == sl.count, "bneck weight slots");
        expect(s.bneck.stride == 1 || s.bneck.stride == 2, "bneck stride");
        const int64_t e = s.bneck.expansion_size;
        expect(L.weights[sl.expand_w].shape() == Shape{e, 1, 1, cur.c}, "bneck expand weight");
        expect(L.weights[sl.dw_w].shape() == Shape{1, 3, 3, e}, "bneck depthwise weight");
        if (s.bneck.use_se) {
          const int64_t r = se_reduce_width(e);
          expect(L.weights[sl.se_reduce_w].shape() == Shape{r, 1, 1, e}, "se reduce weight");
          expect(L.weights[sl.se_expand_w].shape() == Shape{e, 1, 1, r}, "se expand weight");
        }
        expect(L.weights[sl.project_w].shape() == Shape{s.bneck.out_channels, 1, 1, e},
               "bneck project weight");
        break;
      }
      case LayerKind::FC: {
        expect(L.weights.size() == 2, "fc layer carries weight and bias");
        const Shape& ws = L.weights[0].shape();
        expect(ws.n == s.fc_out, "fc output width");
        expect(ws.h * ws.w * ws.c == cur.h * cur.w * cur.c, "fc input width");
        expect(L.weights[1].elements() == s.fc_out, "fc bias length");
        break;
      }
      default:
        expect(L.weights.empty(), "parameter-free layer carries no weights");
        break;
    }
    check_weight_dtypes(L, mode);
    const int64_t edges = expected_edge_count(L, cur, mode);
    if (static_cast<int64_t>(L.edge_params.size()) != edges) {
      throw Error(Err::ShapeMismatch, "calibrated edge count disagrees with layer");
    }
    cur = layer_output_shape(s, cur);
  }
  if (!labels.empty()) {
    expect(static_cast<int64_t>(labels.size()) == cur.c,
           "class label count must equal the output width");
  }
}

std::vector<Shape> ModelGraph::activation_shapes() const {
  Shape cur{1, input.h, input.w, input.c};
  std::vector<Shape> shapes;
  shapes.reserve(layers.size());
  for (const Layer& L : layers) {
    cur = layer_output_shape(L.spec, cur);
    shapes.push_back(cur);
  }
  return shapes;
}

Tensor ModelGraph::preprocess(const Tensor& image) const {
  const Shape s = image.shape();
  if (image.dtype() != DType::REAL32 || s.n != 1 || s.c != input.c || s.h < 1 || s.w < 1) {
    throw Error(Err::ShapeMismatch, "expected a REAL32 (1,h,w,c) image");
  }
  Tensor x = resize_bilinear(image, input.h, input.w);
  for (float& v : x.f32()) v = v / 127.5f - 1.0f;
  return x;
}

std::vector<float> ModelGraph::infer_preprocessed(Tensor x, ActivationObserver* obs) const {
  const bool quant = mode == Mode::QUANTIZED;
  size_t li = 0;
  if (!layers.empty() && layers[0].spec.kind == LayerKind::RESIZE) li = 1;  // in preprocess
  if (quant) {
    Tensor codes = quantize_tensor(x, input_params);
    x = std::move(codes);
  }
  if (obs) obs->on_edge(kInputEdgeLayer, 0, x);

  for (; li < layers.size(); ++li) {
    const Layer& L = layers[li];
    const int idx = static_cast<int>(li);
    EdgeCallback cb;
    if (obs) {
      cb = [obs, idx](int slot, const Tensor& t) { obs->on_edge(idx, slot, t); };
    }
    switch (L.spec.kind) {
      case LayerKind::CONV: {
        if (quant) {
          const QuantParams& op = L.edge_params.at(0);
          x = L.spec.conv.depthwise
                  ? depthwise_conv_q(x, L.weights[0], L.weights[1], L.spec.conv, op, L.spec.act)
                  : conv2d_q(x, L.weights[0], L.weights[1], L.spec.conv, op, L.spec.act);
        } else {
          x = L.spec.conv.depthwise
                  ? depthwise_conv_real(x, L.weights[0], L.weights[1], L.spec.conv, L.spec.act)
                  : conv2d_real(x, L.weights[0], L.weights[1], L.spec.conv, L.spec.act);
        }
        if (cb) cb(0, x);
        break;
      }
      case LayerKind::BNECK: {
        if (quant) {
          const BneckEdgeParams ep = bneck_edge_struct(L, x.shape().c);
          x = bneck_q(std::move(x), L.spec.bneck, L.weights, ep, cb);
        } else {
          x = bneck_real(std::move(x), L.spec.bneck, L.weights, cb);
        }
        break;
      }
      case LayerKind::FC: {
        if (quant) {
          x = fully_connected_q(x, L.weights[0], L.weights[1], L.edge_params.at(0), L.spec.act);
        } else {
          x = fully_connected_real(x, L.weights[0], L.weights[1], L.spec.act);
        }
        if (cb) cb(0, x);
        break;
      }
      case LayerKind::GLOBAL_AVGPOOL:
        x = quant ? global_avgpool_q(x) : global_avgpool_real(x);
        break;
      case LayerKind::MAXPOOL:
        x = quant ? maxpool2_q(x) : maxpool2_real(x);
        break;
      case LayerKind::RESIZE:
        x = resize_bilinear(x, L.spec.resize_h, L.spec.resize_w);
        break;
      case LayerKind::SOFTMAX: {
        if (x.dtype() != DType::REAL32) x = dequantize_tensor(x);
        x = softmax(x);
        break;
      }
    }
  }
  if (x.dtype() != DType::REAL32) x = dequantize_tensor(x);
  const auto out = x.f32();
  return std::vector<float>(out.begin(), out.end());
}

std::vector<float> ModelGraph::infer(const Tensor& image, ActivationObserver* obs) const {
  return infer_preprocessed(preprocess(image), obs);
}

int64_t ModelGraph::param_count() const {
  int64_t n = 0;
  for (const Layer& L : layers) {
    for (const Tensor& w : L.weights) n += w.elements();
  }
  return n;
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

namespace {

Tensor random_weights(const Shape& s, int64_t fan_in, SplitMix64& rng) {
  Tensor t = Tensor::real(s);
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (float& v : t.f32()) {
    v = static_cast<float>((rng.next_unit() * 2.0 - 1.0) * limit);
  }
  return t;
}

Tensor zero_bias(int64_t n) { return Tensor::real({1, 1, 1, n}); }

Layer make_conv(int64_t in_c, const ConvSpec& cs, Activation act, SplitMix64& rng) {
  Layer L;
  L.spec.kind = LayerKind::CONV;
  L.spec.conv = cs;
  L.spec.act = act;
  if (cs.depthwise) {
    L.weights.push_back(random_weights({1, cs.kernel_h, cs.kernel_w, in_c},
                                       cs.kernel_h * cs.kernel_w, rng));
    L.weights.push_back(zero_bias(in_c));
  } else {
    L.weights.push_back(random_weights({cs.out_channels, cs.kernel_h, cs.kernel_w, in_c},
                                       cs.kernel_h * cs.kernel_w * in_c, rng));
    L.weights.push_back(zero_bias(cs.out_channels));
  }
  return L;
}

Layer make_bneck(int64_t in_c, const BneckSpec& bs, SplitMix64& rng) {
  Layer L;
  L.spec.kind = LayerKind::BNECK;
  L.spec.bneck = bs;
  const int64_t e = bs.expansion_size;
  L.weights.push_back(random_weights({e, 1, 1, in_c}, in_c, rng));
  L.weights.push_back(zero_bias(e));
  L.weights.push_back(random_weights({1, 3, 3, e}, 9, rng));
  L.weights.push_back(zero_bias(e));
  if (bs.use_se) {
    const int64_t r = se_reduce_width(e);
    L.weights.push_back(random_weights({r, 1, 1, e}, e, rng));
    L.weights.push_back(zero_bias(r));
    L.weights.push_back(random_weights({e, 1, 1, r}, r, rng));
    L.weights.push_back(zero_bias(e));
  }
  L.weights.push_back(random_weights({bs.out_channels, 1, 1, e}, e, rng));
  L.weights.push_back(zero_bias(bs.out_channels));
  return L;
}

Layer make_fc(int64_t in_features, int64_t out, Activation act, SplitMix64& rng) {
  Layer L;
  L.spec.kind = LayerKind::FC;
  L.spec.fc_out = out;
  L.spec.act = act;
  L.weights.push_back(random_weights({out, 1, 1, in_features}, in_features, rng));
  L.weights.push_back(zero_bias(out));
  return L;
}

Layer make_plain(LayerKind kind) {
  Layer L;
  L.spec.kind = kind;
  return L;
}

Layer make_resize(int64_t h, int64_t w) {
  Layer L;
  L.spec.kind = LayerKind::RESIZE;
  L.spec.resize_h = h;
  L.spec.resize_w = w;
  return L;
}

struct BneckRow {
  int64_t expansion;
  int64_t out_channels;
  bool se;
  int stride;
};

ModelGraph build_bytescene(SplitMix64& rng) {
  ModelGraph g;
  g.input = {128, 128, 3, InputNorm::SCALE_PM1};
  g.layers.push_back(make_resize(128, 128));
  int64_t c = 3;
  g.layers.push_back(make_conv(c, {3, 3, 2, Padding::SAME, false, 16}, Activation::RELU6, rng));
  c = 16;
  static constexpr BneckRow rows[] = {
      {16, 16, false, 1},   {48, 24, true, 2},   {72, 32, true, 2},  {64, 32, true, 1},
      {96, 32, true, 1},    {96, 64, false, 2},  {128, 64, false, 1}, {256, 64, false, 1},
      {320, 96, true, 1},   {192, 96, true, 1},  {288, 96, true, 1},  {576, 192, true, 2},
      {768, 192, true, 1},  {960, 192, true, 1}, {768, 192, true, 1}, {960, 192, true, 1},
      {960, 192, true, 1},  {768, 192, true, 1}, {1152, 192, true, 1},
  };
  for (const BneckRow& r : rows) {
    g.layers.push_back(make_bneck(
        c, {static_cast<int>(r.expansion), r.stride, r.se, static_cast<int>(r.out_channels)},
        rng));
    c = r.out_channels;
  }
  g.layers.push_back(make_conv(c, {1, 1, 1, Padding::SAME, false, 1024}, Activation::RELU6, rng));
  c = 1024;
  g.layers.push_back(make_plain(LayerKind::GLOBAL_AVGPOOL));
  g.layers.push_back(make_fc(c, 1280, Activation::RELU6, rng));
  g.layers.push_back(make_fc(1280, 30, Activation::NONE, rng));
  g.layers.push_back(make_plain(LayerKind::SOFTMAX));
  return g;
}

ModelGraph build_evai(SplitMix64& rng) {
  ModelGraph g;
  g.input = {96, 144, 3, InputNorm::SCALE_PM1};
  g.layers.push_back(make_resize(96, 144));
  int64_t c = 3;
  g.layers.push_back(make_conv(c, {3, 3, 2, Padding::SAME, false, 24}, Activation::RELU6, rng));
  c = 24;
  static constexpr BneckRow rows[] = {
      {24, 16, false, 1},  {96, 24, false, 2},  {144, 24, false, 1}, {144, 24, false, 2},
      {144, 24, false, 1}, {144, 24, false, 1}, {144, 48, false, 2}, {288, 48, false, 1},
      {288, 48, false, 1}, {288, 48, false, 1}, {288, 72, false, 1}, {432, 72, false, 1},
      {432, 72, false, 1}, {432, 120, false, 2}, {720, 120, false, 1},
  };
  for (const BneckRow& r : rows) {
    g.layers.push_back(make_bneck(
        c, {static_cast<int>(r.expansion), r.stride, r.se, static_cast<int>(r.out_channels)},
        rng));
    c = r.out_channels;
  }
  // Separable classification head: depthwise 3x3 then pointwise to 30 maps.
  g.layers.push_back(make_conv(c, {3, 3, 1, Padding::SAME, true, static_cast<int>(c)},
                               Activation::NONE, rng));
  g.layers.push_back(make_conv(c, {1, 1, 1, Padding::SAME, false, 30}, Activation::RELU6, rng));
  g.layers.push_back(make_plain(LayerKind::GLOBAL_AVGPOOL));
  g.layers.push_back(make_plain(LayerKind::SOFTMAX));
  return g;
}

ModelGraph build_tiny(SplitMix64& rng) {
  ModelGraph g;
  g.input = {kImageHeight, kImageWidth, 3, InputNorm::SCALE_PM1};
  g.layers.push_back(make_resize(kImageHeight, kImageWidth));
  int64_t c = 3;
  auto conv = [&](int out, int kernel, int stride) {
    g.layers.push_back(make_conv(
        c, {kernel, kernel, stride, Padding::SAME, false, out}, Activation::RELU6, rng));
    c = out;
  };
  conv(6, 3, 4);
  conv(12, 3, 2);
  g.layers.push_back(make_plain(LayerKind::MAXPOOL));
  conv(24, 3, 1);
  conv(24, 3, 1);
  g.layers.push_back(make_plain(LayerKind::MAXPOOL));
  conv(48, 3, 1);
  conv(48, 3, 1);
  g.layers.push_back(make_plain(LayerKind::MAXPOOL));
  conv(48, 3, 1);
  g.layers.push_back(make_plain(LayerKind::MAXPOOL));
  conv(96, 1, 1);
  g.layers.push_back(make_plain(LayerKind::GLOBAL_AVGPOOL));
  g.layers.push_back(make_fc(96, 30, Activation::NONE, rng));
  g.layers.push_back(make_plain(LayerKind::SOFTMAX));
  return g;
}

}  // namespace

ModelGraph build_preset(PresetId id, uint64_t seed) {
  SplitMix64 rng(seed);
  ModelGraph g;
  switch (id) {
    case PresetId::BYTESCENE: g = build_bytescene(rng); break;
    case PresetId::EVAI: g = build_evai(rng); break;
    case PresetId::TINY: g = build_tiny(rng); break;
  }
  g.mode = Mode::REAL;
  const auto& names = camsdd_category_names();
  g.labels.assign(names.begin(), names.end());
  g.validate();
  return g;
}

std::optional<PresetId> preset_from_name(const std::string& name) {
  if (name == "bytescene") return PresetId::BYTESCENE;
  if (name == "evai") return PresetId::EVAI;
  if (name == "tiny") return PresetId::TINY;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Post-training quantization
// ---------------------------------------------------------------------------

namespace {

struct StatsCollector : ActivationObserver {
  std::map<std::pair<int, int>, CalibrationStats> stats;

  void on_edge(int layer, int slot, const Tensor& t) override {
    observe(stats[{layer, slot}], t);
  }

  QuantParams params(int layer, int slot) const {
    const auto it = stats.find({layer, slot});
    if (it == stats.end()) {
      throw Error(Err::EmptyCalibrationSet, "activation edge was never observed");
    }
    return it->second.to_params();
  }
};

}  // namespace

ModelGraph quantize_model(const ModelGraph& g, const ImageSource& calibration) {
  if (g.mode != Mode::REAL) {
    throw Error(Err::InvalidArgument, "quantize_model expects a REAL-mode graph");
  }
  g.validate();

  StatsCollector collector;
  int64_t images = 0;
  while (auto img = calibration()) {
    g.infer(*img, &collector);
    ++images;
  }
  if (images == 0) throw Error(Err::EmptyCalibrationSet, "no calibration images");

  ModelGraph q;
  q.mode = Mode::QUANTIZED;
  q.input = g.input;
  q.labels = g.labels;
  q.input_params = collector.params(kInputEdgeLayer, 0);

  Shape cur_shape{1, g.input.h, g.input.w, g.input.c};
  QuantParams cur = q.input_params;
  for (size_t li = 0; li < g.layers.size(); ++li) {
    const Layer& L = g.layers[li];
    const int idx = static_cast<int>(li);
    Layer out;
    out.spec = L.spec;
    switch (L.spec.kind) {
      case LayerKind::CONV: {
        const WeightAxis axis =
            L.spec.conv.depthwise ? WeightAxis::CHANNELS : WeightAxis::OUTPUT;
        Tensor wq = quantize_weights(L.weights[0], axis);
        Tensor bq = quantize_bias(L.weights[1], cur.scale(), wq.qparams());
        out.edge_params.push_back(collector.params(idx, 0));
        out.weights.push_back(std::move(wq));
        out.weights.push_back(std::move(bq));
        cur = out.edge_params.back();
        break;
      }
      case LayerKind::FC: {
        Tensor wq = quantize_weights(L.weights[0], WeightAxis::OUTPUT);
        Tensor bq = quantize_bias(L.weights[1], cur.scale(), wq.qparams());
        out.edge_params.push_back(collector.params(idx, 0));
        out.weights.push_back(std::move(wq));
        out.weights.push_back(std::move(bq));
        cur = out.edge_params.back();
        break;
      }
      case LayerKind::BNECK: {
        const BneckSlots sl = bneck_slots(L.spec.bneck.use_se);
        out.weights.resize(static_cast<size_t>(sl.count));
        const QuantParams expand_out = collector.params(idx, kEdgeExpandOut);
        const QuantParams dw_out = collector.params(idx, kEdgeDwOut);

        out.weights[sl.expand_w] = quantize_weights(L.weights[sl.expand_w], WeightAxis::OUTPUT);
        out.weights[sl.expand_b] = quantize_bias(L.weights[sl.expand_b], cur.scale(),
                                                 out.weights[sl.expand_w].qparams());
        out.weights[sl.dw_w] = quantize_weights(L.weights[sl.dw_w], WeightAxis::CHANNELS);
        out.weights[sl.dw_b] = quantize_bias(L.weights[sl.dw_b], expand_out.scale(),
                                             out.weights[sl.dw_w].qparams());

        QuantParams project_in = dw_out;
        if (L.spec.bneck.use_se) {
          const QuantParams reduce_out = collector.params(idx, kEdgeSeReduceOut);
          // The squeeze path reads the pooled depthwise output, so its FCs
          // are quantized against dw_out / reduce_out input scales.
          out.weights[sl.se_reduce_w] =
              quantize_weights(L.weights[sl.se_reduce_w], WeightAxis::OUTPUT);
          out.weights[sl.se_reduce_b] = quantize_bias(
              L.weights[sl.se_reduce_b], dw_out.scale(), out.weights[sl.se_reduce_w].qparams());
          out.weights[sl.se_expand_w] =
              quantize_weights(L.weights[sl.se_expand_w], WeightAxis::OUTPUT);
          out.weights[sl.se_expand_b] =
              quantize_bias(L.weights[sl.se_expand_b], reduce_out.scale(),
                            out.weights[sl.se_expand_w].qparams());
          project_in = collector.params(idx, kEdgeSeMulOut);
        }
        out.weights[sl.project_w] = quantize_weights(L.weights[sl.project_w], WeightAxis::OUTPUT);
        out.weights[sl.project_b] = quantize_bias(L.weights[sl.project_b], project_in.scale(),
                                                  out.weights[sl.project_w].qparams());

        for (int slot : bneck_active_edges(L.spec.bneck, cur_shape.c)) {
          out.edge_params.push_back(collector.params(idx, slot));
        }
        cur = out.edge_params.back();
        break;
      }
      default:
        break;  // parameter-free layers pass activations through
    }
    cur_shape = layer_output_shape(L.spec, cur_shape);
    q.layers.push_back(std::move(out));
  }
  q.validate();
  return q;
}

}  // namespace maiq
