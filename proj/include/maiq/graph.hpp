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

#ifndef MAIQ_GRAPH_HPP_
#define MAIQ_GRAPH_HPP_

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "maiq/kernels.hpp"
#include "maiq/tensor.hpp"

namespace maiq {

enum class LayerKind : uint8_t {
  CONV = 0,
  BNECK = 1,
  FC = 2,
  GLOBAL_AVGPOOL = 3,
  MAXPOOL = 4,
  RESIZE = 5,
  SOFTMAX = 6,
};

enum class Mode : uint8_t { REAL = 0, QUANTIZED = 1 };

enum class PresetId { BYTESCENE, EVAI, TINY };

struct LayerSpec {
  LayerKind kind = LayerKind::CONV;
  Activation act = Activation::NONE;  // CONV, FC
  ConvSpec conv{};                    // CONV (depthwise via flag)
  BneckSpec bneck{};                  // BNECK
  int64_t fc_out = 0;                 // FC
  int64_t resize_h = 0, resize_w = 0; // RESIZE
};

// Weight slot order per kind:
//   CONV:  [w, b]
//   FC:    [w, b]
//   BNECK: [exp_w, exp_b, dw_w, dw_b,
//           (se_reduce_w, se_reduce_b, se_expand_w, se_expand_b,)  if use_se
//           proj_w, proj_b]
// edge_params holds the calibrated activation edges for QUANTIZED graphs, in
// the layer's canonical edge order (CONV/FC: the single output edge; BNECK:
// bneck_active_edges order). Empty for REAL graphs and param-free kinds.
struct Layer {
  LayerSpec spec;
  std::vector<Tensor> weights;
  std::vector<QuantParams> edge_params;
};

// Pixel normalization applied after the leading resize: x / 127.5 - 1.
enum class InputNorm : uint8_t { SCALE_PM1 = 0 };

struct InputDesc {
  int64_t h = 0, w = 0, c = 3;
  InputNorm norm = InputNorm::SCALE_PM1;
};

// Receives every activation edge during execution. layer == kInputEdgeLayer
// identifies the network input edge (normalized reals in REAL mode, input
// codes in QUANTIZED mode). For CONV/FC layers slot is 0; for BNECK layers
// slot is a BneckEdge value.
struct ActivationObserver {
  virtual ~ActivationObserver() = default;
  virtual void on_edge(int layer, int slot, const Tensor& t) = 0;
};

inline constexpr int kInputEdgeLayer = -1;

// Ordered layer list with weights, quantization metadata and the class label
// table. Immutable once built or loaded; concurrent infer calls are safe.
class ModelGraph {
 public:
  Mode mode = Mode::REAL;
  InputDesc input;
  QuantParams input_params;  // QUANTIZED mode only
  std::vector<Layer> layers;
  std::vector<std::string> labels;

  // Shape-propagates the chain and checks weight dimensions, residual rules
  // and label count. Throws ShapeMismatch.
  void validate() const;

  // Output shape of every layer, in order (element i = layers[i] output).
  std::vector<Shape> activation_shapes() const;

  // image: REAL32 (1,h,w,3) with values in [0,255]. Returns class
  // probabilities (softmax output).
  std::vector<float> infer(const Tensor& image, ActivationObserver* obs = nullptr) const;

  // Preprocessing stage: leading resize layer + normalization. The returned
  // tensor feeds infer_preprocessed; the split exists so the benchmark can
  // time the stages separately.
  Tensor preprocess(const Tensor& image) const;
  std::vector<float> infer_preprocessed(Tensor x, ActivationObserver* obs = nullptr) const;

  int64_t param_count() const;  // trainable weight + bias elements

  std::vector<uint8_t> serialize() const;
  static ModelGraph deserialize(const std::vector<uint8_t>& bytes);
  void save(const std::filesystem::path& path) const;
  static ModelGraph load(const std::filesystem::path& path);
};

int64_t serialized_size(const ModelGraph& g);

// REAL-mode graph with deterministically seeded, fan-in-scaled uniform
// random weights and the 30 canonical scene labels.
ModelGraph build_preset(PresetId id, uint64_t seed);

std::optional<PresetId> preset_from_name(const std::string& name);

// Pulls calibration images (REAL32, [0,255]) until nullopt.
using ImageSource = std::function<std::optional<Tensor>()>;

// Post-training quantization: per-output-channel symmetric weights, min/max
// calibrated activation edges, INT32 biases. Throws EmptyCalibrationSet.
ModelGraph quantize_model(const ModelGraph& g, const ImageSource& calibration);

}  // namespace maiq

#endif  // MAIQ_GRAPH_HPP_
