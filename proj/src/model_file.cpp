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

// Model file layout (little-endian):
//   magic "MAIQ" | version u16 | mode u8 | input h,w,c u16 x3 | norm u8 |
//   (QUANTIZED: input qparams block) | layer count u16 |
//   per layer: kind u8 + act u8 + spec fields + edge qparams blocks +
//              weight descriptors (dtype, shape, qparams, blob length u64) |
//   label table (count u16, length-prefixed UTF-8) | weight region |
//   CRC32 of all preceding bytes.

#include <cstring>
#include <fstream>

#include "maiq/graph.hpp"

namespace maiq {

namespace {

constexpr char kMagic[4] = {'M', 'A', 'I', 'Q'};
constexpr uint16_t kVersion = 1;

class Writer {
 public:
  void u8(uint8_t v) { buf_.push_back(v); }
  void u16(uint16_t v) {
    buf_.push_back(static_cast<uint8_t>(v));
    buf_.push_back(static_cast<uint8_t>(v >> 8));
  }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void i32(int32_t v) { u32(static_cast<uint32_t>(v)); }
  void f32(float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }
  void bytes(const void* p, size_t n) {
    const auto* b = static_cast<const uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  std::vector<uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(const std::vector<uint8_t>& buf) : buf_(buf) {}

  uint8_t u8() { return take(1)[0]; }
  uint16_t u16() {
    const uint8_t* p = take(2);
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
  }
  uint32_t u32() {
    const uint8_t* p = take(4);
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
  }
  uint64_t u64() {
    uint64_t v = 0;
    const uint8_t* p = take(8);
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
    return v;
  }
  int32_t i32() { return static_cast<int32_t>(u32()); }
  float f32() {
    const uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  const uint8_t* take(size_t n) {
    if (pos_ + n > buf_.size()) throw Error(Err::TruncatedFile, "model file ends early");
    const uint8_t* p = buf_.data() + pos_;
    pos_ += n;
    return p;
  }
  size_t remaining() const { return buf_.size() - pos_; }

 private:
  const std::vector<uint8_t>& buf_;
  size_t pos_ = 0;
};

void write_qparams(Writer& w, const QuantParams& q) {
  w.u8(static_cast<uint8_t>(q.granularity));
  w.u32(static_cast<uint32_t>(q.scales.size()));
  for (float s : q.scales) w.f32(s);
  for (int32_t zp : q.zero_points) w.i32(zp);
}

QuantParams read_qparams(Reader& r) {
  QuantParams q;
  q.granularity = static_cast<Granularity>(r.u8());
  const uint32_t n = r.u32();
  q.scales.resize(n);
  q.zero_points.resize(n);
  for (uint32_t i = 0; i < n; ++i) q.scales[i] = r.f32();
  for (uint32_t i = 0; i < n; ++i) q.zero_points[i] = r.i32();
  if (!q.valid()) throw Error(Err::TruncatedFile, "invalid qparams block");
  return q;
}

void write_spec(Writer& w, const LayerSpec& s) {
  w.u8(static_cast<uint8_t>(s.kind));
  w.u8(static_cast<uint8_t>(s.act));
  switch (s.kind) {
    case LayerKind::CONV:
      w.u16(static_cast<uint16_t>(s.conv.kernel_h));
      w.u16(static_cast<uint16_t>(s.conv.kernel_w));
      w.u16(static_cast<uint16_t>(s.conv.stride));
      w.u16(static_cast<uint16_t>(s.conv.out_channels));
      w.u8(static_cast<uint8_t>(s.conv.padding));
      w.u8(s.conv.depthwise ? 1 : 0);
      break;
    case LayerKind::BNECK:
      w.u16(static_cast<uint16_t>(s.bneck.expansion_size));
      w.u16(static_cast<uint16_t>(s.bneck.stride));
      w.u16(static_cast<uint16_t>(s.bneck.out_channels));
      w.u8(s.bneck.use_se ? 1 : 0);
      break;
    case LayerKind::FC:
      w.u16(static_cast<uint16_t>(s.fc_out));
      break;
    case LayerKind::RESIZE:
      w.u16(static_cast<uint16_t>(s.resize_h));
      w.u16(static_cast<uint16_t>(s.resize_w));
      break;
    default:
      break;
  }
}

LayerSpec read_spec(Reader& r) {
  LayerSpec s;
  const uint8_t kind = r.u8();
  if (kind > static_cast<uint8_t>(LayerKind::SOFTMAX)) {
    throw Error(Err::TruncatedFile, "unknown layer kind");
  }
  s.kind = static_cast<LayerKind>(kind);
  s.act = static_cast<Activation>(r.u8());
  switch (s.kind) {
    case LayerKind::CONV:
      s.conv.kernel_h = r.u16();
      s.conv.kernel_w = r.u16();
      s.conv.stride = r.u16();
      s.conv.out_channels = r.u16();
      s.conv.padding = static_cast<Padding>(r.u8());
      s.conv.depthwise = r.u8() != 0;
      break;
    case LayerKind::BNECK:
      s.bneck.expansion_size = r.u16();
      s.bneck.stride = r.u16();
      s.bneck.out_channels = r.u16();
      s.bneck.use_se = r.u8() != 0;
      break;
    case LayerKind::FC:
      s.fc_out = r.u16();
      break;
    case LayerKind::RESIZE:
      s.resize_h = r.u16();
      s.resize_w = r.u16();
      break;
    default:
      break;
  }
  return s;
}

void write_weight_blob(Writer& w, const Tensor& t) {
  switch (t.dtype()) {
    case DType::INT8:
      w.bytes(t.i8().data(), t.i8().size());
      break;
    case DType::INT32:
      for (int32_t v : t.i32()) w.i32(v);
      break;
    case DType::REAL32:
      for (float v : t.f32()) w.f32(v);
      break;
  }
}

}  // namespace

std::vector<uint8_t> ModelGraph::serialize() const {
  validate();
  Writer w;
  w.bytes(kMagic, 4);
  w.u16(kVersion);
  w.u8(static_cast<uint8_t>(mode));
  w.u16(static_cast<uint16_t>(input.h));
  w.u16(static_cast<uint16_t>(input.w));
  w.u16(static_cast<uint16_t>(input.c));
  w.u8(static_cast<uint8_t>(input.norm));
  if (mode == Mode::QUANTIZED) write_qparams(w, input_params);
  w.u16(static_cast<uint16_t>(layers.size()));
  for (const Layer& L : layers) {
    write_spec(w, L.spec);
    w.u16(static_cast<uint16_t>(L.edge_params.size()));
    for (const QuantParams& q : L.edge_params) write_qparams(w, q);
    w.u16(static_cast<uint16_t>(L.weights.size()));
    for (const Tensor& t : L.weights) {
      w.u8(static_cast<uint8_t>(t.dtype()));
      w.u16(static_cast<uint16_t>(t.shape().n));
      w.u16(static_cast<uint16_t>(t.shape().h));
      w.u16(static_cast<uint16_t>(t.shape().w));
      w.u16(static_cast<uint16_t>(t.shape().c));
      w.u8(t.has_qparams() ? 1 : 0);
      if (t.has_qparams()) write_qparams(w, t.qparams());
      w.u64(static_cast<uint64_t>(t.elements()) * dtype_size(t.dtype()));
    }
  }
  w.u16(static_cast<uint16_t>(labels.size()));
  for (const std::string& name : labels) {
    w.u16(static_cast<uint16_t>(name.size()));
    w.bytes(name.data(), name.size());
  }
  for (const Layer& L : layers) {
    for (const Tensor& t : L.weights) write_weight_blob(w, t);
  }
  std::vector<uint8_t> out = w.take();
  const uint32_t crc = crc32(out.data(), out.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(crc >> (8 * i)));
  return out;
}

ModelGraph ModelGraph::deserialize(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(Err::BadMagic, "not a model file");
  }
  Reader r(bytes);
  r.take(4);  // magic
  const uint16_t version = r.u16();
  if (version != kVersion) {
    throw Error(Err::UnsupportedVersion, "model format version " + std::to_string(version));
  }

  ModelGraph g;
  g.mode = static_cast<Mode>(r.u8());
  g.input.h = r.u16();
  g.input.w = r.u16();
  g.input.c = r.u16();
  g.input.norm = static_cast<InputNorm>(r.u8());
  if (g.mode == Mode::QUANTIZED) g.input_params = read_qparams(r);

  struct PendingWeight {
    DType dtype;
    Shape shape;
    bool has_q;
    QuantParams q;
    uint64_t blob_len;
  };
  std::vector<std::vector<PendingWeight>> pending;

  const uint16_t layer_count = r.u16();
  g.layers.resize(layer_count);
  pending.resize(layer_count);
  for (uint16_t li = 0; li < layer_count; ++li) {
    Layer& L = g.layers[li];
    L.spec = read_spec(r);
    const uint16_t edges = r.u16();
    for (uint16_t e = 0; e < edges; ++e) L.edge_params.push_back(read_qparams(r));
    const uint16_t weight_count = r.u16();
    for (uint16_t wi = 0; wi < weight_count; ++wi) {
      PendingWeight pw;
      pw.dtype = static_cast<DType>(r.u8());
      if (dtype_size(pw.dtype) == 0) throw Error(Err::TruncatedFile, "unknown weight dtype");
      pw.shape.n = r.u16();
      pw.shape.h = r.u16();
      pw.shape.w = r.u16();
      pw.shape.c = r.u16();
      pw.has_q = r.u8() != 0;
      if (pw.has_q) pw.q = read_qparams(r);
      pw.blob_len = r.u64();
      if (pw.blob_len != static_cast<uint64_t>(pw.shape.elements()) * dtype_size(pw.dtype)) {
        throw Error(Err::TruncatedFile, "weight blob length disagrees with shape");
      }
      pending[li].push_back(std::move(pw));
    }
  }

  const uint16_t label_count = r.u16();
  for (uint16_t i = 0; i < label_count; ++i) {
    const uint16_t len = r.u16();
    const uint8_t* p = r.take(len);
    g.labels.emplace_back(reinterpret_cast<const char*>(p), len);
  }

  for (uint16_t li = 0; li < layer_count; ++li) {
    for (const PendingWeight& pw : pending[li]) {
      const uint8_t* blob = r.take(pw.blob_len);
      Tensor t;
      switch (pw.dtype) {
        case DType::INT8: {
          t = Tensor::int8(pw.shape, pw.q);
          std::memcpy(t.i8().data(), blob, pw.blob_len);
          break;
        }
        case DType::INT32: {
          t = Tensor::int32(pw.shape, pw.q);
          auto dst = t.i32();
          for (int64_t i = 0; i < pw.shape.elements(); ++i) {
            uint32_t v = 0;
            std::memcpy(&v, blob + i * 4, 4);
            dst[static_cast<size_t>(i)] = static_cast<int32_t>(v);
          }
          break;
        }
        case DType::REAL32: {
          t = Tensor::real(pw.shape);
          std::memcpy(t.f32().data(), blob, pw.blob_len);
          break;
        }
      }
      g.layers[li].weights.push_back(std::move(t));
    }
  }

  if (r.remaining() < 4) throw Error(Err::TruncatedFile, "missing checksum");
  if (r.remaining() != 4) throw Error(Err::ChecksumMismatch, "trailing bytes after checksum");
  uint32_t stored_crc = 0;
  for (int i = 0; i < 4; ++i) {
    stored_crc |=
        static_cast<uint32_t>(bytes[bytes.size() - 4 + static_cast<size_t>(i)]) << (8 * i);
  }
  if (crc32(bytes.data(), bytes.size() - 4) != stored_crc) {
    throw Error(Err::ChecksumMismatch, "model file checksum mismatch");
  }

  g.validate();
  return g;
}

void ModelGraph::save(const std::filesystem::path& path) const {
  const std::vector<uint8_t> bytes = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Err::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Err::IoFailure, "short write to " + path.string());
}

ModelGraph ModelGraph::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw Error(Err::IoFailure, "cannot open " + path.string());
  const std::streamsize size = in.tellg();
  in.seekg(0);
  std::vector<uint8_t> bytes(static_cast<size_t>(size));
  in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) throw Error(Err::IoFailure, "short read from " + path.string());
  return deserialize(bytes);
}

int64_t serialized_size(const ModelGraph& g) {
  return static_cast<int64_t>(g.serialize().size());
}

}  // namespace maiq
