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

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>

#include "maiq/dataset.hpp"
#include "maiq/kernels.hpp"
#include "maiq/quant.hpp"

namespace maiq {

namespace {

std::vector<uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw Error(Err::IoFailure, "cannot open " + path.string());
  const std::streamsize size = in.tellg();
  in.seekg(0);
  std::vector<uint8_t> bytes(static_cast<size_t>(size));
  in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) throw Error(Err::IoFailure, "short read from " + path.string());
  return bytes;
}

Tensor pixels_to_tensor(const uint8_t* rgb, int64_t h, int64_t w) {
  Tensor t = Tensor::real({1, h, w, 3});
  auto dst = t.f32();
  const int64_t n = h * w * 3;
  for (int64_t i = 0; i < n; ++i) dst[static_cast<size_t>(i)] = rgb[i];
  return t;
}

// --- P6 -------------------------------------------------------------------

// Header tokens separated by whitespace; '#' starts a comment to end-of-line.
struct P6Header {
  int64_t width = 0, height = 0, maxval = 0;
  size_t data_offset = 0;
};

P6Header parse_p6_header(const std::vector<uint8_t>& bytes) {
  size_t pos = 2;  // past "P6"
  auto next_token = [&]() -> int64_t {
    while (pos < bytes.size()) {
      const char c = static_cast<char>(bytes[pos]);
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        break;
      }
    }
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
      throw Error(Err::CorruptImage, "malformed header");
    }
    int64_t v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > 1 << 24) throw Error(Err::CorruptImage, "header value out of range");
      ++pos;
    }
    return v;
  };
  P6Header h;
  h.width = next_token();
  h.height = next_token();
  h.maxval = next_token();
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw Error(Err::CorruptImage, "missing delimiter after maxval");
  }
  h.data_offset = pos + 1;
  return h;
}

Tensor decode_p6(const std::vector<uint8_t>& bytes, const std::string& name) {
  const P6Header h = parse_p6_header(bytes);
  if (h.maxval != 255) {
    throw Error(Err::UnsupportedFormat, name + ": only 8-bit maxval 255 supported");
  }
  if (h.width < 1 || h.height < 1) throw Error(Err::CorruptImage, name + ": empty image");
  const size_t need = static_cast<size_t>(h.width) * h.height * 3;
  if (bytes.size() - h.data_offset < need) {
    throw Error(Err::CorruptImage, name + ": truncated pixel data");
  }
  return pixels_to_tensor(bytes.data() + h.data_offset, h.height, h.width);
}

// --- PNG ------------------------------------------------------------------

uint32_t be32(const uint8_t* p) {
  return (static_cast<uint32_t>(p[0]) << 24) | (static_cast<uint32_t>(p[1]) << 16) |
         (static_cast<uint32_t>(p[2]) << 8) | p[3];
}

int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

Tensor decode_png(const std::vector<uint8_t>& bytes, const std::string& name) {
  static const uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (bytes.size() < 8 || std::memcmp(bytes.data(), sig, 8) != 0) {
    throw Error(Err::UnsupportedFormat, name + ": not a PNG");
  }
  size_t pos = 8;
  int64_t width = 0, height = 0;
  bool have_header = false;
  std::vector<uint8_t> idat;
  while (pos + 8 <= bytes.size()) {
    const uint32_t len = be32(bytes.data() + pos);
    if (pos + 12 + len > bytes.size()) throw Error(Err::CorruptImage, name + ": chunk overrun");
    const char* type = reinterpret_cast<const char*>(bytes.data() + pos + 4);
    const uint8_t* data = bytes.data() + pos + 8;
    const uint32_t stored_crc = be32(data + len);
    if (crc32(bytes.data() + pos + 4, len + 4) != stored_crc) {
      throw Error(Err::CorruptImage, name + ": chunk checksum mismatch");
    }
    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (len != 13) throw Error(Err::CorruptImage, name + ": bad IHDR");
      width = be32(data);
      height = be32(data + 4);
      const uint8_t bit_depth = data[8], color_type = data[9];
      const uint8_t compression = data[10], filter = data[11], interlace = data[12];
      if (bit_depth != 8 || color_type != 2) {
        throw Error(Err::UnsupportedFormat, name + ": only 8-bit RGB PNG supported");
      }
      if (compression != 0 || filter != 0 || interlace != 0) {
        throw Error(Err::UnsupportedFormat, name + ": unsupported PNG encoding");
      }
      have_header = true;
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), data, data + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      break;
    }
    pos += 12 + len;
  }
  if (!have_header || idat.empty() || width < 1 || height < 1) {
    throw Error(Err::CorruptImage, name + ": missing PNG data");
  }

  const int64_t row_bytes = width * 3;
  const size_t raw_size = static_cast<size_t>(height) * (row_bytes + 1);
  std::vector<uint8_t> raw(raw_size);
  uLongf out_len = raw_size;
  const int rc = uncompress(raw.data(), &out_len, idat.data(), idat.size());
  if (rc != Z_OK || out_len != raw_size) {
    throw Error(Err::CorruptImage, name + ": PNG inflate failed");
  }

  std::vector<uint8_t> pixels(static_cast<size_t>(height) * row_bytes);
  for (int64_t y = 0; y < height; ++y) {
    const uint8_t filter = raw[static_cast<size_t>(y) * (row_bytes + 1)];
    const uint8_t* src = raw.data() + static_cast<size_t>(y) * (row_bytes + 1) + 1;
    uint8_t* dst = pixels.data() + static_cast<size_t>(y) * row_bytes;
    const uint8_t* up = y > 0 ? dst - row_bytes : nullptr;
    for (int64_t x = 0; x < row_bytes; ++x) {
      const int left = x >= 3 ? dst[x - 3] : 0;
      const int above = up ? up[x] : 0;
      const int upleft = (up && x >= 3) ? up[x - 3] : 0;
      int v = src[x];
      switch (filter) {
        case 0: break;
        case 1: v += left; break;
        case 2: v += above; break;
        case 3: v += (left + above) / 2; break;
        case 4: v += paeth(left, above, upleft); break;
        default: throw Error(Err::CorruptImage, name + ": unknown PNG filter");
      }
      dst[x] = static_cast<uint8_t>(v & 0xFF);
    }
  }
  return pixels_to_tensor(pixels.data(), height, width);
}

}  // namespace

Tensor decode_image_raw(const std::filesystem::path& path) {
  const std::vector<uint8_t> bytes = read_file(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') {
    return decode_p6(bytes, path.filename().string());
  }
  if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P') {
    return decode_png(bytes, path.filename().string());
  }
  throw Error(Err::UnsupportedFormat, path.filename().string() + ": expected P6 or PNG");
}

Tensor decode_image(const std::filesystem::path& path) {
  Tensor t = decode_image_raw(path);
  if (t.shape().h == kImageHeight && t.shape().w == kImageWidth) return t;
  return resize_bilinear(t, kImageHeight, kImageWidth);
}

void encode_p6(const Tensor& image, const std::filesystem::path& path) {
  const Shape s = image.shape();
  if (image.dtype() != DType::REAL32 || s.n != 1 || s.c != 3) {
    throw Error(Err::InvalidArgument, "encode_p6 expects a REAL32 (1,h,w,3) image");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Err::IoFailure, "cannot open " + path.string() + " for writing");
  out << "P6\n" << s.w << " " << s.h << "\n255\n";
  const auto src = image.f32();
  std::vector<uint8_t> row(static_cast<size_t>(s.w) * 3);
  for (int64_t y = 0; y < s.h; ++y) {
    for (int64_t x = 0; x < s.w * 3; ++x) {
      const float v = src[static_cast<size_t>(y * s.w * 3 + x)];
      row[static_cast<size_t>(x)] =
          static_cast<uint8_t>(std::clamp<int64_t>(round_half_away(v), 0, 255));
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw Error(Err::IoFailure, "short write to " + path.string());
}

}  // namespace maiq
