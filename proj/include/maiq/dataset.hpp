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

#ifndef MAIQ_DATASET_HPP_
#define MAIQ_DATASET_HPP_

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "maiq/tensor.hpp"

namespace maiq {

// Canonical CamSDD resolution (landscape: 576 wide, 384 high).
inline constexpr int64_t kImageWidth = 576;
inline constexpr int64_t kImageHeight = 384;
inline constexpr int kCategoryCount = 30;

// The 30 scene categories in canonical index order.
const std::array<std::string, kCategoryCount>& camsdd_category_names();

// Ordered, unique category names. Folder matching is case-insensitive with
// "&" <-> "and" treated as equivalent.
class CategoryRegistry {
 public:
  static CategoryRegistry camsdd();
  // One name per line; must list exactly 30 unique names.
  static CategoryRegistry from_labels_file(const std::filesystem::path& path);
  static CategoryRegistry from_names(std::vector<std::string> names);

  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(int index) const { return names_[static_cast<size_t>(index)]; }
  int size() const { return static_cast<int>(names_.size()); }

  // -1 if no category matches the folder name.
  int match_folder(const std::string& folder) const;

 private:
  std::vector<std::string> names_;
};

struct LabeledImage {
  Tensor pixels;  // REAL32 (1,h,w,3) in [0,255]
  int label = 0;
  std::string path;
};

// Lazily-decoded corpus: paths with labels, in deterministic order (category
// folders lexicographically, files lexicographically within each).
struct Corpus {
  struct Entry {
    std::filesystem::path path;
    int label = 0;
  };
  std::vector<Entry> entries;
  std::array<int64_t, kCategoryCount> per_class_count{};
  CategoryRegistry registry;

  LabeledImage load(size_t i) const;
};

// Layout: root/<Category Name>/<file>.{ppm,png}. Honors an optional
// root/labels.txt registry override. Throws UnknownCategoryFolder for a
// directory that matches no category and EmptyCorpus when no image is found.
Corpus scan_corpus(const std::filesystem::path& root, const CategoryRegistry& registry);
Corpus scan_corpus(const std::filesystem::path& root);  // camsdd or labels.txt

// Binary PPM (P6, maxval 255) or PNG (8-bit RGB). The decoded tensor is
// bilinearly resized to 576x384 unless it already has those extents.
Tensor decode_image(const std::filesystem::path& path);

// As decoded from the file, no canonical resize.
Tensor decode_image_raw(const std::filesystem::path& path);

void encode_p6(const Tensor& image, const std::filesystem::path& path);

// Synthetic test corpus: every class is a noisy constant-color image whose
// mean equals the class signature. Regeneration with one seed is
// byte-identical.
struct SyntheticSpec {
  int images_per_class = 10;
  int noise_amplitude = 8;  // uniform in [-noise, +noise] per sample, clamped
  uint64_t seed = 1;
};

// Class signatures on a {32, 96, 160, 224}^3 grid, 64 apart in at least one
// channel for any pair.
std::array<std::array<uint8_t, 3>, kCategoryCount> synthetic_signatures();

void generate_synthetic(const SyntheticSpec& spec, const std::filesystem::path& root);

}  // namespace maiq

#endif  // MAIQ_DATASET_HPP_
