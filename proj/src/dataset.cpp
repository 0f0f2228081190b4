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

#include "maiq/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace maiq {

namespace fs = std::filesystem;

const std::array<std::string, kCategoryCount>& camsdd_category_names() {
  static const std::array<std::string, kCategoryCount> names = {
      "Portrait",      "Group Portrait", "Kids",          "Dog",        "Cat",
      "Macro",         "Gourmet",        "Beach",         "Mountains",  "Waterfall",
      "Snow",          "Landscape",      "Underwater",    "Architecture",
      "Sunrise & Sunset", "Blue Sky",    "Overcast",      "Greenery",   "Autumn Plants",
      "Flowers",       "Night Shot",     "Stage",         "Fireworks",  "Candlelight",
      "Neon Lights",   "Indoor",         "Backlight",     "Document",   "QR Code",
      "Monitor Screen",
  };
  return names;
}

namespace {

// Lowercase, "&" <-> "and", runs of whitespace collapsed.
std::string normalize_name(const std::string& s) {
  std::string expanded;
  for (char c : s) {
    if (c == '&') {
      expanded += " and ";
    } else {
      expanded += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  std::string out;
  bool in_space = true;
  for (char c : expanded) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = true;
    } else {
      if (in_space && !out.empty()) out += ' ';
      in_space = false;
      out += c;
    }
  }
  return out;
}

}  // namespace

CategoryRegistry CategoryRegistry::camsdd() {
  const auto& names = camsdd_category_names();
  return from_names(std::vector<std::string>(names.begin(), names.end()));
}

CategoryRegistry CategoryRegistry::from_names(std::vector<std::string> names) {
  if (names.size() != kCategoryCount) {
    throw Error(Err::InvalidArgument, "category registry needs exactly 30 names");
  }
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (!seen.insert(normalize_name(n)).second) {
      throw Error(Err::InvalidArgument, "duplicate category name: " + n);
    }
  }
  CategoryRegistry r;
  r.names_ = std::move(names);
  return r;
}

CategoryRegistry CategoryRegistry::from_labels_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Err::IoFailure, "cannot open " + path.string());
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (!line.empty()) names.push_back(line);
  }
  return from_names(std::move(names));
}

int CategoryRegistry::match_folder(const std::string& folder) const {
  const std::string key = normalize_name(folder);
  for (size_t i = 0; i < names_.size(); ++i) {
    if (normalize_name(names_[i]) == key) return static_cast<int>(i);
  }
  return -1;
}

LabeledImage Corpus::load(size_t i) const {
  const Entry& e = entries.at(i);
  return {decode_image(e.path), e.label, e.path.string()};
}

namespace {

bool has_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".ppm" || ext == ".png";
}

}  // namespace

Corpus scan_corpus(const fs::path& root, const CategoryRegistry& registry) {
  if (!fs::is_directory(root)) throw Error(Err::EmptyCorpus, root.string() + " is not a directory");

  std::vector<std::string> folders;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) folders.push_back(entry.path().filename().string());
  }
  std::sort(folders.begin(), folders.end());

  Corpus corpus;
  corpus.registry = registry;
  for (const std::string& folder : folders) {
    const int label = registry.match_folder(folder);
    if (label < 0) {
      throw Error(Err::UnknownCategoryFolder, folder + " matches no category");
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(root / folder)) {
      if (entry.is_regular_file() && has_image_extension(entry.path())) {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      corpus.entries.push_back({f, label});
      ++corpus.per_class_count[static_cast<size_t>(label)];
    }
  }
  if (corpus.entries.empty()) throw Error(Err::EmptyCorpus, "no images under " + root.string());
  return corpus;
}

Corpus scan_corpus(const fs::path& root) {
  const fs::path labels = root / "labels.txt";
  if (fs::exists(labels)) return scan_corpus(root, CategoryRegistry::from_labels_file(labels));
  return scan_corpus(root, CategoryRegistry::camsdd());
}

std::array<std::array<uint8_t, 3>, kCategoryCount> synthetic_signatures() {
  static constexpr uint8_t levels[4] = {32, 96, 160, 224};
  std::array<std::array<uint8_t, 3>, kCategoryCount> sigs{};
  for (int k = 0; k < kCategoryCount; ++k) {
    sigs[static_cast<size_t>(k)] = {levels[(k / 16) % 4], levels[(k / 4) % 4], levels[k % 4]};
  }
  return sigs;
}

void generate_synthetic(const SyntheticSpec& spec, const fs::path& root) {
  if (spec.images_per_class < 1) {
    throw Error(Err::InvalidArgument, "images_per_class must be >= 1");
  }
  const int noise = std::clamp(spec.noise_amplitude, 0, 31);
  const auto sigs = synthetic_signatures();
  const auto& names = camsdd_category_names();

  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw Error(Err::IoFailure, "cannot create " + root.string());

  const int64_t pixels = kImageWidth * kImageHeight;
  std::vector<uint8_t> data(static_cast<size_t>(pixels) * 3);
  char filename[32];
  for (int k = 0; k < kCategoryCount; ++k) {
    const fs::path dir = root / names[static_cast<size_t>(k)];
    fs::create_directories(dir, ec);
    if (ec) throw Error(Err::IoFailure, "cannot create " + dir.string());
    for (int j = 0; j < spec.images_per_class; ++j) {
      // One deterministic stream per (seed, class, image).
      SplitMix64 rng(spec.seed * 0x9E3779B97F4A7C15ULL +
                     static_cast<uint64_t>(k) * 1000003ULL + static_cast<uint64_t>(j));
      const auto& sig = sigs[static_cast<size_t>(k)];
      if (noise == 0) {
        for (int64_t p = 0; p < pixels; ++p) {
          data[static_cast<size_t>(p * 3 + 0)] = sig[0];
          data[static_cast<size_t>(p * 3 + 1)] = sig[1];
          data[static_cast<size_t>(p * 3 + 2)] = sig[2];
        }
      } else {
        const uint64_t span = static_cast<uint64_t>(2 * noise + 1);
        for (int64_t p = 0; p < pixels * 3; ++p) {
          const int delta = static_cast<int>(rng.next_below(span)) - noise;
          const int v = std::clamp(static_cast<int>(sig[static_cast<size_t>(p % 3)]) + delta, 0,
                                   255);
          data[static_cast<size_t>(p)] = static_cast<uint8_t>(v);
        }
      }
      std::snprintf(filename, sizeof(filename), "img_%04d.ppm", j);
      const fs::path file = dir / filename;
      std::ofstream out(file, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(Err::IoFailure, "cannot open " + file.string());
      out << "P6\n" << kImageWidth << " " << kImageHeight << "\n255\n";
      out.write(reinterpret_cast<const char*>(data.data()),
                static_cast<std::streamsize>(data.size()));
      if (!out) throw Error(Err::IoFailure, "short write to " + file.string());
    }
  }
}

}  // namespace maiq
