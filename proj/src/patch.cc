/*
 * Copyright 2026 The Nuclei Curation Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "nuclei_curation/patch.h"

#include <algorithm>
#include <cstdio>
#include <set>
#include <utility>

#include "nuclei_curation/error.h"
#include "nuclei_curation/random.h"

namespace nuclei_curation {

namespace {

constexpr char kModule[] = "patch";

[[noreturn]] void Fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, kModule, message);
}

}  // namespace

std::string MakePatchId(const std::string& source_image, int x, int y,
                        int width, int height) {
  const std::string key = source_image + '\0' + std::to_string(x) + ',' +
                          std::to_string(y) + ',' + std::to_string(width) +
                          ',' + std::to_string(height);
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(Fnv1a64(key)));
  return hex;
}

std::vector<PatchRecord> TileImage(const std::string& source_image,
                                   ImageSize image, const TileConfig& config,
                                   const PatchTags& tags) {
  if (config.size < 1 || config.count < 0) {
    Fail(ErrorKind::kInvalidArgument, "tile size must be positive and count non-negative");
  }
  if (image.width < config.size || image.height < config.size) {
    Fail(ErrorKind::kInvalidArgument,
         source_image + " is " + std::to_string(image.width) + "x" +
             std::to_string(image.height) + ", smaller than the " +
             std::to_string(config.size) + "px patch size");
  }
  Rng rng(DeriveSeed(config.seed, source_image));
  const auto x_choices = static_cast<std::uint64_t>(image.width - config.size) + 1;
  const auto y_choices = static_cast<std::uint64_t>(image.height - config.size) + 1;
  std::vector<PatchRecord> records;
  std::set<std::pair<int, int>> seen;
  for (int i = 0; i < config.count; ++i) {
    const int x = static_cast<int>(rng.Below(x_choices));
    const int y = static_cast<int>(rng.Below(y_choices));
    if (!seen.insert({x, y}).second) continue;
    PatchRecord r;
    r.source_image = source_image;
    r.x = x;
    r.y = y;
    r.width = config.size;
    r.height = config.size;
    r.patch_id = MakePatchId(source_image, x, y, r.width, r.height);
    r.stain = tags.stain;
    r.species = tags.species;
    r.dataset = tags.dataset;
    records.push_back(std::move(r));
  }
  return records;
}

RgbImage CropPatch(const RgbImage& image, const PatchRecord& record) {
  if (record.x < 0 || record.y < 0 || record.width < 1 || record.height < 1 ||
      record.x + record.width > image.width ||
      record.y + record.height > image.height) {
    Fail(ErrorKind::kInvalidArgument,
         "patch " + record.patch_id + " does not fit inside its source image");
  }
  RgbImage patch;
  patch.width = record.width;
  patch.height = record.height;
  patch.rgb.resize(static_cast<std::size_t>(record.width) * record.height * 3);
  const std::size_t row_bytes = static_cast<std::size_t>(record.width) * 3;
  for (int y = 0; y < record.height; ++y) {
    const auto begin = image.rgb.begin() +
                       static_cast<std::ptrdiff_t>(
                           image.Offset(record.x, record.y + y));
    std::copy(begin, begin + static_cast<std::ptrdiff_t>(row_bytes),
              patch.rgb.begin() + static_cast<std::ptrdiff_t>(row_bytes * y));
  }
  return patch;
}

void QcConfig::Check() const {
  if (!(min_tissue_fraction >= 0.0 && min_tissue_fraction <= 1.0)) {
    Fail(ErrorKind::kInvalidArgument, "min_tissue_fraction must lie in [0, 1]");
  }
  if (tissue_saturation_threshold < 0 || tissue_saturation_threshold > 255 ||
      max_mean_brightness < 0 || max_mean_brightness > 255) {
    Fail(ErrorKind::kInvalidArgument, "8-bit QC thresholds must lie in [0, 255]");
  }
}

QcVerdict QcFilter(const RgbImage& patch, const QcConfig& config) {
  config.Check();
  const std::size_t n = static_cast<std::size_t>(patch.width) * patch.height;
  if (n == 0 || patch.rgb.size() != n * 3) {
    Fail(ErrorKind::kInvalidArgument, "QC needs a non-empty 8-bit RGB patch");
  }
  std::uint64_t tissue = 0;
  std::uint64_t brightness_sum = 0;  // Sum of R+G+B.
  for (std::size_t i = 0; i < n; ++i) {
    const int r = patch.rgb[3 * i];
    const int g = patch.rgb[3 * i + 1];
    const int b = patch.rgb[3 * i + 2];
    const int hi = std::max({r, g, b});
    const int lo = std::min({r, g, b});
    // HSV saturation scaled to [0, 255]: 255 * (max - min) / max, compared
    // without division.
    if (hi > 0 && 255 * (hi - lo) > config.tissue_saturation_threshold * hi) {
      ++tissue;
    }
    brightness_sum += static_cast<std::uint64_t>(r + g + b);
  }
  QcVerdict verdict;
  verdict.tissue_fraction = static_cast<double>(tissue) / static_cast<double>(n);
  verdict.mean_brightness =
      static_cast<double>(brightness_sum) / (3.0 * static_cast<double>(n));
  if (verdict.tissue_fraction < config.min_tissue_fraction) {
    verdict.keep = false;
    verdict.reason = "background";
  } else if (verdict.mean_brightness > config.max_mean_brightness) {
    verdict.keep = false;
    verdict.reason = "overexposed";
  }
  return verdict;
}

ImageProbe PngHeaderProbe() {
  return [](const std::string& path) -> std::optional<ImageSize> {
    try {
      return ReadPngSize(path);
    } catch (const Error&) {
      return std::nullopt;
    }
  };
}

PatchManifest IngestDataset(const std::vector<std::vector<PatchRecord>>& sources,
                            const ImageProbe& probe) {
  PatchManifest manifest;
  std::set<std::string> ids;
  std::map<std::string, std::optional<ImageSize>> sizes;
  for (const auto& source : sources) {
    for (const PatchRecord& r : source) {
      auto [it, inserted] = sizes.try_emplace(r.source_image);
      if (inserted) it->second = probe(r.source_image);
      if (!it->second) {
        Fail(ErrorKind::kIo, "cannot read source image " + r.source_image);
      }
      const ImageSize size = *it->second;
      if (r.x < 0 || r.y < 0 || r.width < 1 || r.height < 1 ||
          r.x + r.width > size.width || r.y + r.height > size.height) {
        Fail(ErrorKind::kInvalidArgument,
             "patch " + r.patch_id + " lies outside " + r.source_image);
      }
      if (r.patch_id != MakePatchId(r.source_image, r.x, r.y, r.width, r.height)) {
        Fail(ErrorKind::kInvalidArgument,
             "patch " + r.patch_id + " does not match its source and coordinates");
      }
      if (!ids.insert(r.patch_id).second) {
        Fail(ErrorKind::kDuplicate, "duplicate patch id " + r.patch_id);
      }
      ++manifest.by_stain[r.stain];
      ++manifest.by_species[r.species];
      ++manifest.by_dataset[r.dataset];
      manifest.records.push_back(r);
    }
  }
  return manifest;
}

}  // namespace nuclei_curation
