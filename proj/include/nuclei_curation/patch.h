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

// Random fixed-size patch extraction from exported slide regions, a simple
// tissue/exposure quality gate, and the manifest recording where each patch
// came from.

#ifndef NUCLEI_CURATION_PATCH_H_
#define NUCLEI_CURATION_PATCH_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nuclei_curation/png_io.h"

namespace nuclei_curation {

struct PatchTags {
  std::string stain;    // e.g. PAS, H&E, PASM.
  std::string species;
  std::string dataset;
};

struct PatchRecord {
  std::string patch_id;
  std::string source_image;
  int x = 0;
  int y = 0;
  int width = 512;
  int height = 512;
  std::string stain;
  std::string species;
  std::string dataset;

  friend bool operator==(const PatchRecord&, const PatchRecord&) = default;
};

// 16 hex digits derived from (source_image, x, y, width, height).
std::string MakePatchId(const std::string& source_image, int x, int y,
                        int width, int height);

struct TileConfig {
  int count = 4;
  int size = 512;
  std::uint64_t seed = 0;
};

// `count` uniformly random in-bounds squares. The stream is seeded from
// (config.seed, source_image), so images can be tiled in any order or in
// parallel. Repeated draws of the same rectangle collapse into one record.
std::vector<PatchRecord> TileImage(const std::string& source_image,
                                   ImageSize image, const TileConfig& config,
                                   const PatchTags& tags = {});

RgbImage CropPatch(const RgbImage& image, const PatchRecord& record);

struct QcConfig {
  double min_tissue_fraction = 0.1;
  int tissue_saturation_threshold = 20;  // 8-bit HSV saturation.
  int max_mean_brightness = 245;         // 8-bit.

  void Check() const;
};

struct QcVerdict {
  bool keep = true;
  std::string reason;  // "background" or "overexposed" when discarded.
  double tissue_fraction = 0.0;
  double mean_brightness = 0.0;
};

// Tissue = pixels whose HSV saturation exceeds the threshold. Patches with
// too little tissue are "background"; otherwise patches brighter on average
// than the cap are "overexposed".
QcVerdict QcFilter(const RgbImage& patch, const QcConfig& config = {});

struct PatchManifest {
  std::vector<PatchRecord> records;
  std::map<std::string, std::uint64_t> by_stain;
  std::map<std::string, std::uint64_t> by_species;
  std::map<std::string, std::uint64_t> by_dataset;

  std::uint64_t total() const { return records.size(); }
};

// Returns the size of an image, or nullopt when it cannot be read.
using ImageProbe = std::function<std::optional<ImageSize>(const std::string&)>;

// Reads PNG headers from disk.
ImageProbe PngHeaderProbe();

// Merges source manifests. Each record must reference a readable image,
// lie inside it and carry the id MakePatchId gives; ids must be unique.
PatchManifest IngestDataset(const std::vector<std::vector<PatchRecord>>& sources,
                            const ImageProbe& probe);

}  // namespace nuclei_curation

#endif  // NUCLEI_CURATION_PATCH_H_
