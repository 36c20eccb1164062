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

// PNG codec built on libpng. Label maps are single-channel 16-bit; patch
// and source images are 8-bit RGB.

#ifndef NUCLEI_CURATION_PNG_IO_H_
#define NUCLEI_CURATION_PNG_IO_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nuclei_curation/mask.h"

namespace nuclei_curation {

// Decodes keeping the stored bit depth (sub-byte depths widen to 8) and the
// stored channel count. Palette images expand to RGB.
Raster DecodePng(const std::vector<std::uint8_t>& bytes);
Raster ReadPng(const std::filesystem::path& path);

// Writes 8- or 16-bit rasters with 1 to 4 channels.
std::vector<std::uint8_t> EncodePng(const Raster& raster);
void WritePng(const std::filesystem::path& path, const Raster& raster);

struct ImageSize {
  int width = 0;
  int height = 0;
};

// Reads only the header.
ImageSize ReadPngSize(const std::filesystem::path& path);

InstanceMask ReadLabelMapPng(const std::filesystem::path& path);
std::vector<std::uint8_t> EncodeLabelMapPng(const InstanceMask& mask);
void WriteLabelMapPng(const std::filesystem::path& path,
                      const InstanceMask& mask);

// 8-bit RGB raster, interleaved.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  std::uint8_t r(int x, int y) const { return rgb[Offset(x, y)]; }
  std::uint8_t g(int x, int y) const { return rgb[Offset(x, y) + 1]; }
  std::uint8_t b(int x, int y) const { return rgb[Offset(x, y) + 2]; }

  std::size_t Offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * width + x) * 3;
  }
};

// Converts any decoded raster to 8-bit RGB (16-bit samples keep their high
// byte, gray replicates, alpha is dropped).
RgbImage ToRgb(const Raster& raster);
Raster FromRgb(const RgbImage& image);

RgbImage ReadRgbPng(const std::filesystem::path& path);
void WriteRgbPng(const std::filesystem::path& path, const RgbImage& image);

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path,
                    const std::vector<std::uint8_t>& bytes);

}  // namespace nuclei_curation

#endif  // NUCLEI_CURATION_PNG_IO_H_
