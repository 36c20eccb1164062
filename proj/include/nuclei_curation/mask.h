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

// Instance masks and their two serializations: a 16-bit label map raster
// (value = instance id, 0 = background) and a per-instance run-length
// document.

#ifndef NUCLEI_CURATION_MASK_H_
#define NUCLEI_CURATION_MASK_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nuclei_curation {

using InstanceId = std::uint16_t;

inline constexpr InstanceId kBackground = 0;

// Row-major label raster. Construction does not validate; use Validate() or
// the decoders, which reject malformed input.
struct InstanceMask {
  int width = 0;
  int height = 0;
  std::vector<InstanceId> labels;

  InstanceMask() = default;
  InstanceMask(int w, int h)
      : width(w),
        height(h),
        labels(static_cast<std::size_t>(w > 0 ? w : 0) *
                   static_cast<std::size_t>(h > 0 ? h : 0),
               kBackground) {}
  InstanceMask(int w, int h, std::vector<InstanceId> l)
      : width(w), height(h), labels(std::move(l)) {}

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  InstanceId at(int x, int y) const {
    return labels[static_cast<std::size_t>(y) * width + x];
  }
  InstanceId& at(int x, int y) {
    return labels[static_cast<std::size_t>(y) * width + x];
  }

  friend bool operator==(const InstanceMask&, const InstanceMask&) = default;
};

// Sorted distinct nonzero ids.
std::vector<InstanceId> InstanceIds(const InstanceMask& mask);

// A decoded PNG (or any raster) before it is interpreted as a mask.
// Samples are stored widened to 16 bits, interleaved by channel.
struct Raster {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  int channels = 0;
  std::vector<std::uint16_t> samples;
};

// Interprets a single-channel 16-bit raster as a label map. Throws
// Error(kInvalidArgument) on dimension mismatch or any other pixel format.
InstanceMask DecodeLabelMap(const Raster& raster, int width, int height);

struct RleRun {
  std::uint32_t start = 0;   // Row-major pixel index.
  std::uint32_t length = 0;  // Pixel count.
  friend bool operator==(const RleRun&, const RleRun&) = default;
};

struct RleInstance {
  InstanceId id = 0;
  std::vector<RleRun> runs;  // Sorted by start, non-overlapping.
  friend bool operator==(const RleInstance&, const RleInstance&) = default;
};

// Runs cover only the owning instance's pixels; background is implicit.
struct RleDocument {
  int width = 0;
  int height = 0;
  std::vector<RleInstance> instances;  // Sorted by id.
  friend bool operator==(const RleDocument&, const RleDocument&) = default;
};

// Requires a mask with labels.size() == width * height.
RleDocument EncodeRle(const InstanceMask& mask);

// Rejects zero-length, unsorted, overlapping or out-of-bounds runs,
// id 0, repeated ids and instances without runs.
InstanceMask DecodeRle(const RleDocument& doc);

enum class Severity { kWarning, kError };

struct Finding {
  Severity severity = Severity::kError;
  std::string code;  // Stable machine-readable tag, e.g. "non_contiguous".
  std::optional<InstanceId> id;
  std::string message;
};

// Returns no findings iff the mask is well formed. Instances split into
// several 4-connected components yield one warning each.
std::vector<Finding> Validate(const InstanceMask& mask);

bool HasErrors(const std::vector<Finding>& findings);

struct InstanceStats {
  InstanceId id = 0;
  std::uint64_t area = 0;
  int min_x = 0;
  int min_y = 0;
  int max_x = 0;  // Inclusive.
  int max_y = 0;  // Inclusive.
  double centroid_x = 0.0;
  double centroid_y = 0.0;
  int component_count = 0;  // 4-connected.
};

// One entry per instance, sorted by id.
std::vector<InstanceStats> ComputeInstanceStats(const InstanceMask& mask);

}  // namespace nuclei_curation

#endif  // NUCLEI_CURATION_MASK_H_
