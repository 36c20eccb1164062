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

#include "nuclei_curation/mask.h"

#include <algorithm>
#include <array>
#include <map>
#include <numeric>

#include "nuclei_curation/error.h"

namespace nuclei_curation {

namespace {

constexpr char kModule[] = "mask";

[[noreturn]] void Fail(const std::string& message) {
  throw Error(ErrorKind::kInvalidArgument, kModule, message);
}

// Union-find over pixel indices with path halving.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t Find(std::size_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }

  void Union(std::size_t a, std::size_t b) {
    a = Find(a);
    b = Find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

// Number of 4-connected components per instance id (index = id).
std::vector<int> ComponentCounts(const InstanceMask& mask) {
  std::vector<int> counts(65536, 0);
  DisjointSets sets(mask.pixel_count());
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      const InstanceId id = mask.at(x, y);
      if (id == kBackground) continue;
      const std::size_t i = static_cast<std::size_t>(y) * mask.width + x;
      if (x > 0 && mask.at(x - 1, y) == id) sets.Union(i, i - 1);
      if (y > 0 && mask.at(x, y - 1) == id) sets.Union(i, i - mask.width);
    }
  }
  for (std::size_t i = 0; i < mask.labels.size(); ++i) {
    if (mask.labels[i] != kBackground && sets.Find(i) == i) {
      ++counts[mask.labels[i]];
    }
  }
  return counts;
}

}  // namespace

std::vector<InstanceId> InstanceIds(const InstanceMask& mask) {
  // Small masks: sorting beats sweeping the full id range.
  if (mask.labels.size() < 4096) {
    std::vector<InstanceId> ids(mask.labels.begin(), mask.labels.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (!ids.empty() && ids.front() == kBackground) ids.erase(ids.begin());
    return ids;
  }
  std::vector<bool> seen(65536, false);
  for (InstanceId id : mask.labels) seen[id] = true;
  std::vector<InstanceId> ids;
  for (std::size_t id = 1; id < seen.size(); ++id) {
    if (seen[id]) ids.push_back(static_cast<InstanceId>(id));
  }
  return ids;
}

InstanceMask DecodeLabelMap(const Raster& raster, int width, int height) {
  if (raster.bit_depth != 16) {
    Fail("label map must be 16-bit, got " + std::to_string(raster.bit_depth) +
         "-bit");
  }
  if (raster.channels != 1) {
    Fail("label map must be single-channel, got " +
         std::to_string(raster.channels) + " channels");
  }
  if (raster.width != width || raster.height != height) {
    Fail("label map is " + std::to_string(raster.width) + "x" +
         std::to_string(raster.height) + ", expected " +
         std::to_string(width) + "x" + std::to_string(height));
  }
  if (width < 1 || height < 1) Fail("label map has no pixels");
  if (raster.samples.size() != static_cast<std::size_t>(width) * height) {
    Fail("label map sample count does not match its dimensions");
  }
  return InstanceMask(width, height,
                      std::vector<InstanceId>(raster.samples.begin(),
                                              raster.samples.end()));
}

RleDocument EncodeRle(const InstanceMask& mask) {
  if (mask.labels.size() != mask.pixel_count()) {
    Fail("cannot encode a mask whose label count differs from width*height");
  }
  std::map<InstanceId, std::vector<RleRun>> runs;
  const std::size_t n = mask.labels.size();
  std::size_t i = 0;
  while (i < n) {
    const InstanceId id = mask.labels[i];
    std::size_t j = i + 1;
    while (j < n && mask.labels[j] == id) ++j;
    if (id != kBackground) {
      runs[id].push_back({static_cast<std::uint32_t>(i),
                          static_cast<std::uint32_t>(j - i)});
    }
    i = j;
  }
  RleDocument doc;
  doc.width = mask.width;
  doc.height = mask.height;
  doc.instances.reserve(runs.size());
  for (auto& [id, r] : runs) doc.instances.push_back({id, std::move(r)});
  return doc;
}

InstanceMask DecodeRle(const RleDocument& doc) {
  if (doc.width < 1 || doc.height < 1) {
    Fail("RLE document must have positive width and height");
  }
  InstanceMask mask(doc.width, doc.height);
  const std::uint64_t total = mask.pixel_count();
  std::vector<bool> seen_ids(65536, false);
  for (const RleInstance& instance : doc.instances) {
    const std::string tag = "instance " + std::to_string(instance.id);
    if (instance.id == kBackground) Fail("instance id 0 is reserved");
    if (seen_ids[instance.id]) Fail(tag + " appears more than once");
    seen_ids[instance.id] = true;
    if (instance.runs.empty()) Fail(tag + " has no runs");
    std::uint64_t previous_end = 0;
    for (std::size_t k = 0; k < instance.runs.size(); ++k) {
      const RleRun& run = instance.runs[k];
      if (run.length == 0) Fail(tag + " has a zero-length run");
      const std::uint64_t end =
          static_cast<std::uint64_t>(run.start) + run.length;
      if (end > total) Fail(tag + " has a run out of bounds");
      if (k > 0 && run.start < previous_end) {
        Fail(tag + " has unsorted or overlapping runs");
      }
      previous_end = end;
      for (std::uint64_t p = run.start; p < end; ++p) {
        if (mask.labels[p] != kBackground) {
          Fail(tag + " overlaps instance " + std::to_string(mask.labels[p]) +
               " at pixel " + std::to_string(p));
        }
        mask.labels[p] = instance.id;
      }
    }
  }
  return mask;
}

std::vector<Finding> Validate(const InstanceMask& mask) {
  std::vector<Finding> findings;
  if (mask.width < 1 || mask.height < 1) {
    findings.push_back({Severity::kError, "bad_dimensions", std::nullopt,
                        "width and height must be at least 1"});
    return findings;
  }
  if (mask.labels.size() != mask.pixel_count()) {
    findings.push_back(
        {Severity::kError, "size_mismatch", std::nullopt,
         "label count " + std::to_string(mask.labels.size()) +
             " differs from width*height " +
             std::to_string(mask.pixel_count())});
    return findings;
  }
  const std::vector<int> components = ComponentCounts(mask);
  for (std::size_t id = 1; id < components.size(); ++id) {
    if (components[id] > 1) {
      findings.push_back(
          {Severity::kWarning, "non_contiguous", static_cast<InstanceId>(id),
           "instance " + std::to_string(id) + " has " +
               std::to_string(components[id]) + " disconnected components"});
    }
  }
  return findings;
}

bool HasErrors(const std::vector<Finding>& findings) {
  return std::any_of(findings.begin(), findings.end(), [](const Finding& f) {
    return f.severity == Severity::kError;
  });
}

std::vector<InstanceStats> ComputeInstanceStats(const InstanceMask& mask) {
  struct Accumulator {
    std::uint64_t area = 0;
    double sum_x = 0.0;
    double sum_y = 0.0;
    int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  };
  if (mask.labels.size() != mask.pixel_count()) {
    Fail("instance statistics need a mask with width*height labels");
  }
  std::map<InstanceId, Accumulator> acc;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      const InstanceId id = mask.at(x, y);
      if (id == kBackground) continue;
      Accumulator& a = acc[id];
      if (a.area == 0) {
        a.min_x = a.max_x = x;
        a.min_y = a.max_y = y;
      } else {
        a.min_x = std::min(a.min_x, x);
        a.max_x = std::max(a.max_x, x);
        a.min_y = std::min(a.min_y, y);
        a.max_y = std::max(a.max_y, y);
      }
      ++a.area;
      a.sum_x += x;
      a.sum_y += y;
    }
  }
  const std::vector<int> components = ComponentCounts(mask);
  std::vector<InstanceStats> stats;
  stats.reserve(acc.size());
  for (const auto& [id, a] : acc) {
    InstanceStats s;
    s.id = id;
    s.area = a.area;
    s.min_x = a.min_x;
    s.min_y = a.min_y;
    s.max_x = a.max_x;
    s.max_y = a.max_y;
    s.centroid_x = a.sum_x / static_cast<double>(a.area);
    s.centroid_y = a.sum_y / static_cast<double>(a.area);
    s.component_count = components[id];
    stats.push_back(s);
  }
  return stats;
}

}  // namespace nuclei_curation
