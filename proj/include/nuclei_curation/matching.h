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

// Instance matching between a ground-truth and a predicted mask, and the
// detection metrics derived from it (precision, recall, F1).

#ifndef NUCLEI_CURATION_MATCHING_H_
#define NUCLEI_CURATION_MATCHING_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nuclei_curation/mask.h"

namespace nuclei_curation {

inline constexpr double kDefaultIouThreshold = 0.5;

struct IouEntry {
  InstanceId gt_id = 0;
  InstanceId pred_id = 0;
  std::uint64_t intersection = 0;
  double iou = 0.0;
};

// Sparse: only pairs with a nonzero intersection are listed, sorted by
// (gt_id, pred_id). The area maps list every instance of either mask.
struct IouTable {
  std::vector<IouEntry> entries;
  std::map<InstanceId, std::uint64_t> gt_areas;
  std::map<InstanceId, std::uint64_t> pred_areas;
};

IouTable PairwiseIou(const InstanceMask& gt, const InstanceMask& pred);

struct MatchedPair {
  InstanceId gt_id = 0;
  InstanceId pred_id = 0;
  double iou = 0.0;
};

struct MatchResult {
  std::vector<MatchedPair> tp_pairs;
  std::vector<InstanceId> fp_ids;  // Unmatched predictions, ascending.
  std::vector<InstanceId> fn_ids;  // Unmatched ground truth, ascending.
  double threshold = kDefaultIouThreshold;

  std::uint64_t tp() const { return tp_pairs.size(); }
  std::uint64_t fp() const { return fp_ids.size(); }
  std::uint64_t fn() const { return fn_ids.size(); }
};

// A pair is a true positive iff its IoU is strictly above `threshold`. For
// thresholds of at least 0.5 an instance can exceed it with at most one
// partner, so the pairs form a one-to-one matching without tie-breaking.
// Lower thresholds are rejected.
MatchResult MatchInstances(const IouTable& table,
                           double threshold = kDefaultIouThreshold);

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
};

// Empty denominators: precision is 1 when nothing was predicted and nothing
// was missed, else 0; recall mirrors it; f1 is 1 only when all counts are 0.
Metrics MetricsFromCounts(std::uint64_t tp, std::uint64_t fp,
                          std::uint64_t fn);
Metrics ComputeMetrics(const MatchResult& match);

enum class AggregationMode { kMicro, kMacro };

std::string ToString(AggregationMode mode);
AggregationMode ParseAggregationMode(const std::string& text);

// Micro pools counts then applies the formulas; macro averages per-patch
// metrics. Both report pooled counts.
Metrics Aggregate(const std::vector<MatchResult>& per_patch,
                  AggregationMode mode = AggregationMode::kMicro);

struct PatchPair {
  std::string patch_id;
  InstanceMask gt;
  InstanceMask pred;
};

struct PatchEvaluation {
  std::string patch_id;
  MatchResult match;
};

// Matches every patch, fanning out over `threads` workers (0 = hardware
// concurrency). Output order equals input order regardless of threads.
std::vector<PatchEvaluation> EvaluatePatches(
    const std::vector<PatchPair>& patches,
    double threshold = kDefaultIouThreshold, unsigned threads = 0);

}  // namespace nuclei_curation

#endif  // NUCLEI_CURATION_MATCHING_H_
