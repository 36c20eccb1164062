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

#include "nuclei_curation/matching.h"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "nuclei_curation/error.h"
#include "nuclei_curation/parallel.h"

namespace nuclei_curation {

namespace {

constexpr char kModule[] = "matching";

double Ratio(std::uint64_t num, std::uint64_t den) {
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

IouTable PairwiseIou(const InstanceMask& gt, const InstanceMask& pred) {
  if (gt.width != pred.width || gt.height != pred.height) {
    throw Error(ErrorKind::kInvalidArgument, kModule,
                "ground truth is " + std::to_string(gt.width) + "x" +
                    std::to_string(gt.height) + " but prediction is " +
                    std::to_string(pred.width) + "x" +
                    std::to_string(pred.height));
  }
  if (gt.labels.size() != gt.pixel_count() ||
      pred.labels.size() != pred.pixel_count()) {
    throw Error(ErrorKind::kInvalidArgument, kModule,
                "mask label count differs from width*height");
  }
  IouTable table;
  // Key packs (gt_id, pred_id) into 32 bits.
  std::unordered_map<std::uint32_t, std::uint64_t> intersections;
  for (std::size_t i = 0; i < gt.labels.size(); ++i) {
    const InstanceId g = gt.labels[i];
    const InstanceId p = pred.labels[i];
    if (g != kBackground) ++table.gt_areas[g];
    if (p != kBackground) ++table.pred_areas[p];
    if (g != kBackground && p != kBackground) {
      ++intersections[(static_cast<std::uint32_t>(g) << 16) | p];
    }
  }
  table.entries.reserve(intersections.size());
  for (const auto& [key, inter] : intersections) {
    IouEntry e;
    e.gt_id = static_cast<InstanceId>(key >> 16);
    e.pred_id = static_cast<InstanceId>(key & 0xffff);
    e.intersection = inter;
    const std::uint64_t uni =
        table.gt_areas[e.gt_id] + table.pred_areas[e.pred_id] - inter;
    e.iou = Ratio(inter, uni);
    table.entries.push_back(e);
  }
  std::sort(table.entries.begin(), table.entries.end(),
            [](const IouEntry& a, const IouEntry& b) {
              return a.gt_id != b.gt_id ? a.gt_id < b.gt_id
                                        : a.pred_id < b.pred_id;
            });
  return table;
}

MatchResult MatchInstances(const IouTable& table, double threshold) {
  if (!(threshold >= 0.5)) {
    throw Error(ErrorKind::kInvalidArgument, kModule,
                "IoU threshold must be at least 0.5 for a unique matching");
  }
  MatchResult result;
  result.threshold = threshold;
  std::unordered_set<InstanceId> matched_gt;
  std::unordered_set<InstanceId> matched_pred;
  for (const IouEntry& e : table.entries) {
    if (e.iou > threshold) {
      result.tp_pairs.push_back({e.gt_id, e.pred_id, e.iou});
      matched_gt.insert(e.gt_id);
      matched_pred.insert(e.pred_id);
    }
  }
  for (const auto& [id, area] : table.pred_areas) {
    if (!matched_pred.contains(id)) result.fp_ids.push_back(id);
  }
  for (const auto& [id, area] : table.gt_areas) {
    if (!matched_gt.contains(id)) result.fn_ids.push_back(id);
  }
  return result;
}

Metrics MetricsFromCounts(std::uint64_t tp, std::uint64_t fp,
                          std::uint64_t fn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.precision = tp + fp > 0 ? Ratio(tp, tp + fp) : (fn == 0 ? 1.0 : 0.0);
  m.recall = tp + fn > 0 ? Ratio(tp, tp + fn) : (fp == 0 ? 1.0 : 0.0);
  const std::uint64_t f1_den = 2 * tp + fp + fn;
  m.f1 = f1_den > 0 ? Ratio(2 * tp, f1_den) : 1.0;
  return m;
}

Metrics ComputeMetrics(const MatchResult& match) {
  return MetricsFromCounts(match.tp(), match.fp(), match.fn());
}

std::string ToString(AggregationMode mode) {
  return mode == AggregationMode::kMicro ? "micro" : "macro";
}

AggregationMode ParseAggregationMode(const std::string& text) {
  if (text == "micro") return AggregationMode::kMicro;
  if (text == "macro") return AggregationMode::kMacro;
  throw Error(ErrorKind::kInvalidArgument, kModule,
              "aggregation mode must be micro or macro, got '" + text + "'");
}

Metrics Aggregate(const std::vector<MatchResult>& per_patch,
                  AggregationMode mode) {
  if (per_patch.empty()) {
    throw Error(ErrorKind::kInvalidArgument, kModule,
                "cannot aggregate an empty list of patches");
  }
  std::uint64_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  for (const MatchResult& match : per_patch) {
    tp += match.tp();
    fp += match.fp();
    fn += match.fn();
    const Metrics m = ComputeMetrics(match);
    precision += m.precision;
    recall += m.recall;
    f1 += m.f1;
  }
  Metrics pooled = MetricsFromCounts(tp, fp, fn);
  if (mode == AggregationMode::kMacro) {
    const double n = static_cast<double>(per_patch.size());
    pooled.precision = precision / n;
    pooled.recall = recall / n;
    pooled.f1 = f1 / n;
  }
  return pooled;
}

std::vector<PatchEvaluation> EvaluatePatches(
    const std::vector<PatchPair>& patches, double threshold,
    unsigned threads) {
  std::vector<PatchEvaluation> out(patches.size());
  ParallelFor(patches.size(), threads, [&](std::size_t i) {
    out[i].patch_id = patches[i].patch_id;
    out[i].match =
        MatchInstances(PairwiseIou(patches[i].gt, patches[i].pred), threshold);
  });
  return out;
}

}  // namespace nuclei_curation
