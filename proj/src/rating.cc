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

#include "nuclei_curation/rating.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "nuclei_curation/error.h"
#include "nuclei_curation/matching.h"

namespace nuclei_curation {

namespace {

constexpr char kModule[] = "rating";

[[noreturn]] void Fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, kModule, message);
}

void Classify(Rating a, Rating b, Rating c, AgreementCounts& counts) {
  if (a == b && b == c) {
    ++counts.all_agree;
  } else if (a == b || b == c || a == c) {
    ++counts.two_agree;
  } else {
    ++counts.none_agree;
  }
}

AgreementBreakdown EmptyBreakdown() {
  AgreementBreakdown breakdown;
  for (Rating r : kAllRatings) breakdown[r] = {};
  return breakdown;
}

void RequireTriple(const RatingTable& table, const std::string& what) {
  if (table.empty()) Fail(ErrorKind::kInvalidArgument, what + " of an empty table");
  if (table.models().size() != 3) {
    Fail(ErrorKind::kInvalidArgument,
         what + " needs exactly 3 models, got " +
             std::to_string(table.models().size()));
  }
  if (!table.IsComplete()) {
    Fail(ErrorKind::kInvalidArgument,
         what + " needs a verdict from every model on every patch");
  }
}

}  // namespace

std::string ToString(Rating rating) {
  switch (rating) {
    case Rating::kGood:
      return "good";
    case Rating::kMedium:
      return "medium";
    case Rating::kBad:
      return "bad";
  }
  return "bad";
}

Rating ParseRating(const std::string& text) {
  if (text == "good") return Rating::kGood;
  if (text == "medium") return Rating::kMedium;
  if (text == "bad") return Rating::kBad;
  Fail(ErrorKind::kInvalidArgument,
       "rating must be good, medium or bad, got '" + text + "'");
}

void RatingConfig::Check() const {
  if (!(bad_threshold > 0.0 && bad_threshold < good_threshold &&
        good_threshold <= 1.0)) {
    Fail(ErrorKind::kInvalidArgument,
         "thresholds must satisfy 0 < bad < good <= 1");
  }
  if (!(iou_threshold >= 0.5)) {
    Fail(ErrorKind::kInvalidArgument, "IoU threshold must be at least 0.5");
  }
}

Rating RatingFromCapture(double capture, const RatingConfig& config) {
  if (std::isnan(capture)) Fail(ErrorKind::kInvalidArgument, "capture is NaN");
  if (capture >= config.good_threshold) return Rating::kGood;
  if (capture < config.bad_threshold) return Rating::kBad;
  return Rating::kMedium;
}

double CaptureFraction(const InstanceMask& gt, const InstanceMask& pred,
                       double iou_threshold) {
  const IouTable table = PairwiseIou(gt, pred);
  if (table.gt_areas.empty()) {
    Fail(ErrorKind::kInvalidArgument,
         "ground truth has no instances, capture is undefined");
  }
  return ComputeMetrics(MatchInstances(table, iou_threshold)).recall;
}

Rating AutoRate(const InstanceMask& gt, const InstanceMask& pred,
                const RatingConfig& config) {
  config.Check();
  return RatingFromCapture(CaptureFraction(gt, pred, config.iou_threshold),
                           config);
}

Rating FuseRatings(std::span<const Rating> per_model) {
  if (per_model.empty()) {
    Fail(ErrorKind::kInvalidArgument, "cannot fuse an empty list of ratings");
  }
  return *std::max_element(per_model.begin(), per_model.end());
}

void RatingTable::Set(const std::string& patch_id, const std::string& model_id,
                      Rating rating) {
  rows_[patch_id][model_id] = rating;
}

std::optional<Rating> RatingTable::Get(const std::string& patch_id,
                                       const std::string& model_id) const {
  const auto row = rows_.find(patch_id);
  if (row == rows_.end()) return std::nullopt;
  const auto cell = row->second.find(model_id);
  if (cell == row->second.end()) return std::nullopt;
  return cell->second;
}

std::vector<std::string> RatingTable::patches() const {
  std::vector<std::string> out;
  out.reserve(rows_.size());
  for (const auto& [patch, row] : rows_) out.push_back(patch);
  return out;
}

std::vector<std::string> RatingTable::models() const {
  std::set<std::string> models;
  for (const auto& [patch, row] : rows_) {
    for (const auto& [model, rating] : row) models.insert(model);
  }
  return {models.begin(), models.end()};
}

std::size_t RatingTable::size() const {
  std::size_t n = 0;
  for (const auto& [patch, row] : rows_) n += row.size();
  return n;
}

bool RatingTable::IsComplete() const {
  const std::size_t model_count = models().size();
  return std::all_of(rows_.begin(), rows_.end(), [&](const auto& row) {
    return row.second.size() == model_count;
  });
}

RatingTable RatingTable::CompleteSubset() const {
  const std::size_t model_count = models().size();
  RatingTable subset;
  for (const auto& [patch, row] : rows_) {
    if (row.size() == model_count) subset.rows_[patch] = row;
  }
  return subset;
}

const std::map<std::string, Rating>& RatingTable::Row(
    const std::string& patch_id) const {
  const auto row = rows_.find(patch_id);
  if (row == rows_.end()) {
    Fail(ErrorKind::kNotFound, "no ratings for patch " + patch_id);
  }
  return row->second;
}

RoundOneOutcome EvaluateRoundOne(std::span<const RatingRecord> records,
                                 int required_raters) {
  // Latest record per rater.
  std::map<std::string, const RatingRecord*> by_rater;
  for (const RatingRecord& r : records) by_rater[r.rater_id] = &r;
  RoundOneOutcome outcome;
  std::optional<Rating> first;
  for (const auto& [rater, record] : by_rater) {
    if (record->uncertain || (first && *first != record->rating)) {
      outcome.state = RoundOneState::kEscalated;
      return outcome;
    }
    first = record->rating;
  }
  if (first && static_cast<int>(by_rater.size()) >= std::max(1, required_raters)) {
    outcome.state = RoundOneState::kAgreed;
    outcome.rating = first;
  }
  return outcome;
}

FoldResult FoldRatings(std::span<const RatingRecord> records,
                       int required_round_one_raters) {
  std::map<std::pair<std::string, std::string>, std::vector<RatingRecord>>
      round_one;
  std::map<std::pair<std::string, std::string>, Rating> round_two;
  for (const RatingRecord& r : records) {
    const auto key = std::make_pair(r.patch_id, r.model_id);
    if (r.round == 2) {
      round_two[key] = r.rating;
    } else if (r.round == 1) {
      round_one[key].push_back(r);
    } else {
      Fail(ErrorKind::kInvalidArgument,
           "rating round must be 1 or 2, got " + std::to_string(r.round));
    }
  }
  FoldResult result;
  for (const auto& [key, rating] : round_two) {
    result.table.Set(key.first, key.second, rating);
  }
  for (const auto& [key, list] : round_one) {
    if (round_two.contains(key)) continue;
    const RoundOneOutcome outcome =
        EvaluateRoundOne(list, required_round_one_raters);
    if (outcome.state == RoundOneState::kAgreed) {
      result.table.Set(key.first, key.second, *outcome.rating);
    } else {
      result.unresolved.push_back(key);
    }
  }
  return result;
}

AgreementMatrix ComputeAgreementMatrix(const RatingTable& table) {
  if (table.empty()) {
    Fail(ErrorKind::kInvalidArgument, "agreement of an empty rating table");
  }
  if (!table.IsComplete()) {
    Fail(ErrorKind::kInvalidArgument,
         "agreement needs a verdict from every model on every patch");
  }
  AgreementMatrix matrix;
  matrix.models = table.models();
  const std::size_t m = matrix.models.size();
  std::vector<std::vector<std::uint64_t>> equal(m,
                                                std::vector<std::uint64_t>(m));
  const std::vector<std::string> patches = table.patches();
  for (const std::string& patch : patches) {
    const auto& row = table.Row(patch);
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        if (row.at(matrix.models[a]) == row.at(matrix.models[b])) {
          ++equal[a][b];
        }
      }
    }
  }
  const double n = static_cast<double>(patches.size());
  matrix.values.assign(m, std::vector<double>(m, 0.0));
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      matrix.values[a][b] = static_cast<double>(equal[a][b]) / n;
    }
  }
  return matrix;
}

AgreementBreakdown ComputeAgreementBreakdown(const RatingTable& table) {
  RequireTriple(table, "agreement breakdown");
  AgreementBreakdown breakdown = EmptyBreakdown();
  const std::vector<std::string> models = table.models();
  for (const std::string& patch : table.patches()) {
    const auto& row = table.Row(patch);
    const std::array<Rating, 3> r = {row.at(models[0]), row.at(models[1]),
                                     row.at(models[2])};
    Classify(r[0], r[1], r[2], breakdown[FuseRatings(r)]);
  }
  return breakdown;
}

std::map<std::string, AgreementBreakdown> ComputeAgreementBreakdownByModel(
    const RatingTable& table) {
  RequireTriple(table, "agreement breakdown");
  const std::vector<std::string> models = table.models();
  std::map<std::string, AgreementBreakdown> out;
  for (const std::string& model : models) out[model] = EmptyBreakdown();
  for (const std::string& patch : table.patches()) {
    const auto& row = table.Row(patch);
    const Rating a = row.at(models[0]);
    const Rating b = row.at(models[1]);
    const Rating c = row.at(models[2]);
    for (const std::string& model : models) {
      Classify(a, b, c, out[model][row.at(model)]);
    }
  }
  return out;
}

std::uint64_t RatingCounts::count(Rating r) const {
  switch (r) {
    case Rating::kGood:
      return good;
    case Rating::kMedium:
      return medium;
    case Rating::kBad:
      return bad;
  }
  return 0;
}

double RatingCounts::fraction(Rating r) const {
  const std::uint64_t n = total();
  return n == 0 ? 0.0 : static_cast<double>(count(r)) / static_cast<double>(n);
}

void RatingCounts::Add(Rating r) {
  switch (r) {
    case Rating::kGood:
      ++good;
      break;
    case Rating::kMedium:
      ++medium;
      break;
    case Rating::kBad:
      ++bad;
      break;
  }
}

RatingDistribution ComputeDistribution(const RatingTable& table) {
  RatingDistribution dist;
  for (const std::string& model : table.models()) dist.per_model[model] = {};
  for (const std::string& patch : table.patches()) {
    std::vector<Rating> ratings;
    for (const auto& [model, rating] : table.Row(patch)) {
      dist.per_model[model].Add(rating);
      ratings.push_back(rating);
    }
    dist.fused.Add(FuseRatings(ratings));
  }
  return dist;
}

}  // namespace nuclei_curation
