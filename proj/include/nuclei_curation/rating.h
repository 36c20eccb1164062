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

// Patch-level quality ratings (bad < medium < good), the fusion rule across
// models, and cross-model agreement analytics.

#ifndef NUCLEI_CURATION_RATING_H_
#define NUCLEI_CURATION_RATING_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nuclei_curation/mask.h"

namespace nuclei_curation {

enum class Rating : std::uint8_t { kBad = 0, kMedium = 1, kGood = 2 };

inline constexpr std::array<Rating, 3> kAllRatings = {
    Rating::kGood, Rating::kMedium, Rating::kBad};

std::string ToString(Rating rating);
// Accepts "good", "medium" and "bad" only.
Rating ParseRating(const std::string& text);

struct RatingConfig {
  double good_threshold = 0.90;
  double bad_threshold = 0.50;
  double iou_threshold = 0.5;

  // Requires 0 < bad < good <= 1 and a valid IoU threshold.
  void Check() const;
};

// Capture >= good_threshold is good, capture < bad_threshold is bad and
// anything between is medium, so the three intervals partition [0, 1].
Rating RatingFromCapture(double capture, const RatingConfig& config = {});

// Capture fraction = detection recall of `pred` against `gt`. Throws when
// the ground truth has no instances.
double CaptureFraction(const InstanceMask& gt, const InstanceMask& pred,
                       double iou_threshold);
Rating AutoRate(const InstanceMask& gt, const InstanceMask& pred,
                const RatingConfig& config = {});

// Order maximum: good if any input is good, bad only if all are bad.
Rating FuseRatings(std::span<const Rating> per_model);

struct RatingRecord {
  std::string patch_id;
  std::string model_id;
  std::string rater_id;
  int round = 1;
  Rating rating = Rating::kBad;
  bool uncertain = false;
  std::int64_t timestamp = 0;  // UTC seconds.
};

// Final verdict per (patch, model).
class RatingTable {
 public:
  void Set(const std::string& patch_id, const std::string& model_id,
           Rating rating);
  std::optional<Rating> Get(const std::string& patch_id,
                            const std::string& model_id) const;

  bool HasPatch(const std::string& patch_id) const {
    return rows_.contains(patch_id);
  }
  std::vector<std::string> patches() const;  // Sorted.
  std::vector<std::string> models() const;   // Sorted union over patches.
  std::size_t size() const;                  // Number of verdicts.
  bool empty() const { return rows_.empty(); }

  // True when every patch has a verdict for every model.
  bool IsComplete() const;
  // Patches that have a verdict for every model of the table.
  RatingTable CompleteSubset() const;

  const std::map<std::string, Rating>& Row(const std::string& patch_id) const;

  friend bool operator==(const RatingTable&, const RatingTable&) = default;

 private:
  std::map<std::string, std::map<std::string, Rating>> rows_;
};

// Outcome of the round-1 ratings on one (patch, model) item.
enum class RoundOneState { kPending, kAgreed, kEscalated };

struct RoundOneOutcome {
  RoundOneState state = RoundOneState::kPending;
  std::optional<Rating> rating;  // Set iff kAgreed.
};

// Escalated when any record is uncertain or two raters disagree; agreed
// when at least `required_raters` records concur; pending otherwise.
RoundOneOutcome EvaluateRoundOne(std::span<const RatingRecord> records,
                                 int required_raters);

struct FoldResult {
  RatingTable table;
  // Items without a final verdict (pending or escalated without a round-2
  // record), as (patch_id, model_id).
  std::vector<std::pair<std::string, std::string>> unresolved;
};

// Final verdicts from a chronological record log. The latest round-2
// record wins; otherwise the round-1 agreement, if any.
FoldResult FoldRatings(std::span<const RatingRecord> records,
                       int required_round_one_raters = 1);

struct AgreementMatrix {
  std::vector<std::string> models;
  std::vector<std::vector<double>> values;  // values[a][b] in [0, 1].
};

// Fraction of patches on which two models give the same rating. Requires a
// non-empty, complete table.
AgreementMatrix ComputeAgreementMatrix(const RatingTable& table);

struct AgreementCounts {
  std::uint64_t all_agree = 0;
  std::uint64_t two_agree = 0;
  std::uint64_t none_agree = 0;
  std::uint64_t total() const { return all_agree + two_agree + none_agree; }
  friend bool operator==(const AgreementCounts&,
                         const AgreementCounts&) = default;
};

using AgreementBreakdown = std::map<Rating, AgreementCounts>;

// Requires exactly three models. Patches are grouped by their fused rating;
// every rating has an entry, possibly all zero.
AgreementBreakdown ComputeAgreementBreakdown(const RatingTable& table);

// Alternative grouping: for each model, patches grouped by that model's own
// rating.
std::map<std::string, AgreementBreakdown> ComputeAgreementBreakdownByModel(
    const RatingTable& table);

struct RatingCounts {
  std::uint64_t good = 0;
  std::uint64_t medium = 0;
  std::uint64_t bad = 0;

  std::uint64_t total() const { return good + medium + bad; }
  std::uint64_t count(Rating r) const;
  double fraction(Rating r) const;  // 0 when total() == 0.
  void Add(Rating r);
  friend bool operator==(const RatingCounts&, const RatingCounts&) = default;
};

struct RatingDistribution {
  std::map<std::string, RatingCounts> per_model;
  RatingCounts fused;  // One fused verdict per patch.
};

RatingDistribution ComputeDistribution(const RatingTable& table);

}  // namespace nuclei_curation

#endif  // NUCLEI_CURATION_RATING_H_
