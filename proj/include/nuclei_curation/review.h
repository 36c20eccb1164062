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

// Two-round review workflow behind the HTTP service.
//
// Round 1: every (patch, model) prediction is rated by the registered
// round-1 raters. An item escalates to round 2 as soon as a rater marks it
// uncertain or two raters disagree. Round 2: a registered expert gives the
// final verdict. Patches that end up bad for every model can receive a
// corrected mask.
//
// State is event sourced. Ratings and corrections are appended to a
// newline-delimited JSON log before they take effect, and everything
// observable (item status, final ratings, stats) is a fold of that log, so
// replaying the log from empty reproduces the service exactly. Which rater
// was served which item is transient and not logged.

#ifndef NUCLEI_CURATION_REVIEW_H_
#define NUCLEI_CURATION_REVIEW_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nuclei_curation/enrichment.h"
#include "nuclei_curation/json_io.h"
#include "nuclei_curation/mask.h"
#include "nuclei_curation/rating.h"

namespace nuclei_curation {

struct RaterConfig {
  std::string id;
  std::set<int> rounds;              // Subset of {1, 2}.
  std::optional<std::string> token;  // Checked when set.
};

struct ReviewConfig {
  std::filesystem::path data_dir;
  std::filesystem::path log_path;  // Defaults to <data_dir>/events.jsonl.
  std::vector<RaterConfig> raters;
  int round_one_raters_required = 2;
  // A stats snapshot is written to <data_dir>/snapshots every this many
  // events; 0 disables.
  std::size_t snapshot_every = 100;
  // Do not stamp records with the wall clock.
  bool deterministic = false;
};

// {"raters":[{"id":..,"rounds":[1],"token":..}], "round_one_raters_required":2}
void LoadRaterFile(const std::filesystem::path& path, ReviewConfig& config);

// Patch images and model masks staged on disk:
//   <patch_id>.png                  8-bit RGB image
//   <patch_id>.<model_id>.mask.png  16-bit label map
//   <patch_id>.<model_id>.rle.json  RLE document
struct PatchCatalog {
  std::map<std::string, std::filesystem::path> images;
  std::map<std::string, std::map<std::string, std::filesystem::path>> masks;

  std::vector<std::string> models() const;
};

PatchCatalog ScanPatchDirectory(const std::filesystem::path& dir);

enum class ItemStatus { kPending, kRated, kEscalated, kCorrected };

std::string ToString(ItemStatus status);

struct ReviewItem {
  std::string item_id;  // "<round>/<patch_id>/<model_id>".
  std::string patch_id;
  std::string model_id;
  std::string image_ref;
  std::string mask_ref;
  int round = 1;
  ItemStatus status = ItemStatus::kPending;
};

Json ToJson(const ReviewItem& item);

struct SubmitResult {
  ReviewItem item;  // State after the submission.
  bool escalated = false;
};

class ReviewService {
 public:
  // Creates round-1 items for every (patch, model) in the catalog, then
  // replays the log at config.log_path if it exists. A torn final line is
  // discarded.
  ReviewService(ReviewConfig config, PatchCatalog catalog);

  // Scans config.data_dir for the catalog.
  static ReviewService Open(ReviewConfig config);

  ReviewService(ReviewService&&) = delete;
  ReviewService& operator=(ReviewService&&) = delete;

  // Throws kPermission for unknown raters or a token mismatch.
  void Authenticate(const std::string& rater_id,
                    const std::optional<std::string>& token) const;

  // Least-recently-served pending item of `round` that this rater has been
  // neither served nor rated. nullopt when the queue is exhausted.
  std::optional<ReviewItem> NextItem(const std::string& rater_id, int round);

  // Errors: kPermission (rater not registered for the round), kNotFound (no
  // such item; round-2 items exist only after escalation), kDuplicate (the
  // rater already rated this item).
  SubmitResult SubmitRating(RatingRecord record);

  // Errors: kNotFound, kPrecondition (patch not rated bad by every model),
  // kInvalidArgument (mask fails validation or has the wrong size).
  void SubmitCorrection(const std::string& patch_id, const RleDocument& mask);

  // Analytics over patches that have a final verdict from every model.
  Json Stats() const;
  std::string StatsText() const { return Stats().dump(); }

  RatingTable FinalRatings() const;
  std::vector<RatingRecord> RatingLog() const;
  std::optional<InstanceMask> Correction(const std::string& patch_id) const;
  EnrichmentManifest BuildEnrichment(Strategy strategy,
                                     const SamplingConfig& sampling) const;

  const PatchCatalog& catalog() const { return catalog_; }
  const ReviewConfig& config() const { return config_; }
  std::size_t event_count() const;

 private:
  struct ItemState {
    std::vector<RatingRecord> round_one;
    std::set<std::string> round_two_raters;
    std::optional<Rating> round_two_rating;
    bool escalated = false;
    // Transient serving state.
    std::uint64_t served_seq[2] = {0, 0};
    std::set<std::string> served_to[2];
    std::map<std::string, std::int64_t> served_at[2];
  };
  using Key = std::pair<std::string, std::string>;  // (patch, model).

  ItemState& StateOrThrow(const Key& key);
  ItemStatus StatusOf(const Key& key, const ItemState& state, int round) const;
  ReviewItem MakeItem(const Key& key, const ItemState& state, int round) const;
  std::optional<Rating> FinalRating(const ItemState& state) const;
  RatingTable FinalRatingsLocked() const;
  Json StatsLocked() const;
  bool PatchIsConsensusBad(const std::string& patch_id) const;

  // Validation shared by live submission and replay.
  void CheckRating(const RatingRecord& record, bool live);
  bool ApplyRating(const RatingRecord& record);
  InstanceMask CheckCorrection(const std::string& patch_id,
                               const RleDocument& doc);

  void Replay();
  void Append(const Json& event);
  // Called once an appended event has been applied.
  void MaybeSnapshot();

  ReviewConfig config_;
  PatchCatalog catalog_;
  std::map<Key, ItemState> items_;
  std::map<std::string, InstanceMask> corrections_;
  std::vector<RatingRecord> log_;
  std::size_t events_ = 0;
  std::uint64_t serve_counter_ = 0;
  std::ofstream log_out_;
  mutable std::mutex mutex_;
};

}  // namespace nuclei_curation

#endif  // NUCLEI_CURATION_REVIEW_H_
