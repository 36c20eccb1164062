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

#include "nuclei_curation/review.h"

#include <algorithm>
#include <chrono>

#include "nuclei_curation/error.h"
#include "nuclei_curation/png_io.h"

namespace nuclei_curation {

namespace {

constexpr char kModule[] = "review";

[[noreturn]] void Fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, kModule, message);
}

bool EndsWith(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::int64_t WallClockSeconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string ItemId(int round, const std::string& patch,
                   const std::string& model) {
  return std::to_string(round) + "/" + patch + "/" + model;
}

}  // namespace

void LoadRaterFile(const std::filesystem::path& path, ReviewConfig& config) {
  const Json json = ParseJson(ReadTextFile(path), path.string());
  try {
    for (const Json& entry : json.at("raters")) {
      RaterConfig rater;
      rater.id = entry.at("id").get<std::string>();
      for (const Json& round : entry.at("rounds")) {
        const int r = round.get<int>();
        if (r != 1 && r != 2) Fail(ErrorKind::kInvalidArgument, "rater rounds must be 1 or 2");
        rater.rounds.insert(r);
      }
      if (entry.contains("token") && !entry["token"].is_null()) {
        rater.token = entry["token"].get<std::string>();
      }
      config.raters.push_back(std::move(rater));
    }
    if (json.contains("round_one_raters_required")) {
      config.round_one_raters_required = json["round_one_raters_required"].get<int>();
    }
  } catch (const Json::exception& e) {
    Fail(ErrorKind::kInvalidArgument, path.string() + ": " + e.what());
  }
}

std::vector<std::string> PatchCatalog::models() const {
  std::set<std::string> models;
  for (const auto& [patch, by_model] : masks) {
    for (const auto& [model, path] : by_model) models.insert(model);
  }
  return {models.begin(), models.end()};
}

PatchCatalog ScanPatchDirectory(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    Fail(ErrorKind::kIo, "data directory " + dir.string() + " does not exist");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  PatchCatalog catalog;
  auto add_mask = [&](const std::string& stem, const std::filesystem::path& p) {
    const std::size_t dot = stem.rfind('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == stem.size()) return;
    // A label map wins over an RLE file for the same model.
    catalog.masks[stem.substr(0, dot)].try_emplace(stem.substr(dot + 1), p);
  };
  for (const auto& p : files) {
    const std::string name = p.filename().string();
    if (EndsWith(name, ".mask.png")) {
      add_mask(name.substr(0, name.size() - 9), p);
    }
  }
  for (const auto& p : files) {
    const std::string name = p.filename().string();
    if (EndsWith(name, ".rle.json")) {
      add_mask(name.substr(0, name.size() - 9), p);
    } else if (EndsWith(name, ".png") && !EndsWith(name, ".mask.png")) {
      catalog.images[name.substr(0, name.size() - 4)] = p;
    }
  }
  return catalog;
}

std::string ToString(ItemStatus status) {
  switch (status) {
    case ItemStatus::kPending:
      return "pending";
    case ItemStatus::kRated:
      return "rated";
    case ItemStatus::kEscalated:
      return "escalated";
    case ItemStatus::kCorrected:
      return "corrected";
  }
  return "pending";
}

Json ToJson(const ReviewItem& item) {
  return {{"item_id", item.item_id},     {"patch_id", item.patch_id},
          {"model_id", item.model_id},   {"image_ref", item.image_ref},
          {"mask_ref", item.mask_ref},   {"round", item.round},
          {"status", ToString(item.status)}};
}

ReviewService::ReviewService(ReviewConfig config, PatchCatalog catalog)
    : config_(std::move(config)), catalog_(std::move(catalog)) {
  if (config_.log_path.empty()) config_.log_path = config_.data_dir / "events.jsonl";
  if (config_.round_one_raters_required < 1) {
    Fail(ErrorKind::kInvalidArgument, "at least one round-1 rater must be required");
  }
  for (const auto& [patch, by_model] : catalog_.masks) {
    for (const auto& [model, path] : by_model) items_[{patch, model}] = {};
  }
  Replay();
  log_out_.open(config_.log_path, std::ios::binary | std::ios::app);
  if (!log_out_) Fail(ErrorKind::kIo, "cannot open log " + config_.log_path.string());
}

ReviewService ReviewService::Open(ReviewConfig config) {
  PatchCatalog catalog = ScanPatchDirectory(config.data_dir);
  return ReviewService(std::move(config), std::move(catalog));
}

void ReviewService::Replay() {
  std::error_code ec;
  if (!std::filesystem::exists(config_.log_path, ec)) return;
  const std::string text = ReadTextFile(config_.log_path);
  std::size_t offset = 0;
  std::size_t line_no = 0;
  while (offset < text.size()) {
    const std::size_t newline = text.find('\n', offset);
    const bool torn = newline == std::string::npos;
    const std::string line =
        text.substr(offset, torn ? std::string::npos : newline - offset);
    ++line_no;
    if (line.empty()) {
      offset = torn ? text.size() : newline + 1;
      continue;
    }
    Json event;
    try {
      event = Json::parse(line);
    } catch (const Json::exception&) {
      if (!torn) {
        Fail(ErrorKind::kInvalidArgument,
             config_.log_path.string() + ":" + std::to_string(line_no) +
                 ": malformed event");
      }
      // Interrupted append: drop the fragment so later appends stay aligned.
      std::filesystem::resize_file(config_.log_path, offset);
      break;
    }
    try {
      const std::string type = event.at("event").get<std::string>();
      if (type == "rating") {
        const RatingRecord record = RatingRecordFromJson(event.at("record"));
        CheckRating(record, /*live=*/false);
        ApplyRating(record);
      } else if (type == "correction") {
        const std::string patch = event.at("patch_id").get<std::string>();
        corrections_[patch] = CheckCorrection(
            patch, RleDocumentFromJson(event.at("mask")));
      } else {
        Fail(ErrorKind::kInvalidArgument, "unknown event type " + type);
      }
    } catch (const Json::exception& e) {
      Fail(ErrorKind::kInvalidArgument, config_.log_path.string() + ":" +
                                            std::to_string(line_no) + ": " +
                                            e.what());
    } catch (const Error& e) {
      throw Error(e.kind(), kModule,
                  config_.log_path.string() + ":" + std::to_string(line_no) +
                      ": " + e.what());
    }
    ++events_;
    if (torn) {
      // A complete event without its newline; terminate it.
      std::ofstream(config_.log_path, std::ios::binary | std::ios::app) << '\n';
    }
    offset = torn ? text.size() : newline + 1;
  }
}

void ReviewService::Append(const Json& event) {
  log_out_ << event.dump() << '\n';
  log_out_.flush();
  if (!log_out_) Fail(ErrorKind::kIo, "cannot append to " + config_.log_path.string());
  ++events_;
}

void ReviewService::MaybeSnapshot() {
  if (config_.snapshot_every > 0 && events_ % config_.snapshot_every == 0) {
    std::error_code ec;
    const auto dir = config_.data_dir / "snapshots";
    std::filesystem::create_directories(dir, ec);
    Json snapshot = {{"events", events_}, {"stats", StatsLocked()}};
    // Snapshots are advisory; the log stays authoritative.
    try {
      WriteTextFile(dir / ("stats-" + std::to_string(events_) + ".json"),
                    snapshot.dump() + "\n");
    } catch (const Error&) {
    }
  }
}

void ReviewService::Authenticate(const std::string& rater_id,
                                 const std::optional<std::string>& token) const {
  const auto it = std::find_if(config_.raters.begin(), config_.raters.end(),
                               [&](const RaterConfig& r) { return r.id == rater_id; });
  if (it == config_.raters.end()) Fail(ErrorKind::kPermission, "unknown rater " + rater_id);
  if (it->token && token != it->token) {
    Fail(ErrorKind::kPermission, "bad token for rater " + rater_id);
  }
}

ReviewService::ItemState& ReviewService::StateOrThrow(const Key& key) {
  const auto it = items_.find(key);
  if (it == items_.end()) {
    Fail(ErrorKind::kNotFound,
         "no review item for patch " + key.first + ", model " + key.second);
  }
  return it->second;
}

std::optional<Rating> ReviewService::FinalRating(const ItemState& state) const {
  if (state.round_two_rating) return state.round_two_rating;
  const RoundOneOutcome outcome =
      EvaluateRoundOne(state.round_one, config_.round_one_raters_required);
  if (outcome.state == RoundOneState::kAgreed) return outcome.rating;
  return std::nullopt;
}

ItemStatus ReviewService::StatusOf(const Key& key, const ItemState& state,
                                   int round) const {
  if (corrections_.contains(key.first)) return ItemStatus::kCorrected;
  if (round == 2) {
    return state.round_two_rating ? ItemStatus::kRated : ItemStatus::kPending;
  }
  if (state.escalated) return ItemStatus::kEscalated;
  const RoundOneOutcome outcome =
      EvaluateRoundOne(state.round_one, config_.round_one_raters_required);
  return outcome.state == RoundOneState::kAgreed ? ItemStatus::kRated
                                                 : ItemStatus::kPending;
}

ReviewItem ReviewService::MakeItem(const Key& key, const ItemState& state,
                                   int round) const {
  ReviewItem item;
  item.item_id = ItemId(round, key.first, key.second);
  item.patch_id = key.first;
  item.model_id = key.second;
  item.image_ref = "/api/patches/" + key.first + "/image";
  item.mask_ref = "/api/patches/" + key.first + "/masks/" + key.second;
  item.round = round;
  item.status = StatusOf(key, state, round);
  return item;
}

std::optional<ReviewItem> ReviewService::NextItem(const std::string& rater_id,
                                                  int round) {
  if (round != 1 && round != 2) {
    Fail(ErrorKind::kInvalidArgument, "round must be 1 or 2");
  }
  std::lock_guard<std::mutex> lock(mutex_);
  const auto rater = std::find_if(
      config_.raters.begin(), config_.raters.end(),
      [&](const RaterConfig& r) { return r.id == rater_id; });
  if (rater == config_.raters.end() || !rater->rounds.contains(round)) {
    Fail(ErrorKind::kPermission,
         "rater " + rater_id + " is not registered for round " + std::to_string(round));
  }
  const int slot = round - 1;
  std::pair<const Key, ItemState>* best = nullptr;
  for (auto& entry : items_) {
    const ItemState& state = entry.second;
    if (round == 2 && !state.escalated) continue;
    if (StatusOf(entry.first, state, round) != ItemStatus::kPending) continue;
    if (state.served_to[slot].contains(rater_id)) continue;
    if (round == 1 &&
        std::any_of(state.round_one.begin(), state.round_one.end(),
                    [&](const RatingRecord& r) { return r.rater_id == rater_id; })) {
      continue;
    }
    if (round == 2 && state.round_two_raters.contains(rater_id)) continue;
    if (best == nullptr || state.served_seq[slot] < best->second.served_seq[slot]) {
      best = &entry;
    }
  }
  if (best == nullptr) return std::nullopt;
  ItemState& state = best->second;
  state.served_seq[slot] = ++serve_counter_;
  state.served_to[slot].insert(rater_id);
  state.served_at[slot][rater_id] = WallClockSeconds();
  return MakeItem(best->first, state, round);
}

void ReviewService::CheckRating(const RatingRecord& record, bool live) {
  if (record.round != 1 && record.round != 2) {
    Fail(ErrorKind::kInvalidArgument, "round must be 1 or 2");
  }
  if (live) {
    const auto rater = std::find_if(
        config_.raters.begin(), config_.raters.end(),
        [&](const RaterConfig& r) { return r.id == record.rater_id; });
    if (rater == config_.raters.end() || !rater->rounds.contains(record.round)) {
      Fail(ErrorKind::kPermission, "rater " + record.rater_id +
                                       " is not registered for round " +
                                       std::to_string(record.round));
    }
  }
  ItemState& state = StateOrThrow({record.patch_id, record.model_id});
  if (record.round == 2) {
    if (!state.escalated) {
      Fail(ErrorKind::kNotFound, "patch " + record.patch_id + ", model " +
                                     record.model_id + " was not escalated to round 2");
    }
    if (state.round_two_raters.contains(record.rater_id)) {
      Fail(ErrorKind::kDuplicate, "rater " + record.rater_id +
                                      " already gave a round-2 verdict on " +
                                      ItemId(2, record.patch_id, record.model_id));
    }
  } else if (std::any_of(state.round_one.begin(), state.round_one.end(),
                         [&](const RatingRecord& r) {
                           return r.rater_id == record.rater_id;
                         })) {
    Fail(ErrorKind::kDuplicate, "rater " + record.rater_id + " already rated " +
                                    ItemId(1, record.patch_id, record.model_id));
  }
}

bool ReviewService::ApplyRating(const RatingRecord& record) {
  ItemState& state = items_.at({record.patch_id, record.model_id});
  log_.push_back(record);
  if (record.round == 2) {
    state.round_two_raters.insert(record.rater_id);
    state.round_two_rating = record.rating;
    return false;
  }
  state.round_one.push_back(record);
  if (state.escalated) return false;
  if (EvaluateRoundOne(state.round_one, config_.round_one_raters_required).state ==
      RoundOneState::kEscalated) {
    state.escalated = true;
    return true;
  }
  return false;
}

SubmitResult ReviewService::SubmitRating(RatingRecord record) {
  std::lock_guard<std::mutex> lock(mutex_);
  const std::int64_t now = config_.deterministic ? 0 : WallClockSeconds();
  if (record.timestamp == 0) record.timestamp = now;
  CheckRating(record, /*live=*/true);
  const Key key{record.patch_id, record.model_id};
  ItemState& state = items_.at(key);
  Json review_seconds = nullptr;
  const auto& served = state.served_at[record.round - 1];
  if (const auto it = served.find(record.rater_id);
      it != served.end() && !config_.deterministic) {
    review_seconds = std::max<std::int64_t>(0, WallClockSeconds() - it->second);
  }
  Append({{"event", "rating"},
          {"record", ToJson(record)},
          {"review_seconds", review_seconds}});
  SubmitResult result;
  result.escalated = ApplyRating(record);
  result.item = MakeItem(key, state, record.round);
  MaybeSnapshot();
  return result;
}

bool ReviewService::PatchIsConsensusBad(const std::string& patch_id) const {
  const auto it = catalog_.masks.find(patch_id);
  if (it == catalog_.masks.end()) return false;
  for (const auto& [model, path] : it->second) {
    const std::optional<Rating> rating = FinalRating(items_.at({patch_id, model}));
    if (rating != Rating::kBad) return false;
  }
  return true;
}

InstanceMask ReviewService::CheckCorrection(const std::string& patch_id,
                                            const RleDocument& doc) {
  if (!catalog_.masks.contains(patch_id)) {
    Fail(ErrorKind::kNotFound, "unknown patch " + patch_id);
  }
  if (!PatchIsConsensusBad(patch_id)) {
    Fail(ErrorKind::kPrecondition,
         "patch " + patch_id + " is not rated bad by every model");
  }
  InstanceMask mask;
  try {
    mask = DecodeRle(doc);
  } catch (const Error& e) {
    Fail(ErrorKind::kInvalidArgument, std::string("invalid correction: ") + e.what());
  }
  for (const Finding& f : Validate(mask)) {
    if (f.severity == Severity::kError) {
      Fail(ErrorKind::kInvalidArgument, "invalid correction: " + f.message);
    }
  }
  return mask;
}

void ReviewService::SubmitCorrection(const std::string& patch_id,
                                     const RleDocument& doc) {
  std::lock_guard<std::mutex> lock(mutex_);
  InstanceMask mask = CheckCorrection(patch_id, doc);
  if (const auto image = catalog_.images.find(patch_id);
      image != catalog_.images.end()) {
    const ImageSize size = ReadPngSize(image->second);
    if (size.width != mask.width || size.height != mask.height) {
      Fail(ErrorKind::kInvalidArgument,
           "correction is " + std::to_string(mask.width) + "x" +
               std::to_string(mask.height) + " but patch " + patch_id + " is " +
               std::to_string(size.width) + "x" + std::to_string(size.height));
    }
  }
  const std::int64_t now = config_.deterministic ? 0 : WallClockSeconds();
  Append({{"event", "correction"},
          {"patch_id", patch_id},
          {"mask", ToJson(EncodeRle(mask))},
          {"timestamp", FormatIso8601(now)}});
  // Exported copy for batch tools; the log stays authoritative.
  std::error_code ec;
  const auto dir = config_.data_dir / "corrections";
  std::filesystem::create_directories(dir, ec);
  try {
    WriteMaskFile(dir / (patch_id + ".rle.json"), mask);
  } catch (const Error&) {
  }
  corrections_[patch_id] = std::move(mask);
  MaybeSnapshot();
}

RatingTable ReviewService::FinalRatingsLocked() const {
  RatingTable table;
  for (const auto& [key, state] : items_) {
    if (const auto rating = FinalRating(state)) table.Set(key.first, key.second, *rating);
  }
  return table;
}

RatingTable ReviewService::FinalRatings() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return FinalRatingsLocked();
}

std::vector<RatingRecord> ReviewService::RatingLog() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return log_;
}

std::optional<InstanceMask> ReviewService::Correction(
    const std::string& patch_id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto it = corrections_.find(patch_id);
  if (it == corrections_.end()) return std::nullopt;
  return it->second;
}

std::size_t ReviewService::event_count() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return events_;
}

Json ReviewService::StatsLocked() const {
  // Only patches with a verdict from every catalogued model count.
  const std::vector<std::string> models = catalog_.models();
  const RatingTable all = FinalRatingsLocked();
  RatingTable complete;
  for (const std::string& patch : all.patches()) {
    const auto& row = all.Row(patch);
    if (row.size() != catalog_.masks.at(patch).size() ||
        row.size() != models.size()) {
      continue;
    }
    for (const auto& [model, rating] : row) complete.Set(patch, model, rating);
  }
  std::uint64_t depth[2] = {0, 0};
  std::uint64_t unresolved = 0;
  for (const auto& [key, state] : items_) {
    if (StatusOf(key, state, 1) == ItemStatus::kPending) ++depth[0];
    if (state.escalated && StatusOf(key, state, 2) == ItemStatus::kPending) ++depth[1];
    if (!FinalRating(state)) ++unresolved;
  }
  Json stats;
  stats["models"] = models;
  stats["patches"] = {{"total", catalog_.masks.size()},
                      {"complete", complete.patches().size()}};
  RatingDistribution distribution = ComputeDistribution(complete);
  for (const std::string& model : models) distribution.per_model.try_emplace(model);
  stats["distribution"] = ToJson(distribution);
  stats["agreement"] = complete.empty()
                           ? Json{{"models", models}, {"values", Json::array()}}
                           : ToJson(ComputeAgreementMatrix(complete));
  stats["breakdown"] = (!complete.empty() && models.size() == 3)
                           ? ToJson(ComputeAgreementBreakdown(complete))
                           : Json(nullptr);
  stats["queue_depths"] = {{"1", depth[0]}, {"2", depth[1]}};
  stats["ratings_logged"] = log_.size();
  stats["corrections"] = corrections_.size();
  stats["unresolved"] = unresolved;
  return stats;
}

Json ReviewService::Stats() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return StatsLocked();
}

EnrichmentManifest ReviewService::BuildEnrichment(
    Strategy strategy, const SamplingConfig& sampling) const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::set<std::string> corrected;
  for (const auto& [patch, mask] : corrections_) {
    // A later round-2 verdict can lift a patch out of consensus-bad.
    if (PatchIsConsensusBad(patch)) corrected.insert(patch);
  }
  return ApplySamplingWeights(
      BuildManifest(FinalRatingsLocked(), corrected, strategy), sampling);
}

}  // namespace nuclei_curation
