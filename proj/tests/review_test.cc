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

#include <gtest/gtest.h>

#include <fstream>
#include <functional>
#include <memory>
#include <set>
#include <thread>

#include "nuclei_curation/error.h"
#include "test_util.h"

namespace nuclei_curation {
namespace {

using testing::StageDataDir;
using testing::TempDir;

constexpr Rating kG = Rating::kGood;
constexpr Rating kM = Rating::kMedium;
constexpr Rating kB = Rating::kBad;

ReviewConfig TwoRaterConfig(const std::filesystem::path& dir) {
  ReviewConfig config;
  config.data_dir = dir;
  config.raters = {{"r1", {1}, std::nullopt},
                   {"r2", {1}, std::nullopt},
                   {"expert", {2}, std::nullopt},
                   {"lead", {1, 2}, "s3cret"}};
  config.round_one_raters_required = 2;
  config.snapshot_every = 0;
  config.deterministic = true;
  return config;
}

RatingRecord Record(const std::string& patch, const std::string& model,
                    const std::string& rater, Rating rating, int round = 1,
                    bool uncertain = false) {
  RatingRecord r;
  r.patch_id = patch;
  r.model_id = model;
  r.rater_id = rater;
  r.rating = rating;
  r.round = round;
  r.uncertain = uncertain;
  return r;
}

// The kind of the Error thrown by `fn`, or nullopt if it returns.
std::optional<ErrorKind> KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

// Both round-1 raters agree on every verdict of the four-patch table.
void RateFourPatchTable(ReviewService& service) {
  const std::map<std::string, std::vector<Rating>> columns = {
      {"A", {kG, kG, kB, kM}}, {"B", {kG, kB, kB, kM}}, {"C", {kB, kB, kB, kG}}};
  for (const auto& [model, ratings] : columns) {
    for (std::size_t p = 0; p < ratings.size(); ++p) {
      for (const char* rater : {"r1", "r2"}) {
        service.SubmitRating(Record(testing::PatchName(p), model, rater, ratings[p]));
      }
    }
  }
}

InstanceMask CorrectionMask() {
  InstanceMask mask(8, 8);
  for (int x = 2; x < 6; ++x) mask.at(x, 3) = 5;
  return mask;
}

class ReviewServiceTest : public ::testing::Test {
 protected:
  void SetUp() override { StageDataDir(dir_.path(), 4, {"A", "B", "C"}); }

  std::unique_ptr<ReviewService> Open() {
    return std::make_unique<ReviewService>(TwoRaterConfig(dir_.path()),
                                           ScanPatchDirectory(dir_.path()));
  }

  TempDir dir_;
};

TEST_F(ReviewServiceTest, CatalogPairsImagesWithMasks) {
  const PatchCatalog catalog = ScanPatchDirectory(dir_.path());
  EXPECT_EQ(catalog.images.size(), 4u);
  EXPECT_EQ(catalog.masks.size(), 4u);
  EXPECT_EQ(catalog.models(), (std::vector<std::string>{"A", "B", "C"}));
  EXPECT_EQ(catalog.masks.at("p001").at("B").filename(), "p001.B.rle.json");
  EXPECT_EQ(catalog.masks.at("p000").at("B").filename(), "p000.B.mask.png");
  EXPECT_EQ(KindOf([&] { ScanPatchDirectory(dir_ / "missing"); }), ErrorKind::kIo);
}

TEST_F(ReviewServiceTest, NextItemServesEachItemOncePerRater) {
  auto service = Open();
  std::set<std::string> seen;
  for (int i = 0; i < 12; ++i) {
    const auto item = service->NextItem("r1", 1);
    ASSERT_TRUE(item.has_value());
    EXPECT_EQ(item->round, 1);
    EXPECT_EQ(item->status, ItemStatus::kPending);
    EXPECT_EQ(item->item_id, "1/" + item->patch_id + "/" + item->model_id);
    EXPECT_EQ(item->image_ref, "/api/patches/" + item->patch_id + "/image");
    EXPECT_TRUE(seen.insert(item->item_id).second);
  }
  EXPECT_FALSE(service->NextItem("r1", 1).has_value());
  // Another rater has an independent queue.
  EXPECT_TRUE(service->NextItem("r2", 1).has_value());
  // Nothing reaches round 2 before an escalation.
  EXPECT_FALSE(service->NextItem("expert", 2).has_value());
  EXPECT_EQ(KindOf([&] { service->NextItem("r1", 2); }), ErrorKind::kPermission);
  EXPECT_EQ(KindOf([&] { service->NextItem("nobody", 1); }), ErrorKind::kPermission);
  EXPECT_EQ(KindOf([&] { service->NextItem("r1", 3); }), ErrorKind::kInvalidArgument);
}

TEST_F(ReviewServiceTest, ThreeDistinctItemsThenNone) {
  TempDir small;
  StageDataDir(small.path(), 1, {"A", "B", "C"});
  ReviewService service(TwoRaterConfig(small.path()), ScanPatchDirectory(small.path()));
  std::set<std::string> ids;
  for (int i = 0; i < 3; ++i) {
    const auto item = service.NextItem("r1", 1);
    ASSERT_TRUE(item.has_value());
    service.SubmitRating(Record(item->patch_id, item->model_id, "r1", kG));
    ids.insert(item->item_id);
  }
  EXPECT_EQ(ids.size(), 3u);
  EXPECT_FALSE(service.NextItem("r1", 1).has_value());
}

TEST_F(ReviewServiceTest, RatedItemsLeaveTheQueue) {
  auto service = Open();
  service->SubmitRating(Record("p000", "A", "r1", kG));
  service->SubmitRating(Record("p000", "A", "r2", kG));
  for (int i = 0; i < 11; ++i) {
    const auto item = service->NextItem("lead", 1);
    ASSERT_TRUE(item.has_value());
    EXPECT_NE(item->item_id, "1/p000/A");
  }
  EXPECT_FALSE(service->NextItem("lead", 1).has_value());
}

TEST_F(ReviewServiceTest, AgreementYieldsFinalRating) {
  auto service = Open();
  SubmitResult first = service->SubmitRating(Record("p000", "A", "r1", kG));
  EXPECT_FALSE(first.escalated);
  EXPECT_EQ(first.item.status, ItemStatus::kPending);
  SubmitResult second = service->SubmitRating(Record("p000", "A", "r2", kG));
  EXPECT_FALSE(second.escalated);
  EXPECT_EQ(second.item.status, ItemStatus::kRated);
  EXPECT_EQ(service->FinalRatings().Get("p000", "A"), kG);
  EXPECT_EQ(service->RatingLog().size(), 2u);
  // Deterministic mode stamps unset timestamps with 0.
  EXPECT_EQ(service->RatingLog()[0].timestamp, 0);
}

TEST_F(ReviewServiceTest, ConflictEscalatesAndRoundTwoDecides) {
  auto service = Open();
  service->SubmitRating(Record("p001", "B", "r1", kG));
  const SubmitResult conflict = service->SubmitRating(Record("p001", "B", "r2", kB));
  EXPECT_TRUE(conflict.escalated);
  EXPECT_EQ(conflict.item.status, ItemStatus::kEscalated);
  EXPECT_FALSE(service->FinalRatings().Get("p001", "B").has_value());

  const auto item = service->NextItem("expert", 2);
  ASSERT_TRUE(item.has_value());
  EXPECT_EQ(item->item_id, "2/p001/B");
  EXPECT_EQ(item->status, ItemStatus::kPending);
  EXPECT_FALSE(service->NextItem("expert", 2).has_value());

  const SubmitResult verdict = service->SubmitRating(Record("p001", "B", "expert", kM, 2));
  EXPECT_EQ(verdict.item.status, ItemStatus::kRated);
  EXPECT_EQ(service->FinalRatings().Get("p001", "B"), kM);

  // A later round-2 verdict from another expert overrides.
  service->SubmitRating(
      [] {
        RatingRecord r = Record("p001", "B", "lead", kG, 2);
        r.timestamp = 10;
        return r;
      }());
  EXPECT_EQ(service->FinalRatings().Get("p001", "B"), kG);
}

TEST_F(ReviewServiceTest, UncertainFlagEscalatesImmediately) {
  auto service = Open();
  const SubmitResult r = service->SubmitRating(Record("p002", "C", "r1", kG, 1, true));
  EXPECT_TRUE(r.escalated);
  EXPECT_EQ(r.item.status, ItemStatus::kEscalated);
  // Escalated items are no longer offered in round 1.
  for (int i = 0; i < 11; ++i) {
    const auto item = service->NextItem("r2", 1);
    ASSERT_TRUE(item.has_value());
    EXPECT_NE(item->item_id, "1/p002/C");
  }
  // Later round-1 ratings are still logged but do not re-escalate.
  EXPECT_FALSE(service->SubmitRating(Record("p002", "C", "r2", kG)).escalated);
  EXPECT_FALSE(service->FinalRatings().Get("p002", "C").has_value());
}

TEST_F(ReviewServiceTest, SubmissionErrors) {
  auto service = Open();
  service->SubmitRating(Record("p000", "A", "r1", kG));
  EXPECT_EQ(KindOf([&] { service->SubmitRating(Record("p000", "A", "r1", kB)); }),
            ErrorKind::kDuplicate);
  EXPECT_EQ(KindOf([&] { service->SubmitRating(Record("p000", "A", "expert", kB, 2)); }),
            ErrorKind::kNotFound);
  EXPECT_EQ(KindOf([&] { service->SubmitRating(Record("p009", "A", "r1", kB)); }),
            ErrorKind::kNotFound);
  EXPECT_EQ(KindOf([&] { service->SubmitRating(Record("p000", "Z", "r1", kB)); }),
            ErrorKind::kNotFound);
  EXPECT_EQ(KindOf([&] { service->SubmitRating(Record("p000", "A", "expert", kB)); }),
            ErrorKind::kPermission);
  EXPECT_EQ(KindOf([&] { service->SubmitRating(Record("p000", "A", "ghost", kB)); }),
            ErrorKind::kPermission);
  EXPECT_EQ(KindOf([&] { service->SubmitRating(Record("p000", "A", "r2", kB, 3)); }),
            ErrorKind::kInvalidArgument);
  // Rejected submissions leave no trace.
  EXPECT_EQ(service->RatingLog().size(), 1u);
  EXPECT_EQ(service->event_count(), 1u);

  service->SubmitRating(Record("p000", "B", "r1", kG, 1, true));
  service->SubmitRating(Record("p000", "B", "expert", kG, 2));
  EXPECT_EQ(KindOf([&] { service->SubmitRating(Record("p000", "B", "expert", kB, 2)); }),
            ErrorKind::kDuplicate);
}

TEST_F(ReviewServiceTest, Authentication) {
  auto service = Open();
  EXPECT_NO_THROW(service->Authenticate("r1", std::nullopt));
  EXPECT_NO_THROW(service->Authenticate("r1", "anything"));
  EXPECT_NO_THROW(service->Authenticate("lead", "s3cret"));
  EXPECT_EQ(KindOf([&] { service->Authenticate("lead", std::nullopt); }),
            ErrorKind::kPermission);
  EXPECT_EQ(KindOf([&] { service->Authenticate("lead", "wrong"); }), ErrorKind::kPermission);
  EXPECT_EQ(KindOf([&] { service->Authenticate("ghost", std::nullopt); }),
            ErrorKind::kPermission);
}

TEST_F(ReviewServiceTest, CorrectionPreconditions) {
  auto service = Open();
  const RleDocument good = EncodeRle(CorrectionMask());
  // Nothing rated yet.
  EXPECT_EQ(KindOf([&] { service->SubmitCorrection("p002", good); }),
            ErrorKind::kPrecondition);
  EXPECT_EQ(KindOf([&] { service->SubmitCorrection("p404", good); }), ErrorKind::kNotFound);
  RateFourPatchTable(*service);
  // p000 has good ratings.
  EXPECT_EQ(KindOf([&] { service->SubmitCorrection("p000", good); }),
            ErrorKind::kPrecondition);

  RleDocument overlapping{8, 8, {{1, {{0, 4}}}, {2, {{2, 3}}}}};
  EXPECT_EQ(KindOf([&] { service->SubmitCorrection("p002", overlapping); }),
            ErrorKind::kInvalidArgument);
  RleDocument out_of_bounds{8, 8, {{1, {{60, 10}}}}};
  EXPECT_EQ(KindOf([&] { service->SubmitCorrection("p002", out_of_bounds); }),
            ErrorKind::kInvalidArgument);
  EXPECT_EQ(KindOf([&] { service->SubmitCorrection("p002", EncodeRle(InstanceMask(4, 8))); }),
            ErrorKind::kInvalidArgument);
  EXPECT_FALSE(service->Correction("p002").has_value());
  const std::size_t events = service->event_count();

  service->SubmitCorrection("p002", good);
  EXPECT_EQ(service->event_count(), events + 1);
  ASSERT_TRUE(service->Correction("p002").has_value());
  EXPECT_EQ(*service->Correction("p002"), CorrectionMask());
  EXPECT_TRUE(std::filesystem::exists(dir_ / "corrections" / "p002.rle.json"));
  EXPECT_EQ(service->Stats()["corrections"], 1);

  const EnrichmentManifest combined = service->BuildEnrichment(Strategy::kCombined, {});
  std::set<std::string> ids;
  for (const EnrichmentItem& item : combined.items) ids.insert(item.id());
  EXPECT_TRUE(ids.contains("p002:corrected"));
  EXPECT_TRUE(ids.contains("p003:C"));
  EXPECT_EQ(combined.gamma_s, 0.85);
  // Good pseudo labels: A on p000/p001, B on p000, C on p003, plus one correction.
  EXPECT_EQ(combined.n_train(), 5u);
}

TEST_F(ReviewServiceTest, StatsOnEmptyLog) {
  auto service = Open();
  const Json stats = service->Stats();
  EXPECT_EQ(stats["models"], Json({"A", "B", "C"}));
  EXPECT_EQ(stats["patches"]["total"], 4);
  EXPECT_EQ(stats["patches"]["complete"], 0);
  EXPECT_EQ(stats["agreement"]["values"], Json::array());
  EXPECT_TRUE(stats["breakdown"].is_null());
  EXPECT_EQ(stats["queue_depths"]["1"], 12);
  EXPECT_EQ(stats["queue_depths"]["2"], 0);
  EXPECT_EQ(stats["unresolved"], 12);
  EXPECT_EQ(stats["distribution"]["fused"]["good"], 0);
  EXPECT_EQ(stats["distribution"]["per_model"]["A"]["bad"], 0);
}

TEST_F(ReviewServiceTest, StatsOnFourPatchTable) {
  auto service = Open();
  RateFourPatchTable(*service);
  const Json stats = service->Stats();
  EXPECT_EQ(stats["patches"]["complete"], 4);
  const Json& values = stats["agreement"]["values"];
  EXPECT_DOUBLE_EQ(values[0][1].get<double>(), 0.75);
  EXPECT_DOUBLE_EQ(values[0][2].get<double>(), 0.25);
  EXPECT_DOUBLE_EQ(values[1][2].get<double>(), 0.5);
  const Json& a = stats["distribution"]["per_model"]["A"];
  EXPECT_EQ(a["good"], 2);
  EXPECT_EQ(a["medium"], 1);
  EXPECT_EQ(a["bad"], 1);
  const Json& fused = stats["distribution"]["fused"];
  EXPECT_EQ(fused["good"], 3);
  EXPECT_EQ(fused["medium"], 0);
  EXPECT_EQ(fused["bad"], 1);
  EXPECT_EQ(stats["breakdown"]["good"], Json({{"all_agree", 0}, {"two_agree", 3}, {"none_agree", 0}}));
  EXPECT_EQ(stats["breakdown"]["bad"], Json({{"all_agree", 1}, {"two_agree", 0}, {"none_agree", 0}}));
  EXPECT_EQ(stats["queue_depths"]["1"], 0);
  EXPECT_EQ(stats["ratings_logged"], 24);
  EXPECT_EQ(stats["unresolved"], 0);
  // Reading stats has no side effects.
  EXPECT_EQ(service->StatsText(), service->StatsText());
  EXPECT_EQ(service->event_count(), 24u);
}

TEST_F(ReviewServiceTest, IncompletePatchesAreExcludedFromStats) {
  auto service = Open();
  service->SubmitRating(Record("p000", "A", "r1", kG));
  service->SubmitRating(Record("p000", "A", "r2", kG));
  service->SubmitRating(Record("p000", "B", "r1", kG));
  service->SubmitRating(Record("p000", "B", "r2", kG));
  const Json stats = service->Stats();
  EXPECT_EQ(stats["patches"]["complete"], 0);
  EXPECT_EQ(stats["distribution"]["fused"]["good"], 0);
  EXPECT_EQ(stats["unresolved"], 10);
}

TEST_F(ReviewServiceTest, ReplayReproducesState) {
  std::string stats;
  RatingTable table;
  std::vector<RatingRecord> log;
  {
    auto service = Open();
    RateFourPatchTable(*service);
    service->SubmitCorrection("p002", EncodeRle(CorrectionMask()));
    stats = service->StatsText();
    table = service->FinalRatings();
    log = service->RatingLog();
  }
  auto replayed = Open();
  EXPECT_EQ(replayed->StatsText(), stats);
  EXPECT_EQ(replayed->FinalRatings(), table);
  EXPECT_EQ(replayed->RatingLog().size(), log.size());
  EXPECT_EQ(replayed->event_count(), 25u);
  EXPECT_EQ(replayed->Correction("p002"), CorrectionMask());
  // Duplicates are still detected after a restart.
  EXPECT_EQ(KindOf([&] { replayed->SubmitRating(Record("p000", "A", "r1", kG)); }),
            ErrorKind::kDuplicate);
}

TEST_F(ReviewServiceTest, ReplayOfEscalationsAndVerdicts) {
  std::string stats;
  {
    auto service = Open();
    service->SubmitRating(Record("p000", "A", "r1", kG));
    service->SubmitRating(Record("p000", "A", "r2", kB));
    service->SubmitRating(Record("p001", "A", "r1", kM, 1, true));
    service->SubmitRating(Record("p000", "A", "expert", kM, 2));
    stats = service->StatsText();
  }
  auto replayed = Open();
  EXPECT_EQ(replayed->StatsText(), stats);
  EXPECT_EQ(replayed->FinalRatings().Get("p000", "A"), kM);
  const auto item = replayed->NextItem("expert", 2);
  ASSERT_TRUE(item.has_value());
  EXPECT_EQ(item->item_id, "2/p001/A");
}

TEST_F(ReviewServiceTest, TornFinalLineIsDiscarded) {
  std::string stats;
  {
    auto service = Open();
    service->SubmitRating(Record("p000", "A", "r1", kG));
    service->SubmitRating(Record("p000", "A", "r2", kG));
    stats = service->StatsText();
  }
  const auto log_path = dir_ / "events.jsonl";
  const auto intact = std::filesystem::file_size(log_path);
  std::ofstream(log_path, std::ios::app) << R"({"event":"rating","record":{"patch)";
  {
    auto replayed = Open();
    EXPECT_EQ(replayed->StatsText(), stats);
    EXPECT_EQ(std::filesystem::file_size(log_path), intact);
    replayed->SubmitRating(Record("p000", "B", "r1", kG));
  }
  EXPECT_EQ(Open()->event_count(), 3u);
}

TEST_F(ReviewServiceTest, CompleteFinalLineWithoutNewlineIsKept) {
  {
    auto service = Open();
    service->SubmitRating(Record("p000", "A", "r1", kG));
  }
  const auto log_path = dir_ / "events.jsonl";
  std::string text = ReadTextFile(log_path);
  text.pop_back();
  WriteTextFile(log_path, text);
  {
    auto replayed = Open();
    EXPECT_EQ(replayed->event_count(), 1u);
    replayed->SubmitRating(Record("p000", "A", "r2", kG));
  }
  EXPECT_EQ(Open()->FinalRatings().Get("p000", "A"), kG);
}

TEST_F(ReviewServiceTest, CorruptInteriorLineFails) {
  WriteTextFile(dir_ / "events.jsonl", "not json\n{}\n");
  EXPECT_EQ(KindOf([&] { Open(); }), ErrorKind::kInvalidArgument);
  WriteTextFile(dir_ / "events.jsonl", R"({"event":"teleport"})" "\n");
  EXPECT_EQ(KindOf([&] { Open(); }), ErrorKind::kInvalidArgument);
}

TEST_F(ReviewServiceTest, LogEnvelopeShape) {
  {
    auto service = Open();
    service->SubmitRating(Record("p000", "A", "r1", kG));
  }
  const Json event = Json::parse(SplitLines(ReadTextFile(dir_ / "events.jsonl")).at(0));
  EXPECT_EQ(event["event"], "rating");
  EXPECT_EQ(event["record"]["patch_id"], "p000");
  EXPECT_EQ(event["record"]["rating"], "good");
  EXPECT_TRUE(event.contains("review_seconds"));
}

TEST_F(ReviewServiceTest, SnapshotsAreWrittenPeriodically) {
  ReviewConfig config = TwoRaterConfig(dir_.path());
  config.snapshot_every = 2;
  ReviewService service(config, ScanPatchDirectory(dir_.path()));
  for (const char* model : {"A", "B", "C"}) {
    service.SubmitRating(Record("p000", model, "r1", kG));
  }
  service.SubmitRating(Record("p000", "A", "r2", kG));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "snapshots" / "stats-2.json"));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "snapshots" / "stats-4.json"));
  EXPECT_FALSE(std::filesystem::exists(dir_ / "snapshots" / "stats-3.json"));
  const Json snapshot = ParseJson(ReadTextFile(dir_ / "snapshots" / "stats-4.json"));
  EXPECT_EQ(snapshot["events"], 4);
  EXPECT_EQ(snapshot["stats"], service.Stats());
}

TEST_F(ReviewServiceTest, SingleRaterConfiguration) {
  ReviewConfig config = TwoRaterConfig(dir_.path());
  config.round_one_raters_required = 1;
  ReviewService service(config, ScanPatchDirectory(dir_.path()));
  EXPECT_EQ(service.SubmitRating(Record("p000", "A", "r1", kB)).item.status, ItemStatus::kRated);
  EXPECT_EQ(service.FinalRatings().Get("p000", "A"), kB);
  config.round_one_raters_required = 0;
  EXPECT_EQ(KindOf([&] { ReviewService(config, ScanPatchDirectory(dir_.path())); }),
            ErrorKind::kInvalidArgument);
}

TEST_F(ReviewServiceTest, ConcurrentRatersLoseNoUpdates) {
  ReviewConfig config = TwoRaterConfig(dir_.path());
  for (int i = 0; i < 8; ++i) config.raters.push_back({"c" + std::to_string(i), {1}, std::nullopt});
  config.round_one_raters_required = 8;
  std::vector<std::vector<std::string>> served(8);
  std::string stats;
  {
    ReviewService service(config, ScanPatchDirectory(dir_.path()));
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) {
      threads.emplace_back([&, i] {
        const std::string rater = "c" + std::to_string(i);
        while (const auto item = service.NextItem(rater, 1)) {
          served[i].push_back(item->item_id);
          service.SubmitRating(Record(item->patch_id, item->model_id, rater, kG));
        }
      });
    }
    for (std::thread& t : threads) t.join();
    // Every rater saw every item exactly once.
    for (const auto& items : served) {
      EXPECT_EQ(items.size(), 12u);
      EXPECT_EQ(std::set<std::string>(items.begin(), items.end()).size(), 12u);
    }
    EXPECT_EQ(service.RatingLog().size(), 96u);
    EXPECT_EQ(service.FinalRatings().size(), 12u);
    stats = service.StatsText();
  }
  ReviewService replayed(config, ScanPatchDirectory(dir_.path()));
  EXPECT_EQ(replayed.StatsText(), stats);
  EXPECT_EQ(replayed.event_count(), 96u);
}

TEST(RaterFileTest, LoadsRatersAndQuorum) {
  TempDir dir;
  WriteTextFile(dir / "raters.json",
                R"({"raters":[{"id":"a","rounds":[1]},{"id":"b","rounds":[1,2],"token":"t"}],)"
                R"("round_one_raters_required":3})");
  ReviewConfig config;
  LoadRaterFile(dir / "raters.json", config);
  ASSERT_EQ(config.raters.size(), 2u);
  EXPECT_EQ(config.raters[1].rounds, (std::set<int>{1, 2}));
  EXPECT_EQ(config.raters[1].token, "t");
  EXPECT_FALSE(config.raters[0].token.has_value());
  EXPECT_EQ(config.round_one_raters_required, 3);
  WriteTextFile(dir / "bad.json", R"({"raters":[{"id":"a","rounds":[3]}]})");
  EXPECT_EQ(KindOf([&] { LoadRaterFile(dir / "bad.json", config); }),
            ErrorKind::kInvalidArgument);
}

}  // namespace
}  // namespace nuclei_curation
