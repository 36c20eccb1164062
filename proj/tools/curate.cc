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

// curate: batch front end for the curation pipeline and launcher for the
// review service. Run `curate <command> --help` for the flags of a command.
//
// Exit status: 0 ok, 1 usage error, 2 data error, 3 I/O error.

#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "nuclei_curation/enrichment.h"
#include "nuclei_curation/error.h"
#include "nuclei_curation/json_io.h"
#include "nuclei_curation/mask.h"
#include "nuclei_curation/matching.h"
#include "nuclei_curation/parallel.h"
#include "nuclei_curation/patch.h"
#include "nuclei_curation/png_io.h"
#include "nuclei_curation/rating.h"
#include "nuclei_curation/review.h"
#include "nuclei_curation/review_server.h"

namespace nc = nuclei_curation;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitIo = 3;

// Reads --config files written as JSON. Nested objects address
// subcommands: {"tile": {"count": 8}}.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool,
                        std::string) const override {
    return "{}\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nc::Json json;
    try {
      json = nc::Json::parse(input);
    } catch (const nc::Json::exception& e) {
      throw CLI::ConfigError(std::string("config file: ") + e.what(),
                             CLI::ExitCodes::ConfigError);
    }
    if (!json.is_object()) {
      throw CLI::ConfigError("config file must hold a JSON object",
                             CLI::ExitCodes::ConfigError);
    }
    std::vector<CLI::ConfigItem> items;
    Flatten(json, {}, items);
    return items;
  }

 private:
  static std::string Scalar(const nc::Json& value) {
    if (value.is_string()) return value.get<std::string>();
    return value.dump();
  }

  static void Flatten(const nc::Json& object, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : object.items()) {
      if (value.is_object()) {
        std::vector<std::string> nested = parents;
        nested.push_back(key);
        Flatten(value, nested, items);
        continue;
      }
      if (value.is_null()) continue;
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const nc::Json& element : value) item.inputs.push_back(Scalar(element));
      } else {
        item.inputs.push_back(Scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

void Emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
  } else {
    nc::WriteTextFile(path, text);
  }
}

std::int64_t NowSeconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

bool EndsWith(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<fs::path> SortedFiles(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw nc::Error(nc::ErrorKind::kIo, "cli", "not a directory: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

// Name without a mask suffix, or nullopt for files that are not masks.
std::optional<std::string> MaskStem(const fs::path& file) {
  const std::string name = file.filename().string();
  for (const std::string suffix : {".mask.png", ".rle.json"}) {
    if (EndsWith(name, suffix)) return name.substr(0, name.size() - suffix.size());
  }
  return std::nullopt;
}

// patch_id -> mask file. With `model`, only <patch>.<model>.* files count.
std::map<std::string, fs::path> ListMasks(const fs::path& dir,
                                          const std::string& model = "") {
  std::map<std::string, fs::path> masks;
  for (const fs::path& file : SortedFiles(dir)) {
    std::optional<std::string> stem = MaskStem(file);
    if (!stem) continue;
    if (!model.empty()) {
      if (!EndsWith(*stem, "." + model)) continue;
      stem->resize(stem->size() - model.size() - 1);
    }
    // .mask.png sorts before .rle.json and wins.
    masks.emplace(*stem, file);
  }
  return masks;
}

// Reads plain RatingRecord lines as well as service event logs.
std::vector<nc::RatingRecord> ReadRatings(const fs::path& path) {
  std::vector<nc::RatingRecord> records;
  std::size_t line_no = 0;
  for (const std::string& line : nc::SplitLines(nc::ReadTextFile(path))) {
    ++line_no;
    if (line.empty()) continue;
    const nc::Json json =
        nc::ParseJson(line, path.string() + ":" + std::to_string(line_no));
    if (json.contains("event")) {
      if (json["event"] == "rating") records.push_back(nc::RatingRecordFromJson(json["record"]));
      continue;
    }
    records.push_back(nc::RatingRecordFromJson(json));
  }
  return records;
}

std::set<std::string> CorrectedPatches(const std::vector<std::string>& ids,
                                       const std::string& dir) {
  std::set<std::string> corrected(ids.begin(), ids.end());
  if (!dir.empty()) {
    for (const fs::path& file : SortedFiles(dir)) {
      if (const auto stem = MaskStem(file)) corrected.insert(*stem);
    }
  }
  return corrected;
}

void ParseRaterSpec(const std::string& spec, nc::ReviewConfig& config) {
  // id:rounds[:token], rounds as "1", "2", "12" or "1,2".
  const std::size_t first = spec.find(':');
  if (first == std::string::npos || first == 0) {
    throw CLI::ValidationError("--rater", "expected id:rounds[:token], got " + spec);
  }
  const std::size_t second = spec.find(':', first + 1);
  nc::RaterConfig rater;
  rater.id = spec.substr(0, first);
  const std::string rounds = spec.substr(
      first + 1, second == std::string::npos ? std::string::npos : second - first - 1);
  for (char c : rounds) {
    if (c == '1' || c == '2') {
      rater.rounds.insert(c - '0');
    } else if (c != ',') {
      throw CLI::ValidationError("--rater", "rounds must be 1 and/or 2 in " + spec);
    }
  }
  if (rater.rounds.empty()) {
    throw CLI::ValidationError("--rater", "no rounds given in " + spec);
  }
  if (second != std::string::npos) rater.token = spec.substr(second + 1);
  config.raters.push_back(std::move(rater));
}

// ---------------------------------------------------------------------------
// Subcommands

struct TileArgs {
  std::vector<std::string> inputs;
  std::string out;
  nc::TileConfig tile;
  nc::PatchTags tags;
  unsigned threads = 0;
};

void RunTile(const TileArgs& args) {
  std::vector<fs::path> sources;
  for (const std::string& input : args.inputs) {
    if (fs::is_directory(input)) {
      for (const fs::path& file : SortedFiles(input)) {
        if (file.extension() == ".png") sources.push_back(file);
      }
    } else {
      sources.push_back(input);
    }
  }
  if (sources.empty()) {
    throw nc::Error(nc::ErrorKind::kInvalidArgument, "cli", "no source images found");
  }
  fs::create_directories(args.out);
  std::vector<std::vector<nc::PatchRecord>> per_source(sources.size());
  nc::ParallelFor(sources.size(), args.threads, [&](std::size_t i) {
    const nc::RgbImage image = nc::ReadRgbPng(sources[i]);
    per_source[i] = nc::TileImage(sources[i].string(), {image.width, image.height},
                                  args.tile, args.tags);
    for (const nc::PatchRecord& record : per_source[i]) {
      nc::WriteRgbPng(fs::path(args.out) / (record.patch_id + ".png"),
                      nc::CropPatch(image, record));
    }
  });
  const nc::PatchManifest manifest = nc::IngestDataset(per_source, nc::PngHeaderProbe());
  nc::WritePatchManifest(fs::path(args.out) / "manifest.jsonl", manifest.records);
  nc::WriteTextFile(fs::path(args.out) / "summary.json",
                    nc::SummaryToJson(manifest).dump(2) + "\n");
  std::cout << nc::SummaryToJson(manifest).dump() << "\n";
}

struct QcArgs {
  std::string input;
  std::string manifest;
  std::string kept;
  std::string out = "-";
  nc::QcConfig qc;
};

void RunQc(const QcArgs& args) {
  args.qc.Check();
  std::vector<std::pair<std::string, fs::path>> patches;
  std::vector<nc::PatchRecord> records;
  if (!args.manifest.empty()) {
    records = nc::ReadPatchManifest(args.manifest);
    for (const nc::PatchRecord& r : records) {
      patches.emplace_back(r.patch_id, fs::path(args.input) / (r.patch_id + ".png"));
    }
  } else {
    for (const fs::path& file : SortedFiles(args.input)) {
      const std::string name = file.filename().string();
      if (file.extension() != ".png" || EndsWith(name, ".mask.png")) continue;
      patches.emplace_back(file.stem().string(), file);
    }
  }
  std::string report;
  std::set<std::string> keep;
  for (const auto& [id, path] : patches) {
    const nc::QcVerdict verdict = nc::QcFilter(nc::ReadRgbPng(path), args.qc);
    if (verdict.keep) keep.insert(id);
    nc::Json line = {{"patch_id", id},
                     {"keep", verdict.keep},
                     {"reason", verdict.keep ? nc::Json(nullptr) : nc::Json(verdict.reason)},
                     {"tissue_fraction", verdict.tissue_fraction},
                     {"mean_brightness", verdict.mean_brightness}};
    report += line.dump() + "\n";
  }
  Emit(args.out, report);
  if (!args.kept.empty()) {
    std::vector<nc::PatchRecord> kept;
    for (const nc::PatchRecord& r : records) {
      if (keep.contains(r.patch_id)) kept.push_back(r);
    }
    nc::WritePatchManifest(args.kept, kept);
  }
}

struct EvaluateArgs {
  std::string gt;
  std::string pred;
  std::string model;
  double iou = nc::kDefaultIouThreshold;
  std::string mode = "micro";
  std::string out = "-";
  unsigned threads = 0;
};

void RunEvaluate(const EvaluateArgs& args) {
  const nc::AggregationMode mode = nc::ParseAggregationMode(args.mode);
  const auto gt_files = ListMasks(args.gt);
  const auto pred_files = ListMasks(args.pred, args.model);
  if (gt_files.empty()) {
    throw nc::Error(nc::ErrorKind::kInvalidArgument, "cli", "no GT masks in " + args.gt);
  }
  std::vector<nc::PatchPair> pairs;
  for (const auto& [patch, gt_path] : gt_files) {
    const auto it = pred_files.find(patch);
    if (it == pred_files.end()) {
      throw nc::Error(nc::ErrorKind::kNotFound, "cli", "no prediction for patch " + patch);
    }
    pairs.push_back({patch, nc::ReadMaskFile(gt_path), nc::ReadMaskFile(it->second)});
  }
  for (const auto& [patch, path] : pred_files) {
    if (!gt_files.contains(patch)) {
      throw nc::Error(nc::ErrorKind::kNotFound, "cli", "no GT for patch " + patch);
    }
  }
  const std::vector<nc::PatchEvaluation> evaluations =
      nc::EvaluatePatches(pairs, args.iou, args.threads);
  std::vector<nc::MatchResult> matches;
  for (const nc::PatchEvaluation& e : evaluations) matches.push_back(e.match);
  const nc::Metrics metrics = nc::Aggregate(matches, mode);
  Emit(args.out, nc::MetricsReportToJson(mode, metrics, evaluations).dump(2) + "\n");
}

struct AutoRateArgs {
  std::string gt;
  std::string pred;
  std::vector<std::string> models;
  nc::RatingConfig rating;
  std::string rater = "auto";
  std::string out = "-";
  std::string capture_out;
  bool deterministic = false;
  unsigned threads = 0;
};

void RunAutoRate(const AutoRateArgs& args) {
  args.rating.Check();
  const auto gt_files = ListMasks(args.gt);
  struct Job {
    std::string patch;
    std::string model;
    fs::path pred;
    double capture = 0.0;
    nc::Rating rating = nc::Rating::kBad;
  };
  std::vector<Job> jobs;
  for (const fs::path& file : SortedFiles(args.pred)) {
    const auto stem = MaskStem(file);
    if (!stem) continue;
    const std::size_t dot = stem->rfind('.');
    if (dot == std::string::npos || dot == 0) {
      throw nc::Error(nc::ErrorKind::kInvalidArgument, "cli",
                      "prediction " + file.string() + " is not named <patch>.<model>.*");
    }
    Job job{stem->substr(0, dot), stem->substr(dot + 1), file};
    if (!args.models.empty() &&
        std::find(args.models.begin(), args.models.end(), job.model) == args.models.end()) {
      continue;
    }
    if (!jobs.empty() && jobs.back().patch == job.patch && jobs.back().model == job.model) {
      continue;  // .rle.json duplicate of a .mask.png.
    }
    if (!gt_files.contains(job.patch)) {
      throw nc::Error(nc::ErrorKind::kNotFound, "cli", "no GT for patch " + job.patch);
    }
    jobs.push_back(std::move(job));
  }
  if (jobs.empty()) {
    throw nc::Error(nc::ErrorKind::kInvalidArgument, "cli", "no predictions in " + args.pred);
  }
  nc::ParallelFor(jobs.size(), args.threads, [&](std::size_t i) {
    const nc::InstanceMask gt = nc::ReadMaskFile(gt_files.at(jobs[i].patch));
    const nc::InstanceMask pred = nc::ReadMaskFile(jobs[i].pred);
    jobs[i].capture = nc::CaptureFraction(gt, pred, args.rating.iou_threshold);
    jobs[i].rating = nc::RatingFromCapture(jobs[i].capture, args.rating);
  });
  const std::int64_t now = args.deterministic ? 0 : NowSeconds();
  std::string log;
  nc::Json capture = nc::Json::object();
  for (const Job& job : jobs) {
    nc::RatingRecord record{job.patch, job.model, args.rater, 1, job.rating, false, now};
    log += nc::ToJson(record).dump() + "\n";
    capture[job.patch][job.model] = job.capture;
  }
  Emit(args.out, log);
  if (!args.capture_out.empty()) nc::WriteTextFile(args.capture_out, capture.dump(2) + "\n");
}

struct RatingsArgs {
  std::string ratings;
  int required = 1;
  std::string out = "-";
};

void RunFuse(const RatingsArgs& args) {
  const std::vector<nc::RatingRecord> records = ReadRatings(args.ratings);
  const nc::FoldResult fold = nc::FoldRatings(records, args.required);
  const std::vector<std::string> models = fold.table.models();
  nc::Json patches = nc::Json::array();
  for (const std::string& patch : fold.table.patches()) {
    nc::Json ratings = nc::Json::object();
    std::vector<nc::Rating> row;
    for (const auto& [model, rating] : fold.table.Row(patch)) {
      ratings[model] = nc::ToString(rating);
      row.push_back(rating);
    }
    const bool complete = row.size() == models.size();
    patches.push_back({{"patch_id", patch},
                       {"ratings", std::move(ratings)},
                       {"fused", complete ? nc::Json(nc::ToString(nc::FuseRatings(row)))
                                          : nc::Json(nullptr)}});
  }
  nc::Json unresolved = nc::Json::array();
  for (const auto& [patch, model] : fold.unresolved) {
    unresolved.push_back({{"patch_id", patch}, {"model_id", model}});
  }
  const nc::Json out = {{"models", models},
                        {"patches", std::move(patches)},
                        {"unresolved", std::move(unresolved)}};
  Emit(args.out, out.dump(2) + "\n");
}

void RunAgreement(const RatingsArgs& args, const std::string& group_by) {
  if (group_by != "fused" && group_by != "model") {
    throw CLI::ValidationError("--group-by", "must be fused or model");
  }
  const nc::FoldResult fold = nc::FoldRatings(ReadRatings(args.ratings), args.required);
  const nc::RatingTable table = fold.table.CompleteSubset();
  if (table.empty()) {
    throw nc::Error(nc::ErrorKind::kPrecondition, "cli",
                    "no patch has a final rating from every model");
  }
  nc::Json out = {{"models", table.models()},
                  {"patches", table.size()},
                  {"distribution", nc::ToJson(nc::ComputeDistribution(table))},
                  {"agreement", nc::ToJson(nc::ComputeAgreementMatrix(table))},
                  {"group_by", group_by}};
  if (table.models().size() != 3) {
    out["breakdown"] = nullptr;
  } else if (group_by == "fused") {
    out["breakdown"] = nc::ToJson(nc::ComputeAgreementBreakdown(table));
  } else {
    nc::Json by_model = nc::Json::object();
    for (const auto& [model, breakdown] : nc::ComputeAgreementBreakdownByModel(table)) {
      by_model[model] = nc::ToJson(breakdown);
    }
    out["breakdown"] = std::move(by_model);
  }
  Emit(args.out, out.dump(2) + "\n");
}

struct ManifestArgs {
  RatingsArgs ratings;
  std::string strategy = "combined";
  std::vector<std::string> corrected;
  std::string corrections_dir;
  bool dedupe = false;
  std::string capture;
  std::optional<double> gamma;
  std::uint64_t seed = 0;
};

void RunManifest(const ManifestArgs& args) {
  const nc::FoldResult fold =
      nc::FoldRatings(ReadRatings(args.ratings.ratings), args.ratings.required);
  nc::ManifestOptions options;
  options.dedupe = args.dedupe;
  if (!args.capture.empty()) {
    const nc::Json capture = nc::ParseJson(nc::ReadTextFile(args.capture), args.capture);
    for (const auto& [patch, by_model] : capture.items()) {
      for (const auto& [model, value] : by_model.items()) {
        options.capture[{patch, model}] = value.get<double>();
      }
    }
  }
  nc::EnrichmentManifest manifest =
      nc::BuildManifest(fold.table.CompleteSubset(),
                        CorrectedPatches(args.corrected, args.corrections_dir),
                        nc::ParseStrategy(args.strategy), options);
  if (args.gamma) {
    manifest = nc::ApplySamplingWeights(std::move(manifest), {*args.gamma, args.seed});
  }
  Emit(args.ratings.out, nc::ManifestToNdjson(manifest));
}

struct SplitArgs {
  std::string manifest;
  std::vector<double> fractions = {0.25, 0.5, 0.75, 1.0};
  std::uint64_t seed = 0;
  std::string out_dir;
};

void RunSplit(const SplitArgs& args) {
  const nc::EnrichmentManifest manifest = nc::ReadManifest(args.manifest);
  const std::vector<nc::EnrichmentManifest> splits =
      nc::IncrementalSplit(manifest, args.fractions, args.seed);
  fs::create_directories(args.out_dir);
  nc::Json summary = nc::Json::array();
  for (std::size_t i = 0; i < splits.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "split-%g.jsonl", args.fractions[i] * 100.0);
    const fs::path path = fs::path(args.out_dir) / name;
    nc::WriteManifest(path, splits[i]);
    summary.push_back({{"fraction", args.fractions[i]},
                       {"n_train", splits[i].n_train()},
                       {"path", path.string()}});
  }
  std::cout << summary.dump(2) << "\n";
}

struct WeightsArgs {
  std::string manifest;
  nc::SamplingConfig sampling;
  std::string out = "-";
};

void RunWeights(const WeightsArgs& args) {
  Emit(args.out, nc::ManifestToNdjson(nc::ApplySamplingWeights(
                     nc::ReadManifest(args.manifest), args.sampling)));
}

struct ScheduleArgs {
  std::string manifest;
  std::uint64_t draws = 0;
  std::uint64_t seed = 0;
  std::string out = "-";
};

void RunSchedule(const ScheduleArgs& args) {
  const std::vector<std::string> ids =
      nc::SampleEpoch(nc::ReadManifest(args.manifest), args.draws, args.seed);
  std::string text;
  for (const std::string& id : ids) text += id + "\n";
  Emit(args.out, text);
}

struct ServiceArgs {
  std::string listen = "127.0.0.1:8080";
  std::string data_dir;
  std::string log_path;
  std::string rater_file;
  std::vector<std::string> raters;
  std::optional<int> required;
  std::size_t snapshot_every = 100;
  bool deterministic = false;
};

nc::ReviewConfig MakeReviewConfig(const ServiceArgs& args) {
  nc::ReviewConfig config;
  config.data_dir = args.data_dir;
  if (!args.log_path.empty()) config.log_path = args.log_path;
  if (!args.rater_file.empty()) nc::LoadRaterFile(args.rater_file, config);
  for (const std::string& spec : args.raters) ParseRaterSpec(spec, config);
  if (args.required) config.round_one_raters_required = *args.required;
  config.snapshot_every = args.snapshot_every;
  config.deterministic = args.deterministic;
  return config;
}

int RunServe(const ServiceArgs& args) {
  std::string host = "127.0.0.1";
  int port = 8080;
  nc::ParseListenAddress(args.listen, host, port);

  // Signals are taken synchronously by one thread; block them everywhere
  // else before any worker thread exists.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  nc::ReviewService service = nc::ReviewService::Open(MakeReviewConfig(args));
  nc::ReviewHttpServer server(service);
  const int bound = server.Bind(host, port);
  std::cout << "listening on " << host << ":" << bound << std::endl;

  std::atomic<bool> done{false};
  std::atomic<bool> signalled{false};
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    signalled = true;
    // Stop() is a no-op until the listen loop runs, so repeat it.
    while (!done) {
      server.Stop();
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  });
  server.Listen();
  done = true;
  if (!signalled) pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  std::cerr << "curate: review service stopped after " << service.event_count()
            << " events\n";
  return kExitOk;
}

void RunStats(const ServiceArgs& args, const std::string& out) {
  ServiceArgs offline = args;
  offline.snapshot_every = 0;
  nc::ReviewService service = nc::ReviewService::Open(MakeReviewConfig(offline));
  Emit(out, service.StatsText() + "\n");
}

// ---------------------------------------------------------------------------

void AddServiceOptions(CLI::App* cmd, ServiceArgs& args) {
  cmd->add_option("--data-dir", args.data_dir, "Directory with staged patches and masks")
      ->envname("DATA_DIR")
      ->required();
  cmd->add_option("--log-path", args.log_path, "Event log (default <data-dir>/events.jsonl)")
      ->envname("LOG_PATH");
  cmd->add_option("--raters", args.rater_file, "JSON rater registry");
  cmd->add_option("--rater", args.raters, "Register a rater as id:rounds[:token]");
  cmd->add_option("--round-one-raters", args.required,
                  "Concurring round-1 ratings needed for a final verdict")
      ->check(CLI::PositiveNumber);
}

int RunWithErrors(const std::function<int()>& body) {
  try {
    return body();
  } catch (const nc::Error& e) {
    std::cerr << "curate: " << e.what() << "\n";
    return e.kind() == nc::ErrorKind::kIo ? kExitIo : kExitData;
  } catch (const CLI::Error& e) {
    std::cerr << "curate: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nc::Json::exception& e) {
    std::cerr << "curate: json: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "curate: io: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "curate: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nuclei segmentation curation pipeline"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file with default flag values");

  std::function<int()> run;

  TileArgs tile;
  CLI::App* tile_cmd = app.add_subcommand("tile", "Cut random patches from source images");
  tile_cmd->add_option("--input", tile.inputs, "Source PNG files or directories")->required();
  tile_cmd->add_option("--out", tile.out, "Output directory")->required();
  tile_cmd->add_option("--count", tile.tile.count, "Patches per image")
      ->check(CLI::PositiveNumber);
  tile_cmd->add_option("--size", tile.tile.size, "Patch side in pixels")
      ->check(CLI::PositiveNumber);
  tile_cmd->add_option("--seed", tile.tile.seed, "Random seed");
  tile_cmd->add_option("--stain", tile.tags.stain, "Stain tag");
  tile_cmd->add_option("--species", tile.tags.species, "Species tag");
  tile_cmd->add_option("--dataset", tile.tags.dataset, "Dataset tag");
  tile_cmd->add_option("--threads", tile.threads, "Worker threads (0 = all cores)");
  tile_cmd->callback([&] { run = [&] { RunTile(tile); return kExitOk; }; });

  QcArgs qc;
  CLI::App* qc_cmd = app.add_subcommand("qc", "Screen patches for background and overexposure");
  qc_cmd->add_option("--input", qc.input, "Directory of patch PNGs")->required();
  qc_cmd->add_option("--manifest", qc.manifest, "Patch manifest restricting the input");
  qc_cmd->add_option("--kept", qc.kept, "Write the manifest of kept patches here")
      ->needs(qc_cmd->get_option("--manifest"));
  qc_cmd->add_option("--out", qc.out, "Report (NDJSON), - for stdout");
  qc_cmd->add_option("--min-tissue-fraction", qc.qc.min_tissue_fraction,
                     "Minimum fraction of saturated pixels");
  qc_cmd->add_option("--saturation-threshold", qc.qc.tissue_saturation_threshold,
                     "HSV saturation counted as tissue (0-255)");
  qc_cmd->add_option("--max-brightness", qc.qc.max_mean_brightness,
                     "Maximum mean brightness (0-255)");
  qc_cmd->callback([&] { run = [&] { RunQc(qc); return kExitOk; }; });

  EvaluateArgs evaluate;
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "Instance P/R/F1 of predictions against GT");
  eval_cmd->add_option("--gt", evaluate.gt, "Directory of GT masks")->required();
  eval_cmd->add_option("--pred", evaluate.pred, "Directory of predicted masks")->required();
  eval_cmd->add_option("--model", evaluate.model,
                       "Only use <patch>.<model>.* predictions");
  eval_cmd->add_option("--iou", evaluate.iou, "IoU threshold (TP iff IoU > threshold)");
  eval_cmd->add_option("--mode", evaluate.mode, "micro or macro")
      ->check(CLI::IsMember({"micro", "macro"}));
  eval_cmd->add_option("--out", evaluate.out, "Report JSON, - for stdout");
  eval_cmd->add_option("--threads", evaluate.threads, "Worker threads (0 = all cores)");
  eval_cmd->callback([&] { run = [&] { RunEvaluate(evaluate); return kExitOk; }; });

  AutoRateArgs auto_rate;
  CLI::App* rate_cmd = app.add_subcommand("auto-rate", "Rate predictions from GT capture");
  rate_cmd->add_option("--gt", auto_rate.gt, "Directory of GT masks")->required();
  rate_cmd->add_option("--pred", auto_rate.pred,
                       "Directory of <patch>.<model>.mask.png / .rle.json")
      ->required();
  rate_cmd->add_option("--models", auto_rate.models, "Restrict to these models")
      ->delimiter(',');
  rate_cmd->add_option("--good-threshold", auto_rate.rating.good_threshold,
                       "Capture at or above this is good");
  rate_cmd->add_option("--bad-threshold", auto_rate.rating.bad_threshold,
                       "Capture below this is bad");
  rate_cmd->add_option("--iou", auto_rate.rating.iou_threshold, "IoU threshold");
  rate_cmd->add_option("--rater", auto_rate.rater, "rater_id written to records");
  rate_cmd->add_option("--out", auto_rate.out, "Ratings log (NDJSON), - for stdout");
  rate_cmd->add_option("--capture-out", auto_rate.capture_out,
                       "Write capture fractions as JSON");
  rate_cmd->add_flag("--deterministic", auto_rate.deterministic, "Zero timestamps");
  rate_cmd->add_option("--threads", auto_rate.threads, "Worker threads (0 = all cores)");
  rate_cmd->callback([&] { run = [&] { RunAutoRate(auto_rate); return kExitOk; }; });

  auto add_ratings_options = [](CLI::App* cmd, RatingsArgs& args) {
    cmd->add_option("--ratings", args.ratings, "Ratings log or service event log")
        ->required();
    cmd->add_option("--required", args.required,
                    "Concurring round-1 ratings needed for a final verdict")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", args.out, "Output file, - for stdout");
  };

  RatingsArgs fuse;
  CLI::App* fuse_cmd = app.add_subcommand("fuse", "Final and fused ratings per patch");
  add_ratings_options(fuse_cmd, fuse);
  fuse_cmd->callback([&] { run = [&] { RunFuse(fuse); return kExitOk; }; });

  RatingsArgs agreement;
  std::string group_by = "fused";
  CLI::App* agree_cmd = app.add_subcommand("agreement", "Cross-model agreement analytics");
  add_ratings_options(agree_cmd, agreement);
  agree_cmd->add_option("--group-by", group_by, "Breakdown grouping: fused or model")
      ->check(CLI::IsMember({"fused", "model"}));
  agree_cmd->callback([&] { run = [&] { RunAgreement(agreement, group_by); return kExitOk; }; });

  ManifestArgs manifest;
  CLI::App* manifest_cmd = app.add_subcommand("manifest", "Build an enrichment manifest");
  add_ratings_options(manifest_cmd, manifest.ratings);
  manifest_cmd->add_option("--strategy", manifest.strategy, "good_only, bad_only or combined")
      ->check(CLI::IsMember({"good_only", "bad_only", "combined"}));
  manifest_cmd->add_option("--corrected", manifest.corrected, "Corrected patch ids")
      ->delimiter(',');
  manifest_cmd->add_option("--corrections", manifest.corrections_dir,
                           "Directory of corrected masks (<patch>.rle.json)");
  manifest_cmd->add_flag("--dedupe", manifest.dedupe, "One pseudo label per patch");
  manifest_cmd->add_option("--capture", manifest.capture,
                           "Capture fractions JSON used by --dedupe");
  manifest_cmd->add_option("--gamma", manifest.gamma, "Also fill sampling weights");
  manifest_cmd->add_option("--seed", manifest.seed, "Seed recorded with the weights");
  manifest_cmd->callback([&] { run = [&] { RunManifest(manifest); return kExitOk; }; });

  SplitArgs split;
  CLI::App* split_cmd = app.add_subcommand("split", "Nested stratified sub-manifests");
  split_cmd->add_option("--manifest", split.manifest, "Input manifest")->required();
  split_cmd->add_option("--fractions", split.fractions, "Ascending fractions ending at 1")
      ->delimiter(',');
  split_cmd->add_option("--seed", split.seed, "Random seed");
  split_cmd->add_option("--out-dir", split.out_dir, "Output directory")->required();
  split_cmd->callback([&] { run = [&] { RunSplit(split); return kExitOk; }; });

  WeightsArgs weights;
  CLI::App* weights_cmd = app.add_subcommand("weights", "Fill oversampling weights");
  weights_cmd->add_option("--manifest", weights.manifest, "Input manifest")->required();
  weights_cmd->add_option("--gamma", weights.sampling.gamma_s, "Oversampling strength in [0,1]");
  weights_cmd->add_option("--seed", weights.sampling.seed, "Seed recorded in the header");
  weights_cmd->add_option("--out", weights.out, "Output manifest, - for stdout");
  weights_cmd->callback([&] { run = [&] { RunWeights(weights); return kExitOk; }; });

  ScheduleArgs schedule;
  CLI::App* schedule_cmd = app.add_subcommand("schedule", "Draw a weighted epoch schedule");
  schedule_cmd->add_option("--manifest", schedule.manifest, "Weighted manifest")->required();
  schedule_cmd->add_option("--draws", schedule.draws, "Number of draws")->required();
  schedule_cmd->add_option("--seed", schedule.seed, "Random seed");
  schedule_cmd->add_option("--out", schedule.out, "Schedule file, - for stdout");
  schedule_cmd->callback([&] { run = [&] { RunSchedule(schedule); return kExitOk; }; });

  ServiceArgs serve;
  CLI::App* serve_cmd = app.add_subcommand("serve", "Run the review service");
  serve_cmd->add_option("--listen", serve.listen, "host:port (port 0 picks a free port)")
      ->envname("LISTEN_ADDR");
  AddServiceOptions(serve_cmd, serve);
  serve_cmd->add_option("--snapshot-every", serve.snapshot_every,
                        "Write a stats snapshot every N events (0 = never)");
  serve_cmd->add_flag("--deterministic", serve.deterministic,
                      "Do not stamp records with the wall clock");
  serve_cmd->callback([&] { run = [&] { return RunServe(serve); }; });

  ServiceArgs stats;
  std::string stats_out = "-";
  CLI::App* stats_cmd = app.add_subcommand("stats", "Replay a review log and print stats");
  AddServiceOptions(stats_cmd, stats);
  stats_cmd->add_option("--out", stats_out, "Output file, - for stdout");
  stats_cmd->callback([&] { run = [&] { RunStats(stats, stats_out); return kExitOk; }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::FileError& e) {
    std::cerr << "curate: " << e.what() << "\n";
    return kExitIo;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }
  return RunWithErrors(run);
}
