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

#include "nuclei_curation/json_io.h"

#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nuclei_curation/error.h"
#include "nuclei_curation/png_io.h"

namespace nuclei_curation {

namespace {

constexpr char kModule[] = "json";

[[noreturn]] void Fail(const std::string& message) {
  throw Error(ErrorKind::kInvalidArgument, kModule, message);
}

const Json& Field(const Json& json, const char* key) {
  if (!json.is_object()) Fail("expected an object");
  const auto it = json.find(key);
  if (it == json.end()) Fail(std::string("missing field \"") + key + "\"");
  return *it;
}

std::string StringField(const Json& json, const char* key) {
  const Json& v = Field(json, key);
  if (!v.is_string()) Fail(std::string("field \"") + key + "\" must be a string");
  return v.get<std::string>();
}

std::int64_t IntField(const Json& json, const char* key) {
  const Json& v = Field(json, key);
  if (!v.is_number_integer()) {
    Fail(std::string("field \"") + key + "\" must be an integer");
  }
  return v.get<std::int64_t>();
}

std::uint64_t UnsignedField(const Json& json, const char* key) {
  const std::int64_t v = IntField(json, key);
  if (v < 0) Fail(std::string("field \"") + key + "\" must be non-negative");
  return static_cast<std::uint64_t>(v);
}

bool BoolField(const Json& json, const char* key) {
  const Json& v = Field(json, key);
  if (!v.is_boolean()) Fail(std::string("field \"") + key + "\" must be a boolean");
  return v.get<bool>();
}

bool EndsWith(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

Json ParseJson(const std::string& text, const std::string& context) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, kModule,
                context + ": malformed JSON (" + e.what() + ")");
  }
}

std::string FormatIso8601(std::int64_t seconds) {
  using namespace std::chrono;
  const sys_seconds t{std::chrono::seconds{seconds}};
  const sys_days day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss<std::chrono::seconds> tod{t - day};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<int>(tod.hours().count()),
                static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()));
  return buf;
}

std::int64_t ParseIso8601(const std::string& text) {
  using namespace std::chrono;
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  int consumed = 0;
  if (std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &y, &mo, &d, &h,
                  &mi, &s, &consumed) != 6) {
    Fail("timestamp '" + text + "' is not ISO-8601");
  }
  std::string rest = text.substr(static_cast<std::size_t>(consumed));
  // Fractional seconds are accepted and truncated.
  if (!rest.empty() && rest[0] == '.') {
    std::size_t k = 1;
    while (k < rest.size() && std::isdigit(static_cast<unsigned char>(rest[k]))) ++k;
    rest = rest.substr(k);
  }
  if (rest != "Z" && rest != "+00:00") {
    Fail("timestamp '" + text + "' must be UTC (Z)");
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) {
    Fail("timestamp '" + text + "' is not a valid date");
  }
  const sys_seconds t = sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
  return t.time_since_epoch().count();
}

Json ToJson(const RleDocument& doc) {
  Json instances = Json::array();
  for (const RleInstance& instance : doc.instances) {
    Json runs = Json::array();
    for (const RleRun& run : instance.runs) runs.push_back({run.start, run.length});
    instances.push_back({{"id", instance.id}, {"runs", std::move(runs)}});
  }
  return {{"width", doc.width}, {"height", doc.height},
          {"instances", std::move(instances)}};
}

RleDocument RleDocumentFromJson(const Json& json) {
  RleDocument doc;
  const std::int64_t w = IntField(json, "width");
  const std::int64_t h = IntField(json, "height");
  if (w < 1 || h < 1 || w > 1 << 20 || h > 1 << 20) {
    Fail("RLE width and height must be positive");
  }
  doc.width = static_cast<int>(w);
  doc.height = static_cast<int>(h);
  const Json& instances = Field(json, "instances");
  if (!instances.is_array()) Fail("\"instances\" must be an array");
  for (const Json& entry : instances) {
    RleInstance instance;
    const std::int64_t id = IntField(entry, "id");
    if (id < 0 || id > 65535) Fail("instance id must lie in [0, 65535]");
    instance.id = static_cast<InstanceId>(id);
    const Json& runs = Field(entry, "runs");
    if (!runs.is_array()) Fail("\"runs\" must be an array");
    for (const Json& run : runs) {
      if (!run.is_array() || run.size() != 2 || !run[0].is_number_unsigned() ||
          !run[1].is_number_unsigned()) {
        Fail("each run must be [start, length] with non-negative integers");
      }
      const std::uint64_t start = run[0].get<std::uint64_t>();
      const std::uint64_t length = run[1].get<std::uint64_t>();
      if (start > UINT32_MAX || length > UINT32_MAX) Fail("run out of range");
      instance.runs.push_back({static_cast<std::uint32_t>(start),
                               static_cast<std::uint32_t>(length)});
    }
    doc.instances.push_back(std::move(instance));
  }
  return doc;
}

InstanceMask ReadMaskFile(const std::filesystem::path& path) {
  const std::string name = path.filename().string();
  if (EndsWith(name, ".rle.json") || EndsWith(name, ".json")) {
    return DecodeRle(RleDocumentFromJson(ParseJson(ReadTextFile(path), path.string())));
  }
  return ReadLabelMapPng(path);
}

void WriteMaskFile(const std::filesystem::path& path, const InstanceMask& mask) {
  const std::string name = path.filename().string();
  if (EndsWith(name, ".json")) {
    WriteTextFile(path, ToJson(EncodeRle(mask)).dump() + "\n");
  } else {
    WriteLabelMapPng(path, mask);
  }
}

Json ToJson(const RatingRecord& r) {
  return {{"patch_id", r.patch_id},
          {"model_id", r.model_id},
          {"rater_id", r.rater_id},
          {"round", r.round},
          {"rating", ToString(r.rating)},
          {"uncertain", r.uncertain},
          {"timestamp", FormatIso8601(r.timestamp)}};
}

RatingRecord RatingRecordFromJson(const Json& json) {
  RatingRecord r;
  r.patch_id = StringField(json, "patch_id");
  r.model_id = StringField(json, "model_id");
  r.rater_id = StringField(json, "rater_id");
  const std::int64_t round = IntField(json, "round");
  if (round != 1 && round != 2) Fail("\"round\" must be 1 or 2");
  r.round = static_cast<int>(round);
  r.rating = ParseRating(StringField(json, "rating"));
  r.uncertain = json.contains("uncertain") ? BoolField(json, "uncertain") : false;
  if (json.contains("timestamp")) {
    const Json& t = json["timestamp"];
    if (t.is_string()) {
      r.timestamp = ParseIso8601(t.get<std::string>());
    } else if (t.is_number_integer()) {
      r.timestamp = t.get<std::int64_t>();
    } else if (!t.is_null()) {
      Fail("\"timestamp\" must be an ISO-8601 string");
    }
  }
  if (r.patch_id.empty() || r.model_id.empty() || r.rater_id.empty()) {
    Fail("patch_id, model_id and rater_id must be non-empty");
  }
  return r;
}

std::vector<RatingRecord> ReadRatingsLog(const std::filesystem::path& path) {
  std::vector<RatingRecord> records;
  std::size_t line_no = 0;
  for (const std::string& line : SplitLines(ReadTextFile(path))) {
    ++line_no;
    try {
      records.push_back(RatingRecordFromJson(ParseJson(line)));
    } catch (const Error& e) {
      throw Error(e.kind(), e.module(),
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

void WriteRatingsLog(const std::filesystem::path& path,
                     const std::vector<RatingRecord>& records) {
  std::string text;
  for (const RatingRecord& r : records) text += ToJson(r).dump() + "\n";
  WriteTextFile(path, text);
}

Json ToJson(const EnrichmentItem& item) {
  Json json = {{"patch_id", item.patch_id},
               {"label_source", ToString(item.label_source)},
               {"model_id", item.model_id ? Json(*item.model_id) : Json(nullptr)},
               {"class_label", ToString(item.class_label)},
               {"weight", item.weight ? Json(*item.weight) : Json(nullptr)}};
  return json;
}

EnrichmentItem EnrichmentItemFromJson(const Json& json) {
  EnrichmentItem item;
  item.patch_id = StringField(json, "patch_id");
  item.label_source = ParseLabelSource(StringField(json, "label_source"));
  if (json.contains("model_id") && !json["model_id"].is_null()) {
    item.model_id = StringField(json, "model_id");
  }
  item.class_label = ParseClassLabel(StringField(json, "class_label"));
  if (json.contains("weight") && !json["weight"].is_null()) {
    if (!json["weight"].is_number()) Fail("\"weight\" must be a number");
    item.weight = json["weight"].get<double>();
  }
  return item;
}

std::string ManifestToNdjson(const EnrichmentManifest& manifest) {
  Json header = {
      {"strategy", ToString(manifest.strategy)},
      {"n_train", manifest.n_train()},
      {"gamma_s", manifest.gamma_s ? Json(*manifest.gamma_s) : Json(nullptr)},
      {"seed", manifest.seed ? Json(*manifest.seed) : Json(nullptr)}};
  std::string text = header.dump() + "\n";
  for (const EnrichmentItem& item : manifest.items) text += ToJson(item).dump() + "\n";
  return text;
}

EnrichmentManifest ManifestFromNdjson(const std::string& text) {
  const std::vector<std::string> lines = SplitLines(text);
  if (lines.empty()) Fail("manifest is empty; expected a header line");
  const Json header = ParseJson(lines[0], "manifest header");
  EnrichmentManifest manifest;
  manifest.strategy = ParseStrategy(StringField(header, "strategy"));
  if (header.contains("gamma_s") && !header["gamma_s"].is_null()) {
    manifest.gamma_s = header["gamma_s"].get<double>();
  }
  if (header.contains("seed") && !header["seed"].is_null()) {
    manifest.seed = UnsignedField(header, "seed");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    manifest.items.push_back(
        EnrichmentItemFromJson(ParseJson(lines[i], "manifest line " + std::to_string(i + 1))));
  }
  if (UnsignedField(header, "n_train") != manifest.items.size()) {
    Fail("manifest header n_train does not match its item count");
  }
  manifest.Check();
  return manifest;
}

EnrichmentManifest ReadManifest(const std::filesystem::path& path) {
  return ManifestFromNdjson(ReadTextFile(path));
}

void WriteManifest(const std::filesystem::path& path,
                   const EnrichmentManifest& manifest) {
  WriteTextFile(path, ManifestToNdjson(manifest));
}

Json ToJson(const PatchRecord& r) {
  return {{"patch_id", r.patch_id}, {"source_image", r.source_image},
          {"x", r.x},               {"y", r.y},
          {"width", r.width},       {"height", r.height},
          {"stain", r.stain},       {"species", r.species},
          {"dataset", r.dataset}};
}

PatchRecord PatchRecordFromJson(const Json& json) {
  PatchRecord r;
  r.patch_id = StringField(json, "patch_id");
  r.source_image = StringField(json, "source_image");
  r.x = static_cast<int>(IntField(json, "x"));
  r.y = static_cast<int>(IntField(json, "y"));
  r.width = static_cast<int>(IntField(json, "width"));
  r.height = static_cast<int>(IntField(json, "height"));
  r.stain = StringField(json, "stain");
  r.species = StringField(json, "species");
  r.dataset = StringField(json, "dataset");
  return r;
}

std::vector<PatchRecord> ReadPatchManifest(const std::filesystem::path& path) {
  std::vector<PatchRecord> records;
  for (const std::string& line : SplitLines(ReadTextFile(path))) {
    records.push_back(PatchRecordFromJson(ParseJson(line, path.string())));
  }
  return records;
}

void WritePatchManifest(const std::filesystem::path& path,
                        const std::vector<PatchRecord>& records) {
  std::string text;
  for (const PatchRecord& r : records) text += ToJson(r).dump() + "\n";
  WriteTextFile(path, text);
}

Json SummaryToJson(const PatchManifest& manifest) {
  return {{"total", manifest.total()},
          {"by_stain", manifest.by_stain},
          {"by_species", manifest.by_species},
          {"by_dataset", manifest.by_dataset}};
}

Json MetricsReportToJson(AggregationMode mode, const Metrics& metrics,
                         const std::vector<PatchEvaluation>& per_patch) {
  Json patches = Json::array();
  for (const PatchEvaluation& e : per_patch) {
    patches.push_back({{"patch_id", e.patch_id},
                       {"tp", e.match.tp()},
                       {"fp", e.match.fp()},
                       {"fn", e.match.fn()}});
  }
  return {{"mode", ToString(mode)},  {"precision", metrics.precision},
          {"recall", metrics.recall}, {"f1", metrics.f1},
          {"tp", metrics.tp},         {"fp", metrics.fp},
          {"fn", metrics.fn},         {"per_patch", std::move(patches)}};
}

Json ToJson(const RatingCounts& counts) {
  return {{"good", counts.good},
          {"medium", counts.medium},
          {"bad", counts.bad},
          {"fractions",
           {{"good", counts.fraction(Rating::kGood)},
            {"medium", counts.fraction(Rating::kMedium)},
            {"bad", counts.fraction(Rating::kBad)}}}};
}

Json ToJson(const RatingDistribution& distribution) {
  Json per_model = Json::object();
  for (const auto& [model, counts] : distribution.per_model) {
    per_model[model] = ToJson(counts);
  }
  return {{"per_model", std::move(per_model)},
          {"fused", ToJson(distribution.fused)}};
}

Json ToJson(const AgreementMatrix& matrix) {
  return {{"models", matrix.models}, {"values", matrix.values}};
}

Json ToJson(const AgreementBreakdown& breakdown) {
  Json out = Json::object();
  for (const auto& [rating, counts] : breakdown) {
    out[ToString(rating)] = {{"all_agree", counts.all_agree},
                             {"two_agree", counts.two_agree},
                             {"none_agree", counts.none_agree}};
  }
  return out;
}

std::vector<std::string> SplitLines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "io", "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "io", "cannot write " + path.string());
}

}  // namespace nuclei_curation
