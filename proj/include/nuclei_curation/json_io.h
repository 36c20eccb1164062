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

// JSON and newline-delimited JSON file formats. Field names match the
// domain types one to one.

#ifndef NUCLEI_CURATION_JSON_IO_H_
#define NUCLEI_CURATION_JSON_IO_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "nuclei_curation/enrichment.h"
#include "nuclei_curation/mask.h"
#include "nuclei_curation/matching.h"
#include "nuclei_curation/patch.h"
#include "nuclei_curation/rating.h"

namespace nuclei_curation {

using Json = nlohmann::json;

// Parses one JSON value; malformed text raises Error(kInvalidArgument).
Json ParseJson(const std::string& text, const std::string& context = "json");

// "2024-05-01T12:00:00Z".
std::string FormatIso8601(std::int64_t seconds);
std::int64_t ParseIso8601(const std::string& text);

// {"width":W,"height":H,"instances":[{"id":k,"runs":[[start,len],...]}]}
Json ToJson(const RleDocument& doc);
RleDocument RleDocumentFromJson(const Json& json);

// Mask files: "*.rle.json" is an RLE document, anything else a 16-bit PNG.
InstanceMask ReadMaskFile(const std::filesystem::path& path);
void WriteMaskFile(const std::filesystem::path& path, const InstanceMask& mask);

Json ToJson(const RatingRecord& record);
RatingRecord RatingRecordFromJson(const Json& json);
std::vector<RatingRecord> ReadRatingsLog(const std::filesystem::path& path);
void WriteRatingsLog(const std::filesystem::path& path,
                     const std::vector<RatingRecord>& records);

Json ToJson(const EnrichmentItem& item);
EnrichmentItem EnrichmentItemFromJson(const Json& json);
// Header line {"strategy","n_train","gamma_s","seed"} then one item per line.
std::string ManifestToNdjson(const EnrichmentManifest& manifest);
EnrichmentManifest ManifestFromNdjson(const std::string& text);
EnrichmentManifest ReadManifest(const std::filesystem::path& path);
void WriteManifest(const std::filesystem::path& path,
                   const EnrichmentManifest& manifest);

Json ToJson(const PatchRecord& record);
PatchRecord PatchRecordFromJson(const Json& json);
std::vector<PatchRecord> ReadPatchManifest(const std::filesystem::path& path);
void WritePatchManifest(const std::filesystem::path& path,
                        const std::vector<PatchRecord>& records);
Json SummaryToJson(const PatchManifest& manifest);

// {"mode","precision","recall","f1","tp","fp","fn","per_patch":[...]}
Json MetricsReportToJson(AggregationMode mode, const Metrics& metrics,
                         const std::vector<PatchEvaluation>& per_patch);

Json ToJson(const RatingCounts& counts);
Json ToJson(const RatingDistribution& distribution);
Json ToJson(const AgreementMatrix& matrix);
Json ToJson(const AgreementBreakdown& breakdown);

// Splits text into non-empty lines.
std::vector<std::string> SplitLines(const std::string& text);
std::string ReadTextFile(const std::filesystem::path& path);
void WriteTextFile(const std::filesystem::path& path, const std::string& text);

}  // namespace nuclei_curation

#endif  // NUCLEI_CURATION_JSON_IO_H_
