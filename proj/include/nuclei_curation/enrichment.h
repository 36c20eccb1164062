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

// Fine-tuning manifests assembled from curation outcomes: pseudo labels
// taken from masks rated good, plus pathologist corrections of patches every
// model got wrong. Also nested incremental splits and class-balanced
// oversampling weights with a seeded epoch sampler.

#ifndef NUCLEI_CURATION_ENRICHMENT_H_
#define NUCLEI_CURATION_ENRICHMENT_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nuclei_curation/rating.h"

namespace nuclei_curation {

enum class LabelSource { kPseudo, kCorrected };
enum class ClassLabel { kGoodPseudo, kBadCorrected };
enum class Strategy { kGoodOnly, kBadOnly, kCombined };

std::string ToString(LabelSource source);
std::string ToString(ClassLabel label);
std::string ToString(Strategy strategy);
LabelSource ParseLabelSource(const std::string& text);
ClassLabel ParseClassLabel(const std::string& text);
Strategy ParseStrategy(const std::string& text);

struct EnrichmentItem {
  std::string patch_id;
  LabelSource label_source = LabelSource::kPseudo;
  std::optional<std::string> model_id;  // Present iff pseudo.
  ClassLabel class_label = ClassLabel::kGoodPseudo;
  std::optional<double> weight;  // Filled by ApplySamplingWeights.

  // "<patch_id>:<model_id>" for pseudo labels, "<patch_id>:corrected"
  // otherwise. Unique within a manifest.
  std::string id() const;

  friend bool operator==(const EnrichmentItem&,
                         const EnrichmentItem&) = default;
};

struct EnrichmentManifest {
  Strategy strategy = Strategy::kCombined;
  std::vector<EnrichmentItem> items;
  std::optional<double> gamma_s;   // Set once weights are filled.
  std::optional<std::uint64_t> seed;

  std::size_t n_train() const { return items.size(); }

  // Item invariants and strategy consistency; throws on violation.
  void Check() const;

  friend bool operator==(const EnrichmentManifest&,
                         const EnrichmentManifest&) = default;
};

struct ManifestOptions {
  // Keep a single pseudo label per patch.
  bool dedupe = false;
  // Capture fraction per (patch_id, model_id), used by dedupe to prefer the
  // best mask. Without an entry the lexicographically first model wins.
  std::map<std::pair<std::string, std::string>, double> capture;
};

// One pseudo item per (patch, model) rated good and one corrected item per
// corrected patch, filtered by strategy. Every corrected patch must be
// fused-bad in `ratings`. Throws if the result would be empty or the
// strategy needs corrections and none are given.
EnrichmentManifest BuildManifest(const RatingTable& ratings,
                                 const std::set<std::string>& corrected_patches,
                                 Strategy strategy,
                                 const ManifestOptions& options = {});

// floor(fraction * count + 1/2), with a small tolerance so that decimal
// fractions such as 0.35 round as written.
std::uint64_t RoundHalfUp(double fraction, std::uint64_t count);

// Nested, per-class stratified sub-manifests, one per fraction. Fractions
// must be non-decreasing in (0, 1] and end at 1.0.
std::vector<EnrichmentManifest> IncrementalSplit(
    const EnrichmentManifest& manifest, std::span<const double> fractions,
    std::uint64_t seed);

struct SamplingConfig {
  double gamma_s = 0.85;
  std::uint64_t seed = 0;

  void Check() const;  // 0 <= gamma_s <= 1.
};

// n_train / (gamma_s * class_count + (1 - gamma_s) * n_train).
double ClassWeight(std::uint64_t class_count, std::uint64_t n_train,
                   double gamma_s);

EnrichmentManifest ApplySamplingWeights(EnrichmentManifest manifest,
                                        const SamplingConfig& config);

// n_draws item ids drawn with replacement, P(i) proportional to weight.
std::vector<std::string> SampleEpoch(const EnrichmentManifest& manifest,
                                     std::uint64_t n_draws,
                                     std::uint64_t seed);

}  // namespace nuclei_curation

#endif  // NUCLEI_CURATION_ENRICHMENT_H_
