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

#include "nuclei_curation/enrichment.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nuclei_curation/error.h"
#include "nuclei_curation/random.h"

namespace nuclei_curation {

namespace {

constexpr char kModule[] = "enrichment";

[[noreturn]] void Fail(const std::string& message) {
  throw Error(ErrorKind::kInvalidArgument, kModule, message);
}

EnrichmentItem PseudoItem(const std::string& patch, const std::string& model) {
  EnrichmentItem item;
  item.patch_id = patch;
  item.label_source = LabelSource::kPseudo;
  item.model_id = model;
  item.class_label = ClassLabel::kGoodPseudo;
  return item;
}

EnrichmentItem CorrectedItem(const std::string& patch) {
  EnrichmentItem item;
  item.patch_id = patch;
  item.label_source = LabelSource::kCorrected;
  item.class_label = ClassLabel::kBadCorrected;
  return item;
}

}  // namespace

std::string ToString(LabelSource source) {
  return source == LabelSource::kPseudo ? "pseudo" : "corrected";
}

std::string ToString(ClassLabel label) {
  return label == ClassLabel::kGoodPseudo ? "good_pseudo" : "bad_corrected";
}

std::string ToString(Strategy strategy) {
  switch (strategy) {
    case Strategy::kGoodOnly:
      return "good_only";
    case Strategy::kBadOnly:
      return "bad_only";
    case Strategy::kCombined:
      return "combined";
  }
  return "combined";
}

LabelSource ParseLabelSource(const std::string& text) {
  if (text == "pseudo") return LabelSource::kPseudo;
  if (text == "corrected") return LabelSource::kCorrected;
  Fail("label_source must be pseudo or corrected, got '" + text + "'");
}

ClassLabel ParseClassLabel(const std::string& text) {
  if (text == "good_pseudo") return ClassLabel::kGoodPseudo;
  if (text == "bad_corrected") return ClassLabel::kBadCorrected;
  Fail("class_label must be good_pseudo or bad_corrected, got '" + text + "'");
}

Strategy ParseStrategy(const std::string& text) {
  if (text == "good_only") return Strategy::kGoodOnly;
  if (text == "bad_only") return Strategy::kBadOnly;
  if (text == "combined") return Strategy::kCombined;
  Fail("strategy must be good_only, bad_only or combined, got '" + text + "'");
}

std::string EnrichmentItem::id() const {
  return patch_id + ":" + (model_id ? *model_id : std::string("corrected"));
}

void EnrichmentManifest::Check() const {
  std::set<std::string> ids;
  for (const EnrichmentItem& item : items) {
    const bool pseudo = item.label_source == LabelSource::kPseudo;
    if (pseudo != item.model_id.has_value()) {
      Fail("item " + item.id() + ": model_id must be present iff pseudo");
    }
    if (pseudo != (item.class_label == ClassLabel::kGoodPseudo)) {
      Fail("item " + item.id() + ": class_label contradicts label_source");
    }
    if (item.weight && !(*item.weight > 0.0)) {
      Fail("item " + item.id() + ": weight must be positive");
    }
    if (strategy == Strategy::kGoodOnly && !pseudo) {
      Fail("good_only manifest contains corrected item " + item.id());
    }
    if (strategy == Strategy::kBadOnly && pseudo) {
      Fail("bad_only manifest contains pseudo item " + item.id());
    }
    if (!ids.insert(item.id()).second) Fail("duplicate item " + item.id());
  }
}

EnrichmentManifest BuildManifest(const RatingTable& ratings,
                                 const std::set<std::string>& corrected_patches,
                                 Strategy strategy,
                                 const ManifestOptions& options) {
  for (const std::string& patch : corrected_patches) {
    if (!ratings.HasPatch(patch)) {
      Fail("corrected patch " + patch + " has no ratings");
    }
    std::vector<Rating> row;
    for (const auto& [model, rating] : ratings.Row(patch)) row.push_back(rating);
    if (FuseRatings(row) != Rating::kBad) {
      Fail("corrected patch " + patch + " is not rated bad by every model");
    }
  }
  const bool wants_pseudo = strategy != Strategy::kBadOnly;
  const bool wants_corrected = strategy != Strategy::kGoodOnly;
  if (wants_corrected && corrected_patches.empty()) {
    Fail("strategy " + ToString(strategy) + " needs corrected masks, none given");
  }

  EnrichmentManifest manifest;
  manifest.strategy = strategy;
  if (wants_pseudo) {
    for (const std::string& patch : ratings.patches()) {
      std::vector<std::string> good_models;
      for (const auto& [model, rating] : ratings.Row(patch)) {
        if (rating == Rating::kGood) good_models.push_back(model);
      }
      if (good_models.empty()) continue;
      if (options.dedupe) {
        // Highest capture first, then model id; missing capture sorts last.
        auto capture_of = [&](const std::string& model) {
          const auto it = options.capture.find({patch, model});
          return it == options.capture.end() ? -1.0 : it->second;
        };
        const auto best = std::min_element(
            good_models.begin(), good_models.end(),
            [&](const std::string& a, const std::string& b) {
              const double ca = capture_of(a);
              const double cb = capture_of(b);
              return ca != cb ? ca > cb : a < b;
            });
        good_models = {*best};
      }
      for (const std::string& model : good_models) {
        manifest.items.push_back(PseudoItem(patch, model));
      }
    }
  }
  if (wants_corrected) {
    for (const std::string& patch : corrected_patches) {
      manifest.items.push_back(CorrectedItem(patch));
    }
  }
  if (manifest.items.empty()) {
    Fail("strategy " + ToString(strategy) + " selects no items");
  }
  return manifest;
}

std::uint64_t RoundHalfUp(double fraction, std::uint64_t count) {
  const double exact = fraction * static_cast<double>(count);
  return static_cast<std::uint64_t>(std::floor(exact + 0.5 + 1e-9));
}

std::vector<EnrichmentManifest> IncrementalSplit(
    const EnrichmentManifest& manifest, std::span<const double> fractions,
    std::uint64_t seed) {
  if (fractions.empty()) Fail("no split fractions given");
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    const double f = fractions[i];
    if (!(f > 0.0 && f <= 1.0)) {
      Fail("split fraction " + std::to_string(f) + " is outside (0, 1]");
    }
    if (i > 0 && f < fractions[i - 1]) Fail("split fractions must be ascending");
  }
  if (fractions.back() != 1.0) Fail("the last split fraction must be 1.0");

  // Per class: a seeded permutation; each split takes a prefix of it, which
  // makes the splits nested.
  std::map<ClassLabel, std::vector<std::size_t>> order;
  for (std::size_t i = 0; i < manifest.items.size(); ++i) {
    order[manifest.items[i].class_label].push_back(i);
  }
  for (auto& [label, indices] : order) {
    Rng rng(DeriveSeed(seed, ToString(label)));
    for (std::size_t i = indices.size(); i > 1; --i) {
      std::swap(indices[i - 1], indices[rng.Below(i)]);
    }
  }

  std::vector<EnrichmentManifest> splits;
  splits.reserve(fractions.size());
  for (double f : fractions) {
    std::vector<std::size_t> chosen;
    for (const auto& [label, indices] : order) {
      const std::uint64_t k = std::min<std::uint64_t>(
          RoundHalfUp(f, indices.size()), indices.size());
      chosen.insert(chosen.end(), indices.begin(), indices.begin() + k);
    }
    std::sort(chosen.begin(), chosen.end());
    EnrichmentManifest split;
    split.strategy = manifest.strategy;
    split.seed = seed;
    split.items.reserve(chosen.size());
    for (std::size_t i : chosen) {
      EnrichmentItem item = manifest.items[i];
      item.weight.reset();
      split.items.push_back(std::move(item));
    }
    splits.push_back(std::move(split));
  }
  return splits;
}

void SamplingConfig::Check() const {
  if (!(gamma_s >= 0.0 && gamma_s <= 1.0)) {
    Fail("gamma_s must lie in [0, 1], got " + std::to_string(gamma_s));
  }
}

double ClassWeight(std::uint64_t class_count, std::uint64_t n_train,
                   double gamma_s) {
  const double n = static_cast<double>(n_train);
  return n / (gamma_s * static_cast<double>(class_count) + (1.0 - gamma_s) * n);
}

EnrichmentManifest ApplySamplingWeights(EnrichmentManifest manifest,
                                        const SamplingConfig& config) {
  config.Check();
  if (manifest.items.empty()) Fail("cannot weight an empty manifest");
  std::map<ClassLabel, std::uint64_t> counts;
  for (const EnrichmentItem& item : manifest.items) ++counts[item.class_label];
  const std::uint64_t n_train = manifest.items.size();
  for (EnrichmentItem& item : manifest.items) {
    item.weight = ClassWeight(counts[item.class_label], n_train, config.gamma_s);
  }
  manifest.gamma_s = config.gamma_s;
  manifest.seed = config.seed;
  return manifest;
}

std::vector<std::string> SampleEpoch(const EnrichmentManifest& manifest,
                                     std::uint64_t n_draws,
                                     std::uint64_t seed) {
  std::vector<double> cumulative;
  cumulative.reserve(manifest.items.size());
  double total = 0.0;
  for (const EnrichmentItem& item : manifest.items) {
    if (!item.weight) Fail("item " + item.id() + " has no sampling weight");
    if (!(*item.weight > 0.0) || !std::isfinite(*item.weight)) {
      Fail("item " + item.id() + " has a non-positive weight");
    }
    total += *item.weight;
    cumulative.push_back(total);
  }
  std::vector<std::string> draws;
  if (n_draws == 0) return draws;
  if (cumulative.empty()) Fail("cannot sample from an empty manifest");
  draws.reserve(n_draws);
  Rng rng(seed);
  for (std::uint64_t d = 0; d < n_draws; ++d) {
    const double target = rng.Unit() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    if (it == cumulative.end()) --it;
    draws.push_back(manifest.items[it - cumulative.begin()].id());
  }
  return draws;
}

}  // namespace nuclei_curation
