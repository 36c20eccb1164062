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

#ifndef NUCLEI_CURATION_RANDOM_H_
#define NUCLEI_CURATION_RANDOM_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace nuclei_curation {

// std::mt19937_64 output is fixed by the standard but the std distributions
// are not, so the integer and real mappings are done here. Same seed, same
// stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t Next() { return engine_(); }

  // Uniform in [0, bound). bound must be positive.
  std::uint64_t Below(std::uint64_t bound) {
    // Rejection keeps the result unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % bound;
  }

  // Uniform in [0, 1) with 53 random bits.
  double Unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

inline std::uint64_t Fnv1a64(std::string_view data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent per-key stream seed, e.g. one per source image.
inline std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view key) {
  return SplitMix64(seed ^ SplitMix64(Fnv1a64(key)));
}

}  // namespace nuclei_curation

#endif  // NUCLEI_CURATION_RANDOM_H_
