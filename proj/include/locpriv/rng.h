// Copyright 2026 The locpriv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LOCPRIV_RNG_H_
#define LOCPRIV_RNG_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace locpriv {

// Derives an independent 64-bit seed for a named sub-stream of a master
// seed. Stable across platforms: FNV-1a over the name, SplitMix64 mixing.
std::uint64_t DeriveSeed(std::uint64_t master, std::string_view stream,
                         std::uint64_t index = 0);

// 64-bit FNV-1a digest, used for provenance hashes of files and configs.
std::uint64_t Fnv1a64(std::string_view bytes);

// Thin wrapper over mt19937_64 with platform-stable variate generation
// (the std:: distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer on [0, n).
  std::size_t Index(std::size_t n);
  // Standard normal via Box-Muller (no caching, so draws stay aligned).
  double Normal();

  template <typename It>
  void Shuffle(It first, It last) {
    const auto n = static_cast<std::size_t>(last - first);
    for (std::size_t i = n; i > 1; --i) {
      std::size_t j = Index(i);
      std::swap(first[i - 1], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace locpriv

#endif  // LOCPRIV_RNG_H_
