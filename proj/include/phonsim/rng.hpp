// Copyright 2026 The phonsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "phonsim/core.hpp"

namespace phonsim {

/// Seeded generator for shot sampling. Draws are hand-rolled on top of the
/// raw engine output so that identical seeds give identical counts on every
/// platform (std::distributions are implementation-defined).
class ShotRng {
 public:
  explicit ShotRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1), 53 bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Inverse-CDF categorical draw. Probabilities may sum to slightly off 1;
  /// the last category absorbs the remainder.
  int categorical(std::span<const double> probs) {
    const double u = uniform();
    double acc = 0.0;
    for (size_t i = 0; i + 1 < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
  }

  std::vector<long> multinomial(long shots, std::span<const double> probs) {
    std::vector<long> counts(probs.size(), 0);
    for (long s = 0; s < shots; ++s) counts[categorical(probs)]++;
    return counts;
  }

 private:
  std::mt19937_64 engine_;
};

/// Binomial standard error of an empirical probability.
inline double binomial_sigma(double p_hat, long shots) {
  if (shots <= 0) throw ValidationError("binomial_sigma: shots must be positive");
  const double p = std::min(std::max(p_hat, 0.0), 1.0);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(shots));
}

}  // namespace phonsim
