// Copyright 2026 The qndmle Authors
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

// Reproducible random streams.
//
// Every stream is a std::mt19937_64 (whose output sequence is fixed by the
// C++ standard) seeded with a 64-bit key obtained by folding a stream path
// (master seed, index, index, ...) through SplitMix64. Uniform doubles use
// the top 53 bits of each draw; no std:: distribution is involved, since
// their algorithms are implementation-defined.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace qndmle {

/// SplitMix64 finalizer (Steele, Lea & Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Key of the sub-stream reached from `seed` along `path`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t key = splitmix64(seed);
    for (std::uint64_t step : path) key = splitmix64(key ^ splitmix64(step + 0x632BE59BD9B4E019ULL));
    return key;
}

class RandomStream {
  public:
    explicit RandomStream(std::uint64_t key) : engine_(key) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  private:
    std::mt19937_64 engine_;
};

/// Inverse-CDF sampler over a finite set, cumulative sums built once.
class CategoricalSampler {
  public:
    explicit CategoricalSampler(std::span<const double> weights) : cdf_(weights.size()) {
        double acc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            cdf_[i] = acc;
        }
        total_ = acc;
        // Last index with positive weight absorbs rounding at the top end.
        last_ = 0;
        for (std::size_t i = 0; i < weights.size(); ++i)
            if (weights[i] > 0.0) last_ = i;
    }

    std::size_t size() const { return cdf_.size(); }

    std::size_t draw(RandomStream& rng) const {
        const double u = rng.uniform() * total_;
        for (std::size_t i = 0; i < last_; ++i)
            if (u < cdf_[i]) return i;
        return last_;
    }

  private:
    std::vector<double> cdf_;
    double total_ = 0.0;
    std::size_t last_ = 0;
};

}  // namespace qndmle
