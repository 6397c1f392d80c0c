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

// Seeded measurement records. Stream layout for a record seed s:
//   derive_seed(s, {0})  draws the hidden component,
//   derive_seed(s, {1})  draws the outcomes.
// so a mixture record with seed s equals the per-component record with the
// same seed and the component drawn from q.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qndmle/errors.hpp"
#include "qndmle/io.hpp"
#include "qndmle/model.hpp"
#include "qndmle/rng.hpp"

namespace qndmle {

struct Trajectory {
    std::vector<std::uint32_t> outcomes;
    std::size_t gamma = 0;  // hidden component that generated the record
    std::uint64_t seed = 0;
    Theta theta_true;

    std::size_t size() const { return outcomes.size(); }
    bool operator==(const Trajectory&) const = default;
};

/// N_n(j) for j in the alphabet; Σ_j counts[j] = n.
struct CountVector {
    std::size_t n = 0;
    std::vector<std::uint64_t> counts;

    static CountVector zeros(std::size_t l) { return CountVector{0, std::vector<std::uint64_t>(l, 0)}; }
    void add(std::size_t j) {
        ++counts[j];
        ++n;
    }
    bool operator==(const CountVector&) const = default;
};

/// Draws γ with probability q(γ).
inline std::size_t sample_component(const MixtureWeights& q, std::uint64_t seed) {
    RandomStream rng(derive_seed(seed, {0}));
    return CategoricalSampler(q.values()).draw(rng);
}

/// n i.i.d. outcomes from p_θ(·|γ).
inline Trajectory sample_trajectory(const ParametricFamily& fam, ThetaView theta, std::size_t gamma, std::size_t n,
                                    std::uint64_t seed) {
    const auto p = fam.probs(theta, gamma);
    const CategoricalSampler sampler(p);
    RandomStream rng(derive_seed(seed, {1}));
    Trajectory t;
    t.gamma = gamma;
    t.seed = seed;
    t.theta_true.assign(theta.begin(), theta.end());
    t.outcomes.resize(n);
    for (auto& o : t.outcomes) o = static_cast<std::uint32_t>(sampler.draw(rng));
    return t;
}

/// Record from the mixture law: γ ~ q, then n outcomes from p_θ(·|γ).
inline Trajectory sample_mixture_trajectory(const ParametricFamily& fam, ThetaView theta, const MixtureWeights& q,
                                            std::size_t n, std::uint64_t seed) {
    if (q.size() != fam.component_count()) throw DomainError("sample_mixture_trajectory: weight vector has the wrong length");
    return sample_trajectory(fam, theta, sample_component(q, seed), n, seed);
}

/// Counts of the first `n_prefix` outcomes.
inline CountVector counts(const Trajectory& traj, std::size_t n_prefix, std::size_t alphabet_size) {
    if (n_prefix > traj.size()) throw DomainError("counts: prefix is longer than the trajectory");
    CountVector c = CountVector::zeros(alphabet_size);
    for (std::size_t k = 0; k < n_prefix; ++k) {
        if (traj.outcomes[k] >= alphabet_size) throw DomainError("counts: outcome index outside the alphabet");
        c.add(traj.outcomes[k]);
    }
    return c;
}
inline CountVector counts(const Trajectory& traj, std::size_t n_prefix, const ParametricFamily& fam) {
    return counts(traj, n_prefix, fam.outcome_count());
}

/// Counts at each checkpoint of one record drawn from `p`, without storing
/// the outcomes. Checkpoints must be non-decreasing.
inline std::vector<CountVector> sample_count_path(std::span<const double> p, std::span<const std::size_t> checkpoints,
                                                  RandomStream& rng) {
    const CategoricalSampler sampler(p);
    std::vector<CountVector> out;
    out.reserve(checkpoints.size());
    CountVector c = CountVector::zeros(p.size());
    for (std::size_t target : checkpoints) {
        if (target < c.n) throw DomainError("sample_count_path: checkpoints must be non-decreasing");
        while (c.n < target) c.add(sampler.draw(rng));
        out.push_back(c);
    }
    return out;
}

/// One row per step: index, outcome label.
inline std::string trajectory_csv(const Trajectory& traj, const Alphabet& alphabet) {
    CsvWriter csv({"index", "outcome"});
    for (std::size_t k = 0; k < traj.size(); ++k) csv.row({std::to_string(k + 1), alphabet.label(traj.outcomes[k])});
    return csv.str();
}

inline Json trajectory_to_json(const Trajectory& traj) {
    Json j;
    j["seed"] = traj.seed;
    j["gamma"] = traj.gamma;
    j["theta_true"] = traj.theta_true;
    j["outcomes"] = traj.outcomes;
    return j;
}

inline Trajectory trajectory_from_json(const Json& j) {
    Trajectory t;
    t.seed = j.at("seed").get<std::uint64_t>();
    t.gamma = j.at("gamma").get<std::size_t>();
    t.theta_true = j.at("theta_true").get<Theta>();
    t.outcomes = j.at("outcomes").get<std::vector<std::uint32_t>>();
    return t;
}

}  // namespace qndmle
