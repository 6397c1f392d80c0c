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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "qndmle/qndmle.hpp"
#include "support/families.hpp"

namespace {

using namespace qndmle;

// |count − n p| ≤ 4 sqrt(n p (1 − p))
void expect_binomial(std::size_t count, std::size_t n, double p, const std::string& what) {
    const double sd = std::sqrt(static_cast<double>(n) * p * (1.0 - p));
    EXPECT_LE(std::abs(static_cast<double>(count) - static_cast<double>(n) * p), 4.0 * sd) << what;
}

TEST(Seeds, DerivedStreamsDiffer) {
    std::set<std::uint64_t> keys;
    for (std::uint64_t a = 0; a < 20; ++a)
        for (std::uint64_t b = 0; b < 20; ++b) keys.insert(derive_seed(7, {a, b}));
    EXPECT_EQ(keys.size(), 400u);
    EXPECT_NE(derive_seed(1, {2}), derive_seed(2, {1}));
    EXPECT_EQ(derive_seed(3, {4, 5}), derive_seed(3, {4, 5}));
}

TEST(Seeds, UniformRange) {
    RandomStream rng(1);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(SampleComponent, PointMass) {
    const auto q = MixtureWeights::point_mass(5, 3);
    for (std::uint64_t s = 0; s < 100; ++s) EXPECT_EQ(sample_component(q, s), 3u);
}

TEST(SampleComponent, UniformFrequencies) {
    const auto q = MixtureWeights::uniform(4);
    std::vector<std::size_t> hits(4, 0);
    const std::size_t n = 100000;
    for (std::uint64_t s = 0; s < n; ++s) ++hits[sample_component(q, s)];
    for (std::size_t a = 0; a < 4; ++a) expect_binomial(hits[a], n, 0.25, "component " + std::to_string(a));
}

TEST(SampleComponent, ToyModeIsThree) {
    const auto q = presets::toy_weights();
    std::vector<std::size_t> hits(8, 0);
    for (std::uint64_t s = 0; s < 20000; ++s) ++hits[sample_component(q, s)];
    EXPECT_EQ(std::max_element(hits.begin(), hits.end()) - hits.begin(), 2);
}

TEST(SampleTrajectory, EmptyAndDeterministic) {
    const auto fam = presets::toy_haroche();
    const Theta t{std::numbers::pi / 4};
    EXPECT_EQ(sample_trajectory(fam, t, 3, 0, 1).size(), 0u);
    EXPECT_EQ(sample_trajectory(fam, t, 3, 500, 99), sample_trajectory(fam, t, 3, 500, 99));
    EXPECT_NE(sample_trajectory(fam, t, 3, 500, 99).outcomes, sample_trajectory(fam, t, 3, 500, 100).outcomes);
}

TEST(SampleTrajectory, ToyFrequencies) {
    const auto fam = presets::toy_haroche();
    const double theta = std::numbers::pi / 4;
    const std::size_t n = 100000;
    const auto traj = sample_trajectory(fam, Theta{theta}, 3, n, 4);
    const CountVector c = counts(traj, n, fam);
    for (int j = 0; j < 8; ++j) {
        // α = 4; outcome j = 4x + a
        const double p = (1.0 + 0.674 * std::cos(4 * theta + (2 - j % 4) * std::numbers::pi / 4 + (j / 4) * std::numbers::pi)) / 8.0;
        expect_binomial(c.counts[j], n, p, "outcome " + std::to_string(j));
    }
}

TEST(SampleTrajectory, MixtureFirstOutcomeMarginal) {
    const auto fam = presets::toy_haroche();
    const auto q = presets::toy_weights();
    const Theta t{0.7};
    const std::size_t reps = 100000;
    std::vector<std::size_t> hits(8, 0);
    for (std::uint64_t s = 0; s < reps; ++s) ++hits[sample_mixture_trajectory(fam, t, q, 1, s).outcomes[0]];
    for (std::size_t j = 0; j < 8; ++j) {
        double p = 0.0;
        for (std::size_t a = 0; a < 8; ++a) p += q[a] * fam.prob(t, a, j);
        expect_binomial(hits[j], reps, p, "outcome " + std::to_string(j));
    }
}

TEST(Counts, Examples) {
    Trajectory traj;
    traj.outcomes = {0, 1, 1, 2};
    EXPECT_EQ(counts(traj, 0, 8).counts, std::vector<std::uint64_t>(8, 0));
    const CountVector c = counts(traj, 4, 8);
    EXPECT_EQ(c.n, 4u);
    EXPECT_EQ(c.counts, (std::vector<std::uint64_t>{1, 2, 1, 0, 0, 0, 0, 0}));
    EXPECT_THROW(counts(traj, 5, 8), DomainError);
    EXPECT_THROW(counts(traj, 4, 2), DomainError);
}

TEST(CountPath, MatchesStoredRecord) {
    const auto fam = presets::toy_haroche();
    const Theta t{0.7};
    const auto p = fam.probs(t, 2);
    const std::vector<std::size_t> checkpoints{0, 10, 10, 250, 1000};
    RandomStream a(derive_seed(5, {1}));
    const auto path = sample_count_path(p, checkpoints, a);
    const auto traj = sample_trajectory(fam, t, 2, 1000, 5);
    for (std::size_t i = 0; i < checkpoints.size(); ++i) EXPECT_EQ(path[i], counts(traj, checkpoints[i], fam));
    RandomStream b(1);
    const std::vector<std::size_t> bad{10, 5};
    EXPECT_THROW(sample_count_path(p, bad, b), DomainError);
}

TEST(TrajectoryIo, JsonRoundTripAndCsv) {
    const auto fam = presets::toy_haroche();
    const auto traj = sample_mixture_trajectory(fam, Theta{0.8}, presets::toy_weights(), 20, 3);
    EXPECT_EQ(trajectory_from_json(Json::parse(dump_json(trajectory_to_json(traj)))), traj);
    const std::string csv = trajectory_csv(traj, fam.alphabet());
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "index,outcome");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 21);
}

TEST(Parallel, ResultsIndependentOfWorkers) {
    auto f = [](std::size_t i) { return sample_trajectory(presets::toy_haroche(), Theta{0.8}, i % 8, 50, i).outcomes; };
    EXPECT_EQ(parallel_map(40, 1, f), parallel_map(40, 4, f));
}

TEST(Parallel, LowestIndexExceptionWins) {
    auto f = [](std::size_t i) -> int {
        if (i == 3) throw std::runtime_error("three");
        if (i == 7) throw std::logic_error("seven");
        return 0;
    };
    try {
        parallel_map(10, 3, f);
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "three");
    }
}

}  // namespace
