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

#include "qndmle/qndmle.hpp"
#include "support/families.hpp"
#include "support/properties.hpp"

namespace {

using namespace qndmle;
constexpr double kPi = std::numbers::pi;

// Oracle: the toy law written out from scratch, outcome j = 4x + a.
double toy_p(double theta, int alpha, int j, double v = 0.674) {
    const int x = j / 4, a = j % 4;
    return (1.0 + v * std::cos(alpha * theta + (2 - a) * kPi / 4.0 + x * kPi)) / 8.0;
}
double toy_dp(double theta, int alpha, int j, double v = 0.674) {
    const int x = j / 4, a = j % 4;
    return -v * alpha * std::sin(alpha * theta + (2 - a) * kPi / 4.0 + x * kPi) / 8.0;
}

TEST(ParametricFamily, ToyMatchesFormula) {
    const auto fam = presets::toy_haroche();
    for (double theta : {kPi / 8, 0.5, kPi / 4, 1.1}) {
        for (int alpha = 1; alpha <= 8; ++alpha) {
            const auto p = fam.probs(Theta{theta}, alpha - 1);
            double sum = 0.0;
            for (int j = 0; j < 8; ++j) {
                EXPECT_NEAR(p[j], toy_p(theta, alpha, j), 1e-15);
                sum += p[j];
            }
            EXPECT_NEAR(sum, 1.0, 1e-12);
        }
    }
    EXPECT_EQ(fam.alphabet().label(5), "x1a1");
    EXPECT_EQ(fam.components().label(0), "1");
}

TEST(ParametricFamily, RejectsUnnormalized) {
    ProbabilityRule prob = [](ThetaView t, std::size_t, std::span<double> out) {
        out[0] = t[0];
        out[1] = 0.5;
    };
    EXPECT_THROW(ParametricFamily(Alphabet(2), ComponentSet(1), ParameterBox::interval(0.2, 0.4), prob, std::nullopt,
                                  Smoothness::c3),
                 ConstructionError);
}

TEST(ParametricFamily, RejectsBoundaryProbability) {
    EXPECT_THROW(testkit::bernoulli(0.0, 0.5), ConstructionError);
    EXPECT_THROW(testkit::bernoulli(0.5, 1.0), ConstructionError);
}

TEST(ParametricFamily, RejectsWrongGradient) {
    ProbabilityRule prob = [](ThetaView t, std::size_t, std::span<double> out) {
        out[0] = t[0] * t[0];
        out[1] = 1.0 - out[0];
    };
    GradientRule grad = [](ThetaView t, std::size_t, std::span<double> out) {
        out[0] = t[0];  // should be 2θ
        out[1] = -t[0];
    };
    EXPECT_THROW(ParametricFamily(Alphabet(2), ComponentSet(1), ParameterBox::interval(0.2, 0.8), prob, grad, Smoothness::c3),
                 ConstructionError);
}

TEST(ParametricFamily, DomainChecks) {
    const auto fam = testkit::bernoulli();
    EXPECT_THROW(fam.probs(Theta{0.95}, 0), DomainError);
    EXPECT_THROW(fam.probs(Theta{0.5}, 1), DomainError);
    EXPECT_THROW(fam.probs(Theta{0.5, 0.5}, 0), DomainError);
}

TEST(ParametricFamily, ContinuousOnlyRefusesDerivatives) {
    ProbabilityRule prob = [](ThetaView t, std::size_t, std::span<double> out) {
        out[0] = t[0];
        out[1] = 1.0 - t[0];
    };
    const ParametricFamily fam(Alphabet(2), ComponentSet(1), ParameterBox::interval(0.2, 0.8), prob, std::nullopt,
                               Smoothness::continuous);
    EXPECT_THROW(fisher_information(fam, Theta{0.5}, 0), CapabilityError);
    EXPECT_THROW(fam.score(Theta{0.5}, 0), CapabilityError);
}

TEST(ParametricFamily, NumericGradientFallback) {
    const auto fam = testkit::random_family(11, false);
    EXPECT_TRUE(fam.numeric_derivatives());
    const auto info = fisher_information(fam, fam.box().center(), 0);
    EXPECT_TRUE(info.numeric_derivatives());
    const auto exact = testkit::random_family(11, true);
    const auto info2 = fisher_information(exact, exact.box().center(), 0);
    for (std::size_t k = 0; k < info.dimension(); ++k)
        for (std::size_t l = 0; l < info.dimension(); ++l) EXPECT_NEAR(info(k, l), info2(k, l), 1e-6 * (1 + std::abs(info2(k, l))));
}

TEST(MixtureWeights, Validation) {
    EXPECT_THROW(MixtureWeights({0.5, 0.6}), ConstructionError);
    EXPECT_THROW(MixtureWeights({-0.1, 1.1}), ConstructionError);
    EXPECT_THROW(MixtureWeights(std::vector<double>{}), ConstructionError);
    EXPECT_NO_THROW(MixtureWeights({0.0, 1.0}));
    const auto pm = MixtureWeights::point_mass(3, 1);
    EXPECT_EQ(pm[1], 1.0);
    EXPECT_TRUE(std::isinf(pm.log(0)));
}

TEST(MixtureWeights, ToyPoissonLike) {
    const auto q = presets::toy_weights();
    double z = 0.0;
    std::vector<double> w;
    for (int a = 1; a <= 8; ++a) {
        w.push_back(std::pow(3.46, a) / std::tgamma(a + 1.0));
        z += w.back();
    }
    for (int a = 0; a < 8; ++a) EXPECT_NEAR(q[a], w[a] / z, 1e-14);
    EXPECT_EQ(std::max_element(q.values().begin(), q.values().end()) - q.values().begin(), 2);  // α = 3
}

TEST(Entropy, FairCoin) {
    ProbabilityRule prob = [](ThetaView, std::size_t, std::span<double> out) { out[0] = out[1] = 0.5; };
    const ParametricFamily fam(Alphabet(2), ComponentSet(1), ParameterBox::interval(0, 1), prob, std::nullopt, Smoothness::c3);
    EXPECT_NEAR(shannon_entropy(fam, Theta{0.3}, 0), std::log(2.0), 1e-15);
}

TEST(Entropy, ToyDirectSummation) {
    const auto fam = presets::toy_haroche();
    double s = 0.0;
    for (int j = 0; j < 8; ++j) s -= toy_p(kPi / 4, 4, j) * std::log(toy_p(kPi / 4, 4, j));
    EXPECT_NEAR(shannon_entropy(fam, Theta{kPi / 4}, 3), s, 1e-14);
    EXPECT_LE(shannon_entropy(fam, Theta{kPi / 4}, 0), std::log(8.0));
}

TEST(KlDivergence, Examples) {
    const auto fam = presets::toy_haroche();
    const Theta t{kPi / 4};
    EXPECT_EQ(kl_divergence(fam, t, t, 3, 3), 0.0);
    double s = 0.0;
    for (int j = 0; j < 8; ++j) s += toy_p(kPi / 4, 2, j) * std::log(toy_p(kPi / 4, 2, j) / toy_p(kPi / 4, 3, j));
    EXPECT_NEAR(kl_divergence(fam, t, t, 1, 2), s, 1e-14);
    EXPECT_GT(s, 0.0);

    // Two coins with p = 0.6 and 0.5.
    const auto coin = testkit::bernoulli();
    EXPECT_NEAR(kl_divergence(coin, Theta{0.6}, Theta{0.5}, 0, 0), 0.6 * std::log(1.2) + 0.4 * std::log(0.8), 1e-15);
    EXPECT_NEAR(kl_divergence(coin, Theta{0.6}, Theta{0.5}, 0, 0), 0.020136, 1e-6);
}

TEST(KlMatrix, ToyStructure) {
    const auto fam = presets::toy_haroche();
    const RealMatrix m = kl_matrix(fam, Theta{kPi / 4});
    for (std::size_t a = 0; a < 8; ++a) {
        EXPECT_EQ(m(a, a), 0.0);
        for (std::size_t g = 0; g < 8; ++g)
            if (a != g) EXPECT_GT(m(a, g), 0.0) << a << "," << g;
    }
    // At π/4 the toy matrix happens to be symmetric; asymmetry shows at other θ.
    const RealMatrix m2 = kl_matrix(fam, Theta{0.7});
    double gap = 0.0;
    for (std::size_t a = 0; a < 8; ++a)
        for (std::size_t g = 0; g < 8; ++g) gap = std::max(gap, std::abs(m2(a, g) - m2(g, a)));
    EXPECT_GT(gap, 1e-4);
}

TEST(Fisher, ToyClosedFormAcrossGrid) {
    const auto fam = presets::toy_haroche();
    for (int k = 0; k <= 32; ++k) {
        const double theta = kPi / 8 + k * kPi / 128;
        for (int alpha = 1; alpha <= 8; ++alpha) {
            double oracle = 0.0;
            for (int j = 0; j < 8; ++j) oracle += toy_dp(theta, alpha, j) * toy_dp(theta, alpha, j) / toy_p(theta, alpha, j);
            EXPECT_NEAR(fisher_information(fam, Theta{theta}, alpha - 1)(0, 0), oracle, 1e-8);
            EXPECT_NEAR(presets::toy_fisher_closed_form(theta, alpha), oracle, 1e-12);
        }
    }
}

TEST(Fisher, ConstantFamilyIsZero) {
    const auto fam = testkit::constant_family();
    EXPECT_EQ(fisher_information(fam, Theta{0.4}, 1)(0, 0), 0.0);
    EXPECT_FALSE(fisher_information(fam, Theta{0.4}, 1).nonsingular());
}

TEST(Fisher, MonteCarloScoreCovariance) {
    const auto fam = presets::toy_haroche();
    const Theta t{kPi / 4};
    for (std::size_t alpha : {0, 3, 7}) {
        const auto traj = sample_trajectory(fam, t, alpha, 100000, 42 + alpha);
        const RealMatrix score = fam.score(t, alpha);
        double s = 0.0, s2 = 0.0;
        for (auto j : traj.outcomes) {
            s += score(j, 0);
            s2 += score(j, 0) * score(j, 0);
        }
        const double n = static_cast<double>(traj.size());
        const double cov = s2 / n - (s / n) * (s / n);
        const double exact = fisher_information(fam, t, alpha)(0, 0);
        EXPECT_NEAR(cov / exact, 1.0, 0.02) << "alpha " << alpha + 1;
    }
}

TEST(Identifiability, DuplicatedComponentFlagged) {
    ProbabilityRule prob = [](ThetaView t, std::size_t, std::span<double> out) {
        out[0] = t[0];
        out[1] = 1.0 - t[0];
    };
    const ParametricFamily fam(Alphabet(2), ComponentSet(2), ParameterBox::interval(0.2, 0.8), prob, std::nullopt, Smoothness::c3);
    const auto rep = check_identifiability(fam, fam.box().linspace(5));
    EXPECT_FALSE(rep.passed());
    EXPECT_EQ(rep.min_margin, 0.0);
    EXPECT_EQ(rep.flagged.size(), 5u);
}

TEST(Identifiability, ToyAlphaZeroFlagged) {
    const auto box = ParameterBox::interval(kPi / 4 - 0.05, kPi / 4 + 0.05);
    const auto fam = presets::toy_haroche(0.674, 0, box);
    const auto rep = check_identifiability(fam, box.linspace(5));
    ASSERT_FALSE(rep.passed());
    for (const auto& f : rep.flagged) {
        EXPECT_EQ(f.alpha, 0u);
        EXPECT_EQ(f.beta, 0u);
    }
}

// On the full box [π/8, 3π/8] distinct components collide: α θ and α' θ'
// give the same law whenever α θ ≡ α' θ' (mod 2π).
TEST(Identifiability, ToyFullBoxHasAliases) {
    const auto fam = presets::toy_haroche();
    for (int j = 0; j < 8; ++j) EXPECT_NEAR(toy_p(3 * kPi / 8, 1, j), toy_p(kPi / 8, 3, j), 1e-15);
    const auto rep = check_identifiability(fam, fam.box().linspace(50));
    EXPECT_FALSE(rep.passed());
    EXPECT_LT(rep.min_margin, 1e-12);
    EXPECT_EQ(rep.flagged.size(), 32u);
}

TEST(Identifiability, ToyNeighborhoodBoxPasses) {
    const auto box = ParameterBox::interval(kPi / 4 - kPi / 40, kPi / 4 + kPi / 40);
    const auto fam = presets::toy_haroche(0.674, 1, box);
    const auto rep = check_identifiability(fam, box.linspace(50));
    EXPECT_TRUE(rep.passed());
    EXPECT_GT(rep.min_margin, 1e-4);
}

TEST(Properties, PresetsAndRandomFamilies) {
    testkit::PropertyLog all;
    all.merge(testkit::family_properties(presets::toy_haroche(), 1));
    all.merge(testkit::family_properties(presets::toy_haroche_full(), 2));
    all.merge(testkit::family_properties(presets::qubit_rotation(), 3));
    for (std::uint64_t s = 0; s < 100; ++s) all.merge(testkit::family_properties(testkit::random_family(1000 + s), s));
    for (const auto& r : all.results()) EXPECT_TRUE(r.passed) << r.name << " worst " << r.worst;
    EXPECT_NE(all.find("gradient_vs_fd"), nullptr);
    EXPECT_NE(all.find("exchangeability"), nullptr);
}

}  // namespace
