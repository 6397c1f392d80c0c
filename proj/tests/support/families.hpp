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

// Small families used across the test suites.

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "qndmle/qndmle.hpp"

namespace qndmle::testkit {

/// Single component, two outcomes, p(0) = θ on [lo, hi].
inline ParametricFamily bernoulli(double lo = 0.1, double hi = 0.9) {
    ProbabilityRule prob = [](ThetaView t, std::size_t, std::span<double> out) {
        out[0] = t[0];
        out[1] = 1.0 - t[0];
    };
    GradientRule grad = [](ThetaView, std::size_t, std::span<double> out) {
        out[0] = 1.0;
        out[1] = -1.0;
    };
    return ParametricFamily(Alphabet(2, {"H", "T"}), ComponentSet(1), ParameterBox::interval(lo, hi), prob, grad,
                            Smoothness::c3);
}

/// Two coins: p(0|0) = θ, p(0|1) = θ + 1/2, θ ∈ [0.2, 0.4].
inline ParametricFamily two_coins() {
    ProbabilityRule prob = [](ThetaView t, std::size_t a, std::span<double> out) {
        out[0] = t[0] + (a == 0 ? 0.0 : 0.5);
        out[1] = 1.0 - out[0];
    };
    GradientRule grad = [](ThetaView, std::size_t, std::span<double> out) {
        out[0] = 1.0;
        out[1] = -1.0;
    };
    return ParametricFamily(Alphabet(2), ComponentSet(2), ParameterBox::interval(0.2, 0.4), prob, grad, Smoothness::c3);
}

/// Two mirrored coins p(0|0) = θ, p(0|1) = 1 − θ on [0.1, 0.9]; with equal
/// weights ℓ_n(θ) = ℓ_n(1 − θ).
inline ParametricFamily mirrored_coins() {
    ProbabilityRule prob = [](ThetaView t, std::size_t a, std::span<double> out) {
        out[0] = a == 0 ? t[0] : 1.0 - t[0];
        out[1] = 1.0 - out[0];
    };
    GradientRule grad = [](ThetaView, std::size_t a, std::span<double> out) {
        out[0] = a == 0 ? 1.0 : -1.0;
        out[1] = -out[0];
    };
    return ParametricFamily(Alphabet(2), ComponentSet(2), ParameterBox::interval(0.1, 0.9), prob, grad, Smoothness::c3);
}

/// Probabilities that do not depend on θ.
inline ParametricFamily constant_family() {
    ProbabilityRule prob = [](ThetaView, std::size_t a, std::span<double> out) {
        out[0] = a == 0 ? 0.3 : 0.6;
        out[1] = 1.0 - out[0];
    };
    GradientRule grad = [](ThetaView, std::size_t, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
    return ParametricFamily(Alphabet(2), ComponentSet(2), ParameterBox::interval(0.0, 1.0), prob, grad, Smoothness::c3);
}

/// Softmax of trigonometric logits,
///   z_j(θ, α) = Σ_k a_{jαk} sin(b_{jαk} θ_k + c_{jαk}),   p = softmax(z),
/// with sizes and coefficients drawn from `seed`. Box [−1, 1]^D.
struct RandomFamilySpec {
    std::size_t l = 2, d = 1, dim = 1;
    std::vector<double> a, b, c;  // index (j·d + α)·D + k
};

inline RandomFamilySpec random_family_spec(std::uint64_t seed) {
    RandomStream rng(derive_seed(seed, {0xFA}));
    RandomFamilySpec s;
    s.l = 2 + static_cast<std::size_t>(rng.next() % 4);
    s.d = 1 + static_cast<std::size_t>(rng.next() % 4);
    s.dim = 1 + static_cast<std::size_t>(rng.next() % 2);
    const std::size_t m = s.l * s.d * s.dim;
    for (std::size_t i = 0; i < m; ++i) {
        s.a.push_back(2.0 * rng.uniform() - 1.0);
        s.b.push_back(0.5 + 2.5 * rng.uniform());
        s.c.push_back(6.283185307179586 * rng.uniform());
    }
    return s;
}

inline ParametricFamily random_family(std::uint64_t seed, bool analytic_gradient = true) {
    const RandomFamilySpec s = random_family_spec(seed);
    auto logits = [s](ThetaView t, std::size_t alpha, std::vector<double>& z, std::vector<double>& dz) {
        z.assign(s.l, 0.0);
        dz.assign(s.l * s.dim, 0.0);
        for (std::size_t j = 0; j < s.l; ++j)
            for (std::size_t k = 0; k < s.dim; ++k) {
                const std::size_t i = (j * s.d + alpha) * s.dim + k;
                z[j] += s.a[i] * std::sin(s.b[i] * t[k] + s.c[i]);
                dz[j * s.dim + k] = s.a[i] * s.b[i] * std::cos(s.b[i] * t[k] + s.c[i]);
            }
    };
    auto softmax = [](std::vector<double>& z) {
        const double m = *std::max_element(z.begin(), z.end());
        double sum = 0.0;
        for (double& v : z) sum += (v = std::exp(v - m));
        for (double& v : z) v /= sum;
    };
    ProbabilityRule prob = [logits, softmax](ThetaView t, std::size_t alpha, std::span<double> out) {
        std::vector<double> z, dz;
        logits(t, alpha, z, dz);
        softmax(z);
        std::copy(z.begin(), z.end(), out.begin());
    };
    std::optional<GradientRule> grad;
    if (analytic_gradient) {
        grad = [logits, softmax, s](ThetaView t, std::size_t alpha, std::span<double> out) {
            std::vector<double> z, dz;
            logits(t, alpha, z, dz);
            softmax(z);
            for (std::size_t k = 0; k < s.dim; ++k) {
                double mean = 0.0;
                for (std::size_t i = 0; i < s.l; ++i) mean += z[i] * dz[i * s.dim + k];
                for (std::size_t j = 0; j < s.l; ++j) out[j * s.dim + k] = z[j] * (dz[j * s.dim + k] - mean);
            }
        };
    }
    return ParametricFamily(Alphabet(s.l), ComponentSet(s.d), ParameterBox(std::vector<double>(s.dim, -1.0), std::vector<double>(s.dim, 1.0)),
                            prob, grad, Smoothness::c3);
}

inline ComplexMatrix random_hermitian(RandomStream& rng, std::size_t n, double scale) {
    ComplexMatrix h(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        h(r, r) = scale * (2.0 * rng.uniform() - 1.0);
        for (std::size_t c = r + 1; c < n; ++c) {
            const Complex z(scale * (2.0 * rng.uniform() - 1.0), scale * (2.0 * rng.uniform() - 1.0));
            h(r, c) = z;
            h(c, r) = std::conj(z);
        }
    }
    return h;
}

inline std::vector<Complex> random_unit_vector(RandomStream& rng, std::size_t n) {
    std::vector<Complex> v(n);
    double norm = 0.0;
    for (auto& z : v) {
        z = Complex(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
        norm += std::norm(z);
    }
    for (auto& z : v) z /= std::sqrt(norm);
    return v;
}

/// QND system with H_α(θ) = θ A_α + B_α, random probe and probe basis.
inline QndSystem random_qnd_system(std::uint64_t seed) {
    RandomStream rng(derive_seed(seed, {0x0D}));
    const std::size_t d = 1 + static_cast<std::size_t>(rng.next() % 3);
    const std::size_t l = 2 + static_cast<std::size_t>(rng.next() % 3);
    std::vector<ComplexMatrix> a, b;
    for (std::size_t i = 0; i < d; ++i) {
        a.push_back(random_hermitian(rng, l, 1.0));
        b.push_back(random_hermitian(rng, l, 1.0));
    }
    const auto probe = random_unit_vector(rng, l);
    const ComplexMatrix basis = expm_minus_i(random_hermitian(rng, l, 2.0));
    auto h = [a, b](ThetaView t, std::size_t alpha) { return t[0] * a[alpha] + b[alpha]; };
    auto dh = [a](ThetaView, std::size_t alpha, std::size_t) { return a[alpha]; };
    return QndSystem(d, l, h, QndSystem::HamiltonianGradientRule(dh), probe, basis);
}

/// Box used with random QND systems.
inline ParameterBox random_qnd_box() { return ParameterBox::interval(-0.5, 0.5); }

/// First family built from seeds seed, seed + 1, … that passes the
/// positivity gate (random systems occasionally have a near-zero outcome).
inline std::pair<QndSystem, ParametricFamily> random_qnd_family(std::uint64_t seed) {
    for (std::uint64_t s = seed;; ++s) {
        QndSystem sys = random_qnd_system(s);
        try {
            ParametricFamily fam = as_family(sys, random_qnd_box());
            return {std::move(sys), std::move(fam)};
        } catch (const ConstructionError&) {
        }
    }
}

}  // namespace qndmle::testkit
