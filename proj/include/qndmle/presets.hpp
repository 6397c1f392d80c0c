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

// Built-in models.
//
// toy_haroche: photon-number QND measurement with atoms read out in one of
// four Ramsey phases. Outcome j = 4x + a for x ∈ {0, 1}, a ∈ {0, …, 3};
// components α = alpha_min, …, alpha_min + 7 and
//   p_θ(x, a | α) = (1 + v cos(αθ + (2 − a)π/4 + xπ)) / 8,   v = 0.674.
//
// qubit_rotation: H_α(θ) = θ (α/2) σ_x on a qubit probe prepared in |0⟩,
// so p_θ(0|α) = cos²(αθ/2) and I_θ(α) = α².

#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "qndmle/model.hpp"
#include "qndmle/quantum.hpp"

namespace qndmle::presets {

inline constexpr double kToyVisibility = 0.674;
inline constexpr double kToyThetaStar = std::numbers::pi / 4.0;
inline constexpr double kToyPoissonRate = 3.46;

inline ParameterBox toy_box() { return ParameterBox::interval(std::numbers::pi / 8.0, 3.0 * std::numbers::pi / 8.0); }

/// Ramsey phase (2 − a)π/4 + xπ of outcome j = 4x + a.
inline double toy_phase(std::size_t j) {
    const double x = static_cast<double>(j / 4);
    const double a = static_cast<double>(j % 4);
    return (2.0 - a) * std::numbers::pi / 4.0 + x * std::numbers::pi;
}

inline std::vector<std::string> toy_outcome_labels() {
    std::vector<std::string> out;
    for (int x = 0; x < 2; ++x)
        for (int a = 0; a < 4; ++a) out.push_back("x" + std::to_string(x) + "a" + std::to_string(a));
    return out;
}

inline std::vector<std::string> numbered_labels(std::size_t first, std::size_t count) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(std::to_string(first + i));
    return out;
}

/// Closed-form I_θ(α) of the toy model.
inline double toy_fisher_closed_form(double theta, double alpha, double visibility = kToyVisibility) {
    double s = 0.0;
    for (int a = 0; a < 4; ++a) {
        const double arg = alpha * theta + (2.0 - a) * std::numbers::pi / 4.0;
        const double c = std::cos(arg);
        const double sn = std::sin(arg);
        s += alpha * alpha * (visibility * visibility / 4.0) * sn * sn / (1.0 - visibility * visibility * c * c);
    }
    return s;
}

/// One-parameter toy model (θ = θ₄), analytic gradient.
inline ParametricFamily toy_haroche(double visibility = kToyVisibility, std::size_t alpha_min = 1,
                                    ParameterBox box = toy_box(), const FamilyValidation& validation = {}) {
    ProbabilityRule prob = [visibility, alpha_min](ThetaView theta, std::size_t c, std::span<double> out) {
        const double alpha = static_cast<double>(alpha_min + c);
        for (std::size_t j = 0; j < 8; ++j) out[j] = (1.0 + visibility * std::cos(alpha * theta[0] + toy_phase(j))) / 8.0;
    };
    GradientRule grad = [visibility, alpha_min](ThetaView theta, std::size_t c, std::span<double> out) {
        const double alpha = static_cast<double>(alpha_min + c);
        for (std::size_t j = 0; j < 8; ++j) out[j] = -visibility * alpha * std::sin(alpha * theta[0] + toy_phase(j)) / 8.0;
    };
    return ParametricFamily(Alphabet(8, toy_outcome_labels()), ComponentSet(8, numbered_labels(alpha_min, 8)),
                            std::move(box), std::move(prob), std::move(grad), Smoothness::c3, validation);
}

/// Coordinates of the full toy variant, in order.
inline std::vector<std::string> toy_full_coordinates() {
    return {"phase_0", "phase_1", "phase_2", "phase_3", "theta_4", "visibility"};
}

/// Box of the full variant: ±π/16 around each ideal phase, θ₄ within
/// π/4 ± π/40, visibility in [0.6, 0.75].
inline ParameterBox toy_full_box() {
    std::vector<double> lo, hi;
    for (int a = 0; a < 4; ++a) {
        const double c = (2.0 - a) * std::numbers::pi / 4.0;
        lo.push_back(c - std::numbers::pi / 16.0);
        hi.push_back(c + std::numbers::pi / 16.0);
    }
    lo.push_back(kToyThetaStar - std::numbers::pi / 40.0);
    hi.push_back(kToyThetaStar + std::numbers::pi / 40.0);
    lo.push_back(0.6);
    hi.push_back(0.75);
    return ParameterBox(lo, hi);
}

/// Ideal parameter of the full variant with the measured visibility.
inline Theta toy_full_truth() {
    return {std::numbers::pi / 2.0, std::numbers::pi / 4.0, 0.0, -std::numbers::pi / 4.0, kToyThetaStar, kToyVisibility};
}

/// Toy model with the four phases, θ₄ and the visibility all free (D = 6).
/// The offset is pinned to 1 by normalization.
inline ParametricFamily toy_haroche_full(ParameterBox box = toy_full_box(), const FamilyValidation& validation = {}) {
    if (box.dimension() != 6) throw ConstructionError("toy_haroche_full: box must have dimension 6");
    ProbabilityRule prob = [](ThetaView t, std::size_t c, std::span<double> out) {
        const double alpha = static_cast<double>(c + 1);
        for (std::size_t j = 0; j < 8; ++j) {
            const double x = static_cast<double>(j / 4);
            out[j] = (1.0 + t[5] * std::cos(alpha * t[4] + t[j % 4] + x * std::numbers::pi)) / 8.0;
        }
    };
    GradientRule grad = [](ThetaView t, std::size_t c, std::span<double> out) {
        const double alpha = static_cast<double>(c + 1);
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t j = 0; j < 8; ++j) {
            const double x = static_cast<double>(j / 4);
            const double arg = alpha * t[4] + t[j % 4] + x * std::numbers::pi;
            const double ds = -t[5] * std::sin(arg) / 8.0;
            out[j * 6 + j % 4] = ds;
            out[j * 6 + 4] = alpha * ds;
            out[j * 6 + 5] = std::cos(arg) / 8.0;
        }
    };
    return ParametricFamily(Alphabet(8, toy_outcome_labels()), ComponentSet(8, numbered_labels(1, 8)), std::move(box),
                            std::move(prob), std::move(grad), Smoothness::c3, validation);
}

/// q(α) ∝ 3.46^α / α!, α = 1, …, 8.
inline MixtureWeights toy_weights() { return MixtureWeights::poissonlike(kToyPoissonRate, 1, 8); }

inline ParameterBox qubit_box() { return ParameterBox::interval(0.3, 1.2); }

inline ComplexMatrix sigma_x() {
    ComplexMatrix s(2, 2);
    s(0, 1) = 1.0;
    s(1, 0) = 1.0;
    return s;
}

/// Components α = 1, …, d.
inline QndSystem qubit_rotation_system(std::size_t d = 3) {
    if (d < 1) throw ConstructionError("qubit_rotation: need at least one component");
    auto h = [](ThetaView theta, std::size_t c) { return (theta[0] * static_cast<double>(c + 1) / 2.0) * sigma_x(); };
    auto dh = [](ThetaView, std::size_t c, std::size_t) { return (static_cast<double>(c + 1) / 2.0) * sigma_x(); };
    return QndSystem(d, 2, h, QndSystem::HamiltonianGradientRule(dh), {Complex(1.0, 0.0), Complex(0.0, 0.0)});
}

inline ParametricFamily qubit_rotation(std::size_t d = 3, ParameterBox box = qubit_box(), const FamilyValidation& validation = {}) {
    return as_family(qubit_rotation_system(d), box, {"0", "1"}, numbered_labels(1, d), validation);
}

inline constexpr double kQubitThetaStar = 0.75;

}  // namespace qndmle::presets
