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

// Quantum non-demolition measurement: a system with pointer basis {e_α}
// coupled to a probe through U = Σ_α π_{e_α} ⊗ U_α(θ), U_α = exp(−i H_α(θ)).
// Each probe measurement in the basis {ψ_j} yields outcome j with
// probability p_θ(j|α) = |⟨ψ_j, U_α ψ⟩|² given the pointer state e_α.
//
// Inner products are linear in the second argument: ⟨x, y⟩ = Σ conj(x_i) y_i.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qndmle/errors.hpp"
#include "qndmle/linalg.hpp"
#include "qndmle/model.hpp"

namespace qndmle {

/// Generators H_α(θ), optional derivatives ∂_{θ_k} H_α(θ), probe state and
/// probe measurement basis. Immutable after construction.
class QndSystem {
  public:
    using HamiltonianRule = std::function<ComplexMatrix(ThetaView theta, std::size_t alpha)>;
    using HamiltonianGradientRule = std::function<ComplexMatrix(ThetaView theta, std::size_t alpha, std::size_t k)>;

    QndSystem(std::size_t system_dim, std::size_t probe_dim, HamiltonianRule hamiltonian,
              std::optional<HamiltonianGradientRule> hamiltonian_gradient, std::vector<Complex> probe,
              std::optional<ComplexMatrix> probe_basis = std::nullopt)
        : system_dim_(system_dim),
          probe_dim_(probe_dim),
          hamiltonian_(std::move(hamiltonian)),
          hamiltonian_gradient_(std::move(hamiltonian_gradient)),
          probe_(std::move(probe)),
          basis_(probe_basis ? std::move(*probe_basis) : ComplexMatrix::identity(probe_dim)) {
        if (system_dim_ < 1) throw ConstructionError("QndSystem: system dimension must be >= 1");
        if (probe_dim_ < 2) throw ConstructionError("QndSystem: probe dimension must be >= 2");
        if (!hamiltonian_) throw ConstructionError("QndSystem: Hamiltonian rule is empty");
        if (hamiltonian_gradient_ && !*hamiltonian_gradient_) hamiltonian_gradient_.reset();
        if (probe_.size() != probe_dim_) throw ConstructionError("QndSystem: probe state has the wrong dimension");
        double norm2 = 0.0;
        for (const auto& z : probe_) norm2 += std::norm(z);
        if (std::abs(std::sqrt(norm2) - 1.0) > 1e-12) throw ConstructionError("QndSystem: probe state is not a unit vector");
        if (basis_.rows() != probe_dim_ || basis_.cols() != probe_dim_)
            throw ConstructionError("QndSystem: probe basis has the wrong shape");
        if (unitarity_defect(basis_) > 1e-12) throw ConstructionError("QndSystem: probe basis is not orthonormal");
    }

    std::size_t system_dim() const { return system_dim_; }
    std::size_t probe_dim() const { return probe_dim_; }
    const std::vector<Complex>& probe() const { return probe_; }
    /// Columns are the measurement vectors ψ_j.
    const ComplexMatrix& probe_basis() const { return basis_; }
    bool has_hamiltonian_gradient() const { return hamiltonian_gradient_.has_value(); }

    /// H_α(θ), checked Hermitian.
    ComplexMatrix hamiltonian(ThetaView theta, std::size_t alpha) const {
        check_component(alpha);
        ComplexMatrix h = hamiltonian_(theta, alpha);
        check_hermitian(h, "generator");
        return h;
    }
    ComplexMatrix hamiltonian_gradient(ThetaView theta, std::size_t alpha, std::size_t k) const {
        if (!hamiltonian_gradient_) throw CapabilityError("QndSystem: no Hamiltonian derivative rule supplied");
        check_component(alpha);
        ComplexMatrix dh = (*hamiltonian_gradient_)(theta, alpha, k);
        check_hermitian(dh, "generator derivative");
        return dh;
    }

  private:
    void check_component(std::size_t alpha) const {
        if (alpha >= system_dim_) throw DomainError("QndSystem: component index out of range");
    }
    void check_hermitian(const ComplexMatrix& h, const char* what) const {
        if (h.rows() != probe_dim_ || h.cols() != probe_dim_)
            throw ConstructionError(std::string("QndSystem: ") + what + " has the wrong shape");
        double scale = 1.0;
        for (const auto& z : h.data()) scale = std::max(scale, std::abs(z));
        if (!is_hermitian(h, 1e-12 * scale)) throw ConstructionError(std::string("QndSystem: ") + what + " is not Hermitian");
    }

    std::size_t system_dim_;
    std::size_t probe_dim_;
    HamiltonianRule hamiltonian_;
    std::optional<HamiltonianGradientRule> hamiltonian_gradient_;
    std::vector<Complex> probe_;
    ComplexMatrix basis_;
};

/// U_α(θ) = exp(−i H_α(θ)).
inline ComplexMatrix unitary(const QndSystem& sys, ThetaView theta, std::size_t alpha) {
    return expm_minus_i(sys.hamiltonian(theta, alpha));
}

namespace detail {

/// ⟨ψ_j, v⟩ for every basis vector ψ_j.
inline std::vector<Complex> basis_coefficients(const ComplexMatrix& basis, std::span<const Complex> v) {
    std::vector<Complex> out(basis.cols());
    for (std::size_t j = 0; j < basis.cols(); ++j) {
        Complex acc{};
        for (std::size_t i = 0; i < basis.rows(); ++i) acc += std::conj(basis(i, j)) * v[i];
        out[j] = acc;
    }
    return out;
}

}  // namespace detail

/// Amplitudes ⟨ψ_j, U_α(θ) ψ⟩.
inline std::vector<Complex> outcome_amplitudes(const QndSystem& sys, ThetaView theta, std::size_t alpha) {
    const ComplexMatrix u = unitary(sys, theta, alpha);
    const auto evolved = u * std::span<const Complex>(sys.probe());
    return detail::basis_coefficients(sys.probe_basis(), evolved);
}

/// p(j|α) = |⟨ψ_j, U_α(θ) ψ⟩|².
inline std::vector<double> outcome_probs(const QndSystem& sys, ThetaView theta, std::size_t alpha) {
    const auto amp = outcome_amplitudes(sys, theta, alpha);
    std::vector<double> p(amp.size());
    for (std::size_t j = 0; j < amp.size(); ++j) p[j] = std::norm(amp[j]);
    return p;
}

/// ∂_{θ_k} ln p(j|α) from 2·Im(⟨ψ_j, ∂_k H U ψ⟩ / ⟨ψ_j, U ψ⟩), an l×D matrix.
/// Exact only when H_α(θ) commutes with ∂_k H_α(θ), e.g. H_α(θ) = θ H_α.
inline RealMatrix commuting_score(const QndSystem& sys, ThetaView theta, std::size_t alpha) {
    const ComplexMatrix u = unitary(sys, theta, alpha);
    const auto evolved = u * std::span<const Complex>(sys.probe());
    const auto amp = detail::basis_coefficients(sys.probe_basis(), evolved);
    RealMatrix s(sys.probe_dim(), theta.size());
    for (std::size_t k = 0; k < theta.size(); ++k) {
        const auto pushed = sys.hamiltonian_gradient(theta, alpha, k) * std::span<const Complex>(evolved);
        const auto num = detail::basis_coefficients(sys.probe_basis(), pushed);
        for (std::size_t j = 0; j < amp.size(); ++j) s(j, k) = 2.0 * std::imag(num[j] / amp[j]);
    }
    return s;
}

/// ∂_{θ_k} p(j|α) through the exact derivative of the matrix exponential.
inline RealMatrix outcome_prob_gradient(const QndSystem& sys, ThetaView theta, std::size_t alpha) {
    const auto eig = hermitian_eigen(sys.hamiltonian(theta, alpha));
    const ComplexMatrix u = expm_minus_i(eig);
    const std::span<const Complex> psi(sys.probe());
    const auto amp = detail::basis_coefficients(sys.probe_basis(), u * psi);
    RealMatrix g(sys.probe_dim(), theta.size());
    for (std::size_t k = 0; k < theta.size(); ++k) {
        const ComplexMatrix du = expm_minus_i_derivative(eig, sys.hamiltonian_gradient(theta, alpha, k));
        const auto damp = detail::basis_coefficients(sys.probe_basis(), du * psi);
        for (std::size_t j = 0; j < amp.size(); ++j) g(j, k) = 2.0 * std::real(std::conj(amp[j]) * damp[j]);
    }
    return g;
}

/// The parametric family θ ↦ p_θ(·|α) induced by a QND system on `box`.
/// Fails construction when some probability leaves (ε, 1 − ε) on the
/// validation grid.
inline ParametricFamily as_family(const QndSystem& sys, const ParameterBox& box, std::vector<std::string> outcome_labels = {},
                                  std::vector<std::string> component_labels = {},
                                  const FamilyValidation& validation = {}) {
    ProbabilityRule prob = [sys](ThetaView theta, std::size_t alpha, std::span<double> out) {
        const auto p = outcome_probs(sys, theta, alpha);
        std::copy(p.begin(), p.end(), out.begin());
    };
    std::optional<GradientRule> grad;
    if (sys.has_hamiltonian_gradient()) {
        grad = [sys](ThetaView theta, std::size_t alpha, std::span<double> out) {
            const RealMatrix g = outcome_prob_gradient(sys, theta, alpha);
            std::copy(g.data().begin(), g.data().end(), out.begin());
        };
    }
    return ParametricFamily(Alphabet(sys.probe_dim(), std::move(outcome_labels)),
                            ComponentSet(sys.system_dim(), std::move(component_labels)), box, std::move(prob),
                            std::move(grad), Smoothness::c3, validation);
}

/// Conditional system state φ_n (when tracked) and posterior q_n.
struct FilterState {
    std::optional<std::vector<Complex>> phi;
    std::vector<double> q;
    std::size_t step = 0;
};

/// Multiplies by a global phase so the first nonzero amplitude is real positive.
inline void canonicalize_phase(std::vector<Complex>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double r = std::abs(v[i]);
        if (r == 0.0) continue;
        const Complex f = std::conj(v[i]) / r;
        for (auto& w : v) w *= f;
        v[i] = Complex(r, 0.0);
        return;
    }
}

/// Entries whose weight falls below this are treated as collapsed.
inline constexpr double kPosteriorFloor = 1e-300;

/// Bayes/QND update at a fixed θ with the outcome table precomputed.
class PosteriorFilter {
  public:
    /// Classical mode: posterior weights only.
    PosteriorFilter(const ParametricFamily& fam, ThetaView theta) : d_(fam.component_count()), l_(fam.outcome_count()) {
        fam.require_in_box(theta);
        p_.resize(d_ * l_);
        for (std::size_t a = 0; a < d_; ++a) fam.probs_into(theta, a, std::span<double>(p_).subspan(a * l_, l_));
    }
    /// Quantum mode: also tracks the conditional system state.
    PosteriorFilter(const QndSystem& sys, ThetaView theta) : d_(sys.system_dim()), l_(sys.probe_dim()) {
        p_.resize(d_ * l_);
        amp_.resize(d_ * l_);
        for (std::size_t a = 0; a < d_; ++a) {
            const auto amp = outcome_amplitudes(sys, theta, a);
            for (std::size_t j = 0; j < l_; ++j) {
                amp_[a * l_ + j] = amp[j];
                p_[a * l_ + j] = std::norm(amp[j]);
            }
        }
    }

    bool tracks_state() const { return !amp_.empty(); }
    std::size_t component_count() const { return d_; }
    std::size_t outcome_count() const { return l_; }
    double likelihood(std::size_t alpha, std::size_t j) const { return p_[alpha * l_ + j]; }

    FilterState initial(const MixtureWeights& q0) const {
        if (q0.size() != d_) throw DomainError("PosteriorFilter: weight vector has the wrong length");
        return FilterState{std::nullopt, q0.values(), 0};
    }
    FilterState initial(std::vector<Complex> phi0) const {
        if (!tracks_state()) throw CapabilityError("PosteriorFilter: state tracking needs a QndSystem");
        if (phi0.size() != d_) throw DomainError("PosteriorFilter: initial state has the wrong dimension");
        double norm2 = 0.0;
        for (const auto& z : phi0) norm2 += std::norm(z);
        if (std::abs(norm2 - 1.0) > 1e-10) throw DomainError("PosteriorFilter: initial state is not a unit vector");
        FilterState s;
        s.q.resize(d_);
        for (std::size_t a = 0; a < d_; ++a) s.q[a] = std::norm(phi0[a]);
        canonicalize_phase(phi0);
        s.phi = std::move(phi0);
        return s;
    }

    /// π_n(j) = Σ_α q_n(α) p(j|α).
    double predictive(const FilterState& s, std::size_t j) const {
        double pi = 0.0;
        for (std::size_t a = 0; a < d_; ++a) pi += s.q[a] * p_[a * l_ + j];
        return pi;
    }

    FilterState step(const FilterState& s, std::size_t j) const {
        if (j >= l_) throw DomainError("PosteriorFilter: outcome index out of range");
        if (s.q.size() != d_) throw DomainError("PosteriorFilter: state has the wrong dimension");
        const double pi = predictive(s, j);
        if (!(pi > 0.0)) {
            throw InferenceError("outcome " + std::to_string(j) + " has probability zero under the current posterior");
        }
        FilterState next;
        next.step = s.step + 1;
        next.q.resize(d_);
        double total = 0.0;
        for (std::size_t a = 0; a < d_; ++a) {
            double w = s.q[a] * p_[a * l_ + j] / pi;
            if (w < kPosteriorFloor) w = 0.0;
            next.q[a] = w;
            total += w;
        }
        for (auto& w : next.q) w /= total;

        if (s.phi) {
            if (!tracks_state()) throw CapabilityError("PosteriorFilter: state tracking needs a QndSystem");
            std::vector<Complex> phi(d_);
            const double inv = 1.0 / std::sqrt(pi);
            double norm2 = 0.0;
            for (std::size_t a = 0; a < d_; ++a) {
                Complex z = (*s.phi)[a] * amp_[a * l_ + j] * inv;
                if (std::norm(z) < kPosteriorFloor) z = 0.0;
                phi[a] = z;
                norm2 += std::norm(z);
            }
            const double scale = 1.0 / std::sqrt(norm2);
            for (auto& z : phi) z *= scale;
            canonicalize_phase(phi);
            next.phi = std::move(phi);
        }
        return next;
    }

  private:
    std::size_t d_;
    std::size_t l_;
    std::vector<double> p_;
    std::vector<Complex> amp_;
};

/// One posterior update q_{n+1}(α) = q_n(α) p_θ(j|α) / π_n(j).
inline FilterState filter_step(const ParametricFamily& fam, const FilterState& state, ThetaView theta, std::size_t j) {
    return PosteriorFilter(fam, theta).step(state, j);
}
/// Quantum update of φ_n and q_n; classical-only states are updated as in the family overload.
inline FilterState filter_step(const QndSystem& sys, const FilterState& state, ThetaView theta, std::size_t j) {
    return PosteriorFilter(sys, theta).step(state, j);
}

namespace detail {
template <typename Outcomes>
std::vector<FilterState> fold_filter(const PosteriorFilter& f, FilterState s, const Outcomes& outcomes) {
    std::vector<FilterState> path;
    path.reserve(outcomes.size() + 1);
    path.push_back(s);
    for (auto j : outcomes) path.push_back(f.step(path.back(), static_cast<std::size_t>(j)));
    return path;
}
}  // namespace detail

/// Full posterior path [q_0, q_1, …, q_n] along a record.
inline std::vector<FilterState> filter_trajectory(const ParametricFamily& fam, const MixtureWeights& q0, ThetaView theta,
                                                  std::span<const std::uint32_t> outcomes) {
    PosteriorFilter f(fam, theta);
    return detail::fold_filter(f, f.initial(q0), outcomes);
}
inline std::vector<FilterState> filter_trajectory(const QndSystem& sys, std::vector<Complex> phi0, ThetaView theta,
                                                  std::span<const std::uint32_t> outcomes) {
    PosteriorFilter f(sys, theta);
    return detail::fold_filter(f, f.initial(std::move(phi0)), outcomes);
}

/// Posterior computed in one shot from outcome counts (log domain).
inline std::vector<double> posterior_from_counts(const ParametricFamily& fam, const MixtureWeights& q0, ThetaView theta,
                                                 std::span<const std::uint64_t> counts) {
    const std::size_t d = fam.component_count();
    std::vector<double> logw(d);
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < d; ++a) {
        const auto p = fam.probs(theta, a);
        double s = q0.log(a);
        for (std::size_t j = 0; j < p.size(); ++j)
            if (counts[j] > 0) s += static_cast<double>(counts[j]) * std::log(p[j]);
        logw[a] = s;
        m = std::max(m, s);
    }
    std::vector<double> w(d);
    double total = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
        w[a] = std::isfinite(logw[a]) ? std::exp(logw[a] - m) : 0.0;
        total += w[a];
    }
    for (auto& x : w) x /= total;
    return w;
}

}  // namespace qndmle
