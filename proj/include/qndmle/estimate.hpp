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

// Likelihood of a measurement record under the mixture model
//   ℓ_n(θ) = (1/n) ln Σ_α q(α) Π_j p_θ(j|α)^{N_n(j)},
// its per-component version, the n → ∞ limit function, and the maximum
// likelihood estimator over the parameter box.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qndmle/errors.hpp"
#include "qndmle/io.hpp"
#include "qndmle/model.hpp"
#include "qndmle/optimize.hpp"
#include "qndmle/simulate.hpp"

namespace qndmle {

/// ln Σ exp(x_i), shifted by the maximum; −∞ entries contribute nothing.
inline double log_sum_exp(std::span<const double> xs) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : xs) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

struct LogLikelihood {
    double value = 0.0;  // normalized ℓ_n(θ)
    std::size_t n = 0;
    Theta theta;
    std::vector<double> per_component;  // ln q(α) + ln P_{θ|α}(record), unnormalized
};

/// Allocation-free evaluator of n·ℓ_n(θ) and of its gradient for one record.
/// Holds scratch space: one instance per thread.
class MixtureLikelihood {
  public:
    MixtureLikelihood(const ParametricFamily& fam, const MixtureWeights& q, const CountVector& counts)
        : fam_(&fam), counts_(counts), p_(fam.outcome_count()), terms_(fam.component_count()) {
        if (q.size() != fam.component_count()) throw DomainError("loglik: weight vector has the wrong length");
        if (counts.counts.size() != fam.outcome_count()) throw DomainError("loglik: count vector has the wrong length");
        if (counts.n < 1) throw DomainError("loglik: needs at least one observation");
        logq_.resize(q.size());
        for (std::size_t a = 0; a < q.size(); ++a) logq_[a] = q.log(a);
    }

    std::size_t n() const { return counts_.n; }

    /// ln q(α) + Σ_j N(j) ln p_θ(j|α) for every α, into `terms`.
    void component_terms(ThetaView theta, std::span<double> terms) const {
        for (std::size_t a = 0; a < terms.size(); ++a) {
            if (!std::isfinite(logq_[a])) {
                terms[a] = logq_[a];
                continue;
            }
            terms[a] = logq_[a] + component_log_prob(theta, a);
        }
    }

    /// Σ_j N(j) ln p_θ(j|α).
    double component_log_prob(ThetaView theta, std::size_t alpha) const {
        fam_->probs_into(theta, alpha, p_);
        double s = 0.0;
        for (std::size_t j = 0; j < p_.size(); ++j)
            if (counts_.counts[j] > 0) s += static_cast<double>(counts_.counts[j]) * std::log(p_[j]);
        return s;
    }

    /// n·ℓ_n(θ) = ln P_θ(record).
    double log_prob(ThetaView theta) const {
        component_terms(theta, terms_);
        return log_sum_exp(terms_);
    }
    double loglik(ThetaView theta) const { return log_prob(theta) / static_cast<double>(counts_.n); }
    double loglik_component(ThetaView theta, std::size_t gamma) const {
        return component_log_prob(theta, gamma) / static_cast<double>(counts_.n);
    }

    /// ∇ℓ_n(θ) = (1/n) Σ_α w_α(θ) Σ_j N(j) ∇ln p_θ(j|α), with w the posterior weights.
    Theta gradient(ThetaView theta) const {
        component_terms(theta, terms_);
        const double lse = log_sum_exp(terms_);
        Theta g(theta.size(), 0.0);
        for (std::size_t a = 0; a < terms_.size(); ++a) {
            const double w = std::isfinite(terms_[a]) ? std::exp(terms_[a] - lse) : 0.0;
            if (w == 0.0) continue;
            const Theta ga = component_gradient(theta, a);
            for (std::size_t k = 0; k < g.size(); ++k) g[k] += w * ga[k];
        }
        return g;
    }

    /// ∇ℓ_n^γ(θ) = (1/n) Σ_j N(j) ∇ln p_θ(j|γ).
    Theta component_gradient(ThetaView theta, std::size_t gamma) const {
        const RealMatrix s = fam_->score(theta, gamma);
        Theta g(theta.size(), 0.0);
        for (std::size_t j = 0; j < s.rows(); ++j) {
            if (counts_.counts[j] == 0) continue;
            const double c = static_cast<double>(counts_.counts[j]) / static_cast<double>(counts_.n);
            for (std::size_t k = 0; k < g.size(); ++k) g[k] += c * s(j, k);
        }
        return g;
    }

  private:
    const ParametricFamily* fam_;
    CountVector counts_;
    std::vector<double> logq_;
    mutable std::vector<double> p_;
    mutable std::vector<double> terms_;
};

/// ℓ_n(θ) with its per-component log terms.
inline LogLikelihood loglik(const ParametricFamily& fam, const MixtureWeights& q, const CountVector& counts, ThetaView theta) {
    fam.require_in_box(theta);
    MixtureLikelihood lik(fam, q, counts);
    LogLikelihood out;
    out.n = counts.n;
    out.theta.assign(theta.begin(), theta.end());
    out.per_component.resize(fam.component_count());
    lik.component_terms(theta, out.per_component);
    out.value = log_sum_exp(out.per_component) / static_cast<double>(counts.n);
    return out;
}

/// ℓ_n^γ(θ) = (1/n) Σ_j N(j) ln p_θ(j|γ).
inline double loglik_component(const ParametricFamily& fam, const CountVector& counts, ThetaView theta, std::size_t gamma) {
    fam.require_in_box(theta);
    fam.require_component(gamma);
    if (counts.n < 1) throw DomainError("loglik_component: needs at least one observation");
    const auto p = fam.probs(theta, gamma);
    double s = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j)
        if (counts.counts.at(j) > 0) s += static_cast<double>(counts.counts[j]) * std::log(p[j]);
    return s / static_cast<double>(counts.n);
}

/// ℓ_{θ*,γ}(θ) = −S_{θ*}(γ) − min_α S_{θ*|θ}(γ|α), the almost-sure limit of
/// ℓ_n(θ) along records drawn from component γ at θ*.
inline double limit_loglik(const ParametricFamily& fam, ThetaView theta_star, std::size_t gamma, ThetaView theta) {
    double min_kl = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < fam.component_count(); ++a)
        min_kl = std::min(min_kl, kl_divergence(fam, theta_star, theta, gamma, a));
    return -shannon_entropy(fam, theta_star, gamma) - min_kl;
}

struct MleOptions {
    ScanOptions scan{};          // D = 1
    AscentOptions ascent{};      // D > 1
    bool per_component = true;   // also compute θ̂_n^γ for every γ
    bool record_trace = true;
    bool fisher = true;          // I_{θ̂}(α) for every α
};

struct TracePoint {
    Theta theta;
    double loglik = 0.0;
};

struct EstimationReport {
    Theta theta_hat;
    std::vector<Theta> theta_hat_per_component;
    std::vector<double> loglik_per_component_at_max;  // ℓ_n^γ(θ̂_n^γ)
    double loglik_at_max = 0.0;
    std::size_t n = 0;
    std::vector<TracePoint> optimizer_trace;
    std::vector<InfoMatrix> fisher_at_hat;
    std::vector<double> posterior_at_hat;
    bool converged = true;
    bool tie = false;
    bool at_boundary = false;
    bool numeric_derivatives = false;
};

namespace detail {

inline bool near_boundary(const ParameterBox& box, ThetaView theta) {
    for (std::size_t k = 0; k < theta.size(); ++k) {
        const double tol = 1e-6 * box.width(k);
        if (theta[k] - box.lower()[k] <= tol || box.upper()[k] - theta[k] <= tol) return true;
    }
    return false;
}

struct Maximum {
    Theta theta;
    double value = 0.0;
    bool converged = true;
    bool tie = false;
};

/// Maximizes `value` (a function of θ) over the box; `gradient` is used only when D > 1.
template <typename V, typename G>
Maximum maximize_over_box(const ParameterBox& box, V&& value, G&& gradient, const MleOptions& opt) {
    if (box.dimension() == 1) {
        Theta t(1);
        auto f = [&](double x) {
            t[0] = x;
            return value(t);
        };
        const ScanResult r = scan_and_refine_max(f, box.lower()[0], box.upper()[0], opt.scan);
        return Maximum{{r.x}, r.value, r.converged, r.tie};
    }
    const MultiStartResult r = multistart_ascent(value, gradient, box, opt.ascent);
    return Maximum{r.best.x, r.best.value, r.best.converged, r.tie};
}

}  // namespace detail

/// θ̂_n = argmax over the box of ℓ_n, plus per-component estimators θ̂_n^γ,
/// Fisher matrices and posterior weights at θ̂_n.
inline EstimationReport mle(const ParametricFamily& fam, const MixtureWeights& q, const CountVector& counts,
                            const MleOptions& opt = {}) {
    const MixtureLikelihood lik(fam, q, counts);
    EstimationReport rep;
    rep.n = counts.n;
    rep.numeric_derivatives = fam.numeric_derivatives();

    auto objective = [&](ThetaView theta) {
        const double v = lik.loglik(theta);
        if (opt.record_trace) rep.optimizer_trace.push_back({Theta(theta.begin(), theta.end()), v});
        return v;
    };
    auto gradient = [&](ThetaView theta) { return lik.gradient(theta); };
    if (fam.dimension() > 1 && !fam.differentiable())
        throw CapabilityError("mle: multi-dimensional estimation needs a differentiable family");

    const detail::Maximum best = detail::maximize_over_box(fam.box(), objective, gradient, opt);
    rep.theta_hat = best.theta;
    rep.loglik_at_max = best.value;
    rep.converged = best.converged;
    rep.tie = best.tie;
    rep.at_boundary = detail::near_boundary(fam.box(), rep.theta_hat);

    if (opt.per_component) {
        for (std::size_t g = 0; g < fam.component_count(); ++g) {
            auto value_g = [&](ThetaView theta) { return lik.loglik_component(theta, g); };
            auto grad_g = [&](ThetaView theta) { return lik.component_gradient(theta, g); };
            const detail::Maximum m = detail::maximize_over_box(fam.box(), value_g, grad_g, opt);
            rep.theta_hat_per_component.push_back(m.theta);
            rep.loglik_per_component_at_max.push_back(m.value);
            rep.converged = rep.converged && m.converged;
        }
    }
    if (opt.fisher && fam.differentiable()) {
        for (std::size_t a = 0; a < fam.component_count(); ++a) rep.fisher_at_hat.push_back(fisher_information(fam, rep.theta_hat, a));
    }
    {
        std::vector<double> terms(fam.component_count());
        lik.component_terms(rep.theta_hat, terms);
        const double lse = log_sum_exp(terms);
        for (double t : terms) rep.posterior_at_hat.push_back(std::isfinite(t) ? std::exp(t - lse) : 0.0);
    }
    return rep;
}

struct ComponentEstimate {
    Theta theta_hat;
    double loglik_at_max = 0.0;
    bool converged = true;
    bool tie = false;
};

/// θ̂_n^γ = argmax over the box of ℓ_n^γ alone.
inline ComponentEstimate component_mle(const ParametricFamily& fam, const CountVector& counts, std::size_t gamma,
                                       const MleOptions& opt = {}) {
    fam.require_component(gamma);
    const MixtureLikelihood lik(fam, MixtureWeights::point_mass(fam.component_count(), gamma), counts);
    auto value = [&](ThetaView theta) { return lik.loglik_component(theta, gamma); };
    auto grad = [&](ThetaView theta) { return lik.component_gradient(theta, gamma); };
    const detail::Maximum m = detail::maximize_over_box(fam.box(), value, grad, opt);
    return ComponentEstimate{m.theta, m.value, m.converged, m.tie};
}

inline Json to_json(const InfoMatrix& m) {
    Json j;
    j["component"] = m.component();
    j["theta"] = m.theta();
    Json rows = Json::array();
    for (std::size_t r = 0; r < m.dimension(); ++r) {
        Json row = Json::array();
        for (std::size_t c = 0; c < m.dimension(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    j["matrix"] = rows;
    j["numeric_derivatives"] = m.numeric_derivatives();
    return j;
}

inline Json to_json(const EstimationReport& r, const ParametricFamily& fam) {
    Json j;
    j["n"] = r.n;
    j["theta_hat"] = r.theta_hat;
    j["loglik_at_max"] = r.loglik_at_max;
    j["converged"] = r.converged;
    j["tie"] = r.tie;
    j["at_boundary"] = r.at_boundary;
    j["derivatives"] = r.numeric_derivatives ? "finite-difference" : "analytic";
    Json per = Json::array();
    for (std::size_t g = 0; g < r.theta_hat_per_component.size(); ++g) {
        Json e;
        e["component"] = fam.components().label(g);
        e["theta_hat"] = r.theta_hat_per_component[g];
        e["loglik_at_max"] = r.loglik_per_component_at_max[g];
        per.push_back(e);
    }
    j["per_component"] = per;
    Json post;
    for (std::size_t a = 0; a < r.posterior_at_hat.size(); ++a) post[fam.components().label(a)] = r.posterior_at_hat[a];
    j["posterior_at_hat"] = post;
    Json fisher = Json::array();
    for (const auto& m : r.fisher_at_hat) fisher.push_back(to_json(m));
    j["fisher_at_hat"] = fisher;
    j["trace_points"] = r.optimizer_trace.size();
    return j;
}

/// Optimizer trace as CSV: theta_1..theta_D, loglik.
inline std::string trace_csv(const EstimationReport& r, std::size_t dimension) {
    std::vector<std::string> header;
    for (std::size_t k = 0; k < dimension; ++k) header.push_back("theta_" + std::to_string(k + 1));
    header.push_back("loglik");
    CsvWriter csv(header);
    for (const auto& p : r.optimizer_trace) {
        std::vector<std::string> row;
        for (double x : p.theta) row.push_back(format_real(x));
        row.push_back(format_real(p.loglik));
        csv.row(row);
    }
    return csv.str();
}

/// (1/n) ln(a_n + b_n) from tabulated (1/n) ln a_n and (1/n) ln b_n.
inline std::vector<double> logsum_of_sequences(std::span<const double> scaled_log_a, std::span<const double> scaled_log_b,
                                               std::size_t n) {
    if (scaled_log_a.size() != scaled_log_b.size()) throw DomainError("logsum_of_sequences: tables differ in length");
    if (n < 1) throw DomainError("logsum_of_sequences: n must be positive");
    const double nn = static_cast<double>(n);
    std::vector<double> out(scaled_log_a.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double hi = std::max(scaled_log_a[i], scaled_log_b[i]);
        const double lo = std::min(scaled_log_a[i], scaled_log_b[i]);
        out[i] = hi + std::log1p(std::exp(-nn * (hi - lo))) / nn;
    }
    return out;
}

/// Same from the raw positive values a_n(x), b_n(x).
inline std::vector<double> logsum_of_sequences_raw(std::span<const double> a, std::span<const double> b, std::size_t n) {
    if (a.size() != b.size()) throw DomainError("logsum_of_sequences: tables differ in length");
    if (n < 1) throw DomainError("logsum_of_sequences: n must be positive");
    std::vector<double> la(a.size()), lb(b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(a[i] > 0.0) || !(b[i] > 0.0)) throw DomainError("logsum_of_sequences: values must be strictly positive");
        la[i] = std::log(a[i]) / static_cast<double>(n);
        lb[i] = std::log(b[i]) / static_cast<double>(n);
    }
    return logsum_of_sequences(la, lb, n);
}

/// Sup-distance bound ε_n + ln 2 / n between (1/n) ln(a_n + b_n) and max(ℓ_a, ℓ_b).
inline double logsum_bound(double eps_n, std::size_t n) { return eps_n + std::log(2.0) / static_cast<double>(n); }

}  // namespace qndmle
