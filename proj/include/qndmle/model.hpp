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

// Parametric families of categorical laws p_θ(j|α) over a finite alphabet,
// indexed by a hidden component α and a parameter θ in a compact box, plus
// the information functionals built on them (entropy, relative entropy,
// Fisher information) and a grid-based identifiability check.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qndmle/errors.hpp"
#include "qndmle/linalg.hpp"

namespace qndmle {

using Theta = std::vector<double>;
using ThetaView = std::span<const double>;

namespace detail {

inline std::vector<std::string> checked_labels(std::size_t n, std::vector<std::string> labels, const char* what,
                                               std::size_t min_size) {
    if (n < min_size) {
        throw ConstructionError(std::string(what) + ": needs at least " + std::to_string(min_size) + " elements");
    }
    if (labels.empty()) {
        for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
    }
    if (labels.size() != n) throw ConstructionError(std::string(what) + ": label count does not match size");
    std::set<std::string> seen(labels.begin(), labels.end());
    if (seen.size() != labels.size()) throw ConstructionError(std::string(what) + ": labels must be distinct");
    return labels;
}

inline std::string format_theta(ThetaView theta) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t k = 0; k < theta.size(); ++k) os << (k ? ", " : "") << theta[k];
    os << ')';
    return os.str();
}

/// k-th point of the Halton sequence in base `base`, k ≥ 1.
inline double radical_inverse(std::size_t k, std::size_t base) {
    double f = 1.0;
    double r = 0.0;
    while (k > 0) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(k % base);
        k /= base;
    }
    return r;
}

inline constexpr std::size_t kHaltonPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

}  // namespace detail

/// Outcome alphabet 𝒜 = {0, …, l−1}; labels are for display only.
class Alphabet {
  public:
    explicit Alphabet(std::size_t size, std::vector<std::string> labels = {})
        : labels_(detail::checked_labels(size, std::move(labels), "Alphabet", 2)) {}
    std::size_t size() const { return labels_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& label(std::size_t j) const { return labels_.at(j); }

  private:
    std::vector<std::string> labels_;
};

/// Hidden component set 𝒫 = {0, …, d−1}.
class ComponentSet {
  public:
    explicit ComponentSet(std::size_t size, std::vector<std::string> labels = {})
        : labels_(detail::checked_labels(size, std::move(labels), "ComponentSet", 1)) {}
    std::size_t size() const { return labels_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& label(std::size_t a) const { return labels_.at(a); }

  private:
    std::vector<std::string> labels_;
};

/// Compact box Θ = Π [lower_k, upper_k] with non-empty interior.
class ParameterBox {
  public:
    ParameterBox(std::vector<double> lower, std::vector<double> upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
        if (lower_.empty() || lower_.size() != upper_.size())
            throw ConstructionError("ParameterBox: bounds must be non-empty and of equal dimension");
        for (std::size_t k = 0; k < lower_.size(); ++k) {
            if (!std::isfinite(lower_[k]) || !std::isfinite(upper_[k]) || !(lower_[k] < upper_[k]))
                throw ConstructionError("ParameterBox: need finite lower < upper in every coordinate");
        }
    }
    static ParameterBox interval(double lo, double hi) { return ParameterBox({lo}, {hi}); }

    std::size_t dimension() const { return lower_.size(); }
    const std::vector<double>& lower() const { return lower_; }
    const std::vector<double>& upper() const { return upper_; }
    double width(std::size_t k) const { return upper_[k] - lower_[k]; }

    bool contains(ThetaView theta, double slack = 0.0) const {
        if (theta.size() != dimension()) return false;
        for (std::size_t k = 0; k < theta.size(); ++k)
            if (!(theta[k] >= lower_[k] - slack && theta[k] <= upper_[k] + slack)) return false;
        return true;
    }
    bool interior(ThetaView theta) const {
        if (theta.size() != dimension()) return false;
        for (std::size_t k = 0; k < theta.size(); ++k)
            if (!(theta[k] > lower_[k] && theta[k] < upper_[k])) return false;
        return true;
    }
    Theta clamp(ThetaView theta) const {
        Theta out(theta.begin(), theta.end());
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::clamp(out[k], lower_[k], upper_[k]);
        return out;
    }
    Theta center() const {
        Theta c(dimension());
        for (std::size_t k = 0; k < c.size(); ++k) c[k] = 0.5 * (lower_[k] + upper_[k]);
        return c;
    }
    /// Point `index` (≥ 1) of the Halton sequence mapped into the box.
    Theta halton(std::size_t index) const {
        if (dimension() > std::size(detail::kHaltonPrimes)) throw DomainError("ParameterBox::halton: dimension too large");
        Theta t(dimension());
        for (std::size_t k = 0; k < t.size(); ++k)
            t[k] = lower_[k] + width(k) * detail::radical_inverse(index, detail::kHaltonPrimes[k]);
        return t;
    }
    /// Evenly spaced points including both ends (D = 1 only).
    std::vector<Theta> linspace(std::size_t count) const {
        if (dimension() != 1) throw DomainError("ParameterBox::linspace: box is not one-dimensional");
        if (count < 2) throw DomainError("ParameterBox::linspace: need at least two points");
        std::vector<Theta> out;
        for (std::size_t i = 0; i < count; ++i)
            out.push_back({lower_[0] + width(0) * static_cast<double>(i) / static_cast<double>(count - 1)});
        return out;
    }

  private:
    std::vector<double> lower_;
    std::vector<double> upper_;
};

enum class Smoothness { continuous, c1, c2, c3 };

inline const char* to_string(Smoothness s) {
    switch (s) {
        case Smoothness::continuous: return "continuous";
        case Smoothness::c1: return "C1";
        case Smoothness::c2: return "C2";
        case Smoothness::c3: return "C3";
    }
    return "?";
}

/// Fills out[j] = p_θ(j|α) for every outcome j.
using ProbabilityRule = std::function<void(ThetaView theta, std::size_t alpha, std::span<double> out)>;
/// Fills out[j·D + k] = ∂p_θ(j|α)/∂θ_k.
using GradientRule = std::function<void(ThetaView theta, std::size_t alpha, std::span<double> out)>;

struct FamilyValidation {
    std::size_t points_1d = 33;   // evenly spaced validation points when D = 1
    std::size_t halton_points = 64;  // low-discrepancy points when D > 1 (plus corners and center)
    double epsilon = 1e-12;       // probabilities must lie in (ε, 1 − ε)
    double normalization_tol = 1e-12;
    bool check_gradient = true;
    double gradient_tol = 1e-6;   // relative, against central differences
};

/// Central-difference step used whenever derivatives are taken numerically.
inline double fd_step(double x) { return 1e-5 * (1.0 + std::abs(x)); }

/// The map (θ, α, j) ↦ p_θ(j|α). Immutable; evaluation rules must be pure.
class ParametricFamily {
  public:
    ParametricFamily(Alphabet alphabet, ComponentSet components, ParameterBox box, ProbabilityRule prob,
                     std::optional<GradientRule> grad, Smoothness regularity, const FamilyValidation& validation = {})
        : alphabet_(std::move(alphabet)),
          components_(std::move(components)),
          box_(std::move(box)),
          prob_(std::move(prob)),
          grad_(std::move(grad)),
          regularity_(regularity) {
        if (!prob_) throw ConstructionError("ParametricFamily: probability rule is empty");
        if (grad_ && !*grad_) grad_.reset();
        if (grad_ && regularity_ == Smoothness::continuous)
            throw ConstructionError("ParametricFamily: a gradient was supplied for a family declared continuous");
        validate(validation);
    }

    const Alphabet& alphabet() const { return alphabet_; }
    const ComponentSet& components() const { return components_; }
    const ParameterBox& box() const { return box_; }
    Smoothness regularity() const { return regularity_; }
    std::size_t outcome_count() const { return alphabet_.size(); }
    std::size_t component_count() const { return components_.size(); }
    std::size_t dimension() const { return box_.dimension(); }
    bool has_gradient() const { return grad_.has_value(); }
    bool differentiable() const { return regularity_ != Smoothness::continuous; }
    /// True when derivatives come from central differences rather than an analytic rule.
    bool numeric_derivatives() const { return !grad_.has_value(); }

    void require_in_box(ThetaView theta) const {
        if (!box_.contains(theta))
            throw DomainError("parameter " + detail::format_theta(theta) + " is outside the parameter box");
    }
    void require_component(std::size_t alpha) const {
        if (alpha >= component_count()) throw DomainError("component index " + std::to_string(alpha) + " out of range");
    }

    /// p_θ(·|α) as a vector of length l.
    std::vector<double> probs(ThetaView theta, std::size_t alpha) const {
        require_in_box(theta);
        require_component(alpha);
        std::vector<double> out(outcome_count());
        prob_(theta, alpha, out);
        return out;
    }
    double prob(ThetaView theta, std::size_t alpha, std::size_t j) const { return probs(theta, alpha).at(j); }

    /// Evaluates the rule without the box check; used for stencils that
    /// straddle the boundary and for hot loops whose θ was checked already.
    void probs_into(ThetaView theta, std::size_t alpha, std::span<double> out) const { prob_(theta, alpha, out); }

    /// ∂p_θ(j|α)/∂θ_k as an l×D matrix (analytic when available).
    RealMatrix probability_gradient(ThetaView theta, std::size_t alpha) const {
        require_differentiable();
        require_in_box(theta);
        require_component(alpha);
        const std::size_t l = outcome_count();
        const std::size_t dim = dimension();
        RealMatrix g(l, dim);
        if (grad_) {
            (*grad_)(theta, alpha, g.data());
            return g;
        }
        return finite_difference_gradient(theta, alpha);
    }

    /// Central-difference gradient of the probabilities, regardless of any analytic rule.
    RealMatrix finite_difference_gradient(ThetaView theta, std::size_t alpha) const {
        const std::size_t l = outcome_count();
        const std::size_t dim = dimension();
        RealMatrix g(l, dim);
        Theta shifted(theta.begin(), theta.end());
        std::vector<double> plus(l), minus(l);
        for (std::size_t k = 0; k < dim; ++k) {
            const double h = fd_step(theta[k]);
            shifted[k] = theta[k] + h;
            prob_(shifted, alpha, plus);
            shifted[k] = theta[k] - h;
            prob_(shifted, alpha, minus);
            shifted[k] = theta[k];
            for (std::size_t j = 0; j < l; ++j) g(j, k) = (plus[j] - minus[j]) / (2.0 * h);
        }
        return g;
    }

    /// Score ∂ ln p_θ(j|α)/∂θ_k as an l×D matrix.
    RealMatrix score(ThetaView theta, std::size_t alpha) const {
        RealMatrix g = probability_gradient(theta, alpha);
        const auto p = probs(theta, alpha);
        for (std::size_t j = 0; j < g.rows(); ++j)
            for (std::size_t k = 0; k < g.cols(); ++k) g(j, k) /= p[j];
        return g;
    }

    /// Worst relative disagreement between the analytic gradient and central
    /// differences at θ, measured as |g − FD| / max(1, |g|).
    double gradient_check(ThetaView theta, std::size_t alpha) const {
        if (!grad_) return 0.0;
        const RealMatrix analytic = probability_gradient(theta, alpha);
        const RealMatrix numeric = finite_difference_gradient(theta, alpha);
        double worst = 0.0;
        for (std::size_t j = 0; j < analytic.rows(); ++j)
            for (std::size_t k = 0; k < analytic.cols(); ++k) {
                const double a = analytic(j, k);
                worst = std::max(worst, std::abs(a - numeric(j, k)) / std::max(1.0, std::abs(a)));
            }
        return worst;
    }

    /// Points on which construction-time validation runs.
    std::vector<Theta> validation_grid(const FamilyValidation& v) const {
        if (dimension() == 1) return box_.linspace(std::max<std::size_t>(2, v.points_1d));
        std::vector<Theta> grid;
        grid.push_back(box_.center());
        const std::size_t dim = dimension();
        if (dim <= 8) {
            for (std::size_t mask = 0; mask < (std::size_t{1} << dim); ++mask) {
                Theta corner(dim);
                for (std::size_t k = 0; k < dim; ++k) corner[k] = (mask >> k) & 1 ? box_.upper()[k] : box_.lower()[k];
                grid.push_back(std::move(corner));
            }
        }
        for (std::size_t i = 1; i <= v.halton_points; ++i) grid.push_back(box_.halton(i));
        return grid;
    }

  private:
    void require_differentiable() const {
        if (!differentiable())
            throw CapabilityError("family is declared continuous only; derivatives are unavailable");
    }

    void validate(const FamilyValidation& v) {
        const std::size_t l = outcome_count();
        std::vector<double> p(l);
        for (const Theta& theta : validation_grid(v)) {
            for (std::size_t a = 0; a < component_count(); ++a) {
                prob_(theta, a, p);
                double sum = 0.0;
                for (std::size_t j = 0; j < l; ++j) {
                    if (!std::isfinite(p[j]) || !(p[j] > v.epsilon && p[j] < 1.0 - v.epsilon)) {
                        std::ostringstream os;
                        os.precision(17);
                        os << "ParametricFamily: probability p = " << p[j] << " at theta = " << detail::format_theta(theta)
                           << ", component " << components_.label(a) << ", outcome " << alphabet_.label(j)
                           << " is not strictly inside (0, 1)";
                        throw ConstructionError(os.str());
                    }
                    sum += p[j];
                }
                if (std::abs(sum - 1.0) > v.normalization_tol) {
                    std::ostringstream os;
                    os.precision(17);
                    os << "ParametricFamily: probabilities sum to " << sum << " at theta = " << detail::format_theta(theta)
                       << ", component " << components_.label(a);
                    throw ConstructionError(os.str());
                }
                if (grad_ && v.check_gradient) {
                    const double err = gradient_check(theta, a);
                    if (err > v.gradient_tol) {
                        std::ostringstream os;
                        os << "ParametricFamily: analytic gradient disagrees with finite differences (" << err
                           << ") at theta = " << detail::format_theta(theta) << ", component " << components_.label(a);
                        throw ConstructionError(os.str());
                    }
                }
            }
        }
    }

    Alphabet alphabet_;
    ComponentSet components_;
    ParameterBox box_;
    ProbabilityRule prob_;
    std::optional<GradientRule> grad_;
    Smoothness regularity_;
};

/// Mixing law q over the components. Zero entries are allowed (point masses
/// are legitimate priors and posteriors); entries must sum to one.
class MixtureWeights {
  public:
    explicit MixtureWeights(std::vector<double> q) : q_(std::move(q)) {
        if (q_.empty()) throw ConstructionError("MixtureWeights: empty weight vector");
        double sum = 0.0;
        for (double x : q_) {
            if (!std::isfinite(x) || x < 0.0) throw ConstructionError("MixtureWeights: weights must be finite and >= 0");
            sum += x;
        }
        if (std::abs(sum - 1.0) > 1e-12) throw ConstructionError("MixtureWeights: weights must sum to 1");
    }

    /// Normalizes non-negative weights.
    static MixtureWeights normalized(std::vector<double> w) {
        double sum = 0.0;
        for (double x : w) {
            if (!std::isfinite(x) || x < 0.0) throw ConstructionError("MixtureWeights: weights must be finite and >= 0");
            sum += x;
        }
        if (!(sum > 0.0)) throw ConstructionError("MixtureWeights: weights sum to zero");
        for (double& x : w) x /= sum;
        return renormalize(std::move(w));
    }
    static MixtureWeights uniform(std::size_t d) { return normalized(std::vector<double>(d, 1.0)); }
    static MixtureWeights point_mass(std::size_t d, std::size_t gamma) {
        std::vector<double> w(d, 0.0);
        w.at(gamma) = 1.0;
        return MixtureWeights(std::move(w));
    }
    /// q(α) ∝ rate^α / α! for α = first, first + 1, …, first + d − 1.
    static MixtureWeights poissonlike(double rate, std::size_t first, std::size_t d) {
        if (!(rate > 0.0)) throw ConstructionError("poissonlike: rate must be positive");
        std::vector<double> logw(d);
        for (std::size_t i = 0; i < d; ++i) {
            const double a = static_cast<double>(first + i);
            logw[i] = a * std::log(rate) - std::lgamma(a + 1.0);
        }
        const double m = *std::max_element(logw.begin(), logw.end());
        std::vector<double> w(d);
        for (std::size_t i = 0; i < d; ++i) w[i] = std::exp(logw[i] - m);
        return normalized(std::move(w));
    }

    std::size_t size() const { return q_.size(); }
    double operator[](std::size_t a) const { return q_[a]; }
    const std::vector<double>& values() const { return q_; }
    double log(std::size_t a) const {
        return q_[a] > 0.0 ? std::log(q_[a]) : -std::numeric_limits<double>::infinity();
    }
    bool strictly_positive() const {
        return std::all_of(q_.begin(), q_.end(), [](double x) { return x > 0.0; });
    }

  private:
    // Pushes the rounding residue of a division-normalized vector into its
    // largest entry so the sum check passes at 1e-12 for any length.
    static MixtureWeights renormalize(std::vector<double> w) {
        double sum = 0.0;
        for (double x : w) sum += x;
        auto it = std::max_element(w.begin(), w.end());
        *it += 1.0 - sum;
        return MixtureWeights(std::move(w));
    }

    std::vector<double> q_;
};

/// Per-component Fisher information I_θ(α); symmetric and PSD.
class InfoMatrix {
  public:
    InfoMatrix(RealMatrix m, std::size_t component, Theta theta, bool numeric_derivatives)
        : m_(std::move(m)), component_(component), theta_(std::move(theta)), numeric_(numeric_derivatives) {
        if (!m_.square()) throw ConstructionError("InfoMatrix: matrix is not square");
        if (!is_hermitian(m_, 1e-10)) throw ConstructionError("InfoMatrix: matrix is not symmetric");
        if (min_eigenvalue() < -1e-10) throw ConstructionError("InfoMatrix: matrix is not positive semi-definite");
    }

    const RealMatrix& matrix() const { return m_; }
    std::size_t component() const { return component_; }
    const Theta& theta() const { return theta_; }
    bool numeric_derivatives() const { return numeric_; }
    std::size_t dimension() const { return m_.rows(); }
    double operator()(std::size_t k, std::size_t l) const { return m_(k, l); }

    double min_eigenvalue() const {
        const auto ev = symmetric_eigenvalues(m_);
        return ev.empty() ? 0.0 : ev.front();
    }
    /// hᵀ I h.
    double quadratic_form(ThetaView h) const {
        double s = 0.0;
        for (std::size_t k = 0; k < dimension(); ++k)
            for (std::size_t l = 0; l < dimension(); ++l) s += h[k] * m_(k, l) * h[l];
        return s;
    }
    /// Non-singular when the smallest eigenvalue exceeds `tol` relative to the largest.
    bool nonsingular(double tol = 1e-10) const {
        const auto ev = symmetric_eigenvalues(m_);
        return !ev.empty() && ev.back() > 0.0 && ev.front() > tol * ev.back();
    }
    RealMatrix inverse() const { return qndmle::inverse(m_); }

  private:
    RealMatrix m_;
    std::size_t component_;
    Theta theta_;
    bool numeric_;
};

/// S_θ(α) = −Σ_j p ln p.
inline double shannon_entropy(const ParametricFamily& fam, ThetaView theta, std::size_t alpha) {
    const auto p = fam.probs(theta, alpha);
    double s = 0.0;
    for (double x : p) s -= x * std::log(x);
    return s;
}

/// S_{θ|θ'}(α|β) = Σ_j p_θ(j|α) (ln p_θ(j|α) − ln p_θ'(j|β)).
inline double kl_divergence(const ParametricFamily& fam, ThetaView theta, ThetaView theta2, std::size_t alpha,
                            std::size_t beta) {
    const auto p = fam.probs(theta, alpha);
    const auto r = fam.probs(theta2, beta);
    double s = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) s += p[j] * (std::log(p[j]) - std::log(r[j]));
    return s;
}

/// Matrix of S_θ(α|γ) over all component pairs, row α and column γ.
inline RealMatrix kl_matrix(const ParametricFamily& fam, ThetaView theta) {
    const std::size_t d = fam.component_count();
    RealMatrix m(d, d);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t g = 0; g < d; ++g) m(a, g) = a == g ? 0.0 : kl_divergence(fam, theta, theta, a, g);
    return m;
}

/// (I_θ(α))_{kl} = Σ_j p ∂_k ln p ∂_l ln p.
inline InfoMatrix fisher_information(const ParametricFamily& fam, ThetaView theta, std::size_t alpha) {
    if (!fam.differentiable())
        throw CapabilityError("fisher_information: family is declared continuous only");
    const auto p = fam.probs(theta, alpha);
    const RealMatrix s = fam.score(theta, alpha);
    const std::size_t dim = fam.dimension();
    RealMatrix info(dim, dim);
    for (std::size_t k = 0; k < dim; ++k)
        for (std::size_t l = k; l < dim; ++l) {
            double acc = 0.0;
            for (std::size_t j = 0; j < p.size(); ++j) acc += p[j] * s(j, k) * s(j, l);
            info(k, l) = acc;
            info(l, k) = acc;
        }
    return InfoMatrix(std::move(info), alpha, Theta(theta.begin(), theta.end()), fam.numeric_derivatives());
}

struct IdentifiabilityPair {
    std::size_t alpha = 0;
    Theta theta;
    std::size_t beta = 0;
    Theta theta2;
    double margin = 0.0;  // max_j |p_θ(j|α) − p_θ'(j|β)|
};

struct IdentifiabilityReport {
    double tolerance = 0.0;
    std::size_t pairs_checked = 0;
    double min_margin = std::numeric_limits<double>::infinity();
    IdentifiabilityPair closest;
    std::vector<IdentifiabilityPair> flagged;
    bool passed() const { return flagged.empty(); }
};

/// Compares every pair (α, θ) ≠ (β, θ') over components × grid and flags
/// those whose laws differ by less than `tol` in every outcome. A pass on a
/// grid is evidence of identifiability, not a proof.
inline IdentifiabilityReport check_identifiability(const ParametricFamily& fam, const std::vector<Theta>& grid,
                                                   double tol = 1e-9) {
    if (grid.empty()) throw DomainError("check_identifiability: empty grid");
    for (const auto& t : grid) fam.require_in_box(t);
    struct Point {
        std::size_t alpha;
        std::size_t grid_index;
        std::vector<double> p;
    };
    std::vector<Point> points;
    for (std::size_t a = 0; a < fam.component_count(); ++a)
        for (std::size_t i = 0; i < grid.size(); ++i) points.push_back({a, i, fam.probs(grid[i], a)});

    IdentifiabilityReport rep;
    rep.tolerance = tol;
    for (std::size_t u = 0; u < points.size(); ++u) {
        for (std::size_t v = u + 1; v < points.size(); ++v) {
            const Point& x = points[u];
            const Point& y = points[v];
            if (x.alpha == y.alpha && grid[x.grid_index] == grid[y.grid_index]) continue;
            double margin = 0.0;
            for (std::size_t j = 0; j < x.p.size(); ++j) margin = std::max(margin, std::abs(x.p[j] - y.p[j]));
            ++rep.pairs_checked;
            IdentifiabilityPair pair{x.alpha, grid[x.grid_index], y.alpha, grid[y.grid_index], margin};
            if (margin < rep.min_margin) {
                rep.min_margin = margin;
                rep.closest = pair;
            }
            if (margin < tol) rep.flagged.push_back(std::move(pair));
        }
    }
    return rep;
}

}  // namespace qndmle
