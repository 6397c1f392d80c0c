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

// Monte-Carlo experiments on the asymptotic behaviour of the mixture model.
//
// Conditioning on the hidden component is done by generating records from
// ℙ_{θ|γ} directly. Every replication owns the record seed
//   derive_seed(plan.seed, {experiment tag, stream, replication})
// where stream is γ for per-component runs and kMixtureStream for runs with
// γ drawn from q. One record per replication is grown through the n grid,
// so the estimates at different n are prefixes of the same record.
//
// Almost-sure statements are checked as decay in probability over seeds.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "qndmle/errors.hpp"
#include "qndmle/estimate.hpp"
#include "qndmle/io.hpp"
#include "qndmle/model.hpp"
#include "qndmle/parallel.hpp"
#include "qndmle/quantum.hpp"
#include "qndmle/rng.hpp"
#include "qndmle/simulate.hpp"
#include "qndmle/stats.hpp"

namespace qndmle {

inline constexpr std::uint64_t kMixtureStream = 0xFFFFFFFFULL;

enum class ExperimentTag : std::uint64_t { lamn = 1, collapse = 2, consistency = 3, cramer_rao = 4, purify = 5, fig1 = 6 };

struct ExperimentPlan {
    Theta theta_star;
    MixtureWeights q = MixtureWeights({1.0});
    Theta h;                        // local shift; empty means zero
    std::vector<std::size_t> n_grid{1000, 5000, 10000};
    std::size_t n_reps = 2000;
    std::uint64_t seed = 0;
    std::size_t workers = 1;        // 0: all hardware threads
    std::vector<std::size_t> components;  // per-component runs; empty means every component
};

namespace detail {

inline Theta shift(ThetaView theta_star, ThetaView h, std::size_t n) {
    Theta t(theta_star.begin(), theta_star.end());
    if (h.empty()) return t;
    const double s = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t k = 0; k < t.size(); ++k) t[k] += h[k] * s;
    return t;
}

inline std::vector<std::size_t> plan_components(const ParametricFamily& fam, const ExperimentPlan& plan) {
    if (!plan.components.empty()) return plan.components;
    std::vector<std::size_t> all(fam.component_count());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
}

inline std::uint64_t record_seed(const ExperimentPlan& plan, ExperimentTag tag, std::uint64_t stream, std::size_t rep) {
    return derive_seed(plan.seed, {static_cast<std::uint64_t>(tag), stream, rep});
}

/// Counts of one record from component γ at θ, read at each checkpoint. Same
/// stream as sample_trajectory(fam, θ, γ, ·, record_seed).
inline std::vector<CountVector> record_counts(const ParametricFamily& fam, ThetaView theta, std::size_t gamma,
                                              std::span<const std::size_t> checkpoints, std::uint64_t record_seed) {
    const auto p = fam.probs(theta, gamma);
    RandomStream rng(derive_seed(record_seed, {1}));
    return sample_count_path(p, checkpoints, rng);
}

inline Json n_grid_json(std::span<const std::size_t> ns) {
    Json j = Json::array();
    for (auto n : ns) j.push_back(n);
    return j;
}

inline Json theta_json(ThetaView t) { return Json(Theta(t.begin(), t.end())); }

}  // namespace detail

/// Rejects plans that break the experiment preconditions. Filtering runs
/// (needs_interior = false) accept θ* on the boundary, n = 0 and ignore h.
inline void validate_plan(const ParametricFamily& fam, const ExperimentPlan& plan, bool needs_interior = true) {
    if (plan.theta_star.size() != fam.dimension()) throw DomainError("plan: theta_star has the wrong dimension");
    fam.require_in_box(plan.theta_star);
    if (needs_interior && !fam.box().interior(plan.theta_star))
        throw DomainError("plan: theta_star " + detail::format_theta(plan.theta_star) + " is not interior to the box");
    if (plan.q.size() != fam.component_count()) throw DomainError("plan: q has the wrong length");
    if (!plan.h.empty() && plan.h.size() != fam.dimension()) throw DomainError("plan: h has the wrong dimension");
    if (plan.n_grid.empty()) throw DomainError("plan: n_grid is empty");
    if (!std::is_sorted(plan.n_grid.begin(), plan.n_grid.end())) throw DomainError("plan: n_grid must be non-decreasing");
    if (plan.n_grid.front() < (needs_interior ? 1u : 0u)) throw DomainError("plan: n_grid entries must be positive");
    if (plan.n_reps < 2) throw DomainError("plan: n_reps must be at least 2");
    for (auto g : plan.components) fam.require_component(g);
    if (!needs_interior) return;
    for (auto n : plan.n_grid) {
        const Theta t = detail::shift(plan.theta_star, plan.h, n);
        if (!fam.box().contains(t))
            throw DomainError("plan: theta_star + h/sqrt(n) leaves the box at n = " + std::to_string(n));
    }
}

/// n·(ℓ_n(θ_a) − ℓ_n(θ_b)).
inline double log_likelihood_ratio(const ParametricFamily& fam, const MixtureWeights& q, const CountVector& counts,
                                   ThetaView theta_a, ThetaView theta_b) {
    fam.require_in_box(theta_a);
    fam.require_in_box(theta_b);
    const MixtureLikelihood lik(fam, q, counts);
    return lik.log_prob(theta_a) - lik.log_prob(theta_b);
}

/// Refuses when I_θ(γ) is singular for some tested component.
inline std::vector<InfoMatrix> require_nonsingular_fisher(const ParametricFamily& fam, ThetaView theta,
                                                          std::span<const std::size_t> components) {
    std::vector<InfoMatrix> out;
    for (auto g : components) {
        InfoMatrix m = fisher_information(fam, theta, g);
        if (!m.nonsingular())
            throw NumericalRefusal("Fisher information of component " + fam.components().label(g) + " is singular at " +
                                   detail::format_theta(theta) + " (min eigenvalue " + format_real(m.min_eigenvalue()) + ")");
        out.push_back(std::move(m));
    }
    return out;
}

// ---------------------------------------------------------------------------
// LAMN

struct MomentCheck {
    std::size_t n = 0;
    double target_mean = 0.0;
    double target_variance = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    double mean_se = 0.0;
    double variance_se = 0.0;
    bool mean_ok = false;
    bool variance_ok = false;
    std::optional<stats::AndersonDarling> normality;
    bool passed = false;
};

struct LamnSample {
    double log_lr = 0.0;
    std::size_t gamma = 0;
    std::size_t n = 0;
};

struct LamnComponentResult {
    std::size_t gamma = 0;
    double quadratic = 0.0;  // hᵀ I_{θ*}(γ) h
    std::vector<MomentCheck> by_n;
};

struct LamnReport {
    std::vector<LamnComponentResult> components;
    std::vector<MomentCheck> mixture_by_n;
    std::vector<LamnSample> samples;  // per-component samples, then mixture samples
    double variance_tolerance = 0.10;
    double mean_tolerance_se = 3.0;
    bool passed = false;
};

namespace detail {

/// Mean within `k_se` standard errors, variance within `rel_var` relative,
/// optional normality test. A degenerate target (zero variance) requires
/// every sample to vanish.
inline MomentCheck moment_check(std::span<const double> x, std::size_t n, double target_mean, double target_var,
                                double k_se, double rel_var, bool test_normality) {
    MomentCheck c;
    c.n = n;
    c.target_mean = target_mean;
    c.target_variance = target_var;
    c.mean = stats::mean(x);
    c.variance = stats::variance(x);
    c.mean_se = stats::standard_error(x);
    c.variance_se = stats::variance_standard_error(x);
    if (target_var == 0.0) {
        const bool all_zero = std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; });
        c.mean_ok = c.variance_ok = all_zero;
        c.passed = all_zero;
        return c;
    }
    c.mean_ok = std::abs(c.mean - target_mean) <= k_se * c.mean_se;
    c.variance_ok = std::abs(c.variance - target_var) <= rel_var * target_var;
    c.passed = c.mean_ok && c.variance_ok;
    if (test_normality) {
        c.normality = stats::anderson_darling_normal(x);
        c.passed = c.passed && c.normality->passed;
    }
    return c;
}

}  // namespace detail

/// Log-likelihood ratios ln ℙ_{θ*+h/√n}/ℙ_{θ*} under ℙ_{θ*|γ} for each γ,
/// compared with N(−½hᵀIh, hᵀIh); plus the same under the mixture, whose
/// limit is the mixed normal with J = I_{θ*}(Γ). Pass flags use the
/// largest n of the grid.
inline LamnReport lamn_experiment(const ParametricFamily& fam, const ExperimentPlan& plan) {
    validate_plan(fam, plan);
    const auto comps = detail::plan_components(fam, plan);
    const auto fisher = require_nonsingular_fisher(fam, plan.theta_star, comps);
    const Theta h = plan.h.empty() ? Theta(fam.dimension(), 0.0) : plan.h;
    const std::size_t m = plan.n_grid.size();

    std::vector<double> quad_all(fam.component_count(), 0.0);
    for (std::size_t a = 0; a < fam.component_count(); ++a) quad_all[a] = fisher_information(fam, plan.theta_star, a).quadratic_form(h);

    // log_lr at each checkpoint of one record.
    auto run_record = [&](std::size_t gamma, std::uint64_t rseed) {
        const auto cs = detail::record_counts(fam, plan.theta_star, gamma, plan.n_grid, rseed);
        std::vector<double> out(m);
        for (std::size_t i = 0; i < m; ++i) {
            const MixtureLikelihood lik(fam, plan.q, cs[i]);
            out[i] = lik.log_prob(detail::shift(plan.theta_star, h, plan.n_grid[i])) - lik.log_prob(plan.theta_star);
        }
        return out;
    };

    LamnReport rep;
    rep.passed = true;
    for (std::size_t ci = 0; ci < comps.size(); ++ci) {
        const std::size_t g = comps[ci];
        const auto rows = parallel_map(plan.n_reps, plan.workers, [&](std::size_t r) {
            return run_record(g, detail::record_seed(plan, ExperimentTag::lamn, g, r));
        });
        LamnComponentResult res;
        res.gamma = g;
        res.quadratic = fisher[ci].quadratic_form(h);
        for (std::size_t i = 0; i < m; ++i) {
            std::vector<double> x(plan.n_reps);
            for (std::size_t r = 0; r < plan.n_reps; ++r) {
                x[r] = rows[r][i];
                rep.samples.push_back({x[r], g, plan.n_grid[i]});
            }
            res.by_n.push_back(detail::moment_check(x, plan.n_grid[i], -0.5 * res.quadratic, res.quadratic,
                                                    rep.mean_tolerance_se, rep.variance_tolerance, true));
        }
        rep.passed = rep.passed && res.by_n.back().passed;
        rep.components.push_back(std::move(res));
    }

    // Mixture: γ ~ q per record.
    struct MixRow {
        std::size_t gamma = 0;
        std::vector<double> lr;
    };
    const auto mix = parallel_map(plan.n_reps, plan.workers, [&](std::size_t r) {
        const std::uint64_t rseed = detail::record_seed(plan, ExperimentTag::lamn, kMixtureStream, r);
        const std::size_t g = sample_component(plan.q, rseed);
        return MixRow{g, run_record(g, rseed)};
    });
    double mix_mean = 0.0, mix_second = 0.0;
    for (std::size_t a = 0; a < fam.component_count(); ++a) {
        mix_mean += plan.q[a] * quad_all[a];
        mix_second += plan.q[a] * quad_all[a] * quad_all[a];
    }
    // Mixed normal hᵀΔ − ½J: variance E[J] + ¼ Var(J).
    const double mix_var = mix_mean + 0.25 * (mix_second - mix_mean * mix_mean);
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> x(plan.n_reps);
        for (std::size_t r = 0; r < plan.n_reps; ++r) {
            x[r] = mix[r].lr[i];
            rep.samples.push_back({x[r], mix[r].gamma, plan.n_grid[i]});
        }
        rep.mixture_by_n.push_back(detail::moment_check(x, plan.n_grid[i], -0.5 * mix_mean, mix_var, rep.mean_tolerance_se,
                                                        rep.variance_tolerance, false));
    }
    rep.passed = rep.passed && rep.mixture_by_n.back().passed;
    return rep;
}

// ---------------------------------------------------------------------------
// Mixture collapse

struct CollapsePoint {
    std::size_t n = 0;
    double fraction_below = 0.0;  // fraction of seeds with √n·r_n below the threshold
    double median_log_r = 0.0;    // median of ln r_n
    double max_sqrt_n_r = 0.0;
};

struct CollapseSeries {
    std::string at;  // "theta_star" or "theta_star+h/sqrt(n)"
    std::vector<CollapsePoint> by_n;
    double fitted_rate = 0.0;  // −slope of median ln r_n against n
    bool fraction_ok = false;
    bool rate_ok = false;
};

struct CollapseComponentResult {
    std::size_t gamma = 0;
    double min_kl = 0.0;  // min_{α≠γ} S_{θ*}(γ|α)
    std::vector<CollapseSeries> series;
    bool passed = false;
};

struct CollapseReport {
    double threshold = 1e-6;
    double min_fraction = 0.95;
    double rate_slack = 0.5;
    std::vector<CollapseComponentResult> components;
    bool passed = false;
};

/// ln r_n with r_n = ℙ_θ^q(record) / (q(γ) ℙ_{θ|γ}(record)) − 1
///                 = Σ_{α≠γ} q(α)ℙ_{θ|α} / (q(γ)ℙ_{θ|γ}),
/// evaluated in the log domain (−∞ when d = 1).
inline double collapse_log_r(const MixtureLikelihood& lik, ThetaView theta, std::size_t gamma, std::size_t d) {
    std::vector<double> terms(d);
    lik.component_terms(theta, terms);
    const double own = terms[gamma];
    std::vector<double> others;
    for (std::size_t a = 0; a < d; ++a)
        if (a != gamma) others.push_back(terms[a]);
    if (others.empty()) return -std::numeric_limits<double>::infinity();
    return log_sum_exp(others) - own;
}

/// Checks that the mixture likelihood collapses onto the realized
/// component: √n·r_n below `threshold` for at least `min_fraction` of seeds
/// at the largest n, and the median of ln r_n decays at a rate of at least
/// rate_slack · min_{α≠γ} S_{θ*}(γ|α).
inline CollapseReport mixture_collapse_experiment(const ParametricFamily& fam, const ExperimentPlan& plan, double threshold = 1e-6,
                                                  double min_fraction = 0.95, double rate_slack = 0.5) {
    validate_plan(fam, plan);
    const auto comps = detail::plan_components(fam, plan);
    const Theta h = plan.h.empty() ? Theta(fam.dimension(), 0.0) : plan.h;
    const std::size_t m = plan.n_grid.size();
    const std::size_t d = fam.component_count();
    const RealMatrix kl = kl_matrix(fam, plan.theta_star);

    CollapseReport rep;
    rep.threshold = threshold;
    rep.min_fraction = min_fraction;
    rep.rate_slack = rate_slack;
    rep.passed = true;
    for (auto g : comps) {
        if (!(plan.q[g] > 0.0)) throw DomainError("collapse: component " + fam.components().label(g) + " has zero weight");
        CollapseComponentResult res;
        res.gamma = g;
        res.min_kl = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < d; ++a)
            if (a != g) res.min_kl = std::min(res.min_kl, kl(g, a));

        // rows[r][s * m + i]: ln r_n for series s at checkpoint i.
        const auto rows = parallel_map(plan.n_reps, plan.workers, [&](std::size_t r) {
            const auto cs = detail::record_counts(fam, plan.theta_star, g, plan.n_grid,
                                                  detail::record_seed(plan, ExperimentTag::collapse, g, r));
            std::vector<double> out(2 * m);
            for (std::size_t i = 0; i < m; ++i) {
                const MixtureLikelihood lik(fam, plan.q, cs[i]);
                out[i] = collapse_log_r(lik, plan.theta_star, g, d);
                out[m + i] = collapse_log_r(lik, detail::shift(plan.theta_star, h, plan.n_grid[i]), g, d);
            }
            return out;
        });
        res.passed = true;
        for (std::size_t s = 0; s < 2; ++s) {
            CollapseSeries ser;
            ser.at = s == 0 ? "theta_star" : "theta_star+h/sqrt(n)";
            std::vector<double> ns, meds;
            for (std::size_t i = 0; i < m; ++i) {
                const double n = static_cast<double>(plan.n_grid[i]);
                CollapsePoint pt;
                pt.n = plan.n_grid[i];
                std::vector<double> lr(plan.n_reps);
                std::size_t below = 0;
                for (std::size_t r = 0; r < plan.n_reps; ++r) {
                    lr[r] = rows[r][s * m + i];
                    const double scaled = std::exp(0.5 * std::log(n) + lr[r]);
                    pt.max_sqrt_n_r = std::max(pt.max_sqrt_n_r, scaled);
                    if (scaled < threshold) ++below;
                }
                pt.fraction_below = static_cast<double>(below) / static_cast<double>(plan.n_reps);
                pt.median_log_r = stats::median(lr);
                ser.by_n.push_back(pt);
                ns.push_back(n);
                meds.push_back(pt.median_log_r);
            }
            ser.fraction_ok = ser.by_n.back().fraction_below >= min_fraction;
            if (d == 1) {
                ser.fitted_rate = std::numeric_limits<double>::infinity();
                ser.rate_ok = true;
            } else if (m >= 2) {
                ser.fitted_rate = -stats::linear_fit_slope(ns, meds);
                ser.rate_ok = ser.fitted_rate >= rate_slack * res.min_kl;
            } else {
                ser.fitted_rate = std::numeric_limits<double>::quiet_NaN();
                ser.rate_ok = false;
            }
            res.passed = res.passed && ser.fraction_ok && ser.rate_ok;
            res.series.push_back(std::move(ser));
        }
        rep.passed = rep.passed && res.passed;
        rep.components.push_back(std::move(res));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Consistency

struct ErrorQuantiles {
    std::size_t n = 0;
    double median = 0.0;
    double q90 = 0.0;
    double max = 0.0;
    std::size_t boundary_hits = 0;
};

struct ConsistencyReport {
    std::vector<ErrorQuantiles> by_n;
    std::vector<std::vector<double>> errors;  // [n index][replication], max-norm |θ̂_n − θ*|
    std::vector<std::size_t> gammas;          // realized component per replication
    std::optional<double> final_median_tolerance;
    bool decreasing = false;
    bool passed = false;
};

inline double max_abs_error(ThetaView a, ThetaView b) {
    double e = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) e = std::max(e, std::abs(a[k] - b[k]));
    return e;
}

/// Quantiles of |θ̂_n − θ*| along mixture records. Passes when the median
/// error strictly decreases along the grid (and, when a tolerance is given,
/// ends below it).
inline ConsistencyReport consistency_experiment(const ParametricFamily& fam, const ExperimentPlan& plan,
                                                std::optional<double> final_median_tolerance = std::nullopt,
                                                const MleOptions& mle_options = {}) {
    validate_plan(fam, plan);
    MleOptions opt = mle_options;
    opt.per_component = false;
    opt.record_trace = false;
    opt.fisher = false;
    const std::size_t m = plan.n_grid.size();
    struct Row {
        std::size_t gamma = 0;
        std::vector<double> err;
        std::vector<char> boundary;
    };
    const auto rows = parallel_map(plan.n_reps, plan.workers, [&](std::size_t r) {
        const std::uint64_t rseed = detail::record_seed(plan, ExperimentTag::consistency, kMixtureStream, r);
        const std::size_t g = sample_component(plan.q, rseed);
        const auto cs = detail::record_counts(fam, plan.theta_star, g, plan.n_grid, rseed);
        Row row;
        row.gamma = g;
        for (std::size_t i = 0; i < m; ++i) {
            const EstimationReport e = mle(fam, plan.q, cs[i], opt);
            row.err.push_back(max_abs_error(e.theta_hat, plan.theta_star));
            row.boundary.push_back(e.at_boundary ? 1 : 0);
        }
        return row;
    });
    ConsistencyReport rep;
    rep.final_median_tolerance = final_median_tolerance;
    rep.errors.assign(m, std::vector<double>(plan.n_reps));
    for (std::size_t r = 0; r < plan.n_reps; ++r) rep.gammas.push_back(rows[r].gamma);
    for (std::size_t i = 0; i < m; ++i) {
        ErrorQuantiles qn;
        qn.n = plan.n_grid[i];
        for (std::size_t r = 0; r < plan.n_reps; ++r) {
            rep.errors[i][r] = rows[r].err[i];
            qn.boundary_hits += rows[r].boundary[i] ? 1 : 0;
        }
        qn.median = stats::median(rep.errors[i]);
        qn.q90 = stats::quantile(rep.errors[i], 0.9);
        qn.max = *std::max_element(rep.errors[i].begin(), rep.errors[i].end());
        rep.by_n.push_back(qn);
    }
    rep.decreasing = true;
    for (std::size_t i = 1; i < m; ++i)
        if (!(rep.by_n[i].median < rep.by_n[i - 1].median)) rep.decreasing = false;
    rep.passed = rep.decreasing && (!final_median_tolerance || rep.by_n.back().median < *final_median_tolerance);
    return rep;
}

// ---------------------------------------------------------------------------
// Estimator paths (fig1)

/// Checkpoints 1 … n_max spaced geometrically, about `points` of them.
inline std::vector<std::size_t> geometric_checkpoints(std::size_t n_max, std::size_t points) {
    std::vector<std::size_t> out;
    if (n_max < 1 || points < 2) throw DomainError("geometric_checkpoints: need n_max >= 1 and at least two points");
    for (std::size_t k = 0; k < points; ++k) {
        const double e = static_cast<double>(k) / static_cast<double>(points - 1);
        const auto n = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(n_max), e)));
        if (out.empty() || n > out.back()) out.push_back(n);
    }
    if (out.back() != n_max) out.push_back(n_max);
    return out;
}

struct Fig1Run {
    std::uint64_t record_seed = 0;
    std::size_t gamma = 0;
    std::vector<std::size_t> n;
    std::vector<double> theta_hat;
    double final_error = 0.0;
};

struct Fig1Report {
    std::size_t runs = 10;
    std::size_t n_max = 10000;
    double tolerance = 0.02;
    std::vector<Fig1Run> paths;
    bool passed = false;
};

/// Paths n ↦ θ̂_n for `runs` mixture records (D = 1).
inline Fig1Report fig1_experiment(const ParametricFamily& fam, const ExperimentPlan& plan, std::size_t runs = 10,
                                  std::size_t n_max = 10000, double tolerance = 0.02, std::size_t points = 100) {
    if (fam.dimension() != 1) throw CapabilityError("fig1: needs a one-parameter family");
    ExperimentPlan p = plan;
    p.n_grid = {n_max};
    p.n_reps = std::max<std::size_t>(runs, 2);
    validate_plan(fam, p);
    const auto checkpoints = geometric_checkpoints(n_max, points);
    MleOptions opt;
    opt.per_component = false;
    opt.record_trace = false;
    opt.fisher = false;
    Fig1Report rep;
    rep.runs = runs;
    rep.n_max = n_max;
    rep.tolerance = tolerance;
    rep.paths = parallel_map(runs, plan.workers, [&](std::size_t r) {
        Fig1Run run;
        run.record_seed = detail::record_seed(plan, ExperimentTag::fig1, kMixtureStream, r);
        run.gamma = sample_component(plan.q, run.record_seed);
        const auto cs = detail::record_counts(fam, plan.theta_star, run.gamma, checkpoints, run.record_seed);
        for (std::size_t i = 0; i < checkpoints.size(); ++i) {
            run.n.push_back(checkpoints[i]);
            run.theta_hat.push_back(mle(fam, plan.q, cs[i], opt).theta_hat[0]);
        }
        run.final_error = std::abs(run.theta_hat.back() - plan.theta_star[0]);
        return run;
    });
    rep.passed = std::all_of(rep.paths.begin(), rep.paths.end(), [&](const Fig1Run& r) { return r.final_error < tolerance; });
    return rep;
}

inline std::string fig1_csv(const Fig1Run& run) {
    CsvWriter csv({"n", "theta_hat"});
    for (std::size_t i = 0; i < run.n.size(); ++i) csv.row({std::to_string(run.n[i]), format_real(run.theta_hat[i])});
    return csv.str();
}

// ---------------------------------------------------------------------------
// Cramér–Rao saturation

struct EfficiencyCheck {
    std::size_t gamma = 0;
    std::size_t n = 0;
    double target = 0.0;      // tr I_{θ*}(γ)^{-1}
    double mean_z = 0.0;      // mean of √n(θ̂_n − θ* − h/√n), first coordinate
    double variance = 0.0;    // tr of the empirical covariance of z
    double ratio = 0.0;       // variance / target
    double component_estimator_ratio = 0.0;  // same with θ̂_n^γ in place of θ̂_n
    std::size_t boundary_hits = 0;
    bool passed = false;
};

struct CramerRaoReport {
    double ratio_lo = 0.85;
    double ratio_hi = 1.15;
    double mixture_tolerance = 0.10;
    std::vector<EfficiencyCheck> components;  // at the largest n
    double mixture_target = 0.0;              // Σ_α q(α) tr I_{θ*}(α)^{-1}
    double mixture_second_moment = 0.0;
    double mixture_ratio = 0.0;
    bool mixture_ok = false;
    std::vector<std::vector<double>> z_samples;  // per tested component, then the mixture (first coordinate)
    bool passed = false;
};

namespace detail {

inline double trace_of_covariance(const std::vector<Theta>& z) {
    double s = 0.0;
    for (std::size_t k = 0; k < z.front().size(); ++k) {
        std::vector<double> c(z.size());
        for (std::size_t r = 0; r < z.size(); ++r) c[r] = z[r][k];
        s += stats::variance(c);
    }
    return s;
}

inline double trace_inverse(const InfoMatrix& m) { return trace(m.inverse()); }

}  // namespace detail

/// Per-component and mixture efficiency of the global MLE at the largest n:
/// records from ℙ_{θ*+h/√n|γ}, z = √n(θ̂_n − θ* − h/√n), empirical variance
/// (trace of covariance for D > 1) against tr I_{θ*}(γ)^{-1}.
inline CramerRaoReport cramer_rao_experiment(const ParametricFamily& fam, const ExperimentPlan& plan,
                                             const MleOptions& mle_options = {}) {
    validate_plan(fam, plan);
    const auto comps = detail::plan_components(fam, plan);
    std::vector<std::size_t> all(fam.component_count());
    std::iota(all.begin(), all.end(), std::size_t{0});
    const auto fisher = require_nonsingular_fisher(fam, plan.theta_star, all);
    const std::size_t n = plan.n_grid.back();
    const Theta truth = detail::shift(plan.theta_star, plan.h, n);
    const double root_n = std::sqrt(static_cast<double>(n));
    MleOptions opt = mle_options;
    opt.per_component = false;
    opt.record_trace = false;
    opt.fisher = false;
    const std::vector<std::size_t> at{n};

    struct Row {
        Theta z, z_component;
        bool boundary = false;
        std::size_t gamma = 0;
    };
    auto run_record = [&](std::size_t g, std::uint64_t rseed, bool with_component) {
        const CountVector c = detail::record_counts(fam, truth, g, at, rseed).front();
        const EstimationReport e = mle(fam, plan.q, c, opt);
        Row row;
        row.gamma = g;
        row.boundary = e.at_boundary;
        row.z.resize(truth.size());
        for (std::size_t k = 0; k < truth.size(); ++k) row.z[k] = root_n * (e.theta_hat[k] - truth[k]);
        if (with_component) {
            const ComponentEstimate ce = component_mle(fam, c, g, opt);
            row.z_component.resize(truth.size());
            for (std::size_t k = 0; k < truth.size(); ++k) row.z_component[k] = root_n * (ce.theta_hat[k] - truth[k]);
        }
        return row;
    };

    CramerRaoReport rep;
    rep.passed = true;
    for (auto g : comps) {
        const auto rows = parallel_map(plan.n_reps, plan.workers, [&](std::size_t r) {
            return run_record(g, detail::record_seed(plan, ExperimentTag::cramer_rao, g, r), true);
        });
        std::vector<Theta> z, zc;
        std::vector<double> z0;
        EfficiencyCheck chk;
        chk.gamma = g;
        chk.n = n;
        for (const auto& row : rows) {
            z.push_back(row.z);
            zc.push_back(row.z_component);
            z0.push_back(row.z[0]);
            chk.boundary_hits += row.boundary ? 1 : 0;
        }
        chk.target = detail::trace_inverse(fisher[g]);
        chk.mean_z = stats::mean(z0);
        chk.variance = detail::trace_of_covariance(z);
        chk.ratio = chk.variance / chk.target;
        chk.component_estimator_ratio = detail::trace_of_covariance(zc) / chk.target;
        chk.passed = chk.ratio >= rep.ratio_lo && chk.ratio <= rep.ratio_hi;
        rep.passed = rep.passed && chk.passed;
        rep.components.push_back(chk);
        rep.z_samples.push_back(std::move(z0));
    }

    const auto mix = parallel_map(plan.n_reps, plan.workers, [&](std::size_t r) {
        const std::uint64_t rseed = detail::record_seed(plan, ExperimentTag::cramer_rao, kMixtureStream, r);
        return run_record(sample_component(plan.q, rseed), rseed, false);
    });
    rep.mixture_target = 0.0;
    for (std::size_t a = 0; a < all.size(); ++a) rep.mixture_target += plan.q[a] * detail::trace_inverse(fisher[a]);
    double second = 0.0;
    std::vector<double> z0;
    for (const auto& row : mix) {
        for (double v : row.z) second += v * v;
        z0.push_back(row.z[0]);
    }
    rep.mixture_second_moment = second / static_cast<double>(mix.size());
    rep.mixture_ratio = rep.mixture_second_moment / rep.mixture_target;
    rep.mixture_ok = std::abs(rep.mixture_ratio - 1.0) <= rep.mixture_tolerance;
    rep.passed = rep.passed && rep.mixture_ok;
    rep.z_samples.push_back(std::move(z0));
    return rep;
}

// ---------------------------------------------------------------------------
// Posterior purification

struct PurificationPoint {
    std::size_t n = 0;
    double fraction_pure = 0.0;  // fraction of runs with q_n(γ_true) > purity
};

struct PurificationReport {
    double purity = 0.99;
    double min_fraction = 0.95;
    double tv_tolerance = 0.05;
    std::vector<PurificationPoint> by_n;
    std::vector<double> argmax_law;  // empirical law of argmax_α q_n(α) at the largest n
    double tv_distance = 0.0;
    bool fraction_ok = false;
    bool tv_ok = false;
    bool quantum_mode = false;
    bool passed = false;
};

/// Runs the posterior filter at θ* along mixture records and checks that
/// q_n concentrates on the realized component, and that the law of the
/// posterior mode matches q. With `sys`, the filter tracks the conditional
/// state φ_n from φ_0 = Σ_α √q(α) e_α.
inline PurificationReport purification_experiment(const ParametricFamily& fam, const ExperimentPlan& plan,
                                                  const QndSystem* sys = nullptr, double purity = 0.99,
                                                  double min_fraction = 0.95, double tv_tolerance = 0.05) {
    validate_plan(fam, plan, false);
    const std::size_t d = fam.component_count();
    const std::size_t m = plan.n_grid.size();
    const std::size_t n_max = plan.n_grid.back();
    std::optional<PosteriorFilter> quantum;
    if (sys) {
        if (sys->system_dim() != d || sys->probe_dim() != fam.outcome_count())
            throw DomainError("purify: system does not match the family");
        quantum.emplace(*sys, plan.theta_star);
    }
    const PosteriorFilter classical(fam, plan.theta_star);
    const PosteriorFilter& filter = quantum ? *quantum : classical;

    struct Row {
        std::vector<char> pure;
        std::size_t mode = 0;
    };
    const auto rows = parallel_map(plan.n_reps, plan.workers, [&](std::size_t r) {
        const std::uint64_t rseed = detail::record_seed(plan, ExperimentTag::purify, kMixtureStream, r);
        const Trajectory t = sample_mixture_trajectory(fam, plan.theta_star, plan.q, n_max, rseed);
        FilterState s;
        if (quantum) {
            std::vector<Complex> phi0(d);
            for (std::size_t a = 0; a < d; ++a) phi0[a] = std::sqrt(plan.q[a]);
            s = filter.initial(std::move(phi0));
        } else {
            s = filter.initial(plan.q);
        }
        Row row;
        std::size_t next = 0;
        for (std::size_t k = 0; k <= n_max && next < m; ++k) {
            while (next < m && plan.n_grid[next] == k) {
                row.pure.push_back(s.q[t.gamma] > purity ? 1 : 0);
                ++next;
            }
            if (k < n_max) s = filter.step(s, t.outcomes[k]);
        }
        row.mode = static_cast<std::size_t>(std::max_element(s.q.begin(), s.q.end()) - s.q.begin());
        return row;
    });
    PurificationReport rep;
    rep.purity = purity;
    rep.min_fraction = min_fraction;
    rep.tv_tolerance = tv_tolerance;
    rep.quantum_mode = quantum.has_value();
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t count = 0;
        for (const auto& row : rows) count += row.pure[i] ? 1 : 0;
        rep.by_n.push_back({plan.n_grid[i], static_cast<double>(count) / static_cast<double>(plan.n_reps)});
    }
    rep.argmax_law.assign(d, 0.0);
    for (const auto& row : rows) rep.argmax_law[row.mode] += 1.0 / static_cast<double>(plan.n_reps);
    rep.tv_distance = stats::total_variation(rep.argmax_law, plan.q.values());
    rep.fraction_ok = rep.by_n.back().fraction_pure >= min_fraction;
    rep.tv_ok = rep.tv_distance < tv_tolerance;
    rep.passed = rep.fraction_ok && rep.tv_ok;
    return rep;
}

// ---------------------------------------------------------------------------
// JSON reports

inline Json plan_json(const ParametricFamily& fam, const ExperimentPlan& plan) {
    Json j;
    j["theta_star"] = plan.theta_star;
    Json q;
    for (std::size_t a = 0; a < plan.q.size(); ++a) q[fam.components().label(a)] = plan.q[a];
    j["q"] = q;
    j["h"] = plan.h;
    j["n_grid"] = detail::n_grid_json(plan.n_grid);
    j["n_reps"] = plan.n_reps;
    j["seed"] = plan.seed;
    return j;
}

inline Json to_json(const MomentCheck& c) {
    Json j;
    j["n"] = c.n;
    j["target_mean"] = c.target_mean;
    j["target_variance"] = c.target_variance;
    j["mean"] = c.mean;
    j["mean_standard_error"] = c.mean_se;
    j["variance"] = c.variance;
    j["variance_standard_error"] = c.variance_se;
    j["mean_ok"] = c.mean_ok;
    j["variance_ok"] = c.variance_ok;
    if (c.normality) {
        j["anderson_darling"] = c.normality->statistic;
        j["anderson_darling_critical_1pct"] = c.normality->critical_value;
        j["normality_ok"] = c.normality->passed;
    }
    j["passed"] = c.passed;
    return j;
}

inline Json to_json(const LamnReport& r, const ParametricFamily& fam) {
    Json j;
    j["mean_tolerance_standard_errors"] = r.mean_tolerance_se;
    j["variance_tolerance_relative"] = r.variance_tolerance;
    Json comps = Json::array();
    for (const auto& c : r.components) {
        Json e;
        e["component"] = fam.components().label(c.gamma);
        e["hIh"] = c.quadratic;
        Json by = Json::array();
        for (const auto& m : c.by_n) by.push_back(to_json(m));
        e["by_n"] = by;
        comps.push_back(e);
    }
    j["components"] = comps;
    Json mix = Json::array();
    for (const auto& m : r.mixture_by_n) mix.push_back(to_json(m));
    j["mixture"] = mix;
    j["passed"] = r.passed;
    return j;
}

inline std::string lamn_samples_csv(const LamnReport& r, const ParametricFamily& fam) {
    CsvWriter csv({"component", "n", "log_lr"});
    for (const auto& s : r.samples) csv.row({fam.components().label(s.gamma), std::to_string(s.n), format_real(s.log_lr)});
    return csv.str();
}

inline Json to_json(const CollapseReport& r, const ParametricFamily& fam) {
    Json j;
    j["threshold"] = r.threshold;
    j["min_fraction"] = r.min_fraction;
    j["rate_slack"] = r.rate_slack;
    j["note"] = "almost-sure decay checked as decay in probability over seeds";
    Json comps = Json::array();
    for (const auto& c : r.components) {
        Json e;
        e["component"] = fam.components().label(c.gamma);
        e["min_kl"] = c.min_kl;
        Json series = Json::array();
        for (const auto& s : c.series) {
            Json sj;
            sj["at"] = s.at;
            Json by = Json::array();
            for (const auto& p : s.by_n) {
                Json pj;
                pj["n"] = p.n;
                pj["fraction_below_threshold"] = p.fraction_below;
                pj["median_log_r"] = p.median_log_r;
                pj["max_sqrt_n_r"] = p.max_sqrt_n_r;
                by.push_back(pj);
            }
            sj["by_n"] = by;
            sj["fitted_rate"] = s.fitted_rate;
            sj["fraction_ok"] = s.fraction_ok;
            sj["rate_ok"] = s.rate_ok;
            series.push_back(sj);
        }
        e["series"] = series;
        e["passed"] = c.passed;
        comps.push_back(e);
    }
    j["components"] = comps;
    j["passed"] = r.passed;
    return j;
}

inline Json to_json(const ConsistencyReport& r) {
    Json j;
    j["note"] = "almost-sure convergence checked as decay in probability over seeds";
    Json by = Json::array();
    for (const auto& q : r.by_n) {
        Json e;
        e["n"] = q.n;
        e["median_error"] = q.median;
        e["q90_error"] = q.q90;
        e["max_error"] = q.max;
        e["boundary_hits"] = q.boundary_hits;
        by.push_back(e);
    }
    j["by_n"] = by;
    if (r.final_median_tolerance) j["final_median_tolerance"] = *r.final_median_tolerance;
    j["median_decreasing"] = r.decreasing;
    j["passed"] = r.passed;
    return j;
}

inline std::string consistency_errors_csv(const ConsistencyReport& r, const ParametricFamily& fam,
                                          std::span<const std::size_t> n_grid) {
    CsvWriter csv({"replication", "component", "n", "abs_error"});
    for (std::size_t i = 0; i < r.errors.size(); ++i)
        for (std::size_t k = 0; k < r.errors[i].size(); ++k)
            csv.row({std::to_string(k), fam.components().label(r.gammas[k]), std::to_string(n_grid[i]), format_real(r.errors[i][k])});
    return csv.str();
}

inline Json to_json(const Fig1Report& r, const ParametricFamily& fam) {
    Json j;
    j["runs"] = r.runs;
    j["n_max"] = r.n_max;
    j["tolerance"] = r.tolerance;
    Json paths = Json::array();
    for (std::size_t i = 0; i < r.paths.size(); ++i) {
        Json e;
        e["run"] = i;
        e["record_seed"] = r.paths[i].record_seed;
        e["component"] = fam.components().label(r.paths[i].gamma);
        e["theta_hat_final"] = r.paths[i].theta_hat.back();
        e["final_error"] = r.paths[i].final_error;
        e["file"] = "fig1_run_" + std::to_string(i) + ".csv";
        paths.push_back(e);
    }
    j["paths"] = paths;
    j["passed"] = r.passed;
    return j;
}

inline Json to_json(const CramerRaoReport& r, const ParametricFamily& fam) {
    Json j;
    j["ratio_bounds"] = {r.ratio_lo, r.ratio_hi};
    Json comps = Json::array();
    for (const auto& c : r.components) {
        Json e;
        e["component"] = fam.components().label(c.gamma);
        e["n"] = c.n;
        e["target_variance"] = c.target;
        e["empirical_variance"] = c.variance;
        e["efficiency_ratio"] = c.ratio;
        e["component_estimator_ratio"] = c.component_estimator_ratio;
        e["mean_z"] = c.mean_z;
        e["boundary_hits"] = c.boundary_hits;
        e["passed"] = c.passed;
        comps.push_back(e);
    }
    j["components"] = comps;
    Json mix;
    mix["target_second_moment"] = r.mixture_target;
    mix["empirical_second_moment"] = r.mixture_second_moment;
    mix["ratio"] = r.mixture_ratio;
    mix["tolerance_relative"] = r.mixture_tolerance;
    mix["passed"] = r.mixture_ok;
    j["mixture"] = mix;
    j["passed"] = r.passed;
    return j;
}

inline std::string cramer_rao_samples_csv(const CramerRaoReport& r, const ParametricFamily& fam) {
    CsvWriter csv({"stream", "z"});
    for (std::size_t i = 0; i < r.z_samples.size(); ++i) {
        const std::string name = i < r.components.size() ? fam.components().label(r.components[i].gamma) : "mixture";
        for (double z : r.z_samples[i]) csv.row({name, format_real(z)});
    }
    return csv.str();
}

inline Json to_json(const PurificationReport& r, const ParametricFamily& fam) {
    Json j;
    j["purity_threshold"] = r.purity;
    j["min_fraction"] = r.min_fraction;
    j["tv_tolerance"] = r.tv_tolerance;
    j["mode"] = r.quantum_mode ? "quantum" : "classical";
    Json by = Json::array();
    for (const auto& p : r.by_n) {
        Json e;
        e["n"] = p.n;
        e["fraction_pure"] = p.fraction_pure;
        by.push_back(e);
    }
    j["by_n"] = by;
    Json law;
    for (std::size_t a = 0; a < r.argmax_law.size(); ++a) law[fam.components().label(a)] = r.argmax_law[a];
    j["argmax_law"] = law;
    j["tv_distance"] = r.tv_distance;
    j["fraction_ok"] = r.fraction_ok;
    j["tv_ok"] = r.tv_ok;
    j["passed"] = r.passed;
    return j;
}

}  // namespace qndmle
