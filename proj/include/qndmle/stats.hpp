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

// Sample summaries used by the Monte-Carlo experiments. All reductions run
// in index order so results do not depend on how samples were produced.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "qndmle/errors.hpp"

namespace qndmle::stats {

inline double mean(std::span<const double> x) {
    if (x.empty()) throw DomainError("mean: empty sample");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

/// Unbiased sample variance.
inline double variance(std::span<const double> x) {
    if (x.size() < 2) throw DomainError("variance: need at least two samples");
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

inline double second_moment(std::span<const double> x) {
    if (x.empty()) throw DomainError("second_moment: empty sample");
    double s = 0.0;
    for (double v : x) s += v * v;
    return s / static_cast<double>(x.size());
}

inline double standard_error(std::span<const double> x) { return std::sqrt(variance(x) / static_cast<double>(x.size())); }

/// Standard error of the sample variance, from the fourth central moment.
inline double variance_standard_error(std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    const double m = mean(x);
    double m2 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = (v - m) * (v - m);
        m2 += d;
        m4 += d * d;
    }
    m2 /= n;
    m4 /= n;
    return std::sqrt(std::max(0.0, (m4 - m2 * m2) / n));
}

/// Linear-interpolation quantile (type 7), p in [0, 1].
inline double quantile(std::vector<double> x, double p) {
    if (x.empty()) throw DomainError("quantile: empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile: level outside [0, 1]");
    std::sort(x.begin(), x.end());
    const double h = p * static_cast<double>(x.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

inline double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

struct AndersonDarling {
    double statistic = 0.0;       // A² of the standardized sample
    double critical_value = 0.0;  // 1% level, mean and variance estimated
    bool passed = false;
};

/// Anderson–Darling normality test with estimated mean and variance.
/// Critical value 1.092 at 1%, with the small-sample factor 1 + 4/n − 25/n².
inline AndersonDarling anderson_darling_normal(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 8) throw DomainError("anderson_darling_normal: need at least eight samples");
    const double m = mean(x);
    const double sd = std::sqrt(variance(x));
    AndersonDarling out;
    const double nn = static_cast<double>(n);
    out.critical_value = 1.092 / (1.0 + 4.0 / nn - 25.0 / (nn * nn));
    if (!(sd > 0.0)) {
        out.statistic = std::numeric_limits<double>::infinity();
        return out;
    }
    std::vector<double> z(x.begin(), x.end());
    for (double& v : z) v = (v - m) / sd;
    std::sort(z.begin(), z.end());
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = std::log(std::max(normal_cdf(z[i]), 1e-300));
        const double hi = std::log(std::max(normal_cdf(-z[n - 1 - i]), 1e-300));
        s += (2.0 * static_cast<double>(i) + 1.0) * (lo + hi);
    }
    out.statistic = -nn - s / nn;
    out.passed = out.statistic < out.critical_value;
    return out;
}

/// Least-squares slope of y on x.
inline double linear_fit_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("linear_fit_slope: need two or more paired points");
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (!(sxx > 0.0)) throw DomainError("linear_fit_slope: x values are all equal");
    return sxy / sxx;
}

/// ½ Σ |p − q|.
inline double total_variation(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw DomainError("total_variation: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

}  // namespace qndmle::stats
