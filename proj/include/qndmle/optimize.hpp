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

// Box-constrained maximizers: golden-section refinement of every local
// maximum found by a coarse scan (D = 1), and multi-start projected gradient
// ascent with Armijo backtracking (D > 1).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "qndmle/model.hpp"

namespace qndmle {

struct ScalarOptimum {
    double x = 0.0;
    double value = -std::numeric_limits<double>::infinity();
    int evaluations = 0;
    bool converged = false;
};

/// Golden-section search for a maximum of a unimodal f on [lo, hi]. Returns
/// the best point evaluated; converged once the bracket is narrower than `tol`.
template <typename F>
ScalarOptimum golden_section_max(F&& f, double lo, double hi, double tol, int max_iterations) {
    constexpr double kInvPhi = 0.6180339887498948482;
    ScalarOptimum best;
    auto eval = [&](double x) {
        const double v = f(x);
        ++best.evaluations;
        if (v > best.value || (v == best.value && x < best.x)) {
            best.value = v;
            best.x = x;
        }
        return v;
    };
    double a = lo;
    double b = hi;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = eval(c);
    double fd = eval(d);
    int it = 0;
    while (b - a > tol && it < max_iterations) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = eval(d);
        }
        ++it;
    }
    best.converged = b - a <= tol;
    return best;
}

struct ScanOptions {
    std::size_t scan_points = 64;
    double tol = 1e-8;
    int max_iterations = 200;
    double tie_tol = 1e-12;
};

struct ScanResult {
    double x = 0.0;
    double value = -std::numeric_limits<double>::infinity();
    bool converged = true;
    bool tie = false;
    std::vector<ScalarOptimum> candidates;  // one refined optimum per scanned local maximum, by x
};

/// Maximizes f over [lo, hi]: evaluates an evenly spaced scan, refines each
/// scanned local maximum by golden section inside its neighbouring cells,
/// then keeps the best. Candidates within `tie_tol` of the best value resolve
/// to the smallest x and set `tie`.
template <typename F>
ScanResult scan_and_refine_max(F&& f, double lo, double hi, const ScanOptions& opt = {}) {
    const std::size_t m = std::max<std::size_t>(3, opt.scan_points);
    std::vector<double> xs(m), vs(m);
    for (std::size_t i = 0; i < m; ++i) {
        xs[i] = i + 1 == m ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1);
        vs[i] = f(xs[i]);
    }
    ScanResult res;
    for (std::size_t i = 0; i < m; ++i) {
        const bool left_ok = i == 0 || vs[i] >= vs[i - 1];
        const bool right_ok = i + 1 == m || vs[i] > vs[i + 1];
        if (!(left_ok && right_ok)) continue;
        const double a = xs[i == 0 ? 0 : i - 1];
        const double b = xs[i + 1 == m ? m - 1 : i + 1];
        ScalarOptimum opt_i = golden_section_max(f, a, b, opt.tol, opt.max_iterations);
        if (vs[i] > opt_i.value) {
            opt_i.value = vs[i];
            opt_i.x = xs[i];
        }
        res.candidates.push_back(opt_i);
    }
    if (res.candidates.empty()) {
        // Only when every scan value is NaN.
        res.converged = false;
        res.value = std::numeric_limits<double>::quiet_NaN();
        res.x = lo;
        return res;
    }
    double best_value = -std::numeric_limits<double>::infinity();
    for (const auto& c : res.candidates) best_value = std::max(best_value, c.value);
    bool found = false;
    for (const auto& c : res.candidates) {
        if (c.value < best_value - opt.tie_tol) continue;
        if (!found) {
            res.x = c.x;
            res.value = c.value;
            res.converged = c.converged;
            found = true;
        } else if (std::abs(c.x - res.x) > 10.0 * opt.tol) {
            res.tie = true;
        }
    }
    return res;
}

struct VectorOptimum {
    Theta x;
    double value = -std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
    double projected_gradient_norm = std::numeric_limits<double>::infinity();
};

struct AscentOptions {
    double grad_tol = 1e-7;
    int max_iterations = 5000;
    std::size_t starts = 8;
    double tie_tol = 1e-12;
};

namespace detail {
inline double projected_norm(const ParameterBox& box, ThetaView x, ThetaView g) {
    double m = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        double gk = g[k];
        if (x[k] <= box.lower()[k] && gk < 0.0) gk = 0.0;
        if (x[k] >= box.upper()[k] && gk > 0.0) gk = 0.0;
        m = std::max(m, std::abs(gk));
    }
    return m;
}
}  // namespace detail

/// Projected gradient ascent from `start` with Barzilai–Borwein trial steps
/// and Armijo backtracking.
template <typename F, typename G>
VectorOptimum projected_gradient_ascent(F&& f, G&& grad, const ParameterBox& box, Theta start, const AscentOptions& opt = {}) {
    VectorOptimum out;
    Theta x = box.clamp(start);
    double fx = f(x);
    Theta g = grad(x);
    double step = 0.0;
    {
        double gn = 0.0;
        for (double v : g) gn = std::max(gn, std::abs(v));
        double span = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) span = std::max(span, box.width(k));
        step = gn > 0.0 ? 0.1 * span / gn : 1.0;
    }
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        out.projected_gradient_norm = detail::projected_norm(box, x, g);
        if (out.projected_gradient_norm < opt.grad_tol) {
            out.converged = true;
            break;
        }
        bool accepted = false;
        Theta xn(x.size());
        double fn = fx;
        double alpha = step;
        for (int halvings = 0; halvings < 60; ++halvings) {
            for (std::size_t k = 0; k < x.size(); ++k) xn[k] = x[k] + alpha * g[k];
            xn = box.clamp(xn);
            double dir = 0.0;
            for (std::size_t k = 0; k < x.size(); ++k) dir += g[k] * (xn[k] - x[k]);
            fn = f(xn);
            if (std::isfinite(fn) && fn >= fx + 1e-4 * dir) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;
        Theta gn = grad(xn);
        double ss = 0.0, sy = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double s = xn[k] - x[k];
            const double y = g[k] - gn[k];
            ss += s * s;
            sy += s * y;
        }
        const bool stalled = ss == 0.0;
        x = std::move(xn);
        fx = fn;
        g = std::move(gn);
        if (stalled) {
            out.projected_gradient_norm = detail::projected_norm(box, x, g);
            out.converged = out.projected_gradient_norm < opt.grad_tol;
            break;
        }
        step = sy > 0.0 ? ss / sy : 2.0 * alpha;
    }
    if (it == opt.max_iterations) out.projected_gradient_norm = detail::projected_norm(box, x, g);
    out.x = std::move(x);
    out.value = fx;
    out.iterations = it;
    return out;
}

struct MultiStartResult {
    VectorOptimum best;
    bool tie = false;
    std::vector<VectorOptimum> runs;  // in start order
};

/// Runs projected gradient ascent from the first `starts` Halton points of
/// the box, in order, and keeps the best (ties: lexicographically smallest).
template <typename F, typename G>
MultiStartResult multistart_ascent(F&& f, G&& grad, const ParameterBox& box, const AscentOptions& opt = {}) {
    MultiStartResult res;
    for (std::size_t s = 1; s <= opt.starts; ++s) res.runs.push_back(projected_gradient_ascent(f, grad, box, box.halton(s), opt));
    double best_value = -std::numeric_limits<double>::infinity();
    for (const auto& r : res.runs) best_value = std::max(best_value, r.value);
    const VectorOptimum* chosen = nullptr;
    for (const auto& r : res.runs) {
        if (r.value < best_value - opt.tie_tol) continue;
        if (!chosen) {
            chosen = &r;
            continue;
        }
        double dist = 0.0;
        for (std::size_t k = 0; k < r.x.size(); ++k) dist = std::max(dist, std::abs(r.x[k] - chosen->x[k]));
        if (dist > 1e-6) {
            res.tie = true;
            if (std::lexicographical_compare(r.x.begin(), r.x.end(), chosen->x.begin(), chosen->x.end())) chosen = &r;
        }
    }
    res.best = *chosen;
    return res;
}

}  // namespace qndmle
