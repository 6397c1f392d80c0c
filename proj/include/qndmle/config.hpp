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

// Run configuration (JSON, schema_version 1).
//
//   {
//     "schema_version": 1,
//     "model": "toy_haroche",            // or "qubit_rotation", "toy_haroche_full"
//     "model_options": {"visibility": 0.674, "alpha_min": 1, "d": 3},
//     "box": [0.72, 0.86],               // D = 1, or {"lower": [...], "upper": [...]}
//     "theta_star": 0.7853981633974483,  // number or list
//     "q": "poissonlike(3.46)",          // or "uniform", or a list summing to 1
//     "experiment": "lamn",              // estimate | lamn | collapse | consistency | cramer-rao | purify | fig1
//     "n_grid": [1000, 5000, 10000],
//     "n_reps": 2000,
//     "h": 1.0,                          // number or list
//     "components": ["3", "4"],          // labels; default all
//     "seed": 7,
//     "workers": 0,                      // 0: all hardware threads
//     "output_dir": "out"
//   }
//
// Every field except schema_version is optional; missing fields take the
// experiment defaults. Unknown fields are rejected.

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qndmle/errors.hpp"
#include "qndmle/io.hpp"

namespace qndmle {

inline constexpr int kSchemaVersion = 1;

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"estimate", "lamn", "collapse", "consistency", "cramer-rao", "purify", "fig1"};
    return names;
}

inline const std::vector<std::string>& model_names() {
    static const std::vector<std::string> names{"toy_haroche", "toy_haroche_full", "qubit_rotation"};
    return names;
}

struct ModelOptions {
    std::optional<double> visibility;
    std::optional<std::size_t> alpha_min;
    std::optional<std::size_t> d;
};

struct BoxSpec {
    std::vector<double> lower;
    std::vector<double> upper;
};

struct RunConfig {
    std::string model = "toy_haroche";
    ModelOptions model_options;
    std::optional<BoxSpec> box;
    std::optional<std::vector<double>> theta_star;
    std::optional<std::string> q_rule;           // "uniform" or "poissonlike(rate)"
    std::optional<std::vector<double>> q_values;
    std::string experiment = "estimate";
    std::optional<std::vector<std::size_t>> n_grid;
    std::optional<std::size_t> n_reps;
    std::optional<std::vector<double>> h;
    std::vector<std::string> components;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::string output_dir = "qndmle_out";
    std::optional<std::string> trajectory_file;  // estimate: read the record instead of simulating it
};

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

[[noreturn]] inline void field_error(const std::string& origin, const std::string& field, const std::string& what) {
    throw ConfigError(origin + ": field '" + field + "': " + what);
}

inline std::vector<double> real_or_list(const Json& v, const std::string& origin, const std::string& field) {
    if (v.is_number()) return {v.get<double>()};
    if (v.is_array() && !v.empty()) {
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) field_error(origin, field, "expected a number or a non-empty list of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }
    field_error(origin, field, "expected a number or a non-empty list of numbers");
}

inline std::size_t positive_integer(const Json& v, const std::string& origin, const std::string& field, bool allow_zero = false) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < (allow_zero ? 0 : 1))
        field_error(origin, field, allow_zero ? "expected a non-negative integer" : "expected a positive integer");
    return v.get<std::size_t>();
}

inline void check_choice(const std::string& value, const std::vector<std::string>& allowed, const std::string& origin,
                         const std::string& field) {
    for (const auto& a : allowed)
        if (a == value) return;
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    field_error(origin, field, "unknown value '" + value + "' (expected one of: " + list + ")");
}

}  // namespace detail

/// Parses "poissonlike(3.46)" into its rate.
inline std::optional<double> parse_poissonlike(const std::string& rule) {
    const std::string head = "poissonlike(";
    if (rule.rfind(head, 0) != 0 || rule.back() != ')') return std::nullopt;
    const std::string inner = rule.substr(head.size(), rule.size() - head.size() - 1);
    try {
        std::size_t used = 0;
        const double rate = std::stod(inner, &used);
        if (used != inner.size()) return std::nullopt;
        return rate;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

inline void set_q(RunConfig& cfg, const Json& v, const std::string& origin) {
    if (v.is_string()) {
        const std::string rule = v.get<std::string>();
        if (rule != "uniform" && !parse_poissonlike(rule))
            detail::field_error(origin, "q", "expected \"uniform\", \"poissonlike(<rate>)\" or a list of weights");
        cfg.q_rule = rule;
        cfg.q_values.reset();
        return;
    }
    cfg.q_values = detail::real_or_list(v, origin, "q");
    cfg.q_rule.reset();
}

inline BoxSpec parse_box(const Json& v, const std::string& origin) {
    BoxSpec b;
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
        b.lower = {v[0].get<double>()};
        b.upper = {v[1].get<double>()};
    } else if (v.is_object() && v.contains("lower") && v.contains("upper") && v.size() == 2) {
        b.lower = detail::real_or_list(v["lower"], origin, "box.lower");
        b.upper = detail::real_or_list(v["upper"], origin, "box.upper");
    } else {
        detail::field_error(origin, "box", "expected [lower, upper] or {\"lower\": [...], \"upper\": [...]}");
    }
    if (b.lower.size() != b.upper.size()) detail::field_error(origin, "box", "lower and upper differ in dimension");
    for (std::size_t k = 0; k < b.lower.size(); ++k)
        if (!(b.lower[k] < b.upper[k])) detail::field_error(origin, "box", "need lower < upper in every coordinate");
    return b;
}

/// Parses a config document. Errors carry the origin, and either the line
/// and column (syntax) or the offending field.
inline RunConfig parse_config(const std::string& text, const std::string& origin = "config") {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, col] = detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": syntax error: " + e.what());
    }
    if (!j.is_object()) throw ConfigError(origin + ": top level must be an object");
    static const std::set<std::string> known{"schema_version", "model", "model_options", "box", "theta_star", "q",
                                             "experiment", "n_grid", "n_reps", "h", "components", "seed",
                                             "workers", "output_dir", "trajectory_file"};
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) detail::field_error(origin, key, "unknown field");
    if (!j.contains("schema_version")) detail::field_error(origin, "schema_version", "missing");
    if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != kSchemaVersion)
        detail::field_error(origin, "schema_version", "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");

    RunConfig cfg;
    if (j.contains("model")) {
        if (!j["model"].is_string()) detail::field_error(origin, "model", "expected a preset name");
        cfg.model = j["model"].get<std::string>();
        detail::check_choice(cfg.model, model_names(), origin, "model");
    }
    if (j.contains("model_options")) {
        const Json& o = j["model_options"];
        if (!o.is_object()) detail::field_error(origin, "model_options", "expected an object");
        for (const auto& [key, value] : o.items()) {
            if (key == "visibility") {
                if (!value.is_number()) detail::field_error(origin, "model_options.visibility", "expected a number");
                cfg.model_options.visibility = value.get<double>();
            } else if (key == "alpha_min") {
                cfg.model_options.alpha_min = detail::positive_integer(value, origin, "model_options.alpha_min", true);
            } else if (key == "d") {
                cfg.model_options.d = detail::positive_integer(value, origin, "model_options.d");
            } else {
                detail::field_error(origin, "model_options." + key, "unknown field");
            }
        }
    }
    if (j.contains("box")) cfg.box = parse_box(j["box"], origin);
    if (j.contains("theta_star")) cfg.theta_star = detail::real_or_list(j["theta_star"], origin, "theta_star");
    if (j.contains("q")) set_q(cfg, j["q"], origin);
    if (j.contains("experiment")) {
        if (!j["experiment"].is_string()) detail::field_error(origin, "experiment", "expected a string");
        cfg.experiment = j["experiment"].get<std::string>();
        detail::check_choice(cfg.experiment, experiment_names(), origin, "experiment");
    }
    if (j.contains("n_grid")) {
        const Json& g = j["n_grid"];
        if (!g.is_array() || g.empty()) detail::field_error(origin, "n_grid", "expected a non-empty list of integers");
        std::vector<std::size_t> ns;
        for (const auto& e : g) ns.push_back(detail::positive_integer(e, origin, "n_grid", true));
        for (std::size_t i = 1; i < ns.size(); ++i)
            if (ns[i] < ns[i - 1]) detail::field_error(origin, "n_grid", "entries must be non-decreasing");
        cfg.n_grid = ns;
    }
    if (j.contains("n_reps")) cfg.n_reps = detail::positive_integer(j["n_reps"], origin, "n_reps");
    if (j.contains("h")) cfg.h = detail::real_or_list(j["h"], origin, "h");
    if (j.contains("components")) {
        const Json& c = j["components"];
        if (!c.is_array()) detail::field_error(origin, "components", "expected a list of component labels");
        for (const auto& e : c) {
            if (e.is_string()) cfg.components.push_back(e.get<std::string>());
            else if (e.is_number_integer()) cfg.components.push_back(std::to_string(e.get<std::int64_t>()));
            else detail::field_error(origin, "components", "expected a list of component labels");
        }
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<std::int64_t>() >= 0))
            detail::field_error(origin, "seed", "expected a non-negative integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("workers")) cfg.workers = detail::positive_integer(j["workers"], origin, "workers", true);
    if (j.contains("output_dir")) {
        if (!j["output_dir"].is_string() || j["output_dir"].get<std::string>().empty())
            detail::field_error(origin, "output_dir", "expected a non-empty path");
        cfg.output_dir = j["output_dir"].get<std::string>();
    }
    if (j.contains("trajectory_file")) {
        if (!j["trajectory_file"].is_string()) detail::field_error(origin, "trajectory_file", "expected a path");
        cfg.trajectory_file = j["trajectory_file"].get<std::string>();
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return parse_config(text, path);
}

}  // namespace qndmle
