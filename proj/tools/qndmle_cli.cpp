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

// qndmle command-line front end.
//
//   qndmle run --config exp.json [overrides]
//   qndmle run --preset toy_haroche --experiment fig1 --seed 7
//   qndmle lamn --n-reps 500 --out out/lamn
//   qndmle check-id --preset toy_haroche --grid-points 50
//
// Flags override values read from --config.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qndmle/qndmle.hpp"

namespace {

struct Overrides {
    std::string config;
    std::optional<std::string> preset;
    std::optional<std::string> experiment;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> n_reps;
    std::optional<std::string> n_grid;
    std::optional<std::size_t> workers;
    std::optional<std::string> theta_star;
    std::optional<std::string> h;
    std::optional<std::string> q;
    std::optional<std::string> box;
    std::optional<std::string> trajectory;
};

std::vector<double> parse_reals(const std::string& flag, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw qndmle::ConfigError("flag " + flag + ": '" + item + "' is not a number");
        }
    }
    if (out.empty()) throw qndmle::ConfigError("flag " + flag + ": expected a comma-separated list of numbers");
    return out;
}

void add_common_flags(CLI::App* app, Overrides& o, bool with_experiment) {
    app->set_help_flag("--help", "print this help and exit");  // frees "h" for the shift flag
    app->add_option("--config", o.config, "JSON config file (schema_version 1)");
    app->add_option("--preset", o.preset, "model preset: toy_haroche, toy_haroche_full, qubit_rotation");
    if (with_experiment) app->add_option("--experiment", o.experiment, "estimate, lamn, collapse, consistency, cramer-rao, purify, fig1");
    app->add_option("--seed", o.seed, "master seed");
    app->add_option("--out", o.out, "output directory");
    app->add_option("--n-reps", o.n_reps, "replications (fig1: number of runs)");
    app->add_option("--n-grid", o.n_grid, "comma-separated sample sizes");
    app->add_option("--workers", o.workers, "worker threads, 0 for all cores");
    app->add_option("--theta-star", o.theta_star, "true parameter, comma-separated");
    app->add_option("--h", o.h, "local shift, comma-separated");
    app->add_option("--q", o.q, "mixing law: uniform, poissonlike(<rate>) or comma-separated weights");
    app->add_option("--box", o.box, "parameter box: lo,hi (D = 1) or lo_1,..,lo_D,hi_1,..,hi_D");
    app->add_option("--trajectory", o.trajectory, "estimate: record JSON to read instead of simulating");
}

qndmle::RunConfig resolve(const Overrides& o, const std::optional<std::string>& fixed_experiment) {
    using qndmle::ConfigError;
    qndmle::RunConfig cfg = o.config.empty() ? qndmle::RunConfig{} : qndmle::load_config(o.config);
    if (o.preset) {
        bool known = false;
        for (const auto& m : qndmle::model_names()) known = known || m == *o.preset;
        if (!known) throw ConfigError("flag --preset: unknown preset '" + *o.preset + "'");
        cfg.model = *o.preset;
    }
    if (fixed_experiment) cfg.experiment = *fixed_experiment;
    if (o.experiment) {
        bool known = false;
        for (const auto& m : qndmle::experiment_names()) known = known || m == *o.experiment;
        if (!known) throw ConfigError("flag --experiment: unknown experiment '" + *o.experiment + "'");
        cfg.experiment = *o.experiment;
    }
    if (o.seed) cfg.seed = *o.seed;
    if (o.out) cfg.output_dir = *o.out;
    if (o.n_reps) cfg.n_reps = *o.n_reps;
    if (o.n_grid) {
        std::vector<std::size_t> ns;
        for (double v : parse_reals("--n-grid", *o.n_grid)) {
            if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
                throw ConfigError("flag --n-grid: entries must be non-negative integers");
            ns.push_back(static_cast<std::size_t>(v));
        }
        cfg.n_grid = ns;
    }
    if (o.workers) cfg.workers = *o.workers;
    if (o.theta_star) cfg.theta_star = parse_reals("--theta-star", *o.theta_star);
    if (o.h) cfg.h = parse_reals("--h", *o.h);
    if (o.q) {
        if (*o.q == "uniform" || qndmle::parse_poissonlike(*o.q)) {
            cfg.q_rule = *o.q;
            cfg.q_values.reset();
        } else {
            cfg.q_values = parse_reals("--q", *o.q);
            cfg.q_rule.reset();
        }
    }
    if (o.box) {
        const auto v = parse_reals("--box", *o.box);
        if (v.size() % 2 != 0) throw ConfigError("flag --box: expected an even number of values");
        qndmle::Json b = {{"lower", std::vector<double>(v.begin(), v.begin() + v.size() / 2)},
                          {"upper", std::vector<double>(v.begin() + v.size() / 2, v.end())}};
        cfg.box = qndmle::parse_box(b, "flag --box");
    }
    if (o.trajectory) cfg.trajectory_file = *o.trajectory;
    return cfg;
}

int run_config(const qndmle::RunConfig& cfg) {
    const qndmle::RunOutcome r = qndmle::run(cfg);
    for (const auto& f : r.files) std::cout << "wrote " << f.string() << "\n";
    std::cout << cfg.experiment << ": " << (r.passed ? "PASS" : "FAIL") << "\n";
    return r.exit_code;
}

int check_id(const qndmle::RunConfig& cfg, std::size_t points, double tol) {
    const qndmle::Model m = qndmle::build_model(cfg);
    const auto& fam = *m.family;
    if (fam.dimension() != 1) throw qndmle::ConfigError("check-id: grid checks are available for one-parameter models only");
    const auto grid = fam.box().linspace(points);
    const auto rep = qndmle::check_identifiability(fam, grid, tol);
    qndmle::Json j;
    j["model"] = m.name;
    j["box"] = {fam.box().lower()[0], fam.box().upper()[0]};
    j["grid_points"] = points;
    j["tolerance"] = tol;
    j["pairs_checked"] = rep.pairs_checked;
    j["min_margin"] = rep.min_margin;
    j["closest"] = {{"alpha", fam.components().label(rep.closest.alpha)},
                    {"theta", rep.closest.theta},
                    {"beta", fam.components().label(rep.closest.beta)},
                    {"theta2", rep.closest.theta2}};
    j["flagged"] = rep.flagged.size();
    j["passed"] = rep.passed();
    std::cout << qndmle::dump_json(j);
    return rep.passed() ? qndmle::kExitOk : qndmle::kExitExperimentFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Maximum likelihood estimation for QND measurement records"};
    app.require_subcommand(1);

    Overrides run_o;
    CLI::App* run_cmd = app.add_subcommand("run", "run the experiment named in the config or --experiment");
    add_common_flags(run_cmd, run_o, true);

    struct Shortcut {
        std::string name;
        Overrides o;
        CLI::App* cmd = nullptr;
    };
    std::vector<Shortcut> shortcuts;
    for (const auto& e : qndmle::experiment_names()) shortcuts.push_back({e, {}, nullptr});
    for (auto& s : shortcuts) {
        s.cmd = app.add_subcommand(s.name, "run the " + s.name + " experiment");
        add_common_flags(s.cmd, s.o, false);
    }

    Overrides id_o;
    std::size_t id_points = 50;
    double id_tol = 1e-9;
    CLI::App* id_cmd = app.add_subcommand("check-id", "grid check of identifiability for a preset");
    add_common_flags(id_cmd, id_o, false);
    id_cmd->add_option("--grid-points", id_points, "grid points over the box");
    id_cmd->add_option("--tol", id_tol, "margin below which a pair is flagged");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : qndmle::kExitConfigError;
    }

    try {
        if (*run_cmd) return run_config(resolve(run_o, std::nullopt));
        if (*id_cmd) return check_id(resolve(id_o, std::nullopt), id_points, id_tol);
        for (auto& s : shortcuts)
            if (*s.cmd) return run_config(resolve(s.o, s.name));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return qndmle::exit_code_for(e);
    }
    return qndmle::kExitConfigError;
}
