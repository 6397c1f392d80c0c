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

// Executes a RunConfig: builds the model, fills experiment defaults, runs
// the experiment and writes its artifacts under output_dir. Reports hold no
// timestamps, paths or worker counts, so equal configs give equal bytes.

#pragma once

#include <filesystem>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qndmle/config.hpp"
#include "qndmle/errors.hpp"
#include "qndmle/estimate.hpp"
#include "qndmle/io.hpp"
#include "qndmle/lab.hpp"
#include "qndmle/presets.hpp"
#include "qndmle/quantum.hpp"
#include "qndmle/simulate.hpp"

namespace qndmle {

enum ExitCode : int { kExitOk = 0, kExitExperimentFailed = 1, kExitConfigError = 2, kExitNumericalRefusal = 3 };

/// Exit status for an exception escaping a run.
inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const NumericalRefusal*>(&e) || dynamic_cast<const InferenceError*>(&e)) return kExitNumericalRefusal;
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
        dynamic_cast<const ConstructionError*>(&e) || dynamic_cast<const CapabilityError*>(&e))
        return kExitConfigError;
    return kExitExperimentFailed;
}

struct Model {
    std::string name;
    std::shared_ptr<const ParametricFamily> family;
    std::shared_ptr<const QndSystem> system;  // quantum presets only
    Theta default_theta_star;
    std::size_t first_alpha = 1;              // physical label of component index 0
    std::string default_q = "uniform";
};

inline Model build_model(const RunConfig& cfg) {
    Model m;
    m.name = cfg.model;
    std::optional<ParameterBox> box;
    if (cfg.box) box.emplace(cfg.box->lower, cfg.box->upper);
    try {
        if (cfg.model == "toy_haroche") {
            const double v = cfg.model_options.visibility.value_or(presets::kToyVisibility);
            m.first_alpha = cfg.model_options.alpha_min.value_or(1);
            m.family = std::make_shared<const ParametricFamily>(
                presets::toy_haroche(v, m.first_alpha, box.value_or(presets::toy_box())));
            m.default_theta_star = {presets::kToyThetaStar};
            m.default_q = "poissonlike(3.46)";
        } else if (cfg.model == "toy_haroche_full") {
            m.family = std::make_shared<const ParametricFamily>(presets::toy_haroche_full(box.value_or(presets::toy_full_box())));
            m.default_theta_star = presets::toy_full_truth();
            m.default_q = "poissonlike(3.46)";
        } else if (cfg.model == "qubit_rotation") {
            const std::size_t d = cfg.model_options.d.value_or(3);
            m.system = std::make_shared<const QndSystem>(presets::qubit_rotation_system(d));
            m.family = std::make_shared<const ParametricFamily>(
                as_family(*m.system, box.value_or(presets::qubit_box()), {"0", "1"}, presets::numbered_labels(1, d)));
            m.default_theta_star = {presets::kQubitThetaStar};
        } else {
            throw ConfigError("field 'model': unknown preset '" + cfg.model + "'");
        }
    } catch (const ConstructionError& e) {
        throw ConfigError(std::string("model construction failed: ") + e.what());
    }
    return m;
}

inline MixtureWeights build_weights(const RunConfig& cfg, const Model& m) {
    const std::size_t d = m.family->component_count();
    try {
        if (cfg.q_values) {
            if (cfg.q_values->size() != d)
                throw ConfigError("field 'q': expected " + std::to_string(d) + " weights, got " + std::to_string(cfg.q_values->size()));
            return MixtureWeights(*cfg.q_values);
        }
        const std::string rule = cfg.q_rule.value_or(m.default_q);
        if (rule == "uniform") return MixtureWeights::uniform(d);
        if (auto rate = parse_poissonlike(rule)) return MixtureWeights::poissonlike(*rate, m.first_alpha, d);
        throw ConfigError("field 'q': unknown rule '" + rule + "'");
    } catch (const ConstructionError& e) {
        throw ConfigError(std::string("field 'q': ") + e.what());
    }
}

struct ExperimentDefaults {
    std::vector<std::size_t> n_grid;
    std::size_t n_reps;
    double h;
};

inline ExperimentDefaults experiment_defaults(const std::string& experiment) {
    if (experiment == "estimate") return {{10000}, 2, 0.0};  // n_reps unused
    if (experiment == "lamn") return {{1000, 5000, 10000}, 2000, 1.0};
    if (experiment == "collapse") return {{250, 500, 1000, 2000}, 200, 1.0};
    if (experiment == "consistency") return {{1000, 5000, 10000}, 200, 0.0};
    if (experiment == "cramer-rao") return {{10000}, 2000, 0.0};
    if (experiment == "purify") return {{100, 250, 500}, 5000, 0.0};
    if (experiment == "fig1") return {{10000}, 10, 0.0};
    throw ConfigError("field 'experiment': unknown experiment '" + experiment + "'");
}

inline ExperimentPlan build_plan(const RunConfig& cfg, const Model& m) {
    const ParametricFamily& fam = *m.family;
    const ExperimentDefaults def = experiment_defaults(cfg.experiment);
    ExperimentPlan plan;
    plan.theta_star = cfg.theta_star.value_or(m.default_theta_star);
    if (plan.theta_star.size() != fam.dimension())
        throw ConfigError("field 'theta_star': expected " + std::to_string(fam.dimension()) + " coordinates");
    plan.q = build_weights(cfg, m);
    if (cfg.h) {
        if (cfg.h->size() == 1 && fam.dimension() > 1) plan.h.assign(fam.dimension(), cfg.h->front());
        else plan.h = *cfg.h;
        if (plan.h.size() != fam.dimension()) throw ConfigError("field 'h': expected " + std::to_string(fam.dimension()) + " coordinates");
    } else {
        plan.h.assign(fam.dimension(), def.h);
    }
    plan.n_grid = cfg.n_grid.value_or(def.n_grid);
    plan.n_reps = cfg.n_reps.value_or(def.n_reps);
    plan.seed = cfg.seed;
    plan.workers = cfg.workers;
    for (const auto& label : cfg.components) {
        const auto& labels = fam.components().labels();
        const auto it = std::find(labels.begin(), labels.end(), label);
        if (it == labels.end()) throw ConfigError("field 'components': unknown component '" + label + "'");
        plan.components.push_back(static_cast<std::size_t>(it - labels.begin()));
    }
    try {
        validate_plan(fam, plan, cfg.experiment != "purify" && cfg.experiment != "estimate");
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    return plan;
}

struct RunOutcome {
    int exit_code = kExitOk;
    bool passed = true;
    std::vector<std::filesystem::path> files;
    Json report;
};

namespace detail {

inline Json model_json(const RunConfig& cfg, const Model& m) {
    Json j;
    j["name"] = m.name;
    if (cfg.model_options.visibility) j["visibility"] = *cfg.model_options.visibility;
    if (cfg.model_options.alpha_min) j["alpha_min"] = *cfg.model_options.alpha_min;
    if (cfg.model_options.d) j["d"] = *cfg.model_options.d;
    j["box"] = {{"lower", m.family->box().lower()}, {"upper", m.family->box().upper()}};
    j["outcomes"] = m.family->outcome_count();
    j["components"] = m.family->components().labels();
    return j;
}

class ArtifactWriter {
  public:
    explicit ArtifactWriter(std::filesystem::path dir, RunOutcome& out) : dir_(std::move(dir)), out_(out) {}
    void text(const std::string& name, const std::string& content) {
        const auto path = dir_ / name;
        write_text_file(path, content);
        out_.files.push_back(path);
    }
    void json(const std::string& name, const Json& j) { text(name, dump_json(j)); }

  private:
    std::filesystem::path dir_;
    RunOutcome& out_;
};

}  // namespace detail

inline RunOutcome run(const RunConfig& cfg) {
    const Model model = build_model(cfg);
    const ParametricFamily& fam = *model.family;
    const ExperimentPlan plan = build_plan(cfg, model);

    RunOutcome out;
    detail::ArtifactWriter write(cfg.output_dir, out);
    Json report;
    report["tool"] = "qndmle";
    report["schema_version"] = kSchemaVersion;
    report["experiment"] = cfg.experiment;
    report["model"] = detail::model_json(cfg, model);
    report["plan"] = plan_json(fam, plan);

    bool passed = true;
    std::string report_name = cfg.experiment + "_report.json";
    if (cfg.experiment == "estimate") {
        Trajectory traj;
        if (cfg.trajectory_file) {
            try {
                traj = trajectory_from_json(Json::parse(read_text_file(*cfg.trajectory_file)));
            } catch (const std::exception& e) {
                throw ConfigError("field 'trajectory_file': " + std::string(e.what()));
            }
        } else {
            traj = sample_mixture_trajectory(fam, plan.theta_star, plan.q, plan.n_grid.back(),
                                             derive_seed(plan.seed, {static_cast<std::uint64_t>(0)}));
            write.json("trajectory.json", trajectory_to_json(traj));
        }
        const CountVector c = counts(traj, traj.size(), fam);
        if (c.n < 1) throw ConfigError("estimate: the record is empty");
        const EstimationReport e = mle(fam, plan.q, c);
        Json r = to_json(e, fam);
        r["record_component"] = fam.components().label(traj.gamma);
        report["result"] = r;
        write.text("estimate_trace.csv", trace_csv(e, fam.dimension()));
        passed = e.converged;
    } else if (cfg.experiment == "lamn") {
        const LamnReport r = lamn_experiment(fam, plan);
        report["result"] = to_json(r, fam);
        write.text("lamn_samples.csv", lamn_samples_csv(r, fam));
        passed = r.passed;
    } else if (cfg.experiment == "collapse") {
        const CollapseReport r = mixture_collapse_experiment(fam, plan);
        report["result"] = to_json(r, fam);
        passed = r.passed;
    } else if (cfg.experiment == "consistency") {
        const ConsistencyReport r = consistency_experiment(fam, plan);
        report["result"] = to_json(r);
        write.text("consistency_errors.csv", consistency_errors_csv(r, fam, plan.n_grid));
        passed = r.passed;
    } else if (cfg.experiment == "cramer-rao") {
        const CramerRaoReport r = cramer_rao_experiment(fam, plan);
        report["result"] = to_json(r, fam);
        write.text("cramer_rao_samples.csv", cramer_rao_samples_csv(r, fam));
        report_name = "cramer_rao_report.json";
        passed = r.passed;
    } else if (cfg.experiment == "purify") {
        const PurificationReport r = purification_experiment(fam, plan, model.system.get());
        report["result"] = to_json(r, fam);
        passed = r.passed;
    } else if (cfg.experiment == "fig1") {
        const Fig1Report r = fig1_experiment(fam, plan, plan.n_reps, plan.n_grid.back());
        for (std::size_t i = 0; i < r.paths.size(); ++i) write.text("fig1_run_" + std::to_string(i) + ".csv", fig1_csv(r.paths[i]));
        report["result"] = to_json(r, fam);
        report_name = "fig1_summary.json";
        passed = r.passed;
    } else {
        throw ConfigError("field 'experiment': unknown experiment '" + cfg.experiment + "'");
    }
    report["passed"] = passed;
    write.json(report_name, report);
    out.report = std::move(report);
    out.passed = passed;
    out.exit_code = passed ? kExitOk : kExitExperimentFailed;
    return out;
}

}  // namespace qndmle
