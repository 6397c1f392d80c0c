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

#include <gtest/gtest.h>

#include <filesystem>
#include <numbers>
#include <string>

#include "qndmle/qndmle.hpp"

namespace {

using namespace qndmle;

std::string config_error(const std::string& text) {
    try {
        parse_config(text, "exp.json");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

TEST(ParseConfig, Defaults) {
    const RunConfig c = parse_config(R"({"schema_version": 1})");
    EXPECT_EQ(c.model, "toy_haroche");
    EXPECT_EQ(c.experiment, "estimate");
    EXPECT_EQ(c.seed, 0u);
    EXPECT_EQ(c.workers, 1u);
    EXPECT_FALSE(c.box.has_value());
}

TEST(ParseConfig, FullDocument) {
    const RunConfig c = parse_config(R"({
        "schema_version": 1,
        "model": "qubit_rotation",
        "model_options": {"d": 4},
        "box": [0.4, 1.0],
        "theta_star": 0.75,
        "q": [0.1, 0.2, 0.3, 0.4],
        "experiment": "cramer-rao",
        "n_grid": [100, 100, 500],
        "n_reps": 30,
        "h": [0.5],
        "components": ["2", 3],
        "seed": 18446744073709551615,
        "workers": 0,
        "output_dir": "out/cr"
    })");
    EXPECT_EQ(c.model, "qubit_rotation");
    EXPECT_EQ(c.model_options.d, 4u);
    EXPECT_EQ(c.box->lower, std::vector<double>{0.4});
    EXPECT_EQ(*c.theta_star, std::vector<double>{0.75});
    EXPECT_EQ(c.q_values->size(), 4u);
    EXPECT_EQ(*c.n_grid, (std::vector<std::size_t>{100, 100, 500}));
    EXPECT_EQ(c.components, (std::vector<std::string>{"2", "3"}));
    EXPECT_EQ(c.seed, 18446744073709551615ull);
    EXPECT_EQ(c.workers, 0u);
}

TEST(ParseConfig, SyntaxErrorHasLineAndColumn) {
    const std::string msg = config_error("{\n  \"schema_version\": 1,\n  \"seed\": ]\n}");
    EXPECT_EQ(msg.rfind("exp.json:3:", 0), 0u) << msg;
    EXPECT_NE(msg.find("syntax error"), std::string::npos);
}

TEST(ParseConfig, FieldErrorsNameTheField) {
    EXPECT_NE(config_error(R"({"schema_version": 1, "sead": 3})").find("'sead': unknown field"), std::string::npos);
    EXPECT_NE(config_error(R"({"seed": 3})").find("'schema_version': missing"), std::string::npos);
    EXPECT_NE(config_error(R"({"schema_version": 2})").find("'schema_version'"), std::string::npos);
    EXPECT_NE(config_error(R"({"schema_version": 1, "model": "ising"})").find("'model'"), std::string::npos);
    EXPECT_NE(config_error(R"({"schema_version": 1, "experiment": "lan"})").find("'experiment'"), std::string::npos);
    EXPECT_NE(config_error(R"({"schema_version": 1, "n_grid": [10, 5]})").find("non-decreasing"), std::string::npos);
    EXPECT_NE(config_error(R"({"schema_version": 1, "n_reps": 0})").find("'n_reps'"), std::string::npos);
    EXPECT_NE(config_error(R"({"schema_version": 1, "seed": -1})").find("'seed'"), std::string::npos);
    EXPECT_NE(config_error(R"({"schema_version": 1, "model_options": {"vis": 1}})").find("model_options.vis"), std::string::npos);
    EXPECT_NE(config_error("[1, 2]").find("top level"), std::string::npos);
}

TEST(ParseConfig, MixingRules) {
    EXPECT_EQ(parse_config(R"({"schema_version": 1, "q": "uniform"})").q_rule, "uniform");
    EXPECT_EQ(parse_config(R"j({"schema_version": 1, "q": "poissonlike(2.5)"})j").q_rule, "poissonlike(2.5)");
    EXPECT_EQ(parse_poissonlike("poissonlike(2.5)"), 2.5);
    EXPECT_FALSE(parse_poissonlike("poissonlike(2.5x)").has_value());
    EXPECT_FALSE(parse_poissonlike("poissonlike2.5").has_value());
    EXPECT_NE(config_error(R"({"schema_version": 1, "q": "geometric"})").find("'q'"), std::string::npos);
}

TEST(ParseConfig, Boxes) {
    const RunConfig c = parse_config(R"({"schema_version": 1, "box": {"lower": [0, 1], "upper": [1, 2]}})");
    EXPECT_EQ(c.box->upper, (std::vector<double>{1, 2}));
    EXPECT_NE(config_error(R"({"schema_version": 1, "box": [1, 0]})").find("lower < upper"), std::string::npos);
    EXPECT_NE(config_error(R"({"schema_version": 1, "box": {"lower": [0], "upper": [1, 2]}})").find("dimension"),
              std::string::npos);
    EXPECT_NE(config_error(R"({"schema_version": 1, "box": [0, 1, 2]})").find("'box'"), std::string::npos);
}

TEST(BuildPlan, ToyDefaults) {
    RunConfig c = parse_config(R"({"schema_version": 1, "experiment": "lamn"})");
    const Model m = build_model(c);
    const ExperimentPlan p = build_plan(c, m);
    EXPECT_NEAR(p.theta_star[0], std::numbers::pi / 4, 1e-15);
    EXPECT_EQ(p.n_grid, (std::vector<std::size_t>{1000, 5000, 10000}));
    EXPECT_EQ(p.n_reps, 2000u);
    EXPECT_EQ(p.h, Theta{1.0});
    EXPECT_NEAR(p.q[2], presets::toy_weights()[2], 1e-15);
}

TEST(BuildPlan, RejectsInconsistentInputs) {
    auto fails = [](const std::string& text) {
        const RunConfig c = parse_config(text);
        EXPECT_THROW(build_plan(c, build_model(c)), ConfigError) << text;
    };
    fails(R"({"schema_version": 1, "q": [0.5, 0.5]})");
    fails(R"({"schema_version": 1, "theta_star": [0.7, 0.7]})");
    fails(R"({"schema_version": 1, "theta_star": 2.0})");
    fails(R"({"schema_version": 1, "components": ["9"]})");
    fails(R"({"schema_version": 1, "experiment": "lamn", "theta_star": 0.39269908169872414})");
    const RunConfig bad = parse_config(R"({"schema_version": 1, "model_options": {"visibility": 1.5}})");
    EXPECT_THROW(build_model(bad), ConfigError);
}

TEST(BuildPlan, ComponentLabelsFollowAlpha) {
    const RunConfig c = parse_config(R"({"schema_version": 1, "experiment": "lamn", "components": ["4", 7]})");
    EXPECT_EQ(build_plan(c, build_model(c)).components, (std::vector<std::size_t>{3, 6}));
}

TEST(Run, EstimateWritesArtifacts) {
    const auto dir = std::filesystem::temp_directory_path() / "qndmle_config_run";
    std::filesystem::remove_all(dir);
    RunConfig c = parse_config(R"({"schema_version": 1, "n_grid": [2000], "seed": 5})");
    c.output_dir = dir.string();
    const RunOutcome out = run(c);
    EXPECT_EQ(out.exit_code, kExitOk);
    EXPECT_TRUE(std::filesystem::exists(dir / "estimate_report.json"));
    EXPECT_TRUE(std::filesystem::exists(dir / "trajectory.json"));
    EXPECT_TRUE(std::filesystem::exists(dir / "estimate_trace.csv"));
    EXPECT_EQ(out.report["plan"]["seed"], 5);

    RunConfig again = c;
    again.trajectory_file = (dir / "trajectory.json").string();
    again.output_dir = (dir / "replay").string();
    const RunOutcome replay = run(again);
    EXPECT_EQ(replay.report["result"]["theta_hat"], out.report["result"]["theta_hat"]);
    std::filesystem::remove_all(dir);
}

}  // namespace
