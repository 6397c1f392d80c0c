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
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "qndmle/qndmle.hpp"

namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
  protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("qndmle_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    int cli(const std::string& args, const std::string& log = "log.txt") {
        const std::string cmd = std::string(QNDMLE_CLI_PATH) + " " + args + " > " + (dir_ / log).string() + " 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string read(const fs::path& p) const {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    fs::path write(const std::string& name, const std::string& text) const {
        std::ofstream(dir_ / name) << text;
        return dir_ / name;
    }

    fs::path dir_;
};

TEST_F(Cli, MalformedConfigExitsTwo) {
    const auto cfg = write("bad.json", "{\n \"schema_version\": 1,\n \"seed\": }");
    EXPECT_EQ(cli("run --config " + cfg.string()), 2);
    EXPECT_NE(read(dir_ / "log.txt").find("bad.json:3:"), std::string::npos) << read(dir_ / "log.txt");
}

TEST_F(Cli, UnknownFlagExitsTwo) { EXPECT_EQ(cli("lamn --no-such-flag"), 2); }

TEST_F(Cli, DomainErrorExitsTwo) { EXPECT_EQ(cli("lamn --theta-star 5 --out " + dir_.string()), 2); }

TEST_F(Cli, SingularFisherExitsThree) {
    const auto cfg = write("cr.json", R"({"schema_version": 1, "experiment": "cramer-rao",
        "model_options": {"alpha_min": 0}, "n_grid": [100], "n_reps": 10})");
    EXPECT_EQ(cli("run --config " + cfg.string() + " --out " + (dir_ / "out").string()), 3);
}

TEST_F(Cli, Fig1WritesTenPaths) {
    const auto out = dir_ / "fig1";
    const int code = cli("run --preset toy_haroche --experiment fig1 --seed 7 --n-grid 2000 --out " + out.string());
    EXPECT_TRUE(code == 0 || code == 1) << read(dir_ / "log.txt");
    for (int i = 0; i < 10; ++i) EXPECT_TRUE(fs::exists(out / ("fig1_run_" + std::to_string(i) + ".csv"))) << i;
    const auto summary = qndmle::Json::parse(read(out / "fig1_summary.json"));
    EXPECT_EQ(summary["result"]["paths"].size(), 10u);
    EXPECT_EQ(code == 0, summary["passed"].get<bool>());
}

TEST_F(Cli, RerunsAreByteIdentical) {
    const std::string args = "consistency --n-grid 200,400 --n-reps 20 --seed 3 --workers ";
    cli(args + "1 --out " + (dir_ / "a").string());
    cli(args + "3 --out " + (dir_ / "b").string());
    std::size_t compared = 0;
    for (const auto& e : fs::directory_iterator(dir_ / "a")) {
        EXPECT_EQ(read(e.path()), read(dir_ / "b" / e.path().filename())) << e.path().filename();
        ++compared;
    }
    EXPECT_EQ(compared, 2u);
}

TEST_F(Cli, FlagsOverrideConfig) {
    const auto cfg = write("est.json", R"({"schema_version": 1, "n_grid": [500], "seed": 1})");
    EXPECT_EQ(cli("run --config " + cfg.string() + " --seed 9 --out " + (dir_ / "o").string()), 0);
    const auto rep = qndmle::Json::parse(read(dir_ / "o" / "estimate_report.json"));
    EXPECT_EQ(rep["plan"]["seed"], 9);
    EXPECT_EQ(rep["plan"]["n_grid"], qndmle::Json::array({500}));
}

TEST_F(Cli, CheckIdReportsAliases) {
    EXPECT_EQ(cli("check-id --preset toy_haroche --grid-points 50", "full.json"), 1);
    const auto full = qndmle::Json::parse(read(dir_ / "full.json"));
    EXPECT_FALSE(full["passed"].get<bool>());
    EXPECT_LT(full["min_margin"].get<double>(), 1e-12);
    EXPECT_EQ(cli("check-id --preset toy_haroche --box 0.7068583470577035,0.8639379797371932", "near.json"), 0);
    EXPECT_GT(qndmle::Json::parse(read(dir_ / "near.json"))["min_margin"].get<double>(), 1e-4);
}

}  // namespace
