// SPDX-License-Identifier: Apache-2.0
//
// cfprecode - joint precoding for cell-free massive MIMO under per-AP constraints
// Copyright (C) 2026 The cfprecode Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <catch2/catch_amalgamated.hpp>

#include "cfp/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using Catch::Approx;

namespace
{

cfp::ExperimentSpec small_spec()
{
    cfp::ExperimentSpec spec;
    spec.geometry.area_side_m = 300.0;
    spec.geometry.ap_rows = 2;
    spec.geometry.ap_cols = 2;
    spec.geometry.antennas_per_ap = 2;
    spec.geometry.num_ues = 3;
    spec.geometry.cluster_size = 2;
    spec.gammas = {cfp::rate_to_gamma(1.0), cfp::rate_to_gamma(3.0)};
    spec.drops = 4;
    spec.samples = 16;
    spec.seed = 77;
    return spec;
}

std::string slurp(const std::filesystem::path &p)
{
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string &name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("cfprecode_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("experiment - rate conversion")
{
    CHECK(cfp::rate_to_gamma(1.0) == 1.0);
    CHECK(cfp::rate_to_gamma(2.0) == 3.0);
    CHECK(cfp::rate_to_gamma(0.0) == 0.0);
    CHECK(cfp::rate_to_gamma(0.5) == Approx(std::sqrt(2.0) - 1.0));
    CHECK_THROWS_AS(cfp::rate_to_gamma(-1.0), std::invalid_argument);
}

TEST_CASE("experiment - result tables")
{
    const std::string header = "gamma,rate,precoder,mode,feasible,drops,excluded,rate_feasible\n";
    cfp::ExperimentResult empty;
    CHECK(cfp::results_csv(empty) == header);

    cfp::ExperimentResult one;
    cfp::CellSummary c;
    c.gamma = 3.0;
    c.rate = 2.0;
    c.precoder = cfp::PrecodingScheme::local;
    c.mode = cfp::PowerMode::sum_power;
    c.feasible = 3;
    c.drops = 5;
    c.excluded = 1;
    one.cells.push_back(c);
    CHECK(cfp::results_csv(one) == header + "3,2,local,sum_power,3,5,1,0.75\n");

    const auto dir = scratch("tables");
    cfp::emit_results(one, dir.string());
    const std::string first_csv = slurp(dir / "results.csv");
    const std::string first_json = slurp(dir / "results.json");
    cfp::emit_results(one, dir.string());
    CHECK(slurp(dir / "results.csv") == first_csv);
    CHECK(slurp(dir / "results.json") == first_json);
    CHECK(nlohmann::json::parse(first_json).at("cells").size() == 1);

    cfp::CellSummary all_excluded;
    all_excluded.drops = all_excluded.excluded = 2;
    CHECK(std::isnan(all_excluded.rate_feasible()));
}

TEST_CASE("experiment - sweep bookkeeping")
{
    const auto spec = small_spec();
    const auto res = cfp::run_experiment(spec);
    REQUIRE(res.cells.size() == spec.gammas.size() * spec.precoders.size() * spec.modes.size());
    CHECK(res.records.size() == res.cells.size() * spec.drops);

    // Every cell of the cross product appears once, in sweep order.
    std::size_t i = 0;
    for (double g : spec.gammas)
        for (auto p : spec.precoders)
            for (auto m : spec.modes)
            {
                const auto &c = res.cells[i++];
                CHECK(c.gamma == g);
                CHECK(c.precoder == p);
                CHECK(c.mode == m);
                CHECK(c.drops == spec.drops);
                CHECK(c.feasible + c.excluded <= c.drops);
                const double r = c.rate_feasible();
                if (!std::isnan(r))
                {
                    CHECK(r >= 0.0);
                    CHECK(r <= 1.0);
                }
            }

    // Per-AP feasibility implies sum-power feasibility for the same drop.
    for (const auto &a : res.records)
        if (a.mode == cfp::PowerMode::per_ap && a.status == cfp::VerdictStatus::feasible)
            for (const auto &b : res.records)
                if (b.mode == cfp::PowerMode::sum_power && b.drop == a.drop && b.gamma_index == a.gamma_index &&
                    b.precoder == a.precoder)
                    CHECK(b.status == cfp::VerdictStatus::feasible);
}

TEST_CASE("experiment - reproducibility")
{
    auto spec = small_spec();
    spec.drops = 3;
    spec.log_trajectories = true;
    const auto a = cfp::run_experiment(spec);
    const auto b = cfp::run_experiment(spec);
    spec.threads = 3;
    const auto c = cfp::run_experiment(spec);
    CHECK(cfp::results_csv(a) == cfp::results_csv(b));
    CHECK(cfp::results_csv(a) == cfp::results_csv(c));
    REQUIRE(a.records.size() == c.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i)
    {
        CHECK(a.records[i].drop == c.records[i].drop);
        CHECK(a.records[i].status == c.records[i].status);
        CHECK(a.records[i].iterations == c.records[i].iterations);
    }
    CHECK(a.trajectories == c.trajectories);
    CHECK_FALSE(a.trajectories.empty());

    spec.seed = 78;
    spec.threads = 1;
    const auto d = cfp::run_experiment(spec);
    CHECK(a.trajectories != d.trajectories);
}

TEST_CASE("experiment - generous budgets")
{
    auto spec = small_spec();
    spec.drops = 1;
    spec.gammas = {0.1};
    spec.geometry.ap_power_dbm = 90.0;
    const auto res = cfp::run_experiment(spec);
    for (const auto &c : res.cells)
        CHECK(c.rate_feasible() == 1.0);
}

TEST_CASE("experiment - configuration")
{
    const auto dir = scratch("config");
    std::filesystem::create_directories(dir);
    const auto path = dir / "exp.json";
    {
        std::ofstream f(path);
        f << R"({"geometry": {"ap_rows": 2, "ap_cols": 2, "num_ues": 4, "antennas_per_ap": 2, "cluster_size": 2},
                 "rates": [1, 2], "precoders": ["centralized", "local"], "modes": ["per_ap"],
                 "drops": 7, "samples": 32, "seed": 5, "ascent": {"alphas": [3.0], "max_iter": 40}})";
    }
    const auto spec = cfp::load_experiment(path.string());
    CHECK(spec.gammas == std::vector<double>{1.0, 3.0});
    CHECK(spec.precoders.size() == 2);
    CHECK(spec.modes == std::vector<cfp::PowerMode>{cfp::PowerMode::per_ap});
    CHECK(spec.drops == 7);
    CHECK(spec.samples == 32);
    CHECK(spec.seed == 5);
    CHECK(spec.geometry.num_aps() == 4);
    CHECK(spec.ascent.alphas == std::vector<double>{3.0});
    CHECK(spec.ascent.max_iter == 40);
    CHECK(spec.ascent.stall_window == 20);

    const auto echo = cfp::experiment_from_json(cfp::to_json(spec));
    CHECK(echo.gammas == spec.gammas);
    CHECK(echo.drops == spec.drops);

    CHECK_THROWS_AS(cfp::experiment_from_json(nlohmann::json::parse(R"({"gammas": [1], "rates": [1]})")),
                    std::invalid_argument);
    CHECK_THROWS_AS(cfp::experiment_from_json(nlohmann::json::parse(R"({"precoders": ["zf"]})")),
                    std::invalid_argument);
    CHECK_THROWS(cfp::load_experiment((dir / "missing.json").string()));

    auto bad = spec;
    bad.drops = 0;
    CHECK_THROWS_AS(cfp::run_experiment(bad), std::invalid_argument);
    bad = spec;
    bad.gammas.clear();
    CHECK_THROWS_AS(cfp::run_experiment(bad), std::invalid_argument);
}
