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

#include "cfp/linalg.hpp"
#include "cfp/rng.hpp"
#include "cfp/scenario.hpp"

#include <cmath>

using Catch::Approx;

TEST_CASE("scenario - noise power and unit conversion")
{
    CHECK(cfp::noise_power_dbm(100e6, 7.0) == Approx(-87.0).margin(1e-12));
    CHECK(cfp::dbm_to_watts(30.0) == Approx(1.0).epsilon(1e-15));
    CHECK(cfp::dbm_to_watts(0.0) == Approx(1e-3).epsilon(1e-15));
    CHECK(cfp::dbm_to_watts(-87.0) == Approx(std::pow(10.0, -11.7)).epsilon(1e-13));
    CHECK(cfp::dbm_to_milliwatts(30.0) == Approx(1000.0).epsilon(1e-15));
}

TEST_CASE("scenario - path loss")
{
    cfp::GeometryConfig cfg;
    CHECK(cfp::pathloss_db(1.0, cfg) == Approx(-34.5).margin(1e-12));
    const double p_noise = cfp::noise_power_dbm(cfg.bandwidth_hz, cfg.noise_figure_db);
    CHECK(cfp::pathloss_db(100.0, cfg) - p_noise == Approx(-18.1).margin(1e-9));
}

TEST_CASE("scenario - cluster assignment")
{
    SECTION("strongest first")
    {
        const arma::mat g = arma::mat{3.0, 1.0, 2.0}.t();
        const auto c = cfp::assign_clusters(g, 2);
        REQUIRE(c.size() == 1);
        CHECK(c[0] == std::vector<arma::uword>{0, 2});
    }
    SECTION("ties resolved by lowest index")
    {
        const arma::mat g = arma::mat{5.0, 5.0, 1.0}.t();
        CHECK(cfp::assign_clusters(g, 1)[0] == std::vector<arma::uword>{0});
    }
    SECTION("Q = L gives the full set")
    {
        const arma::mat g = arma::randu<arma::mat>(4, 3) + 0.1;
        for (const auto &set : cfp::assign_clusters(g, 4))
        {
            std::vector<arma::uword> sorted = set;
            std::sort(sorted.begin(), sorted.end());
            CHECK(sorted == std::vector<arma::uword>{0, 1, 2, 3});
        }
    }
    SECTION("invalid Q")
    {
        const arma::mat g(3, 2, arma::fill::ones);
        CHECK_THROWS_AS(cfp::assign_clusters(g, 0), std::invalid_argument);
        CHECK_THROWS_AS(cfp::assign_clusters(g, 4), std::invalid_argument);
    }
    SECTION("permutation equivariance")
    {
        arma::arma_rng::set_seed(7);
        const arma::mat g = arma::randu<arma::mat>(6, 5);
        const arma::uvec perm = {3, 0, 5, 1, 4, 2}; // new row i holds old AP perm(i)
        const arma::mat gp = g.rows(perm);
        const auto c = cfp::assign_clusters(g, 3);
        const auto cp = cfp::assign_clusters(gp, 3);
        for (std::size_t k = 0; k < c.size(); ++k)
            for (std::size_t i = 0; i < 3; ++i)
                CHECK(perm(cp[k][i]) == c[k][i]);
    }
}

TEST_CASE("scenario - generated drop")
{
    cfp::GeometryConfig cfg;
    cfg.ap_rows = 2;
    cfg.ap_cols = 3;
    cfg.num_ues = 5;
    cfg.antennas_per_ap = 2;
    cfg.cluster_size = 2;
    const auto scn = cfp::generate_scenario(cfg, 11);
    REQUIRE_NOTHROW(scn.validate());
    CHECK(scn.L == 6);
    CHECK(scn.N == 2);
    CHECK(scn.K == 5);
    CHECK(arma::all(scn.power_budget == 1000.0));
    CHECK(arma::all(scn.gamma == cfg.sinr_target));

    // Grid centred in the square.
    CHECK(scn.ap_positions(0, 0) == Approx(cfg.area_side_m / 6.0));
    CHECK(scn.ap_positions(1, 0) == Approx(cfg.area_side_m / 4.0));
    CHECK(scn.ap_positions(0, 5) == Approx(5.0 * cfg.area_side_m / 6.0));
    CHECK(arma::all(arma::vectorise(scn.ue_positions) >= 0.0));
    CHECK(arma::all(arma::vectorise(scn.ue_positions) <= cfg.area_side_m));

    for (arma::uword k = 0; k < scn.K; ++k)
    {
        REQUIRE(scn.clusters[k].size() == 2);
        CHECK(scn.gains(scn.clusters[k][0], k) >= scn.gains(scn.clusters[k][1], k));
        for (arma::uword l = 0; l < scn.L; ++l)
            if (l != scn.clusters[k][0] && l != scn.clusters[k][1])
                CHECK(scn.gains(l, k) <= scn.gains(scn.clusters[k][1], k));
    }

    SECTION("seed reuse is bit-identical")
    {
        const auto again = cfp::generate_scenario(cfg, 11);
        CHECK(arma::approx_equal(scn.gains, again.gains, "absdiff", 0.0));
        CHECK(arma::approx_equal(scn.ue_positions, again.ue_positions, "absdiff", 0.0));
        const auto other = cfp::generate_scenario(cfg, 12);
        CHECK_FALSE(arma::approx_equal(scn.gains, other.gains, "absdiff", 0.0));
    }
    SECTION("json round trip")
    {
        const auto back = cfp::scenario_from_json(nlohmann::json::parse(cfp::to_json(scn).dump()));
        CHECK(arma::approx_equal(scn.gains, back.gains, "absdiff", 0.0));
        CHECK(back.clusters == scn.clusters);
        CHECK(arma::approx_equal(scn.power_budget, back.power_budget, "absdiff", 0.0));
        const auto cfg2 = cfp::geometry_from_json(cfp::to_json(cfg));
        CHECK(cfg2.num_aps() == cfg.num_aps());
        CHECK(cfg2.shadow_std_db == cfg.shadow_std_db);
    }
}

TEST_CASE("scenario - invalid configuration")
{
    cfp::GeometryConfig cfg;
    cfg.cluster_size = 17;
    CHECK_THROWS_AS(cfp::generate_scenario(cfg, 1), std::invalid_argument);
    cfg = {};
    cfg.area_side_m = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.num_ues = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("scenario - shadow covariance stays PSD")
{
    // Coincident UEs make the kernel exactly singular.
    arma::mat pos(2, 4, arma::fill::zeros);
    pos(0, 3) = 1e-9;
    const arma::mat C = cfp::shadow_covariance(pos, 7.82, 13.0);
    CHECK(C(0, 1) == Approx(7.82 * 7.82));
    const arma::mat R = cfp::symmetric_sqrt(C);
    CHECK(arma::norm(R * R - C, "fro") < 1e-9 * arma::norm(C, "fro"));
}

TEST_CASE("scenario - shadow fading correlation matches the kernel")
{
    // One AP, two UEs in a small square; recover Z from the stored gains.
    cfp::GeometryConfig cfg;
    cfg.ap_rows = cfg.ap_cols = 1;
    cfg.num_ues = 2;
    cfg.antennas_per_ap = 1;
    cfg.cluster_size = 1;
    cfg.area_side_m = 40.0;
    const double p_noise = cfp::noise_power_dbm(cfg.bandwidth_hz, cfg.noise_figure_db);
    const double rho2 = cfg.shadow_std_db * cfg.shadow_std_db;

    const int drops = 20000;
    double cross = 0.0, kernel = 0.0, var = 0.0;
    for (int d = 0; d < drops; ++d)
    {
        const auto scn = cfp::generate_scenario(cfg, cfp::derive_seed(99, d));
        double z[2];
        for (arma::uword k = 0; k < 2; ++k)
        {
            const double dx = arma::norm(scn.ue_positions.col(k) - scn.ap_positions.col(0));
            const double dist = std::sqrt(dx * dx + cfg.height_diff_m * cfg.height_diff_m);
            z[k] = 10.0 * std::log10(scn.gains(0, k)) - cfp::pathloss_db(dist, cfg) + p_noise;
        }
        const double delta = arma::norm(scn.ue_positions.col(0) - scn.ue_positions.col(1));
        cross += z[0] * z[1];
        kernel += rho2 * std::exp2(-delta / cfg.shadow_decorr_m);
        var += 0.5 * (z[0] * z[0] + z[1] * z[1]);
    }
    cross /= drops;
    kernel /= drops;
    var /= drops;
    // Standard errors are about 0.6 (cross) and 0.45 (variance).
    CHECK(std::abs(cross - kernel) < 2.5);
    CHECK(std::abs(var - rho2) < 2.5);
}
