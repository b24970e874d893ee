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

#include "cfp/scenario.hpp"

#include "cfp/json_io.hpp"
#include "cfp/linalg.hpp"
#include "cfp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cfp
{

void GeometryConfig::validate() const
{
    auto positive = [](double x, const char *name)
    {
        if (!(x > 0.0) || !std::isfinite(x))
            throw std::invalid_argument(std::string("GeometryConfig: ") + name + " must be positive and finite");
    };
    positive(area_side_m, "area_side_m");
    positive(height_diff_m, "height_diff_m");
    positive(shadow_decorr_m, "shadow_decorr_m");
    positive(bandwidth_hz, "bandwidth_hz");
    positive(sinr_target, "sinr_target");
    if (!(shadow_std_db >= 0.0) || !std::isfinite(shadow_std_db))
        throw std::invalid_argument("GeometryConfig: shadow_std_db must be nonnegative");
    if (!std::isfinite(pathloss_slope_db) || !std::isfinite(pathloss_offset_db) ||
        !std::isfinite(noise_figure_db) || !std::isfinite(ap_power_dbm))
        throw std::invalid_argument("GeometryConfig: non-finite propagation constant");
    if (ap_rows == 0 || ap_cols == 0 || antennas_per_ap == 0 || num_ues == 0 || cluster_size == 0)
        throw std::invalid_argument("GeometryConfig: counts must be positive");
    if (cluster_size > num_aps())
        throw std::invalid_argument("GeometryConfig: cluster_size exceeds number of APs");
}

void NetworkScenario::validate() const
{
    if (L == 0 || N == 0 || K == 0)
        throw std::invalid_argument("NetworkScenario: empty dimensions");
    if (power_budget.n_elem != L || gamma.n_elem != K || clusters.size() != K)
        throw std::invalid_argument("NetworkScenario: inconsistent vector sizes");
    if (gains.n_rows != L || gains.n_cols != K)
        throw std::invalid_argument("NetworkScenario: gains must be L x K");
    if (!power_budget.is_finite() || arma::any(power_budget <= 0.0))
        throw std::invalid_argument("NetworkScenario: power budgets must be positive");
    if (!gamma.is_finite() || arma::any(gamma <= 0.0))
        throw std::invalid_argument("NetworkScenario: SINR targets must be positive");
    if (!gains.is_finite() || arma::any(arma::vectorise(gains) <= 0.0))
        throw std::invalid_argument("NetworkScenario: gains must be positive and finite");
    for (const auto &set : clusters)
    {
        if (set.empty())
            throw std::invalid_argument("NetworkScenario: empty cluster");
        std::vector<arma::uword> sorted = set;
        std::sort(sorted.begin(), sorted.end());
        if (sorted.back() >= L || std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("NetworkScenario: invalid cluster member");
    }
}

double noise_power_dbm(double bandwidth_hz, double noise_figure_db)
{
    return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

double dbm_to_watts(double dbm)
{
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

double dbm_to_milliwatts(double dbm)
{
    return std::pow(10.0, dbm / 10.0);
}

double pathloss_db(double distance_m, const GeometryConfig &cfg)
{
    return -cfg.pathloss_slope_db * std::log10(distance_m) - cfg.pathloss_offset_db;
}

arma::mat shadow_covariance(const arma::mat &ue_positions, double std_db, double decorr_m)
{
    const arma::uword K = ue_positions.n_cols;
    arma::mat C(K, K);
    for (arma::uword k = 0; k < K; ++k)
        for (arma::uword i = 0; i < K; ++i)
        {
            const double delta = arma::norm(ue_positions.col(k) - ue_positions.col(i));
            C(k, i) = std_db * std_db * std::exp2(-delta / decorr_m);
        }
    return C;
}

Clusters assign_clusters(const arma::mat &gains, arma::uword Q)
{
    const arma::uword L = gains.n_rows;
    if (Q == 0 || Q > L)
        throw std::invalid_argument("assign_clusters: need 1 <= Q <= L");
    Clusters clusters(gains.n_cols);
    for (arma::uword k = 0; k < gains.n_cols; ++k)
    {
        std::vector<arma::uword> order(L);
        std::iota(order.begin(), order.end(), arma::uword(0));
        // stable sort keeps the lower AP index first on ties
        std::stable_sort(order.begin(), order.end(),
                         [&](arma::uword a, arma::uword b) { return gains(a, k) > gains(b, k); });
        clusters[k].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(Q));
    }
    return clusters;
}

NetworkScenario generate_scenario(const GeometryConfig &cfg, std::uint64_t seed)
{
    cfg.validate();
    Rng rng(seed);

    NetworkScenario scn;
    scn.L = cfg.num_aps();
    scn.N = cfg.antennas_per_ap;
    scn.K = cfg.num_ues;

    scn.ap_positions.set_size(2, scn.L);
    for (arma::uword r = 0; r < cfg.ap_rows; ++r)
        for (arma::uword c = 0; c < cfg.ap_cols; ++c)
        {
            const arma::uword l = r * cfg.ap_cols + c;
            scn.ap_positions(0, l) = (double(c) + 0.5) * cfg.area_side_m / double(cfg.ap_cols);
            scn.ap_positions(1, l) = (double(r) + 0.5) * cfg.area_side_m / double(cfg.ap_rows);
        }

    scn.ue_positions.set_size(2, scn.K);
    for (arma::uword k = 0; k < scn.K; ++k)
    {
        scn.ue_positions(0, k) = rng.uniform(0.0, cfg.area_side_m);
        scn.ue_positions(1, k) = rng.uniform(0.0, cfg.area_side_m);
    }

    // Shadowing is correlated across UEs seen by one AP, independent across APs.
    const arma::mat shadow_root =
        symmetric_sqrt(shadow_covariance(scn.ue_positions, cfg.shadow_std_db, cfg.shadow_decorr_m));
    const double noise_dbm = noise_power_dbm(cfg.bandwidth_hz, cfg.noise_figure_db);

    scn.gains.set_size(scn.L, scn.K);
    arma::vec white(scn.K);
    for (arma::uword l = 0; l < scn.L; ++l)
    {
        for (arma::uword k = 0; k < scn.K; ++k)
            white(k) = rng.normal();
        const arma::vec shadow = shadow_root * white;
        for (arma::uword k = 0; k < scn.K; ++k)
        {
            const double dx = scn.ap_positions(0, l) - scn.ue_positions(0, k);
            const double dy = scn.ap_positions(1, l) - scn.ue_positions(1, k);
            const double distance = std::sqrt(dx * dx + dy * dy + cfg.height_diff_m * cfg.height_diff_m);
            const double gain_db = pathloss_db(distance, cfg) + shadow(k) - noise_dbm;
            scn.gains(l, k) = std::pow(10.0, gain_db / 10.0);
        }
    }

    scn.clusters = assign_clusters(scn.gains, cfg.cluster_size);
    scn.power_budget = arma::vec(scn.L, arma::fill::value(dbm_to_milliwatts(cfg.ap_power_dbm)));
    scn.gamma = arma::vec(scn.K, arma::fill::value(cfg.sinr_target));
    scn.validate();
    return scn;
}

nlohmann::json to_json(const GeometryConfig &cfg)
{
    return {
        {"area_side_m", cfg.area_side_m},
        {"ap_rows", cfg.ap_rows},
        {"ap_cols", cfg.ap_cols},
        {"antennas_per_ap", cfg.antennas_per_ap},
        {"num_ues", cfg.num_ues},
        {"height_diff_m", cfg.height_diff_m},
        {"pathloss_slope_db", cfg.pathloss_slope_db},
        {"pathloss_offset_db", cfg.pathloss_offset_db},
        {"shadow_std_db", cfg.shadow_std_db},
        {"shadow_decorr_m", cfg.shadow_decorr_m},
        {"bandwidth_hz", cfg.bandwidth_hz},
        {"noise_figure_db", cfg.noise_figure_db},
        {"cluster_size", cfg.cluster_size},
        {"ap_power_dbm", cfg.ap_power_dbm},
        {"sinr_target", cfg.sinr_target},
    };
}

GeometryConfig geometry_from_json(const nlohmann::json &j)
{
    GeometryConfig cfg;
    cfg.area_side_m = j.value("area_side_m", cfg.area_side_m);
    cfg.ap_rows = j.value("ap_rows", cfg.ap_rows);
    cfg.ap_cols = j.value("ap_cols", cfg.ap_cols);
    cfg.antennas_per_ap = j.value("antennas_per_ap", cfg.antennas_per_ap);
    cfg.num_ues = j.value("num_ues", cfg.num_ues);
    cfg.height_diff_m = j.value("height_diff_m", cfg.height_diff_m);
    cfg.pathloss_slope_db = j.value("pathloss_slope_db", cfg.pathloss_slope_db);
    cfg.pathloss_offset_db = j.value("pathloss_offset_db", cfg.pathloss_offset_db);
    cfg.shadow_std_db = j.value("shadow_std_db", cfg.shadow_std_db);
    cfg.shadow_decorr_m = j.value("shadow_decorr_m", cfg.shadow_decorr_m);
    cfg.bandwidth_hz = j.value("bandwidth_hz", cfg.bandwidth_hz);
    cfg.noise_figure_db = j.value("noise_figure_db", cfg.noise_figure_db);
    cfg.cluster_size = j.value("cluster_size", cfg.cluster_size);
    cfg.ap_power_dbm = j.value("ap_power_dbm", cfg.ap_power_dbm);
    cfg.sinr_target = j.value("sinr_target", cfg.sinr_target);
    cfg.validate();
    return cfg;
}

nlohmann::json to_json(const NetworkScenario &scn)
{
    return {
        {"L", scn.L},
        {"N", scn.N},
        {"K", scn.K},
        {"power_budget", io::to_json(scn.power_budget)},
        {"gamma", io::to_json(scn.gamma)},
        {"clusters", io::to_json(scn.clusters)},
        {"gains", io::to_json(scn.gains)},
        {"ap_positions", io::to_json(scn.ap_positions)},
        {"ue_positions", io::to_json(scn.ue_positions)},
    };
}

NetworkScenario scenario_from_json(const nlohmann::json &j)
{
    NetworkScenario scn;
    scn.L = j.at("L").get<arma::uword>();
    scn.N = j.at("N").get<arma::uword>();
    scn.K = j.at("K").get<arma::uword>();
    scn.power_budget = io::vec_from_json(j.at("power_budget"));
    scn.gamma = io::vec_from_json(j.at("gamma"));
    scn.clusters = io::sets_from_json(j.at("clusters"));
    scn.gains = io::mat_from_json(j.at("gains"));
    if (j.contains("ap_positions"))
        scn.ap_positions = io::mat_from_json(j.at("ap_positions"));
    if (j.contains("ue_positions"))
        scn.ue_positions = io::mat_from_json(j.at("ue_positions"));
    scn.validate();
    return scn;
}

} // namespace cfp
