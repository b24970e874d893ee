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

#ifndef CFP_SCENARIO_HPP
#define CFP_SCENARIO_HPP

#include <armadillo>
#include <json.hpp>

#include <cstdint>
#include <vector>

namespace cfp
{

// Serving AP set L_k for every UE k, members ordered by decreasing gain.
using Clusters = std::vector<std::vector<arma::uword>>;

// Deployment and propagation parameters. Defaults reproduce the urban
// microcell setup at 3.7 GHz: 16 APs with 4 antennas on a 1 km square,
// 16 UEs, each served by its 4 strongest APs.
struct GeometryConfig
{
    double area_side_m = 1000.0;
    arma::uword ap_rows = 4; // APs form an ap_rows x ap_cols grid
    arma::uword ap_cols = 4;
    arma::uword antennas_per_ap = 4;
    arma::uword num_ues = 16;
    double height_diff_m = 10.0;
    double pathloss_slope_db = 35.3; // dB per decade of distance
    double pathloss_offset_db = 34.5;
    double shadow_std_db = 7.82;
    double shadow_decorr_m = 13.0; // correlation halves every shadow_decorr_m
    double bandwidth_hz = 100e6;
    double noise_figure_db = 7.0;
    arma::uword cluster_size = 4;
    double ap_power_dbm = 30.0;
    double sinr_target = 1.0;

    arma::uword num_aps() const { return ap_rows * ap_cols; }

    // Throws std::invalid_argument on nonpositive lengths/counts or Q > L.
    void validate() const;
};

struct NetworkScenario
{
    arma::uword L = 0; // APs
    arma::uword N = 0; // antennas per AP
    arma::uword K = 0; // UEs
    arma::vec power_budget; // P_l, linear, in the unit the gains are normalized to (mW)
    arma::vec gamma;        // SINR targets
    Clusters clusters;
    arma::mat gains;        // L x K, noise-normalized linear channel gains
    arma::mat ap_positions; // 2 x L, metres
    arma::mat ue_positions; // 2 x K, metres

    void validate() const;
};

// Thermal noise power in dBm: -174 + 10 log10(B) + F.
double noise_power_dbm(double bandwidth_hz, double noise_figure_db);

double dbm_to_watts(double dbm);
double dbm_to_milliwatts(double dbm);

// Distance-dependent part of the gain in dB (no shadowing, no noise).
double pathloss_db(double distance_m, const GeometryConfig &cfg);

// Shadow-fading covariance between UEs at the same AP (dB^2).
arma::mat shadow_covariance(const arma::mat &ue_positions, double std_db, double decorr_m);

Clusters assign_clusters(const arma::mat &gains, arma::uword Q);

NetworkScenario generate_scenario(const GeometryConfig &cfg, std::uint64_t seed);

nlohmann::json to_json(const GeometryConfig &cfg);
GeometryConfig geometry_from_json(const nlohmann::json &j);

nlohmann::json to_json(const NetworkScenario &scn);
NetworkScenario scenario_from_json(const nlohmann::json &j);

} // namespace cfp

#endif
