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

#ifndef CFP_EXPERIMENT_HPP
#define CFP_EXPERIMENT_HPP

#include "cfp/duality.hpp"
#include "cfp/scenario.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace cfp
{

enum class PowerMode
{
    per_ap,
    sum_power
};

const char *to_string(PowerMode m);
PowerMode power_mode_from_string(const std::string &name);

// gamma = 2^R - 1
double rate_to_gamma(double rate);

struct ExperimentSpec
{
    GeometryConfig geometry;
    std::vector<double> gammas;
    std::vector<PrecodingScheme> precoders = {PrecodingScheme::centralized, PrecodingScheme::local,
                                              PrecodingScheme::local_scalar};
    std::vector<PowerMode> modes = {PowerMode::per_ap, PowerMode::sum_power};
    arma::uword drops = 1;
    arma::uword samples = 64;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    bool log_trajectories = false;
    AscentOptions ascent;

    void validate() const;
};

// Outcome of one (drop, gamma, precoder, mode) evaluation.
struct DropRecord
{
    arma::uword drop = 0;
    arma::uword gamma_index = 0;
    PrecodingScheme precoder = PrecodingScheme::centralized;
    PowerMode mode = PowerMode::per_ap;
    VerdictStatus status = VerdictStatus::inconclusive;
    arma::uword iterations = 0;
    arma::uword restarts = 0;
    bool ill_conditioned = false;
    double wall_seconds = 0.0;
};

struct CellSummary
{
    double gamma = 0.0;
    double rate = 0.0;
    PrecodingScheme precoder = PrecodingScheme::centralized;
    PowerMode mode = PowerMode::per_ap;
    arma::uword feasible = 0;
    arma::uword drops = 0;
    arma::uword excluded = 0; // inconclusive drops, left out of the rate
    double mean_iterations = 0.0;
    double wall_seconds = 0.0;

    // feasible / (drops - excluded); NaN when every drop was excluded.
    double rate_feasible() const;
};

struct ExperimentResult
{
    std::vector<CellSummary> cells;   // gamma-major, then precoder, then mode
    std::vector<DropRecord> records;  // sorted by drop, then cell order
    std::vector<std::string> trajectories; // JSON lines, drop order
    nlohmann::json spec;              // echo of the spec that produced the result
};

ExperimentResult run_experiment(const ExperimentSpec &spec);

// Writes <dir>/results.csv and <dir>/results.json (and <dir>/trajectories.jsonl when present).
void emit_results(const ExperimentResult &res, const std::string &dir);

std::string results_csv(const ExperimentResult &res);
nlohmann::json results_json(const ExperimentResult &res);

nlohmann::json to_json(const ExperimentSpec &spec);
ExperimentSpec experiment_from_json(const nlohmann::json &j);
ExperimentSpec load_experiment(const std::string &path);

} // namespace cfp

#endif
