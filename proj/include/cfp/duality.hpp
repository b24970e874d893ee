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

#ifndef CFP_DUALITY_HPP
#define CFP_DUALITY_HPP

#include "cfp/channel.hpp"
#include "cfp/metrics.hpp"
#include "cfp/precoders.hpp"

#include <armadillo>
#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace cfp
{

enum class PrecodingScheme
{
    full,        // perfect CSI shared by every AP, no clustering
    centralized, // cluster MMSE on shared estimates
    local,       // local team MMSE
    local_scalar // local MMSE stages with scalar large-scale weights
};

const char *to_string(PrecodingScheme s);
PrecodingScheme scheme_from_string(const std::string &name);

struct DualSetup
{
    PrecodingScheme scheme = PrecodingScheme::centralized;
    Clusters clusters; // ignored by the full scheme

    void validate(const CsiEnsemble &ens) const;
};

// MMSE combiners V(p, sigma) of the chosen scheme, one column per UE.
StochasticPrecoder optimal_combiners(const CsiEnsemble &ens, const MmseParams &params, const DualSetup &setup);

struct ImplicitCombining
{
    double value = 0.0;
    StochasticVector v;
    bool degenerate = false; // no coherent signal reaches the combiner
};

// u_k(p, sigma): best achievable uplink SINR of UE k and its maximizing combiner.
ImplicitCombining u_k(const arma::vec &p, const arma::vec &sigma, const CsiEnsemble &ens, arma::uword k,
                      const DualSetup &setup);

struct FixedPointStep
{
    arma::vec next;        // T(p)
    arma::vec u;           // u_k(p, sigma)
    StochasticPrecoder V;  // combiners at p
    bool degenerate = false;
};

// T(p)_k = gamma_k p_k / u_k(p, sigma).
FixedPointStep fixed_point_map(const arma::vec &p, const arma::vec &sigma, const CsiEnsemble &ens,
                               const arma::vec &gammas, const DualSetup &setup);

struct InnerOptions
{
    double tol = 1e-8;            // max_k |T(p)_k - p_k| / p_k
    arma::uword max_iter = 10000;
    double sum_cap = arma::datum::inf; // stop once a nondecreasing iterate passes this sum power
    bool record_iterates = false;
};

enum class UplinkStatus
{
    converged,
    infeasible_sinr, // some u_k vanishes or the iterates diverge
    power_cap,       // the fixed point provably exceeds InnerOptions::sum_cap
    max_iter
};

const char *to_string(UplinkStatus s);

struct UplinkSolution
{
    UplinkStatus status = UplinkStatus::max_iter;
    arma::vec p;          // powers at which V and u were evaluated
    arma::vec u;
    StochasticPrecoder V; // combiners scaled to unit sigma-norm
    arma::uword iterations = 0;
    std::vector<arma::vec> iterates;
};

UplinkSolution solve_uplink_powers(const arma::vec &sigma, const CsiEnsemble &ens, const arma::vec &gammas,
                                   const DualSetup &setup, const InnerOptions &opts, const arma::vec &p_init);

// Rescales every nonzero column of V to sum_l sigma_l E||v_lk||^2 = 1.
void normalize_combiners(StochasticPrecoder &V, const arma::vec &sigma);

struct PowerCoupling
{
    arma::mat B; // B(k, j) = E|h_k^H v_j|^2
    arma::vec D; // (1 + 1/gamma_k) |E h_k^H v_k|^2
    arma::vec q;
    double rcond = 0.0;
    bool ok = false;
};

// Downlink powers q solving (D - B) q = (D - B^T) p for sigma-normalized combiners V.
PowerCoupling recover_downlink_powers(const StochasticPrecoder &V, const arma::vec &p, const CsiEnsemble &ens,
                                      const arma::vec &gammas);

// t_k = sqrt(q_k) v_k
StochasticPrecoder assemble_downlink_precoder(const StochasticPrecoder &V, const arma::vec &q);

struct DualState
{
    arma::vec lambda;
    arma::vec sigma;
    arma::vec p;
    double dual_value = 0.0;
};

enum class DualStatus
{
    ok,
    infeasible_sinr,
    power_cap,        // sum_k E||t_k||^2_{1+lambda} provably exceeds InnerOptions::sum_cap
    inner_failure,    // fixed point did not converge within InnerOptions::max_iter
    coupling_failure  // (D - B) singular or recovered powers negative
};

const char *to_string(DualStatus s);

struct DualEvaluation
{
    DualStatus status = DualStatus::inner_failure;
    DualState state;
    double d_tilde = 0.0; // meaningful only when status == ok
    arma::vec g;          // per-AP power minus budget
    arma::vec powers;     // sum_k E||t_lk||^2
    arma::vec q;
    arma::vec sinrs;      // downlink SINRs of T
    double rcond = 0.0;
    StochasticPrecoder T;
    arma::uword inner_iterations = 0;
};

// d(lambda) = sum_k E||t_k||^2_{1+lambda} - lambda^T P and its subgradient.
DualEvaluation partial_dual_value(const arma::vec &lambda, const CsiEnsemble &ens, const arma::vec &gammas,
                                  const arma::vec &budgets, const DualSetup &setup, const InnerOptions &opts = {},
                                  const arma::vec &p_init = {});

// p_k = gamma_k / sum_l kappa_lk
arma::vec initial_uplink_powers(const CsiEnsemble &ens, const arma::vec &gammas);

struct AscentOptions
{
    std::vector<double> alphas = {10.0, 17.0, 5.0}; // one restart per entry
    arma::uword max_iter = 500;
    arma::uword stall_window = 20;
    double stall_tol = 1e-6;
    double power_tol = 1e-6;
    double sinr_tol = 1e-6;
    InnerOptions inner;
};

enum class VerdictStatus
{
    feasible,
    infeasible_sinr,
    infeasible_power,
    inconclusive
};

const char *to_string(VerdictStatus s);

struct TrajectoryPoint
{
    arma::uword restart = 0;
    arma::uword iteration = 0;
    double alpha = 0.0;
    arma::vec lambda;
    double d_tilde = 0.0;
    double best_dual = 0.0;
    double max_power = 0.0;  // max_l sum_k E||t_lk||^2
    double max_excess = 0.0; // max_l g_l
};

struct FeasibilityVerdict
{
    VerdictStatus status = VerdictStatus::inconclusive;
    arma::vec powers;
    arma::vec sinrs;
    arma::vec lambda;
    arma::vec p;
    arma::vec q;
    double rcond = 0.0;
    bool ill_conditioned = false; // rcond of (D - B) below 1e-12 at the reported point
    arma::uword iterations = 0;   // dual evaluations, pre-test included
    arma::uword restarts = 0;
    std::vector<TrajectoryPoint> trajectory;

    // Per-AP (or sum) powers and SINRs stored here meet the targets within tolerance.
    bool certificate_holds(const arma::vec &gammas, const arma::vec &budgets, double power_tol,
                           double sinr_tol) const;
};

// Feasibility test under per-AP budgets: sum-power pre-test at lambda = 0
// followed by projected subgradient ascent with restarts.
FeasibilityVerdict subgradient_ascent(const CsiEnsemble &ens, const arma::vec &gammas, const arma::vec &budgets,
                                      const DualSetup &setup, const AscentOptions &opts = {});

// Feasibility under a single sum-power budget (the pre-test alone).
FeasibilityVerdict sum_power_test(const CsiEnsemble &ens, const arma::vec &gammas, double sum_budget,
                                  const DualSetup &setup, const AscentOptions &opts = {});

nlohmann::json to_json(const TrajectoryPoint &pt);

// One JSON object per line; `context` fields are merged into every record.
void write_trajectory(std::ostream &os, const FeasibilityVerdict &v, const nlohmann::json &context = {});

} // namespace cfp

#endif
