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

#ifndef CFP_PRECODERS_HPP
#define CFP_PRECODERS_HPP

#include "cfp/channel.hpp"
#include "cfp/metrics.hpp"

#include <armadillo>
#include <json.hpp>

#include <vector>

namespace cfp
{

// Coefficients (p, sigma) of the MMSE family: P = diag(p) are virtual uplink
// powers, Sigma = blockdiag(sigma_l I_N) the per-AP regularization.
struct MmseParams
{
    arma::vec p;
    arma::vec sigma;

    void validate(arma::uword K, arma::uword L) const;
};

// Regularized channel inversion V = (H P H^H + Sigma)^{-1} H P^{1/2} computed on
// the true channel of every sample (perfect CSI shared by all APs).
StochasticPrecoder full_mmse(const CsiEnsemble &ens, const MmseParams &params);

// Centralized MMSE with user-centric clustering. Column k only inverts the
// N|L_k| x N|L_k| submatrix of the APs in L_k:
//   v_k = (C Hhat P Hhat^H C + C Psibar C + Sigma)^{-1} C Hhat P^{1/2} e_k,
// with Psibar = sum_j p_j blockdiag(Psi_1j, ..., Psi_Lj).
StochasticPrecoder centralized_mmse(const CsiEnsemble &ens, const MmseParams &params, const Clusters &clusters);

// Local MMSE stage of AP l for every sample:
//   V_l = (Hhat_l P Hhat_l^H + sum_k p_k Psi_lk + sigma_l I)^{-1} Hhat_l P^{1/2}.
std::vector<arma::cx_mat> local_mmse_stage(const CsiEnsemble &ens, const MmseParams &params, arma::uword l);

// Pi_l = E[P^{1/2} Hhat_l^H V_l]
arma::cx_mat pi_matrix(const CsiEnsemble &ens, const MmseParams &params, arma::uword l,
                       const std::vector<arma::cx_mat> &stage);
arma::cx_mat pi_matrix(const CsiEnsemble &ens, const MmseParams &params, arma::uword l);

struct CorrectionStage
{
    std::vector<arma::cx_vec> c; // c_lk for every AP l, zero outside L_k
    double rcond = 0.0;          // reciprocal condition number of the block system
    bool ok = false;
};

// Solves c_lk + sum_{j in L_k, j != l} Pi_j c_jk = e_k for all l in L_k.
CorrectionStage solve_correction_stage(const std::vector<arma::cx_mat> &Pi, const Clusters &clusters, arma::uword k);

// Local precoder v_lk = V_l c_lk with a per-sample local stage and a
// deterministic statistical correction.
struct LocalTeamPrecoder
{
    arma::uword L = 0, N = 0, K = 0;
    std::vector<std::vector<arma::cx_mat>> stage;      // [l][s], N x K
    std::vector<std::vector<arma::cx_vec>> correction; // [l][k], K
    std::vector<arma::cx_mat> Pi;                      // [l], K x K
    Clusters clusters;
    double min_rcond = 0.0;

    StochasticPrecoder assemble() const;
};

// Team MMSE solution under local CSI.
LocalTeamPrecoder local_team_mmse(const CsiEnsemble &ens, const MmseParams &params, const Clusters &clusters);

// Baseline restricting c_lk to x_lk e_k. The scalars solve the optimality
// conditions projected onto e_k (the best scalar large-scale weights).
LocalTeamPrecoder local_scalar_baseline(const CsiEnsemble &ens, const MmseParams &params, const Clusters &clusters);

// Largest per-AP RMS violation of the team-MMSE optimality conditions for
// column k of V. The conditional expectations collapse to unconditional means
// because the CSI of different APs is independent; for l outside L_k the
// violation is the RMS norm of v_lk itself.
double tmmse_residual(const StochasticPrecoder &V, const CsiEnsemble &ens, const MmseParams &params, arma::uword k);

// E||P^{1/2} H^H v - e_k||^2 + E||v||_sigma^2 with the estimation error of
// every sample integrated out through Psi.
double mse_objective(const StochasticVector &v, const CsiEnsemble &ens, const MmseParams &params, arma::uword k);

nlohmann::json to_json(const StochasticPrecoder &T);
StochasticPrecoder precoder_from_json(const nlohmann::json &j);
nlohmann::json to_json(const LocalTeamPrecoder &P);

} // namespace cfp

#endif
