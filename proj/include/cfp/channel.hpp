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

#ifndef CFP_CHANNEL_HPP
#define CFP_CHANNEL_HPP

#include "cfp/scenario.hpp"

#include <armadillo>
#include <json.hpp>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cfp
{

enum class CsiMode
{
    local,      // AP l knows only its own estimate Hhat_l
    centralized // estimates are shared within every cluster
};

// First and second order statistics of every AP-UE link: h_lk ~ CN(mu_lk, K_lk)
// and estimation error z_lk ~ CN(0, Psi_lk), independent of the estimate.
struct ChannelStatistics
{
    arma::uword L = 0, N = 0, K = 0;
    std::vector<arma::cx_vec> mean;    // indexed l * K + k
    std::vector<arma::cx_mat> cov;     // K_lk
    std::vector<arma::cx_mat> err_cov; // Psi_lk

    static ChannelStatistics zeros(arma::uword L, arma::uword N, arma::uword K);

    arma::uword index(arma::uword l, arma::uword k) const { return l * K + k; }
    const arma::cx_vec &mu(arma::uword l, arma::uword k) const { return mean[index(l, k)]; }
    const arma::cx_mat &Kcov(arma::uword l, arma::uword k) const { return cov[index(l, k)]; }
    const arma::cx_mat &Psi(arma::uword l, arma::uword k) const { return err_cov[index(l, k)]; }

    // E||h_lk||^2 / N, i.e. the per-antenna channel gain.
    double average_gain(arma::uword l, arma::uword k) const;

    // Hermitian PSD covariances with Psi <= K in the PSD order, up to tol.
    void validate(double tol = 1e-9) const;
};

// A frozen Monte-Carlo sample set. All expectations are averages over it.
struct CsiEnsemble
{
    arma::uword L = 0, N = 0, K = 0;
    CsiMode mode = CsiMode::local;
    std::uint64_t seed = 0;
    ChannelStatistics stats;
    std::vector<arma::cx_mat> H;    // true channels, NL x K per sample
    std::vector<arma::cx_mat> Hhat; // estimates, NL x K per sample; AP l owns rows ap_rows(l, N)

    arma::uword samples() const { return H.size(); }
    arma::cx_mat local_estimate(arma::uword s, arma::uword l) const;

    // sum_k p_k Psi_lk
    arma::cx_mat weighted_error_cov(arma::uword l, const arma::vec &p) const;

    void validate() const;
};

// Draws Hhat ~ CN(mu, K - Psi) and Z ~ CN(0, Psi) independently, H = Hhat + Z.
// Throws std::invalid_argument if K - Psi is not PSD or S == 0.
CsiEnsemble sample_ensemble(const ChannelStatistics &stats, arma::uword S, std::uint64_t seed,
                            CsiMode mode = CsiMode::local);

// Builds an ensemble from given per-sample matrices (test fixtures, replay).
CsiEnsemble make_ensemble(ChannelStatistics stats, std::vector<arma::cx_mat> H, std::vector<arma::cx_mat> Hhat,
                          CsiMode mode = CsiMode::local);

// Zero-mean uncorrelated links, K_lk = kappa_lk I. Links of serving APs are
// known perfectly (Psi = 0), all other links are unknown (Psi = K).
ChannelStatistics build_simlike_statistics(const NetworkScenario &scn);

// Joint sample space of all S^L combinations of per-AP samples. Under the
// resulting measure the per-AP CSI (Hhat_l, Z_l) is exactly independent
// across APs while every per-AP marginal equals the original one. Throws
// std::length_error if S^L exceeds max_samples.
CsiEnsemble product_expansion(const CsiEnsemble &ens, arma::uword max_samples = 1u << 16);

template <typename T>
T empirical_mean(const std::vector<T> &values)
{
    if (values.empty())
        throw std::invalid_argument("empirical_mean: empty ensemble");
    T acc = values.front();
    for (std::size_t i = 1; i < values.size(); ++i)
        acc += values[i];
    T out = acc / static_cast<double>(values.size());
    return out;
}

nlohmann::json to_json(const ChannelStatistics &stats);
ChannelStatistics statistics_from_json(const nlohmann::json &j);

nlohmann::json to_json(const CsiEnsemble &ens);
CsiEnsemble ensemble_from_json(const nlohmann::json &j);

} // namespace cfp

#endif
