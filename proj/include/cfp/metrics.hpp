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

#ifndef CFP_METRICS_HPP
#define CFP_METRICS_HPP

#include "cfp/channel.hpp"
#include "cfp/scenario.hpp"

#include <armadillo>

#include <complex>
#include <vector>

namespace cfp
{

enum class InfoConstraint
{
    centralized,
    local,
    unconstrained
};

const char *to_string(InfoConstraint c);

// Sample-indexed random vector in C^{NL}.
using StochasticVector = std::vector<arma::cx_vec>;

// Sample-indexed precoding (or combining) matrix T[s] in C^{NL x K}.
struct StochasticPrecoder
{
    arma::uword L = 0, N = 0, K = 0;
    std::vector<arma::cx_mat> T;
    InfoConstraint constraint = InfoConstraint::unconstrained;
    Clusters clusters; // empty when no clustering is imposed

    arma::uword samples() const { return T.size(); }
    StochasticVector column(arma::uword k) const;

    // Rows of AP l in column k are exactly zero in every sample when l is not in L_k.
    bool respects_clusters() const;
};

StochasticPrecoder zero_precoder(const CsiEnsemble &ens, InfoConstraint constraint = InfoConstraint::unconstrained,
                                 Clusters clusters = {});

// Hardening-bound terms of UE k with unit noise.
struct SinrBreakdown
{
    std::complex<double> signal_mean; // b_k = E[h_k^H t_k]
    double signal_power = 0.0;        // E[|h_k^H t_k|^2]
    double variance = 0.0;            // V(h_k^H t_k), clamped at 0
    arma::vec interference;           // E[|h_k^H t_j|^2], entry k set to 0
    double noise = 1.0;

    double sinr() const;
};

// b_k = E[h_k^H t_k] and B(k, j) = E[|h_k^H t_j|^2] over the ensemble.
struct LinkMoments
{
    arma::cx_vec signal_mean;
    arma::mat second_moment;
};

LinkMoments link_moments(const StochasticPrecoder &T, const CsiEnsemble &ens);

SinrBreakdown sinr_breakdown(const StochasticPrecoder &T, const CsiEnsemble &ens, arma::uword k);
double dl_sinr(const StochasticPrecoder &T, const CsiEnsemble &ens, arma::uword k);
arma::vec dl_sinrs(const StochasticPrecoder &T, const CsiEnsemble &ens);

// log2(1 + SINR) in b/s/Hz.
double dl_rate(const StochasticPrecoder &T, const CsiEnsemble &ens, arma::uword k);

// sum_l sigma_l E||v_l||^2
double sigma_norm_sq(const StochasticVector &v, const arma::vec &sigma, arma::uword N);
arma::vec sigma_norms_sq(const StochasticPrecoder &V, const arma::vec &sigma);

struct UplinkSinr
{
    double value = 0.0;
    bool degenerate = false; // v vanishes in every sample, SINR undefined
};

// Use-and-then-forget uplink SINR of combiner v for UE k with powers p and
// per-AP noise sigma.
UplinkSinr ul_sinr(const StochasticVector &v, const arma::vec &p, const arma::vec &sigma, const CsiEnsemble &ens,
                   arma::uword k);

// Uplink SINRs of all columns of V at once; degenerate columns give 0.
arma::vec ul_sinrs(const StochasticPrecoder &V, const arma::vec &p, const arma::vec &sigma, const CsiEnsemble &ens);

// sum_k E||t_lk||^2 for every AP l.
arma::vec per_ap_powers(const StochasticPrecoder &T);

} // namespace cfp

#endif
