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

// Shared fixtures and independent reference implementations for the test suites.

#ifndef CFP_TESTS_SUPPORT_HPP
#define CFP_TESTS_SUPPORT_HPP

#include "cfp/channel.hpp"
#include "cfp/duality.hpp"
#include "cfp/metrics.hpp"
#include "cfp/precoders.hpp"
#include "cfp/rng.hpp"

#include <armadillo>

#include <complex>
#include <cstdint>
#include <vector>

namespace cfp::test
{

inline arma::cx_mat scalar_matrix(std::complex<double> x)
{
    return arma::cx_mat(1, 1, arma::fill::value(x));
}

inline arma::cx_mat random_cx(arma::uword r, arma::uword c, Rng &rng)
{
    arma::cx_mat A(r, c);
    for (auto &x : A)
        x = rng.complex_normal();
    return A;
}

// Random statistics: K_lk = g_lk (A A^H / N + 0.1 I), Psi_lk = e_lk K_lk with
// e_lk in [0, err_max], mean of norm ~ mean_scale * sqrt(g_lk).
inline ChannelStatistics random_statistics(arma::uword L, arma::uword N, arma::uword K, Rng &rng,
                                           double err_max = 0.3, double mean_scale = 0.0)
{
    ChannelStatistics st = ChannelStatistics::zeros(L, N, K);
    for (arma::uword l = 0; l < L; ++l)
        for (arma::uword k = 0; k < K; ++k)
        {
            const double g = rng.uniform(0.5, 4.0);
            const arma::cx_mat A = random_cx(N, N, rng);
            arma::cx_mat C = g * (A * A.t() / double(N) + 0.1 * arma::eye<arma::cx_mat>(N, N));
            C = 0.5 * (C + C.t());
            const std::size_t i = st.index(l, k);
            st.cov[i] = C;
            st.err_cov[i] = rng.uniform(0.0, err_max) * C;
            st.mean[i] = mean_scale * std::sqrt(g) * random_cx(N, 1, rng);
        }
    return st;
}

// Clusters where every UE keeps a random nonempty subset of the APs.
inline Clusters random_clusters(arma::uword L, arma::uword K, Rng &rng)
{
    Clusters c(K);
    for (arma::uword k = 0; k < K; ++k)
    {
        for (arma::uword l = 0; l < L; ++l)
            if (rng.uniform(0.0, 1.0) < 0.6)
                c[k].push_back(l);
        if (c[k].empty())
            c[k].push_back(arma::uword(rng.uniform(0.0, double(L))) % L);
    }
    return c;
}

inline Clusters full_clusters(arma::uword L, arma::uword K)
{
    Clusters c(K);
    for (auto &set : c)
        for (arma::uword l = 0; l < L; ++l)
            set.push_back(l);
    return c;
}

inline arma::vec random_positive(arma::uword n, Rng &rng, double lo = 0.5, double hi = 2.0)
{
    arma::vec v(n);
    for (auto &x : v)
        x = rng.uniform(lo, hi);
    return v;
}

// Targets that a given reference power vector over-satisfies by the factor
// 1/shrink, so the fixed point exists and lies below p_ref.
inline arma::vec feasible_targets(const CsiEnsemble &ens, const DualSetup &setup, const arma::vec &p_ref,
                                  const arma::vec &sigma, double shrink = 0.9)
{
    const StochasticPrecoder V = optimal_combiners(ens, {p_ref, sigma}, setup);
    return shrink * ul_sinrs(V, p_ref, sigma, ens);
}

// Hardening-bound SINR of column k evaluated by explicit per-sample loops.
inline double reference_dl_sinr(const StochasticPrecoder &T, const CsiEnsemble &ens, arma::uword k)
{
    const arma::uword S = ens.samples();
    std::complex<double> mean = 0.0;
    double second = 0.0, interference = 0.0;
    for (arma::uword s = 0; s < S; ++s)
    {
        std::complex<double> g = 0.0;
        for (arma::uword r = 0; r < ens.N * ens.L; ++r)
            g += std::conj(ens.H[s](r, k)) * T.T[s](r, k);
        mean += g;
        second += std::norm(g);
        for (arma::uword j = 0; j < ens.K; ++j)
        {
            if (j == k)
                continue;
            std::complex<double> x = 0.0;
            for (arma::uword r = 0; r < ens.N * ens.L; ++r)
                x += std::conj(ens.H[s](r, k)) * T.T[s](r, j);
            interference += std::norm(x);
        }
    }
    mean /= double(S);
    second /= double(S);
    interference /= double(S);
    return std::norm(mean) / (second - std::norm(mean) + interference + 1.0);
}

// Minimizer of the empirical MSE objective over all combiners whose AP-l block
// is a function of AP l's own estimate and which vanish outside L_k, found by
// dense least squares over the stacked unknowns. Requires a product ensemble
// whose sample index s decomposes into per-AP digits with AP 0 fastest, and
// returns the stacked combiner per sample.
inline StochasticVector team_mmse_oracle(const CsiEnsemble &prod, arma::uword base_samples, const MmseParams &prm,
                                         const std::vector<arma::uword> &cluster, arma::uword k)
{
    const arma::uword L = prod.L, N = prod.N, K = prod.K, S = prod.samples();
    const arma::uword m = cluster.size();
    const arma::uword unknowns = m * base_samples * N;
    const auto digit = [&](arma::uword s, arma::uword l) {
        for (arma::uword i = 0; i < l; ++i)
            s /= base_samples;
        return s % base_samples;
    };
    const auto column = [&](arma::uword a, arma::uword d) { return (a * base_samples + d) * N; };

    // Residual rows: sqrt(p_j) Hhat_j^H v - delta_jk for every sample and j,
    // then regularization rows R_l^{1/2} v_l, each weighted by 1/sqrt(S).
    arma::cx_mat A(S * K + S * m * N, unknowns, arma::fill::zeros);
    arma::cx_vec b(A.n_rows, arma::fill::zeros);
    const double w = 1.0 / std::sqrt(double(S));
    arma::uword row = 0;
    for (arma::uword s = 0; s < S; ++s)
    {
        for (arma::uword j = 0; j < K; ++j, ++row)
        {
            for (arma::uword a = 0; a < m; ++a)
            {
                const arma::uword l = cluster[a];
                const arma::uword c0 = column(a, digit(s, l));
                for (arma::uword n = 0; n < N; ++n)
                    A(row, c0 + n) = w * std::sqrt(prm.p(j)) * std::conj(prod.Hhat[s](l * N + n, j));
            }
            b(row) = j == k ? w : 0.0;
        }
        for (arma::uword a = 0; a < m; ++a)
        {
            const arma::uword l = cluster[a];
            arma::cx_mat R = prm.sigma(l) * arma::eye<arma::cx_mat>(N, N);
            for (arma::uword j = 0; j < K; ++j)
                R += prm.p(j) * prod.stats.Psi(l, j);
            arma::cx_mat U;
            if (!arma::chol(U, R))
                throw std::runtime_error("oracle: regularizer not positive definite");
            A.submat(row, column(a, digit(s, l)), row + N - 1, column(a, digit(s, l)) + N - 1) = w * U;
            row += N;
        }
    }
    const arma::cx_vec x = arma::solve(A, b);

    StochasticVector out(S, arma::cx_vec(N * L, arma::fill::zeros));
    for (arma::uword s = 0; s < S; ++s)
        for (arma::uword a = 0; a < m; ++a)
        {
            const arma::uword l = cluster[a];
            out[s](arma::span(l * N, l * N + N - 1)) = x(arma::span(column(a, digit(s, l)), column(a, digit(s, l)) + N - 1));
        }
    return out;
}

// Correction coefficients from the explicitly assembled block system.
inline std::vector<arma::cx_vec> dense_correction_oracle(const std::vector<arma::cx_mat> &Pi,
                                                         const std::vector<arma::uword> &cluster, arma::uword K,
                                                         arma::uword k)
{
    const arma::uword m = cluster.size();
    arma::cx_mat M(m * K, m * K, arma::fill::zeros);
    arma::cx_vec rhs(m * K, arma::fill::zeros);
    for (arma::uword a = 0; a < m; ++a)
    {
        rhs(a * K + k) = 1.0;
        for (arma::uword b = 0; b < m; ++b)
            for (arma::uword i = 0; i < K; ++i)
                for (arma::uword j = 0; j < K; ++j)
                    M(a * K + i, b * K + j) = a == b ? (i == j ? 1.0 : 0.0) : Pi[cluster[b]](i, j);
    }
    const arma::cx_vec x = arma::solve(M, rhs);
    std::vector<arma::cx_vec> c(Pi.size(), arma::cx_vec(K, arma::fill::zeros));
    for (arma::uword a = 0; a < m; ++a)
        c[cluster[a]] = x(arma::span(a * K, a * K + K - 1));
    return c;
}

inline double max_abs_diff(const StochasticVector &a, const StochasticVector &b)
{
    double d = 0.0;
    for (std::size_t s = 0; s < a.size(); ++s)
        d = std::max(d, arma::abs(a[s] - b[s]).max());
    return d;
}

// Single-sample deterministic ensemble with perfect CSI.
inline CsiEnsemble deterministic_ensemble(const arma::cx_mat &H, arma::uword L, arma::uword N,
                                          CsiMode mode = CsiMode::centralized)
{
    const arma::uword K = H.n_cols;
    ChannelStatistics st = ChannelStatistics::zeros(L, N, K);
    for (arma::uword l = 0; l < L; ++l)
        for (arma::uword k = 0; k < K; ++k)
            st.mean[st.index(l, k)] = H(arma::span(l * N, l * N + N - 1), k);
    return make_ensemble(st, {H}, {H}, mode);
}

} // namespace cfp::test

#endif
