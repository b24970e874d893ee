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

#include "cfp/channel.hpp"

#include "cfp/json_io.hpp"
#include "cfp/linalg.hpp"
#include "cfp/rng.hpp"

#include <algorithm>
#include <cmath>

namespace cfp
{

ChannelStatistics ChannelStatistics::zeros(arma::uword L, arma::uword N, arma::uword K)
{
    ChannelStatistics st;
    st.L = L;
    st.N = N;
    st.K = K;
    st.mean.assign(L * K, arma::cx_vec(N, arma::fill::zeros));
    st.cov.assign(L * K, arma::cx_mat(N, N, arma::fill::zeros));
    st.err_cov.assign(L * K, arma::cx_mat(N, N, arma::fill::zeros));
    return st;
}

double ChannelStatistics::average_gain(arma::uword l, arma::uword k) const
{
    const double second_moment = std::real(arma::trace(Kcov(l, k))) + std::pow(arma::norm(mu(l, k)), 2);
    return second_moment / double(N);
}

void ChannelStatistics::validate(double tol) const
{
    if (L == 0 || N == 0 || K == 0)
        throw std::invalid_argument("ChannelStatistics: empty dimensions");
    if (mean.size() != L * K || cov.size() != L * K || err_cov.size() != L * K)
        throw std::invalid_argument("ChannelStatistics: expected L*K entries");
    for (arma::uword i = 0; i < L * K; ++i)
    {
        if (mean[i].n_elem != N || cov[i].n_rows != N || cov[i].n_cols != N || err_cov[i].n_rows != N ||
            err_cov[i].n_cols != N)
            throw std::invalid_argument("ChannelStatistics: per-link dimension mismatch");
        const double scale = std::max(1.0, arma::norm(cov[i], "fro"));
        if (arma::norm(cov[i] - cov[i].t(), "fro") > tol * scale ||
            arma::norm(err_cov[i] - err_cov[i].t(), "fro") > tol * scale)
            throw std::invalid_argument("ChannelStatistics: covariance not Hermitian");
        if (min_eigenvalue(cov[i]) < -tol * scale || min_eigenvalue(err_cov[i]) < -tol * scale)
            throw std::invalid_argument("ChannelStatistics: covariance not PSD");
        if (min_eigenvalue(cov[i] - err_cov[i]) < -tol * scale)
            throw std::invalid_argument("ChannelStatistics: error covariance exceeds channel covariance");
    }
}

arma::cx_mat CsiEnsemble::local_estimate(arma::uword s, arma::uword l) const
{
    return Hhat[s].rows(ap_rows(l, N));
}

arma::cx_mat CsiEnsemble::weighted_error_cov(arma::uword l, const arma::vec &p) const
{
    arma::cx_mat acc(N, N, arma::fill::zeros);
    for (arma::uword k = 0; k < K; ++k)
        acc += p(k) * stats.Psi(l, k);
    return acc;
}

void CsiEnsemble::validate() const
{
    if (H.empty() || H.size() != Hhat.size())
        throw std::invalid_argument("CsiEnsemble: need S >= 1 matching true/estimated samples");
    if (stats.L != L || stats.N != N || stats.K != K)
        throw std::invalid_argument("CsiEnsemble: statistics dimension mismatch");
    for (std::size_t s = 0; s < H.size(); ++s)
        if (H[s].n_rows != N * L || H[s].n_cols != K || Hhat[s].n_rows != N * L || Hhat[s].n_cols != K)
            throw std::invalid_argument("CsiEnsemble: sample dimension mismatch");
}

CsiEnsemble sample_ensemble(const ChannelStatistics &stats, arma::uword S, std::uint64_t seed, CsiMode mode)
{
    if (S == 0)
        throw std::invalid_argument("sample_ensemble: S must be at least 1");
    const arma::uword L = stats.L, N = stats.N, K = stats.K;

    std::vector<arma::cx_mat> est_root(L * K), err_root(L * K);
    for (arma::uword i = 0; i < L * K; ++i)
    {
        const arma::cx_mat est_cov = stats.cov[i] - stats.err_cov[i];
        const double scale = std::max(1.0, arma::norm(stats.cov[i], "fro"));
        if (min_eigenvalue(est_cov) < -1e-9 * scale)
            throw std::invalid_argument("sample_ensemble: K - Psi is not PSD");
        est_root[i] = hermitian_sqrt(est_cov);
        err_root[i] = hermitian_sqrt(stats.err_cov[i]);
    }

    CsiEnsemble ens;
    ens.L = L;
    ens.N = N;
    ens.K = K;
    ens.mode = mode;
    ens.seed = seed;
    ens.stats = stats;
    ens.H.reserve(S);
    ens.Hhat.reserve(S);

    Rng rng(seed);
    arma::cx_vec w_est(N), w_err(N);
    for (arma::uword s = 0; s < S; ++s)
    {
        arma::cx_mat H(N * L, K), Hhat(N * L, K);
        for (arma::uword l = 0; l < L; ++l)
            for (arma::uword k = 0; k < K; ++k)
            {
                for (arma::uword n = 0; n < N; ++n)
                    w_est(n) = rng.complex_normal();
                for (arma::uword n = 0; n < N; ++n)
                    w_err(n) = rng.complex_normal();
                const arma::uword i = stats.index(l, k);
                const arma::cx_vec hhat = stats.mean[i] + est_root[i] * w_est;
                const arma::cx_vec z = err_root[i] * w_err;
                Hhat(ap_rows(l, N), arma::span(k)) = hhat;
                H(ap_rows(l, N), arma::span(k)) = hhat + z;
            }
        ens.H.push_back(std::move(H));
        ens.Hhat.push_back(std::move(Hhat));
    }
    return ens;
}

CsiEnsemble make_ensemble(ChannelStatistics stats, std::vector<arma::cx_mat> H, std::vector<arma::cx_mat> Hhat,
                          CsiMode mode)
{
    CsiEnsemble ens;
    ens.L = stats.L;
    ens.N = stats.N;
    ens.K = stats.K;
    ens.mode = mode;
    ens.stats = std::move(stats);
    ens.H = std::move(H);
    ens.Hhat = std::move(Hhat);
    ens.validate();
    return ens;
}

ChannelStatistics build_simlike_statistics(const NetworkScenario &scn)
{
    scn.validate();
    ChannelStatistics st = ChannelStatistics::zeros(scn.L, scn.N, scn.K);
    const arma::cx_mat eye = arma::eye<arma::cx_mat>(scn.N, scn.N);
    for (arma::uword k = 0; k < scn.K; ++k)
    {
        const auto &serving = scn.clusters[k];
        for (arma::uword l = 0; l < scn.L; ++l)
        {
            const arma::uword i = st.index(l, k);
            st.cov[i] = scn.gains(l, k) * eye;
            const bool served = std::find(serving.begin(), serving.end(), l) != serving.end();
            if (!served)
                st.err_cov[i] = st.cov[i];
        }
    }
    return st;
}

CsiEnsemble product_expansion(const CsiEnsemble &ens, arma::uword max_samples)
{
    ens.validate();
    const arma::uword S = ens.samples();
    double total = std::pow(double(S), double(ens.L));
    if (total > double(max_samples))
        throw std::length_error("product_expansion: S^L exceeds the sample limit");

    const auto count = static_cast<arma::uword>(total);
    CsiEnsemble out;
    out.L = ens.L;
    out.N = ens.N;
    out.K = ens.K;
    out.mode = ens.mode;
    out.seed = ens.seed;
    out.stats = ens.stats;
    out.H.reserve(count);
    out.Hhat.reserve(count);

    std::vector<arma::uword> digit(ens.L, 0); // digit[l] = base sample used by AP l
    for (arma::uword j = 0; j < count; ++j)
    {
        arma::cx_mat H(ens.N * ens.L, ens.K), Hhat(ens.N * ens.L, ens.K);
        for (arma::uword l = 0; l < ens.L; ++l)
        {
            H.rows(ap_rows(l, ens.N)) = ens.H[digit[l]].rows(ap_rows(l, ens.N));
            Hhat.rows(ap_rows(l, ens.N)) = ens.Hhat[digit[l]].rows(ap_rows(l, ens.N));
        }
        out.H.push_back(std::move(H));
        out.Hhat.push_back(std::move(Hhat));
        for (arma::uword l = 0; l < ens.L; ++l) // AP 0 varies fastest
        {
            if (++digit[l] < S)
                break;
            digit[l] = 0;
        }
    }
    return out;
}

nlohmann::json to_json(const ChannelStatistics &stats)
{
    nlohmann::json mean = nlohmann::json::array(), cov = nlohmann::json::array(), err = nlohmann::json::array();
    for (arma::uword i = 0; i < stats.mean.size(); ++i)
    {
        mean.push_back(io::to_json(stats.mean[i]));
        cov.push_back(io::to_json(stats.cov[i]));
        err.push_back(io::to_json(stats.err_cov[i]));
    }
    return {{"L", stats.L}, {"N", stats.N}, {"K", stats.K}, {"mean", mean}, {"cov", cov}, {"err_cov", err}};
}

ChannelStatistics statistics_from_json(const nlohmann::json &j)
{
    ChannelStatistics st;
    st.L = j.at("L").get<arma::uword>();
    st.N = j.at("N").get<arma::uword>();
    st.K = j.at("K").get<arma::uword>();
    for (const auto &m : j.at("mean"))
        st.mean.push_back(io::cx_vec_from_json(m));
    for (const auto &m : j.at("cov"))
        st.cov.push_back(io::cx_mat_from_json(m));
    for (const auto &m : j.at("err_cov"))
        st.err_cov.push_back(io::cx_mat_from_json(m));
    st.validate();
    return st;
}

nlohmann::json to_json(const CsiEnsemble &ens)
{
    nlohmann::json H = nlohmann::json::array(), Hhat = nlohmann::json::array();
    for (arma::uword s = 0; s < ens.samples(); ++s)
    {
        H.push_back(io::to_json(ens.H[s]));
        Hhat.push_back(io::to_json(ens.Hhat[s]));
    }
    return {{"seed", ens.seed},
            {"mode", ens.mode == CsiMode::local ? "local" : "centralized"},
            {"stats", to_json(ens.stats)},
            {"H", H},
            {"Hhat", Hhat}};
}

CsiEnsemble ensemble_from_json(const nlohmann::json &j)
{
    std::vector<arma::cx_mat> H, Hhat;
    for (const auto &m : j.at("H"))
        H.push_back(io::cx_mat_from_json(m));
    for (const auto &m : j.at("Hhat"))
        Hhat.push_back(io::cx_mat_from_json(m));
    const std::string mode = j.at("mode").get<std::string>();
    if (mode != "local" && mode != "centralized")
        throw std::invalid_argument("ensemble_from_json: unknown CSI mode '" + mode + "'");
    CsiEnsemble ens = make_ensemble(statistics_from_json(j.at("stats")), std::move(H), std::move(Hhat),
                                    mode == "local" ? CsiMode::local : CsiMode::centralized);
    ens.seed = j.at("seed").get<std::uint64_t>();
    return ens;
}

} // namespace cfp
