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

#include "cfp/metrics.hpp"

#include "cfp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cfp
{

const char *to_string(InfoConstraint c)
{
    switch (c)
    {
    case InfoConstraint::centralized:
        return "centralized";
    case InfoConstraint::local:
        return "local";
    case InfoConstraint::unconstrained:
        return "unconstrained";
    }
    return "unknown";
}

StochasticVector StochasticPrecoder::column(arma::uword k) const
{
    StochasticVector v;
    v.reserve(T.size());
    for (const auto &m : T)
        v.emplace_back(m.col(k));
    return v;
}

bool StochasticPrecoder::respects_clusters() const
{
    if (clusters.empty())
        return true;
    for (arma::uword k = 0; k < K; ++k)
    {
        std::vector<bool> serving(L, false);
        for (auto l : clusters[k])
            serving[l] = true;
        for (arma::uword l = 0; l < L; ++l)
        {
            if (serving[l])
                continue;
            for (const auto &m : T)
                if (!arma::cx_vec(m(ap_rows(l, N), arma::span(k))).is_zero())
                    return false;
        }
    }
    return true;
}

StochasticPrecoder zero_precoder(const CsiEnsemble &ens, InfoConstraint constraint, Clusters clusters)
{
    StochasticPrecoder out;
    out.L = ens.L;
    out.N = ens.N;
    out.K = ens.K;
    out.constraint = constraint;
    out.clusters = std::move(clusters);
    out.T.assign(ens.samples(), arma::cx_mat(ens.N * ens.L, ens.K, arma::fill::zeros));
    return out;
}

namespace
{
void check_dims(const StochasticPrecoder &T, const CsiEnsemble &ens)
{
    if (T.samples() != ens.samples() || T.L != ens.L || T.N != ens.N || T.K != ens.K)
        throw std::invalid_argument("precoder and ensemble dimensions do not match");
}
} // namespace

double SinrBreakdown::sinr() const
{
    const double num = std::norm(signal_mean);
    if (num == 0.0)
        return 0.0;
    return num / (variance + arma::accu(interference) + noise);
}

LinkMoments link_moments(const StochasticPrecoder &T, const CsiEnsemble &ens)
{
    check_dims(T, ens);
    const double inv_s = 1.0 / double(ens.samples());
    LinkMoments m{arma::cx_vec(ens.K, arma::fill::zeros), arma::mat(ens.K, ens.K, arma::fill::zeros)};
    arma::cx_mat G;
    for (arma::uword s = 0; s < ens.samples(); ++s)
    {
        G = ens.H[s].t() * T.T[s]; // G(k, j) = h_k^H t_j
        m.signal_mean += G.diag();
        m.second_moment += arma::square(arma::abs(G));
    }
    m.signal_mean *= inv_s;
    m.second_moment *= inv_s;
    return m;
}

SinrBreakdown sinr_breakdown(const StochasticPrecoder &T, const CsiEnsemble &ens, arma::uword k)
{
    if (k >= ens.K)
        throw std::out_of_range("sinr_breakdown: UE index");
    const LinkMoments m = link_moments(T, ens);
    SinrBreakdown out;
    out.signal_mean = m.signal_mean(k);
    out.signal_power = m.second_moment(k, k);
    out.variance = std::max(0.0, out.signal_power - std::norm(out.signal_mean));
    out.interference = m.second_moment.row(k).t();
    out.interference(k) = 0.0;
    return out;
}

arma::vec dl_sinrs(const StochasticPrecoder &T, const CsiEnsemble &ens)
{
    const LinkMoments m = link_moments(T, ens);
    arma::vec out(ens.K);
    for (arma::uword k = 0; k < ens.K; ++k)
    {
        const double num = std::norm(m.signal_mean(k));
        const double var = std::max(0.0, m.second_moment(k, k) - num);
        const double interf = arma::accu(m.second_moment.row(k)) - m.second_moment(k, k);
        out(k) = num == 0.0 ? 0.0 : num / (var + interf + 1.0);
    }
    return out;
}

double dl_sinr(const StochasticPrecoder &T, const CsiEnsemble &ens, arma::uword k)
{
    return sinr_breakdown(T, ens, k).sinr();
}

double dl_rate(const StochasticPrecoder &T, const CsiEnsemble &ens, arma::uword k)
{
    return std::log2(1.0 + dl_sinr(T, ens, k));
}

double sigma_norm_sq(const StochasticVector &v, const arma::vec &sigma, arma::uword N)
{
    if (v.empty())
        throw std::invalid_argument("sigma_norm_sq: empty ensemble");
    double acc = 0.0;
    for (const auto &x : v)
        for (arma::uword l = 0; l < sigma.n_elem; ++l)
            acc += sigma(l) * std::pow(arma::norm(x(ap_rows(l, N))), 2);
    return acc / double(v.size());
}

arma::vec sigma_norms_sq(const StochasticPrecoder &V, const arma::vec &sigma)
{
    arma::vec out(V.K, arma::fill::zeros);
    for (const auto &m : V.T)
        for (arma::uword l = 0; l < V.L; ++l)
            out += sigma(l) * arma::sum(arma::square(arma::abs(m.rows(ap_rows(l, V.N)))), 0).t();
    return out / double(V.samples());
}

UplinkSinr ul_sinr(const StochasticVector &v, const arma::vec &p, const arma::vec &sigma, const CsiEnsemble &ens,
                   arma::uword k)
{
    if (v.size() != ens.samples())
        throw std::invalid_argument("ul_sinr: sample count mismatch");
    if (arma::any(p < 0.0) || arma::any(sigma <= 0.0))
        throw std::invalid_argument("ul_sinr: need p >= 0 and sigma > 0");

    const double noise = sigma_norm_sq(v, sigma, ens.N);
    if (noise == 0.0)
        return {0.0, true};

    const double inv_s = 1.0 / double(ens.samples());
    std::complex<double> mean(0.0);
    arma::vec second(ens.K, arma::fill::zeros);
    for (arma::uword s = 0; s < ens.samples(); ++s)
    {
        const arma::cx_vec g = ens.H[s].t() * v[s]; // g(j) = h_j^H v
        mean += g(k);
        second += arma::square(arma::abs(g));
    }
    mean *= inv_s;
    second *= inv_s;

    const double num = p(k) * std::norm(mean);
    if (num == 0.0)
        return {0.0, false};
    const double var = std::max(0.0, second(k) - std::norm(mean));
    const double interf = arma::dot(p, second) - p(k) * second(k);
    return {num / (p(k) * var + interf + noise), false};
}

arma::vec ul_sinrs(const StochasticPrecoder &V, const arma::vec &p, const arma::vec &sigma, const CsiEnsemble &ens)
{
    const LinkMoments m = link_moments(V, ens);
    const arma::vec noise = sigma_norms_sq(V, sigma);
    arma::vec out(ens.K, arma::fill::zeros);
    for (arma::uword k = 0; k < ens.K; ++k)
    {
        const double num = p(k) * std::norm(m.signal_mean(k));
        if (noise(k) == 0.0 || num == 0.0)
            continue;
        const double var = std::max(0.0, m.second_moment(k, k) - std::norm(m.signal_mean(k)));
        const double interf = arma::dot(p, m.second_moment.col(k)) - p(k) * m.second_moment(k, k);
        out(k) = num / (p(k) * var + interf + noise(k));
    }
    return out;
}

arma::vec per_ap_powers(const StochasticPrecoder &T)
{
    if (T.T.empty())
        throw std::invalid_argument("per_ap_powers: empty ensemble");
    arma::vec out(T.L, arma::fill::zeros);
    for (const auto &m : T.T)
        for (arma::uword l = 0; l < T.L; ++l)
            out(l) += arma::accu(arma::square(arma::abs(m.rows(ap_rows(l, T.N)))));
    return out / double(T.samples());
}

} // namespace cfp
