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

#include "cfp/precoders.hpp"

#include "cfp/json_io.hpp"
#include "cfp/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cfp
{

void MmseParams::validate(arma::uword K, arma::uword L) const
{
    if (p.n_elem != K || sigma.n_elem != L)
        throw std::invalid_argument("MmseParams: expected K powers and L noise levels");
    if (!p.is_finite() || !sigma.is_finite() || arma::any(p <= 0.0) || arma::any(sigma <= 0.0))
        throw std::invalid_argument("MmseParams: entries must be positive and finite");
}

namespace
{

arma::vec stacked_sigma(const arma::vec &sigma, arma::uword N)
{
    return arma::vectorise(arma::repmat(sigma.t(), N, 1));
}

arma::uvec cluster_rows(const std::vector<arma::uword> &members, arma::uword N)
{
    arma::uvec idx(members.size() * N);
    for (std::size_t i = 0; i < members.size(); ++i)
        for (arma::uword n = 0; n < N; ++n)
            idx(i * N + n) = members[i] * N + n;
    return idx;
}

// Gram term A P A^H for a diagonal P given by sqrt(p).
arma::cx_mat weighted_gram(const arma::cx_mat &A, const arma::vec &sqrt_p)
{
    arma::cx_mat W = A;
    W.each_row() %= arma::conv_to<arma::cx_rowvec>::from(sqrt_p.t());
    return W * W.t();
}

void check_clusters(const Clusters &clusters, arma::uword L, arma::uword K)
{
    if (clusters.size() != K)
        throw std::invalid_argument("cluster list must have one entry per UE");
    for (const auto &set : clusters)
    {
        if (set.empty())
            throw std::invalid_argument("empty cluster");
        for (auto l : set)
            if (l >= L)
                throw std::invalid_argument("cluster member out of range");
    }
}

bool in_cluster(const std::vector<arma::uword> &set, arma::uword l)
{
    for (auto m : set)
        if (m == l)
            return true;
    return false;
}

} // namespace

StochasticPrecoder full_mmse(const CsiEnsemble &ens, const MmseParams &params)
{
    params.validate(ens.K, ens.L);
    const arma::vec sqrt_p = arma::sqrt(params.p);
    const arma::cx_mat Sigma = arma::diagmat(arma::conv_to<arma::cx_vec>::from(stacked_sigma(params.sigma, ens.N)));

    StochasticPrecoder out = zero_precoder(ens, InfoConstraint::unconstrained);
    for (arma::uword s = 0; s < ens.samples(); ++s)
    {
        arma::cx_mat rhs = ens.H[s];
        rhs.each_row() %= arma::conv_to<arma::cx_rowvec>::from(sqrt_p.t());
        out.T[s] = solve_hpd(arma::cx_mat(rhs * rhs.t() + Sigma), rhs);
    }
    return out;
}

StochasticPrecoder centralized_mmse(const CsiEnsemble &ens, const MmseParams &params, const Clusters &clusters)
{
    params.validate(ens.K, ens.L);
    check_clusters(clusters, ens.L, ens.K);
    const arma::vec sqrt_p = arma::sqrt(params.p);

    // Per-AP regularization blocks: sum_j p_j Psi_lj + sigma_l I.
    std::vector<arma::cx_mat> reg(ens.L);
    for (arma::uword l = 0; l < ens.L; ++l)
        reg[l] = ens.weighted_error_cov(l, params.p) + params.sigma(l) * arma::eye<arma::cx_mat>(ens.N, ens.N);

    std::vector<arma::uvec> rows(ens.K);
    std::vector<arma::cx_mat> reg_k(ens.K);
    for (arma::uword k = 0; k < ens.K; ++k)
    {
        const auto &members = clusters[k];
        rows[k] = cluster_rows(members, ens.N);
        reg_k[k].zeros(rows[k].n_elem, rows[k].n_elem);
        for (std::size_t i = 0; i < members.size(); ++i)
            reg_k[k].submat(i * ens.N, i * ens.N, (i + 1) * ens.N - 1, (i + 1) * ens.N - 1) = reg[members[i]];
    }

    StochasticPrecoder out = zero_precoder(ens, InfoConstraint::centralized, clusters);
    for (arma::uword s = 0; s < ens.samples(); ++s)
        for (arma::uword k = 0; k < ens.K; ++k)
        {
            const arma::cx_mat Hc = ens.Hhat[s].rows(rows[k]);
            const arma::cx_mat A = weighted_gram(Hc, sqrt_p) + reg_k[k];
            const arma::cx_vec v = solve_hpd(A, arma::cx_vec(sqrt_p(k) * Hc.col(k)));
            for (arma::uword i = 0; i < rows[k].n_elem; ++i)
                out.T[s](rows[k](i), k) = v(i);
        }
    return out;
}

std::vector<arma::cx_mat> local_mmse_stage(const CsiEnsemble &ens, const MmseParams &params, arma::uword l)
{
    params.validate(ens.K, ens.L);
    if (l >= ens.L)
        throw std::out_of_range("local_mmse_stage: AP index");
    const arma::vec sqrt_p = arma::sqrt(params.p);
    const arma::cx_mat reg =
        ens.weighted_error_cov(l, params.p) + params.sigma(l) * arma::eye<arma::cx_mat>(ens.N, ens.N);

    std::vector<arma::cx_mat> stage(ens.samples());
    for (arma::uword s = 0; s < ens.samples(); ++s)
    {
        arma::cx_mat rhs = ens.local_estimate(s, l);
        rhs.each_row() %= arma::conv_to<arma::cx_rowvec>::from(sqrt_p.t());
        stage[s] = solve_hpd(arma::cx_mat(rhs * rhs.t() + reg), rhs);
    }
    return stage;
}

arma::cx_mat pi_matrix(const CsiEnsemble &ens, const MmseParams &params, arma::uword l,
                       const std::vector<arma::cx_mat> &stage)
{
    if (stage.size() != ens.samples())
        throw std::invalid_argument("pi_matrix: stage/sample count mismatch");
    const arma::cx_vec sqrt_p = arma::conv_to<arma::cx_vec>::from(arma::sqrt(params.p));
    arma::cx_mat acc(ens.K, ens.K, arma::fill::zeros);
    for (arma::uword s = 0; s < ens.samples(); ++s)
        acc += ens.local_estimate(s, l).t() * stage[s];
    acc /= double(ens.samples());
    return arma::diagmat(sqrt_p) * acc;
}

arma::cx_mat pi_matrix(const CsiEnsemble &ens, const MmseParams &params, arma::uword l)
{
    return pi_matrix(ens, params, l, local_mmse_stage(ens, params, l));
}

CorrectionStage solve_correction_stage(const std::vector<arma::cx_mat> &Pi, const Clusters &clusters, arma::uword k)
{
    if (k >= clusters.size())
        throw std::out_of_range("solve_correction_stage: UE index");
    const arma::uword L = Pi.size();
    const arma::uword K = clusters.size();
    const auto &members = clusters[k];
    const arma::uword m = members.size();

    CorrectionStage out;
    out.c.assign(L, arma::cx_vec(K, arma::fill::zeros));

    arma::cx_mat M(m * K, m * K, arma::fill::zeros);
    arma::cx_mat rhs(m * K, 1, arma::fill::zeros);
    for (arma::uword a = 0; a < m; ++a)
    {
        rhs(a * K + k, 0) = 1.0;
        for (arma::uword b = 0; b < m; ++b)
        {
            auto block = M.submat(a * K, b * K, (a + 1) * K - 1, (b + 1) * K - 1);
            if (a == b)
                block = arma::eye<arma::cx_mat>(K, K);
            else
                block = Pi[members[b]];
        }
    }

    arma::cx_mat x;
    out.ok = solve_general(M, rhs, x, out.rcond);
    if (!out.ok)
        return out;
    for (arma::uword a = 0; a < m; ++a)
        out.c[members[a]] = x(arma::span(a * K, (a + 1) * K - 1), 0);
    return out;
}

StochasticPrecoder LocalTeamPrecoder::assemble() const
{
    StochasticPrecoder out;
    out.L = L;
    out.N = N;
    out.K = K;
    out.constraint = InfoConstraint::local;
    out.clusters = clusters;
    const arma::uword S = stage.empty() ? 0 : stage[0].size();
    out.T.assign(S, arma::cx_mat(N * L, K, arma::fill::zeros));

    arma::cx_mat C(K, K);
    for (arma::uword l = 0; l < L; ++l)
    {
        for (arma::uword k = 0; k < K; ++k)
            C.col(k) = correction[l][k];
        if (!C.is_zero())
            for (arma::uword s = 0; s < S; ++s)
                out.T[s].rows(ap_rows(l, N)) = stage[l][s] * C;
    }
    return out;
}

namespace
{

LocalTeamPrecoder local_stages(const CsiEnsemble &ens, const MmseParams &params, const Clusters &clusters)
{
    params.validate(ens.K, ens.L);
    check_clusters(clusters, ens.L, ens.K);
    LocalTeamPrecoder out;
    out.L = ens.L;
    out.N = ens.N;
    out.K = ens.K;
    out.clusters = clusters;
    out.stage.resize(ens.L);
    out.Pi.resize(ens.L);
    for (arma::uword l = 0; l < ens.L; ++l)
    {
        out.stage[l] = local_mmse_stage(ens, params, l);
        out.Pi[l] = pi_matrix(ens, params, l, out.stage[l]);
    }
    out.correction.assign(ens.L, std::vector<arma::cx_vec>(ens.K, arma::cx_vec(ens.K, arma::fill::zeros)));
    return out;
}

} // namespace

LocalTeamPrecoder local_team_mmse(const CsiEnsemble &ens, const MmseParams &params, const Clusters &clusters)
{
    LocalTeamPrecoder out = local_stages(ens, params, clusters);
    out.min_rcond = arma::datum::inf;
    for (arma::uword k = 0; k < ens.K; ++k)
    {
        const CorrectionStage cs = solve_correction_stage(out.Pi, clusters, k);
        if (!cs.ok)
            throw std::runtime_error("local_team_mmse: singular correction system for UE " + std::to_string(k));
        out.min_rcond = std::min(out.min_rcond, cs.rcond);
        for (arma::uword l = 0; l < ens.L; ++l)
            out.correction[l][k] = cs.c[l];
    }
    return out;
}

LocalTeamPrecoder local_scalar_baseline(const CsiEnsemble &ens, const MmseParams &params, const Clusters &clusters)
{
    LocalTeamPrecoder out = local_stages(ens, params, clusters);
    out.min_rcond = arma::datum::inf;
    for (arma::uword k = 0; k < ens.K; ++k)
    {
        const auto &members = clusters[k];
        const arma::uword m = members.size();
        arma::cx_mat M(m, m);
        arma::cx_mat rhs(m, 1);
        for (arma::uword a = 0; a < m; ++a)
        {
            const arma::cx_mat &Pa = out.Pi[members[a]];
            const double diag = std::real(Pa(k, k));
            // An AP with no coherent estimate of UE k has a vacuous condition;
            // its stage column is zero, so any scalar gives the same precoder.
            if (!(diag > 1e-14 * (1.0 + arma::abs(Pa).max())))
            {
                M.row(a).zeros();
                M(a, a) = 1.0;
                rhs(a, 0) = 1.0;
                continue;
            }
            for (arma::uword b = 0; b < m; ++b)
                M(a, b) = a == b ? Pa(k, k) : arma::cx_mat(Pa * out.Pi[members[b]])(k, k);
            rhs(a, 0) = Pa(k, k);
        }
        arma::cx_mat x;
        double rcond = 0.0;
        if (!solve_general(M, rhs, x, rcond))
            throw std::runtime_error("local_scalar_baseline: singular system for UE " + std::to_string(k));
        out.min_rcond = std::min(out.min_rcond, rcond);
        for (arma::uword a = 0; a < m; ++a)
        {
            arma::cx_vec c(ens.K, arma::fill::zeros);
            c(k) = x(a, 0);
            out.correction[members[a]][k] = c;
        }
    }
    return out;
}

double tmmse_residual(const StochasticPrecoder &V, const CsiEnsemble &ens, const MmseParams &params, arma::uword k)
{
    if (V.samples() != ens.samples() || V.L != ens.L || V.N != ens.N || V.K != ens.K)
        throw std::invalid_argument("tmmse_residual: dimension mismatch");
    if (V.clusters.size() != ens.K)
        throw std::invalid_argument("tmmse_residual: precoder carries no cluster sets");
    const auto &members = V.clusters[k];
    const arma::uword S = ens.samples();
    const arma::cx_vec sqrt_p = arma::conv_to<arma::cx_vec>::from(arma::sqrt(params.p));

    // m_j = P^{1/2} E[Hhat_j^H v_jk]
    std::vector<arma::cx_vec> coupling(ens.L, arma::cx_vec(ens.K, arma::fill::zeros));
    for (auto j : members)
    {
        for (arma::uword s = 0; s < S; ++s)
            coupling[j] += ens.local_estimate(s, j).t() * V.T[s](ap_rows(j, ens.N), arma::span(k));
        coupling[j] = sqrt_p % coupling[j] / double(S);
    }

    double worst = 0.0;
    for (arma::uword l = 0; l < ens.L; ++l)
    {
        double acc = 0.0;
        if (!in_cluster(members, l))
        {
            for (arma::uword s = 0; s < S; ++s)
                acc += std::pow(arma::norm(V.T[s](ap_rows(l, ens.N), arma::span(k))), 2);
        }
        else
        {
            arma::cx_vec target(ens.K, arma::fill::zeros);
            target(k) = 1.0;
            for (auto j : members)
                if (j != l)
                    target -= coupling[j];
            const auto stage = local_mmse_stage(ens, params, l);
            for (arma::uword s = 0; s < S; ++s)
                acc += std::pow(arma::norm(V.T[s](ap_rows(l, ens.N), arma::span(k)) - stage[s] * target), 2);
        }
        worst = std::max(worst, std::sqrt(acc / double(S)));
    }
    return worst;
}

double mse_objective(const StochasticVector &v, const CsiEnsemble &ens, const MmseParams &params, arma::uword k)
{
    params.validate(ens.K, ens.L);
    if (v.size() != ens.samples())
        throw std::invalid_argument("mse_objective: sample count mismatch");
    const arma::cx_vec sqrt_p = arma::conv_to<arma::cx_vec>::from(arma::sqrt(params.p));
    std::vector<arma::cx_mat> reg(ens.L);
    for (arma::uword l = 0; l < ens.L; ++l)
        reg[l] = ens.weighted_error_cov(l, params.p) + params.sigma(l) * arma::eye<arma::cx_mat>(ens.N, ens.N);

    double acc = 0.0;
    for (arma::uword s = 0; s < ens.samples(); ++s)
    {
        arma::cx_vec err = sqrt_p % (ens.Hhat[s].t() * v[s]);
        err(k) -= 1.0;
        acc += std::pow(arma::norm(err), 2);
        for (arma::uword l = 0; l < ens.L; ++l)
        {
            const arma::cx_vec vl = v[s](ap_rows(l, ens.N));
            acc += std::real(arma::cdot(vl, reg[l] * vl));
        }
    }
    return acc / double(ens.samples());
}

nlohmann::json to_json(const StochasticPrecoder &T)
{
    nlohmann::json samples = nlohmann::json::array();
    for (const auto &m : T.T)
        samples.push_back(io::to_json(m));
    return {{"L", T.L},
            {"N", T.N},
            {"K", T.K},
            {"constraint", to_string(T.constraint)},
            {"clusters", io::to_json(T.clusters)},
            {"T", samples}};
}

StochasticPrecoder precoder_from_json(const nlohmann::json &j)
{
    StochasticPrecoder T;
    T.L = j.at("L").get<arma::uword>();
    T.N = j.at("N").get<arma::uword>();
    T.K = j.at("K").get<arma::uword>();
    const std::string c = j.at("constraint").get<std::string>();
    if (c == "centralized")
        T.constraint = InfoConstraint::centralized;
    else if (c == "local")
        T.constraint = InfoConstraint::local;
    else if (c == "unconstrained")
        T.constraint = InfoConstraint::unconstrained;
    else
        throw std::invalid_argument("precoder_from_json: unknown constraint '" + c + "'");
    T.clusters = io::sets_from_json(j.at("clusters"));
    for (const auto &m : j.at("T"))
        T.T.push_back(io::cx_mat_from_json(m));
    return T;
}

nlohmann::json to_json(const LocalTeamPrecoder &P)
{
    nlohmann::json stage = nlohmann::json::array(), corr = nlohmann::json::array(), pi = nlohmann::json::array();
    for (arma::uword l = 0; l < P.L; ++l)
    {
        nlohmann::json per_sample = nlohmann::json::array();
        for (const auto &m : P.stage[l])
            per_sample.push_back(io::to_json(m));
        stage.push_back(per_sample);
        nlohmann::json per_ue = nlohmann::json::array();
        for (const auto &c : P.correction[l])
            per_ue.push_back(io::to_json(c));
        corr.push_back(per_ue);
        pi.push_back(io::to_json(P.Pi[l]));
    }
    return {{"L", P.L},
            {"N", P.N},
            {"K", P.K},
            {"clusters", io::to_json(P.clusters)},
            {"min_rcond", P.min_rcond},
            {"stage", stage},
            {"correction", corr},
            {"Pi", pi}};
}

} // namespace cfp
