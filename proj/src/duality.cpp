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

#include "cfp/duality.hpp"

#include "cfp/linalg.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cfp
{

const char *to_string(PrecodingScheme s)
{
    switch (s)
    {
    case PrecodingScheme::full:
        return "full";
    case PrecodingScheme::centralized:
        return "centralized";
    case PrecodingScheme::local:
        return "local";
    case PrecodingScheme::local_scalar:
        return "local_scalar_baseline";
    }
    return "unknown";
}

PrecodingScheme scheme_from_string(const std::string &name)
{
    if (name == "full")
        return PrecodingScheme::full;
    if (name == "centralized")
        return PrecodingScheme::centralized;
    if (name == "local")
        return PrecodingScheme::local;
    if (name == "local_scalar_baseline" || name == "local_scalar")
        return PrecodingScheme::local_scalar;
    throw std::invalid_argument("unknown precoder type '" + name + "'");
}

const char *to_string(UplinkStatus s)
{
    switch (s)
    {
    case UplinkStatus::converged:
        return "converged";
    case UplinkStatus::infeasible_sinr:
        return "infeasible_sinr";
    case UplinkStatus::power_cap:
        return "power_cap";
    case UplinkStatus::max_iter:
        return "max_iter";
    }
    return "unknown";
}

const char *to_string(DualStatus s)
{
    switch (s)
    {
    case DualStatus::ok:
        return "ok";
    case DualStatus::infeasible_sinr:
        return "infeasible_sinr";
    case DualStatus::power_cap:
        return "power_cap";
    case DualStatus::inner_failure:
        return "inner_failure";
    case DualStatus::coupling_failure:
        return "coupling_failure";
    }
    return "unknown";
}

const char *to_string(VerdictStatus s)
{
    switch (s)
    {
    case VerdictStatus::feasible:
        return "feasible";
    case VerdictStatus::infeasible_sinr:
        return "infeasible_sinr";
    case VerdictStatus::infeasible_power:
        return "infeasible_power";
    case VerdictStatus::inconclusive:
        return "inconclusive";
    }
    return "unknown";
}

void DualSetup::validate(const CsiEnsemble &ens) const
{
    if (scheme == PrecodingScheme::full)
        return;
    if (clusters.size() != ens.K)
        throw std::invalid_argument("DualSetup: cluster list must have one entry per UE");
    if (scheme == PrecodingScheme::centralized && ens.mode != CsiMode::centralized)
        throw std::invalid_argument("DualSetup: centralized precoding needs a centralized ensemble");
    if ((scheme == PrecodingScheme::local || scheme == PrecodingScheme::local_scalar) && ens.mode != CsiMode::local)
        throw std::invalid_argument("DualSetup: local precoding needs a local ensemble");
}

StochasticPrecoder optimal_combiners(const CsiEnsemble &ens, const MmseParams &params, const DualSetup &setup)
{
    switch (setup.scheme)
    {
    case PrecodingScheme::full:
        return full_mmse(ens, params);
    case PrecodingScheme::centralized:
        return centralized_mmse(ens, params, setup.clusters);
    case PrecodingScheme::local:
        return local_team_mmse(ens, params, setup.clusters).assemble();
    case PrecodingScheme::local_scalar:
        return local_scalar_baseline(ens, params, setup.clusters).assemble();
    }
    throw std::logic_error("optimal_combiners: unhandled scheme");
}

namespace
{

bool usable(double u)
{
    return std::isfinite(u) && u > 0.0;
}

void check_gammas(const arma::vec &gammas, arma::uword K)
{
    if (gammas.n_elem != K)
        throw std::invalid_argument("expected one SINR target per UE");
    if (!gammas.is_finite() || arma::any(gammas <= 0.0))
        throw std::invalid_argument("SINR targets must be positive and finite");
}

} // namespace

ImplicitCombining u_k(const arma::vec &p, const arma::vec &sigma, const CsiEnsemble &ens, arma::uword k,
                      const DualSetup &setup)
{
    if (k >= ens.K)
        throw std::out_of_range("u_k: UE index");
    const StochasticPrecoder V = optimal_combiners(ens, {p, sigma}, setup);
    ImplicitCombining out;
    out.v = V.column(k);
    const UplinkSinr s = ul_sinr(out.v, p, sigma, ens, k);
    out.value = s.degenerate ? 0.0 : s.value;
    out.degenerate = s.degenerate || !usable(s.value);
    return out;
}

FixedPointStep fixed_point_map(const arma::vec &p, const arma::vec &sigma, const CsiEnsemble &ens,
                               const arma::vec &gammas, const DualSetup &setup)
{
    check_gammas(gammas, ens.K);
    FixedPointStep out;
    out.V = optimal_combiners(ens, {p, sigma}, setup);
    out.u = ul_sinrs(out.V, p, sigma, ens);
    out.next.set_size(ens.K);
    for (arma::uword k = 0; k < ens.K; ++k)
    {
        if (usable(out.u(k)))
            out.next(k) = gammas(k) * p(k) / out.u(k);
        else
        {
            out.next(k) = arma::datum::inf;
            out.degenerate = true;
        }
    }
    return out;
}

void normalize_combiners(StochasticPrecoder &V, const arma::vec &sigma)
{
    const arma::vec norms = sigma_norms_sq(V, sigma);
    for (arma::uword k = 0; k < V.K; ++k)
    {
        if (!(norms(k) > 0.0))
            continue;
        const double scale = 1.0 / std::sqrt(norms(k));
        for (auto &m : V.T)
            m.col(k) *= scale;
    }
}

UplinkSolution solve_uplink_powers(const arma::vec &sigma, const CsiEnsemble &ens, const arma::vec &gammas,
                                   const DualSetup &setup, const InnerOptions &opts, const arma::vec &p_init)
{
    check_gammas(gammas, ens.K);
    setup.validate(ens);
    if (p_init.n_elem != ens.K || !p_init.is_finite() || arma::any(p_init <= 0.0))
        throw std::invalid_argument("solve_uplink_powers: initial powers must be positive and finite");

    UplinkSolution out;
    arma::vec p = p_init;
    for (arma::uword it = 1; it <= opts.max_iter; ++it)
    {
        FixedPointStep step = fixed_point_map(p, sigma, ens, gammas, setup);
        if (opts.record_iterates)
            out.iterates.push_back(p);
        out.iterations = it;
        out.p = p;
        out.u = step.u;
        if (step.degenerate || !step.next.is_finite() || arma::any(step.next <= 0.0))
        {
            out.status = UplinkStatus::infeasible_sinr;
            return out;
        }
        const double change = arma::max(arma::abs(step.next - p) / p);
        if (change <= opts.tol)
        {
            out.status = UplinkStatus::converged;
            out.V = std::move(step.V);
            normalize_combiners(out.V, sigma);
            return out;
        }
        // A nondecreasing step bounds the fixed point from below.
        if (arma::accu(step.next) > opts.sum_cap && arma::all(step.next >= p))
        {
            out.p = step.next;
            out.status = UplinkStatus::power_cap;
            return out;
        }
        p = step.next;
    }
    out.status = UplinkStatus::max_iter;
    return out;
}

PowerCoupling recover_downlink_powers(const StochasticPrecoder &V, const arma::vec &p, const CsiEnsemble &ens,
                                      const arma::vec &gammas)
{
    check_gammas(gammas, ens.K);
    if (p.n_elem != ens.K)
        throw std::invalid_argument("recover_downlink_powers: expected K powers");
    const LinkMoments lm = link_moments(V, ens);
    PowerCoupling out;
    out.B = lm.second_moment;
    out.D = (1.0 + 1.0 / gammas) % arma::square(arma::abs(lm.signal_mean));
    const arma::mat Dm = arma::diagmat(out.D);
    const arma::vec rhs = (Dm - out.B.t()) * p;
    out.ok = solve_general(arma::mat(Dm - out.B), rhs, out.q, out.rcond);
    return out;
}

StochasticPrecoder assemble_downlink_precoder(const StochasticPrecoder &V, const arma::vec &q)
{
    if (q.n_elem != V.K)
        throw std::invalid_argument("assemble_downlink_precoder: expected K powers");
    if (arma::any(q < 0.0) || !q.is_finite())
        throw std::invalid_argument("assemble_downlink_precoder: powers must be nonnegative");
    StochasticPrecoder T = V;
    const arma::cx_rowvec scale = arma::conv_to<arma::cx_rowvec>::from(arma::sqrt(q).t());
    for (auto &m : T.T)
        m.each_row() %= scale;
    return T;
}

arma::vec initial_uplink_powers(const CsiEnsemble &ens, const arma::vec &gammas)
{
    check_gammas(gammas, ens.K);
    arma::vec p(ens.K);
    for (arma::uword k = 0; k < ens.K; ++k)
    {
        double gain = 0.0;
        for (arma::uword l = 0; l < ens.L; ++l)
            gain += ens.stats.average_gain(l, k);
        p(k) = gain > 0.0 ? gammas(k) / gain : gammas(k);
    }
    return p;
}

DualEvaluation partial_dual_value(const arma::vec &lambda, const CsiEnsemble &ens, const arma::vec &gammas,
                                  const arma::vec &budgets, const DualSetup &setup, const InnerOptions &opts,
                                  const arma::vec &p_init)
{
    if (lambda.n_elem != ens.L || budgets.n_elem != ens.L)
        throw std::invalid_argument("partial_dual_value: expected one multiplier and one budget per AP");
    if (!lambda.is_finite() || arma::any(lambda < 0.0))
        throw std::invalid_argument("partial_dual_value: multipliers must be nonnegative");

    DualEvaluation out;
    out.state.lambda = lambda;
    out.state.sigma = 1.0 + lambda;
    const arma::vec p0 = p_init.is_empty() ? initial_uplink_powers(ens, gammas) : p_init;
    UplinkSolution sol = solve_uplink_powers(out.state.sigma, ens, gammas, setup, opts, p0);
    out.state.p = sol.p;
    out.inner_iterations = sol.iterations;
    switch (sol.status)
    {
    case UplinkStatus::converged:
        break;
    case UplinkStatus::infeasible_sinr:
        out.status = DualStatus::infeasible_sinr;
        return out;
    case UplinkStatus::power_cap:
        out.status = DualStatus::power_cap;
        return out;
    case UplinkStatus::max_iter:
        out.status = DualStatus::inner_failure;
        return out;
    }

    const PowerCoupling pc = recover_downlink_powers(sol.V, sol.p, ens, gammas);
    out.rcond = pc.rcond;
    if (!pc.ok || arma::any(pc.q < 0.0))
    {
        out.status = DualStatus::coupling_failure;
        return out;
    }
    out.q = pc.q;
    out.T = assemble_downlink_precoder(sol.V, pc.q);
    out.powers = per_ap_powers(out.T);
    out.g = out.powers - budgets;
    out.sinrs = dl_sinrs(out.T, ens);
    out.d_tilde = arma::dot(out.state.sigma, out.powers) - arma::dot(lambda, budgets);
    out.state.dual_value = out.d_tilde;
    out.status = DualStatus::ok;
    return out;
}

bool FeasibilityVerdict::certificate_holds(const arma::vec &gammas, const arma::vec &budgets, double power_tol,
                                           double sinr_tol) const
{
    if (powers.n_elem != budgets.n_elem || sinrs.n_elem != gammas.n_elem || powers.is_empty())
        return false;
    if (!powers.is_finite() || !sinrs.is_finite())
        return false;
    return arma::all(powers <= budgets + power_tol) && arma::all(sinrs >= gammas - sinr_tol);
}

namespace
{

void fill_certificate(FeasibilityVerdict &v, const DualEvaluation &ev)
{
    v.powers = ev.powers;
    v.sinrs = ev.sinrs;
    v.lambda = ev.state.lambda;
    v.p = ev.state.p;
    v.q = ev.q;
    v.rcond = ev.rcond;
    v.ill_conditioned = ev.rcond < 1e-12;
}

TrajectoryPoint trajectory_point(arma::uword restart, arma::uword iter, double alpha, const DualEvaluation &ev,
                                 double best)
{
    TrajectoryPoint pt;
    pt.restart = restart;
    pt.iteration = iter;
    pt.alpha = alpha;
    pt.lambda = ev.state.lambda;
    pt.d_tilde = ev.d_tilde;
    pt.best_dual = best;
    pt.max_power = ev.powers.max();
    pt.max_excess = ev.g.max();
    return pt;
}

bool any_zero_gain(const CsiEnsemble &ens)
{
    for (arma::uword k = 0; k < ens.K; ++k)
    {
        double gain = 0.0;
        for (arma::uword l = 0; l < ens.L; ++l)
            gain += ens.stats.average_gain(l, k);
        if (!(gain > 0.0))
            return true;
    }
    return false;
}

// Maps a failed dual evaluation onto a verdict status.
VerdictStatus failure_status(DualStatus s)
{
    switch (s)
    {
    case DualStatus::infeasible_sinr:
        return VerdictStatus::infeasible_sinr;
    case DualStatus::power_cap:
        return VerdictStatus::infeasible_power;
    default:
        return VerdictStatus::inconclusive;
    }
}

} // namespace

FeasibilityVerdict sum_power_test(const CsiEnsemble &ens, const arma::vec &gammas, double sum_budget,
                                  const DualSetup &setup, const AscentOptions &opts)
{
    check_gammas(gammas, ens.K);
    if (!(sum_budget > 0.0))
        throw std::invalid_argument("sum_power_test: budget must be positive");
    FeasibilityVerdict v;
    if (any_zero_gain(ens))
    {
        v.status = VerdictStatus::infeasible_sinr;
        return v;
    }
    InnerOptions inner = opts.inner;
    inner.sum_cap = sum_budget;
    // Uniform split: only the sum of the per-AP terms matters at lambda = 0.
    const arma::vec budgets(ens.L, arma::fill::value(sum_budget / double(ens.L)));
    const DualEvaluation ev =
        partial_dual_value(arma::zeros(ens.L), ens, gammas, budgets, setup, inner, initial_uplink_powers(ens, gammas));
    v.iterations = 1;
    if (ev.status != DualStatus::ok)
    {
        v.status = failure_status(ev.status);
        v.p = ev.state.p;
        return v;
    }
    fill_certificate(v, ev);
    v.powers = arma::vec{arma::accu(ev.powers)};
    v.trajectory.push_back(trajectory_point(0, 1, 0.0, ev, ev.d_tilde));
    if (v.certificate_holds(gammas, arma::vec{sum_budget}, opts.power_tol, opts.sinr_tol))
        v.status = VerdictStatus::feasible;
    else if (ev.d_tilde > sum_budget)
        v.status = VerdictStatus::infeasible_power;
    else
        v.status = VerdictStatus::inconclusive;
    return v;
}

FeasibilityVerdict subgradient_ascent(const CsiEnsemble &ens, const arma::vec &gammas, const arma::vec &budgets,
                                      const DualSetup &setup, const AscentOptions &opts)
{
    check_gammas(gammas, ens.K);
    if (budgets.n_elem != ens.L || !budgets.is_finite() || arma::any(budgets <= 0.0))
        throw std::invalid_argument("subgradient_ascent: expected L positive budgets");
    if (opts.alphas.empty())
        throw std::invalid_argument("subgradient_ascent: empty step-size schedule");

    FeasibilityVerdict v;
    if (any_zero_gain(ens))
    {
        v.status = VerdictStatus::infeasible_sinr;
        return v;
    }
    const double P_sum = arma::accu(budgets);
    const auto certified = [&](const DualEvaluation &ev) {
        FeasibilityVerdict probe;
        probe.powers = ev.powers;
        probe.sinrs = ev.sinrs;
        return probe.certificate_holds(gammas, budgets, opts.power_tol, opts.sinr_tol);
    };

    // Sum-power pre-test at lambda = 0.
    InnerOptions inner = opts.inner;
    inner.sum_cap = P_sum;
    const DualEvaluation ev0 =
        partial_dual_value(arma::zeros(ens.L), ens, gammas, budgets, setup, inner, initial_uplink_powers(ens, gammas));
    v.iterations = 1;
    if (ev0.status != DualStatus::ok)
    {
        v.status = failure_status(ev0.status);
        v.p = ev0.state.p;
        return v;
    }
    fill_certificate(v, ev0);
    v.trajectory.push_back(trajectory_point(0, 1, opts.alphas.front(), ev0, ev0.d_tilde));
    if (ev0.d_tilde > P_sum)
    {
        v.status = VerdictStatus::infeasible_power;
        return v;
    }
    if (certified(ev0))
    {
        v.status = VerdictStatus::feasible;
        return v;
    }

    for (std::size_t r = 0; r < opts.alphas.size(); ++r)
    {
        const double alpha = opts.alphas[r];
        arma::vec lambda(ens.L, arma::fill::zeros);
        arma::vec p_warm = ev0.state.p;
        double best = -arma::datum::inf;
        arma::uword last_improvement = 0;
        for (arma::uword i = 1; i <= opts.max_iter; ++i)
        {
            DualEvaluation ev;
            if (i == 1)
                ev = ev0;
            else
            {
                inner.sum_cap = P_sum + arma::dot(lambda, budgets);
                ev = partial_dual_value(lambda, ens, gammas, budgets, setup, inner, p_warm);
                ++v.iterations;
                if (ev.status == DualStatus::infeasible_sinr || ev.status == DualStatus::power_cap)
                {
                    v.status = failure_status(ev.status);
                    v.lambda = lambda;
                    return v;
                }
                if (ev.status != DualStatus::ok)
                    break;
            }
            p_warm = ev.state.p;
            if (ev.d_tilde > best + opts.stall_tol * std::abs(best) || !std::isfinite(best))
            {
                best = ev.d_tilde;
                last_improvement = i;
            }
            if (i > 1)
                v.trajectory.push_back(trajectory_point(r, i, alpha, ev, best));
            fill_certificate(v, ev);
            if (ev.d_tilde > P_sum)
            {
                v.status = VerdictStatus::infeasible_power;
                return v;
            }
            if (certified(ev))
            {
                v.status = VerdictStatus::feasible;
                return v;
            }
            if (i - last_improvement >= opts.stall_window)
                break;
            const double gnorm = arma::norm(ev.g);
            lambda = arma::clamp(lambda + (alpha / std::sqrt(double(i)) / gnorm) * ev.g, 0.0, arma::datum::inf);
        }
        v.restarts = r + 1;
    }
    v.status = VerdictStatus::inconclusive;
    return v;
}

nlohmann::json to_json(const TrajectoryPoint &pt)
{
    return {{"restart", pt.restart},
            {"iteration", pt.iteration},
            {"alpha", pt.alpha},
            {"lambda", arma::conv_to<std::vector<double>>::from(pt.lambda)},
            {"d_tilde", pt.d_tilde},
            {"best_dual", pt.best_dual},
            {"max_power", pt.max_power},
            {"max_excess", pt.max_excess}};
}

void write_trajectory(std::ostream &os, const FeasibilityVerdict &v, const nlohmann::json &context)
{
    for (const auto &pt : v.trajectory)
    {
        nlohmann::json rec = context.is_object() ? context : nlohmann::json::object();
        rec.update(to_json(pt));
        os << rec.dump() << '\n';
    }
}

} // namespace cfp
