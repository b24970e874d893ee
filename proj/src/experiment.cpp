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

#include "cfp/experiment.hpp"

#include "cfp/channel.hpp"
#include "cfp/rng.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace cfp
{

const char *to_string(PowerMode m)
{
    return m == PowerMode::per_ap ? "per_ap" : "sum_power";
}

PowerMode power_mode_from_string(const std::string &name)
{
    if (name == "per_ap")
        return PowerMode::per_ap;
    if (name == "sum_power")
        return PowerMode::sum_power;
    throw std::invalid_argument("unknown power mode '" + name + "'");
}

double rate_to_gamma(double rate)
{
    if (!(rate >= 0.0) || !std::isfinite(rate))
        throw std::invalid_argument("rate_to_gamma: rate must be nonnegative");
    return std::exp2(rate) - 1.0;
}

void ExperimentSpec::validate() const
{
    geometry.validate();
    if (gammas.empty() || precoders.empty() || modes.empty())
        throw std::invalid_argument("experiment: every sweep axis needs at least one entry");
    for (double g : gammas)
        if (!(g > 0.0) || !std::isfinite(g))
            throw std::invalid_argument("experiment: SINR targets must be positive and finite");
    if (drops < 1)
        throw std::invalid_argument("experiment: drops must be at least 1");
    if (samples < 1)
        throw std::invalid_argument("experiment: samples must be at least 1");
    if (threads < 1)
        throw std::invalid_argument("experiment: threads must be at least 1");
    if (ascent.alphas.empty())
        throw std::invalid_argument("experiment: empty step-size schedule");
    for (double a : ascent.alphas)
        if (!(a > 0.0))
            throw std::invalid_argument("experiment: step sizes must be positive");
}

double CellSummary::rate_feasible() const
{
    const arma::uword counted = drops - excluded;
    return counted == 0 ? arma::datum::nan : double(feasible) / double(counted);
}

namespace
{

struct DropOutput
{
    std::vector<DropRecord> records;
    std::string trajectories;
};

DropOutput run_drop(const ExperimentSpec &spec, arma::uword drop)
{
    const std::uint64_t drop_seed = derive_seed(spec.seed, drop);
    const NetworkScenario scn = generate_scenario(spec.geometry, derive_seed(drop_seed, 0));
    const ChannelStatistics stats = build_simlike_statistics(scn);
    const std::uint64_t ens_seed = derive_seed(drop_seed, 1);

    // Both ensembles share the same draws; only the CSI tag differs.
    const CsiEnsemble local = sample_ensemble(stats, spec.samples, ens_seed, CsiMode::local);
    CsiEnsemble central = local;
    central.mode = CsiMode::centralized;

    DropOutput out;
    std::ostringstream traj;
    for (arma::uword gi = 0; gi < spec.gammas.size(); ++gi)
    {
        const arma::vec gammas(scn.K, arma::fill::value(spec.gammas[gi]));
        for (auto scheme : spec.precoders)
        {
            const DualSetup setup{scheme, scn.clusters};
            const bool is_local = scheme == PrecodingScheme::local || scheme == PrecodingScheme::local_scalar;
            const CsiEnsemble &ens = is_local ? local : central;
            for (auto mode : spec.modes)
            {
                const auto t0 = std::chrono::steady_clock::now();
                const FeasibilityVerdict v =
                    mode == PowerMode::per_ap
                        ? subgradient_ascent(ens, gammas, scn.power_budget, setup, spec.ascent)
                        : sum_power_test(ens, gammas, arma::accu(scn.power_budget), setup, spec.ascent);
                const auto t1 = std::chrono::steady_clock::now();

                DropRecord rec;
                rec.drop = drop;
                rec.gamma_index = gi;
                rec.precoder = scheme;
                rec.mode = mode;
                rec.status = v.status;
                rec.iterations = v.iterations;
                rec.restarts = v.restarts;
                rec.ill_conditioned = v.status == VerdictStatus::feasible && v.ill_conditioned;
                rec.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
                out.records.push_back(rec);

                if (spec.log_trajectories)
                    write_trajectory(traj, v,
                                     {{"drop", drop},
                                      {"gamma", spec.gammas[gi]},
                                      {"precoder", to_string(scheme)},
                                      {"mode", to_string(mode)},
                                      {"status", to_string(v.status)}});
            }
        }
    }
    out.trajectories = traj.str();
    return out;
}

std::string format_double(double x)
{
    if (std::isnan(x))
        return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

} // namespace

ExperimentResult run_experiment(const ExperimentSpec &spec)
{
    spec.validate();

    std::vector<DropOutput> per_drop(spec.drops);
    std::vector<std::exception_ptr> errors(spec.drops);
    std::atomic<arma::uword> next{0};
    const auto worker = [&]() {
        for (arma::uword d = next++; d < spec.drops; d = next++)
        {
            try
            {
                per_drop[d] = run_drop(spec, d);
            }
            catch (...)
            {
                errors[d] = std::current_exception();
            }
        }
    };
    const unsigned n_threads = std::min<unsigned>(spec.threads, unsigned(spec.drops));
    if (n_threads <= 1)
        worker();
    else
    {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_threads; ++t)
            pool.emplace_back(worker);
        for (auto &t : pool)
            t.join();
    }
    for (const auto &e : errors)
        if (e)
            std::rethrow_exception(e);

    ExperimentResult res;
    res.spec = to_json(spec);
    for (double g : spec.gammas)
        for (auto scheme : spec.precoders)
            for (auto mode : spec.modes)
            {
                CellSummary c;
                c.gamma = g;
                c.rate = std::log2(1.0 + g);
                c.precoder = scheme;
                c.mode = mode;
                res.cells.push_back(c);
            }

    const std::size_t per_gamma = spec.precoders.size() * spec.modes.size();
    for (arma::uword d = 0; d < spec.drops; ++d)
    {
        for (const auto &rec : per_drop[d].records)
        {
            std::size_t pi = 0, mi = 0;
            while (spec.precoders[pi] != rec.precoder)
                ++pi;
            while (spec.modes[mi] != rec.mode)
                ++mi;
            CellSummary &c = res.cells[rec.gamma_index * per_gamma + pi * spec.modes.size() + mi];
            ++c.drops;
            c.feasible += rec.status == VerdictStatus::feasible;
            c.excluded += rec.status == VerdictStatus::inconclusive;
            c.mean_iterations += double(rec.iterations);
            c.wall_seconds += rec.wall_seconds;
            res.records.push_back(rec);
        }
        if (!per_drop[d].trajectories.empty())
            res.trajectories.push_back(std::move(per_drop[d].trajectories));
    }
    for (auto &c : res.cells)
        if (c.drops > 0)
            c.mean_iterations /= double(c.drops);
    return res;
}

std::string results_csv(const ExperimentResult &res)
{
    std::ostringstream os;
    os << "gamma,rate,precoder,mode,feasible,drops,excluded,rate_feasible\n";
    for (const auto &c : res.cells)
        os << format_double(c.gamma) << ',' << format_double(c.rate) << ',' << to_string(c.precoder) << ','
           << to_string(c.mode) << ',' << c.feasible << ',' << c.drops << ',' << c.excluded << ','
           << format_double(c.rate_feasible()) << '\n';
    return os.str();
}

nlohmann::json results_json(const ExperimentResult &res)
{
    nlohmann::json cells = nlohmann::json::array();
    for (const auto &c : res.cells)
    {
        const double rf = c.rate_feasible();
        cells.push_back({{"gamma", c.gamma},
                         {"rate", c.rate},
                         {"precoder", to_string(c.precoder)},
                         {"mode", to_string(c.mode)},
                         {"feasible", c.feasible},
                         {"drops", c.drops},
                         {"excluded", c.excluded},
                         {"rate_feasible", std::isnan(rf) ? nlohmann::json(nullptr) : nlohmann::json(rf)},
                         {"mean_iterations", c.mean_iterations},
                         {"wall_seconds", c.wall_seconds}});
    }
    nlohmann::json records = nlohmann::json::array();
    for (const auto &r : res.records)
        records.push_back({{"drop", r.drop},
                           {"gamma_index", r.gamma_index},
                           {"precoder", to_string(r.precoder)},
                           {"mode", to_string(r.mode)},
                           {"status", to_string(r.status)},
                           {"iterations", r.iterations},
                           {"restarts", r.restarts},
                           {"ill_conditioned", r.ill_conditioned},
                           {"wall_seconds", r.wall_seconds}});
    return {{"config", res.spec}, {"cells", cells}, {"records", records}};
}

void emit_results(const ExperimentResult &res, const std::string &dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const auto write = [](const fs::path &path, const std::string &content) {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f)
            throw std::runtime_error("cannot open " + path.string() + " for writing");
        f << content;
        if (!f)
            throw std::runtime_error("write failed for " + path.string());
    };
    write(fs::path(dir) / "results.csv", results_csv(res));
    write(fs::path(dir) / "results.json", results_json(res).dump(2) + "\n");
    if (!res.trajectories.empty())
    {
        std::string all;
        for (const auto &t : res.trajectories)
            all += t;
        write(fs::path(dir) / "trajectories.jsonl", all);
    }
}

nlohmann::json to_json(const ExperimentSpec &spec)
{
    nlohmann::json precoders = nlohmann::json::array(), modes = nlohmann::json::array();
    for (auto p : spec.precoders)
        precoders.push_back(to_string(p));
    for (auto m : spec.modes)
        modes.push_back(to_string(m));
    const AscentOptions &a = spec.ascent;
    return {{"geometry", to_json(spec.geometry)},
            {"gammas", spec.gammas},
            {"precoders", precoders},
            {"modes", modes},
            {"drops", spec.drops},
            {"samples", spec.samples},
            {"seed", spec.seed},
            {"threads", spec.threads},
            {"log_trajectories", spec.log_trajectories},
            {"ascent",
             {{"alphas", a.alphas},
              {"max_iter", a.max_iter},
              {"stall_window", a.stall_window},
              {"stall_tol", a.stall_tol},
              {"power_tol", a.power_tol},
              {"sinr_tol", a.sinr_tol},
              {"inner_tol", a.inner.tol},
              {"inner_max_iter", a.inner.max_iter}}}};
}

ExperimentSpec experiment_from_json(const nlohmann::json &j)
{
    ExperimentSpec spec;
    if (j.contains("geometry"))
        spec.geometry = geometry_from_json(j.at("geometry"));
    if (j.contains("gammas") && j.contains("rates"))
        throw std::invalid_argument("experiment config: give either gammas or rates, not both");
    if (j.contains("gammas"))
        spec.gammas = j.at("gammas").get<std::vector<double>>();
    if (j.contains("rates"))
        for (double r : j.at("rates").get<std::vector<double>>())
            spec.gammas.push_back(rate_to_gamma(r));
    if (j.contains("precoders"))
    {
        spec.precoders.clear();
        for (const auto &p : j.at("precoders"))
            spec.precoders.push_back(scheme_from_string(p.get<std::string>()));
    }
    if (j.contains("modes"))
    {
        spec.modes.clear();
        for (const auto &m : j.at("modes"))
            spec.modes.push_back(power_mode_from_string(m.get<std::string>()));
    }
    spec.drops = j.value("drops", spec.drops);
    spec.samples = j.value("samples", spec.samples);
    spec.seed = j.value("seed", spec.seed);
    spec.threads = j.value("threads", spec.threads);
    spec.log_trajectories = j.value("log_trajectories", spec.log_trajectories);
    if (j.contains("ascent"))
    {
        const auto &a = j.at("ascent");
        AscentOptions &o = spec.ascent;
        o.alphas = a.value("alphas", o.alphas);
        o.max_iter = a.value("max_iter", o.max_iter);
        o.stall_window = a.value("stall_window", o.stall_window);
        o.stall_tol = a.value("stall_tol", o.stall_tol);
        o.power_tol = a.value("power_tol", o.power_tol);
        o.sinr_tol = a.value("sinr_tol", o.sinr_tol);
        o.inner.tol = a.value("inner_tol", o.inner.tol);
        o.inner.max_iter = a.value("inner_max_iter", o.inner.max_iter);
    }
    return spec;
}

ExperimentSpec load_experiment(const std::string &path)
{
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot open config " + path);
    nlohmann::json j;
    try
    {
        f >> j;
    }
    catch (const nlohmann::json::exception &e)
    {
        throw std::invalid_argument("config " + path + ": " + e.what());
    }
    return experiment_from_json(j);
}

} // namespace cfp
