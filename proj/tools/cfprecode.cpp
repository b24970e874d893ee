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

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace
{

std::vector<std::string> split_csv(const std::string &s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

std::vector<double> parse_numbers(const std::string &s, const char *flag)
{
    std::vector<double> out;
    for (const auto &item : split_csv(s))
    {
        std::size_t used = 0;
        double x = 0.0;
        try
        {
            x = std::stod(item, &used);
        }
        catch (const std::exception &)
        {
            used = 0;
        }
        if (used != item.size())
            throw std::invalid_argument(std::string(flag) + ": not a number: '" + item + "'");
        out.push_back(x);
    }
    return out;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Feasibility sweeps for joint downlink precoding under per-AP constraints"};

    std::string config, gammas, rates, precoders, modes, out = "results";
    arma::uword drops = 0, samples = 0;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    bool log_trajectories = false;

    app.add_option("--config", config, "JSON experiment file")->check(CLI::ExistingFile);
    app.add_option("--drops", drops, "number of UE drops");
    app.add_option("--samples", samples, "channel samples per drop");
    app.add_option("--seed", seed, "master seed");
    auto *g_opt = app.add_option("--gammas", gammas, "comma-separated SINR targets");
    app.add_option("--rates", rates, "comma-separated rate targets in b/s/Hz")->excludes(g_opt);
    app.add_option("--precoders", precoders, "comma-separated subset of centralized,local,local_scalar_baseline");
    app.add_option("--modes", modes, "comma-separated subset of per_ap,sum_power");
    app.add_option("--threads", threads, "worker threads over drops");
    app.add_option("--out", out, "output directory");
    app.add_flag("--log-trajectories", log_trajectories, "write per-iteration dual trajectories");

    CLI11_PARSE(app, argc, argv);

    try
    {
        cfp::ExperimentSpec spec = config.empty() ? cfp::ExperimentSpec{} : cfp::load_experiment(config);
        if (drops)
            spec.drops = drops;
        if (samples)
            spec.samples = samples;
        if (app.count("--seed"))
            spec.seed = seed;
        if (threads)
            spec.threads = threads;
        if (!gammas.empty())
            spec.gammas = parse_numbers(gammas, "--gammas");
        if (!rates.empty())
        {
            spec.gammas.clear();
            for (double r : parse_numbers(rates, "--rates"))
                spec.gammas.push_back(cfp::rate_to_gamma(r));
        }
        if (!precoders.empty())
        {
            spec.precoders.clear();
            for (const auto &p : split_csv(precoders))
                spec.precoders.push_back(cfp::scheme_from_string(p));
        }
        if (!modes.empty())
        {
            spec.modes.clear();
            for (const auto &m : split_csv(modes))
                spec.modes.push_back(cfp::power_mode_from_string(m));
        }
        if (log_trajectories)
            spec.log_trajectories = true;
        if (spec.gammas.empty())
            throw std::invalid_argument("no SINR targets: pass --gammas, --rates or a config with either");
        spec.validate();

        const cfp::ExperimentResult res = cfp::run_experiment(spec);
        cfp::emit_results(res, out);

        std::printf("%-8s %-6s %-22s %-9s %8s %6s %8s %6s\n", "gamma", "rate", "precoder", "mode", "feasible",
                    "drops", "excluded", "rate");
        for (const auto &c : res.cells)
            std::printf("%-8.4g %-6.3g %-22s %-9s %8llu %6llu %8llu %6.3f\n", c.gamma, c.rate,
                        cfp::to_string(c.precoder), cfp::to_string(c.mode), (unsigned long long)c.feasible,
                        (unsigned long long)c.drops, (unsigned long long)c.excluded, c.rate_feasible());
        std::printf("results written to %s\n", out.c_str());
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
