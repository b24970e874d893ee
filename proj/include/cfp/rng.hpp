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

#ifndef CFP_RNG_HPP
#define CFP_RNG_HPP

#include <complex>
#include <cstdint>
#include <random>

namespace cfp
{

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Child seed for stream `index` of a master seed. Distinct indices give
// statistically independent, individually reproducible streams.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

class Rng
{
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double normal() { return std_normal_(engine_); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit_(engine_); }

    // CN(0, 1): independent real and imaginary parts of variance 1/2.
    std::complex<double> complex_normal()
    {
        constexpr double s = 0.70710678118654752440;
        const double re = std_normal_(engine_);
        const double im = std_normal_(engine_);
        return {s * re, s * im};
    }

    std::mt19937_64 &engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> std_normal_{0.0, 1.0};
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

} // namespace cfp

#endif
