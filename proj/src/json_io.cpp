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

#include "cfp/json_io.hpp"

#include <stdexcept>

namespace cfp::io
{

namespace
{
std::vector<double> real_part(const arma::cx_mat &m)
{
    std::vector<double> out(m.n_elem);
    for (arma::uword i = 0; i < m.n_elem; ++i)
        out[i] = m(i).real();
    return out;
}

std::vector<double> imag_part(const arma::cx_mat &m)
{
    std::vector<double> out(m.n_elem);
    for (arma::uword i = 0; i < m.n_elem; ++i)
        out[i] = m(i).imag();
    return out;
}
} // namespace

json to_json(const arma::vec &v)
{
    return json(arma::conv_to<std::vector<double>>::from(v));
}

json to_json(const arma::mat &m)
{
    return json{{"rows", m.n_rows}, {"cols", m.n_cols}, {"data", std::vector<double>(m.begin(), m.end())}};
}

json to_json(const arma::cx_vec &v)
{
    return to_json(arma::cx_mat(v));
}

json to_json(const arma::cx_mat &m)
{
    return json{{"rows", m.n_rows}, {"cols", m.n_cols}, {"re", real_part(m)}, {"im", imag_part(m)}};
}

arma::vec vec_from_json(const json &j)
{
    return arma::vec(j.get<std::vector<double>>());
}

arma::mat mat_from_json(const json &j)
{
    const auto rows = j.at("rows").get<arma::uword>();
    const auto cols = j.at("cols").get<arma::uword>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != rows * cols)
        throw std::invalid_argument("mat_from_json: size mismatch");
    return arma::mat(data.data(), rows, cols);
}

arma::cx_mat cx_mat_from_json(const json &j)
{
    const auto rows = j.at("rows").get<arma::uword>();
    const auto cols = j.at("cols").get<arma::uword>();
    const auto re = j.at("re").get<std::vector<double>>();
    const auto im = j.at("im").get<std::vector<double>>();
    if (re.size() != rows * cols || im.size() != rows * cols)
        throw std::invalid_argument("cx_mat_from_json: size mismatch");
    arma::cx_mat m(rows, cols);
    for (arma::uword i = 0; i < m.n_elem; ++i)
        m(i) = {re[i], im[i]};
    return m;
}

arma::cx_vec cx_vec_from_json(const json &j)
{
    arma::cx_mat m = cx_mat_from_json(j);
    return arma::vectorise(m);
}

json to_json(const std::vector<std::vector<arma::uword>> &sets)
{
    json out = json::array();
    for (const auto &s : sets)
        out.push_back(s);
    return out;
}

std::vector<std::vector<arma::uword>> sets_from_json(const json &j)
{
    return j.get<std::vector<std::vector<arma::uword>>>();
}

} // namespace cfp::io
