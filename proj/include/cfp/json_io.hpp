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

#ifndef CFP_JSON_IO_HPP
#define CFP_JSON_IO_HPP

#include <armadillo>
#include <json.hpp>

#include <vector>

// Conversions between Armadillo containers and JSON. Doubles are written with
// round-trip precision, so import(export(x)) reproduces x bit for bit.
namespace cfp::io
{

using json = nlohmann::json;

json to_json(const arma::vec &v);
json to_json(const arma::mat &m);
json to_json(const arma::cx_vec &v);
json to_json(const arma::cx_mat &m);

arma::vec vec_from_json(const json &j);
arma::mat mat_from_json(const json &j);
arma::cx_vec cx_vec_from_json(const json &j);
arma::cx_mat cx_mat_from_json(const json &j);

json to_json(const std::vector<std::vector<arma::uword>> &sets);
std::vector<std::vector<arma::uword>> sets_from_json(const json &j);

} // namespace cfp::io

#endif
