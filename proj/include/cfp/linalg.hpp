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

#ifndef CFP_LINALG_HPP
#define CFP_LINALG_HPP

#include <armadillo>

namespace cfp
{

// Rows of AP l inside a stacked NL-dimensional vector or NL x K matrix.
inline arma::span ap_rows(arma::uword l, arma::uword N)
{
    return arma::span(l * N, l * N + N - 1);
}

// Principal square root of a symmetric PSD matrix. Negative eigenvalues from
// rounding are clipped at zero.
arma::mat symmetric_sqrt(const arma::mat &A);

// Principal square root of a Hermitian PSD matrix, same clipping rule.
arma::cx_mat hermitian_sqrt(const arma::cx_mat &A);

double min_eigenvalue(const arma::cx_mat &A);

// Solves A X = B for Hermitian positive definite A using an in-place Cholesky
// factorization. The matrices here are small (at most N|L_k| or K|L_k|), so
// this avoids the LAPACK call overhead. Throws std::runtime_error when A is
// not numerically positive definite or the relative residual exceeds 1e-10.
arma::cx_mat solve_hpd(const arma::cx_mat &A, const arma::cx_mat &B);
arma::cx_vec solve_hpd(const arma::cx_mat &A, const arma::cx_vec &b);

// Dense LU solve with reciprocal condition number. Returns false when the
// system is singular to working precision.
bool solve_general(const arma::cx_mat &A, const arma::cx_mat &B, arma::cx_mat &X, double &rcond);
bool solve_general(const arma::mat &A, const arma::vec &b, arma::vec &x, double &rcond);

} // namespace cfp

#endif
