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

#include "cfp/linalg.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace cfp
{

arma::mat symmetric_sqrt(const arma::mat &A)
{
    arma::vec eigval;
    arma::mat eigvec;
    if (!arma::eig_sym(eigval, eigvec, 0.5 * (A + A.t())))
        throw std::runtime_error("symmetric_sqrt: eigendecomposition failed");
    eigval = arma::sqrt(arma::clamp(eigval, 0.0, arma::datum::inf));
    return eigvec * arma::diagmat(eigval) * eigvec.t();
}

arma::cx_mat hermitian_sqrt(const arma::cx_mat &A)
{
    arma::vec eigval;
    arma::cx_mat eigvec;
    if (!arma::eig_sym(eigval, eigvec, arma::cx_mat(0.5 * (A + A.t()))))
        throw std::runtime_error("hermitian_sqrt: eigendecomposition failed");
    eigval = arma::sqrt(arma::clamp(eigval, 0.0, arma::datum::inf));
    return eigvec * arma::diagmat(arma::conv_to<arma::cx_vec>::from(eigval)) * eigvec.t();
}

double min_eigenvalue(const arma::cx_mat &A)
{
    if (A.is_empty())
        return 0.0;
    arma::vec eigval = arma::eig_sym(arma::cx_mat(0.5 * (A + A.t())));
    return eigval.min();
}

arma::cx_mat solve_hpd(const arma::cx_mat &A, const arma::cx_mat &B)
{
    using cx = std::complex<double>;
    const arma::uword n = A.n_rows;
    if (A.n_cols != n || B.n_rows != n)
        throw std::invalid_argument("solve_hpd: dimension mismatch");

    // Lower Cholesky factor, column-major like A.
    arma::cx_mat Lf(n, n, arma::fill::zeros);
    for (arma::uword j = 0; j < n; ++j)
    {
        double d = std::real(A(j, j));
        for (arma::uword k = 0; k < j; ++k)
            d -= std::norm(Lf(j, k));
        if (!(d > 0.0) || !std::isfinite(d))
            throw std::runtime_error("solve_hpd: matrix is not positive definite");
        const double djj = std::sqrt(d);
        Lf(j, j) = djj;
        for (arma::uword i = j + 1; i < n; ++i)
        {
            cx s = A(i, j);
            for (arma::uword k = 0; k < j; ++k)
                s -= Lf(i, k) * std::conj(Lf(j, k));
            Lf(i, j) = s / djj;
        }
    }

    arma::cx_mat X = B;
    for (arma::uword c = 0; c < X.n_cols; ++c)
    {
        cx *x = X.colptr(c);
        for (arma::uword i = 0; i < n; ++i) // forward: L y = b
        {
            cx s = x[i];
            for (arma::uword k = 0; k < i; ++k)
                s -= Lf(i, k) * x[k];
            x[i] = s / Lf(i, i);
        }
        for (arma::uword ii = n; ii-- > 0;) // backward: L^H x = y
        {
            cx s = x[ii];
            for (arma::uword k = ii + 1; k < n; ++k)
                s -= std::conj(Lf(k, ii)) * x[k];
            x[ii] = s / Lf(ii, ii);
        }
    }

    const double scale = arma::norm(A, "fro") * arma::norm(X, "fro") + arma::norm(B, "fro");
    if (scale > 0.0 && arma::norm(A * X - B, "fro") > 1e-10 * scale)
        throw std::runtime_error("solve_hpd: relative residual above 1e-10");
    return X;
}

arma::cx_vec solve_hpd(const arma::cx_mat &A, const arma::cx_vec &b)
{
    return arma::cx_vec(solve_hpd(A, arma::cx_mat(b)).col(0));
}

bool solve_general(const arma::cx_mat &A, const arma::cx_mat &B, arma::cx_mat &X, double &rcond)
{
    rcond = arma::rcond(A);
    if (!(rcond > 1e-15))
        return false;
    return arma::solve(X, A, B, arma::solve_opts::no_approx);
}

bool solve_general(const arma::mat &A, const arma::vec &b, arma::vec &x, double &rcond)
{
    rcond = arma::rcond(A);
    if (!(rcond > 1e-15))
        return false;
    return arma::solve(x, A, b, arma::solve_opts::no_approx);
}

} // namespace cfp
