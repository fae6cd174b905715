// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace swiptbf {

// Real coordinates for the space of n x n Hermitian matrices, orthonormal
// under <A, B> = Re tr(A B): the n diagonal entries first, then for each
// pair i < j the components sqrt(2) Re X_ij and sqrt(2) Im X_ij. With this
// layout tr(A B) = vec(A) . vec(B) and tr(X) is the sum of the first n
// coordinates.

inline int hermitian_vec_dim(int n) { return n * n; }

inline Eigen::VectorXd hermitian_to_vec(const Eigen::MatrixXcd& X) {
    const int n = static_cast<int>(X.rows());
    Eigen::VectorXd v(n * n);
    for (int i = 0; i < n; ++i) v[i] = X(i, i).real();
    int p = n;
    const double s = std::sqrt(2.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            v[p++] = s * X(i, j).real();
            v[p++] = s * X(i, j).imag();
        }
    return v;
}

inline Eigen::MatrixXcd vec_to_hermitian(const Eigen::VectorXd& v, int n) {
    Eigen::MatrixXcd X(n, n);
    for (int i = 0; i < n; ++i) X(i, i) = v[i];
    int p = n;
    const double s = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double re = s * v[p++];
            const double im = s * v[p++];
            X(i, j) = {re, im};
            X(j, i) = {re, -im};
        }
    return X;
}

}  // namespace swiptbf
