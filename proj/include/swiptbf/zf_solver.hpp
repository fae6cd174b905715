// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <vector>

#include "swiptbf/errors.hpp"
#include "swiptbf/feasibility.hpp"
#include "swiptbf/model.hpp"

namespace swiptbf {

/// Orthonormal basis of null(H_k^H), computed from the SVD of H_k. H_k holds
/// the interfering channels as columns; an empty H_k (single user) yields the
/// identity.
inline MatrixXcd null_space_basis(const MatrixXcd& Hk, double rel_tol = kRankRelTol) {
    const int nt = static_cast<int>(Hk.rows());
    if (Hk.cols() == 0) return MatrixXcd::Identity(nt, nt);
    Eigen::JacobiSVD<MatrixXcd> svd(Hk, Eigen::ComputeFullU);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > rel_tol * sv[0]) ++rank;
    if (rank >= nt) throw NoNullSpaceError("null_space_basis: interferers span the whole space");
    return svd.matrixU().rightCols(nt - rank);
}

/// Unique root in (0, 1) of alpha/(1-rho) - beta/rho = 1, i.e. of
/// rho^2 + (alpha+beta-1) rho - beta = 0. Evaluated in the cancellation-free
/// branch: for alpha + beta > 1 the textbook "-b + sqrt(...)" form subtracts
/// nearly equal numbers when alpha is large, so the conjugate form is used.
inline double zf_ps_ratio(double alpha, double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("zf_ps_ratio: alpha and beta must be > 0");
    const double a = alpha + beta - 1.0;
    const double disc = std::sqrt(a * a + 4.0 * beta);
    return a > 0.0 ? 2.0 * beta / (a + disc) : 0.5 * (-a + disc);
}

/// 1 - rho for the same root, accurate even when beta >> alpha drives rho so
/// close to 1 that the complement of a double is all roundoff. Uses the
/// identity (alpha+beta+1)^2 - 4 alpha = (alpha-1)^2 + beta^2 + 2 beta (alpha+1),
/// whose right-hand side has no subtraction.
inline double zf_ps_complement(double alpha, double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("zf_ps_complement: alpha and beta must be > 0");
    const double disc = std::sqrt((alpha - 1.0) * (alpha - 1.0) + beta * beta +
                                  2.0 * beta * (alpha + 1.0));
    return 2.0 * alpha / (alpha + beta + 1.0 + disc);
}

/// Per-user closed-form ingredients of the zero-forcing solution.
struct ZfIntermediates {
    VectorXd alpha;                   // e_k / (zeta_k (gamma_k + 1) sigma_k^2)
    VectorXd beta;                    // gamma_k delta_k^2 / ((gamma_k + 1) sigma_k^2)
    std::vector<MatrixXcd> null_basis;  // U_k, orthonormal columns
    VectorXd effective_gain;          // ||U_k U_k^H h_k||^2
};

inline ZfIntermediates zf_intermediates(const SystemInstance& inst, const Targets& targets,
                                        double rel_tol = kRankRelTol) {
    const int K = inst.num_users;
    ZfIntermediates out;
    out.alpha.resize(K);
    out.beta.resize(K);
    out.effective_gain.resize(K);
    out.null_basis.reserve(K);
    for (int k = 0; k < K; ++k) {
        const double g1 = targets.sinr[k] + 1.0;
        out.alpha[k] = targets.harvest[k] / (inst.eh_efficiency[k] * g1 * inst.antenna_noise[k]);
        out.beta[k] = targets.sinr[k] * inst.id_noise[k] / (g1 * inst.antenna_noise[k]);
        MatrixXcd Hk(inst.num_antennas, K - 1);
        for (int j = 0, c = 0; j < K; ++j)
            if (j != k) Hk.col(c++) = inst.channels.col(j);
        out.null_basis.push_back(null_space_basis(Hk, rel_tol));
        const MatrixXcd& U = out.null_basis.back();
        out.effective_gain[k] = (U * (U.adjoint() * inst.channels.col(k))).squaredNorm();
    }
    return out;
}

/// Zero-forcing design: each beam lives in the null space of all other
/// users' channels, which decouples the problem into K scalar ones with a
/// closed-form PS ratio and power. Requires N_t >= K and full column rank.
inline JbpsSolution solve_zf(const SystemInstance& inst, const Targets& targets,
                             double rel_tol = kRankRelTol) {
    const int K = inst.num_users;
    if (targets.num_users() != K)
        throw std::invalid_argument("solve_zf: target count does not match the instance");
    if (inst.num_antennas < K)
        throw ZfInapplicable("ZF requires N_t >= K");
    if (effective_rank(inst.channels, rel_tol) < K)
        throw ZfInapplicable("ZF requires linearly independent channels");

    const ZfIntermediates zi = zf_intermediates(inst, targets, rel_tol);
    MatrixXcd V(inst.num_antennas, K);
    VectorXd rho(K);
    for (int k = 0; k < K; ++k) {
        rho[k] = zf_ps_ratio(zi.alpha[k], zi.beta[k]);
        const double tau =
            targets.sinr[k] * (inst.antenna_noise[k] + inst.id_noise[k] / rho[k]);
        const MatrixXcd& U = zi.null_basis[k];
        const VectorXcd proj = U * (U.adjoint() * inst.channels.col(k));
        V.col(k) = std::sqrt(tau) * proj / zi.effective_gain[k];
    }
    return make_solution(inst, std::move(V), std::move(rho), SolveMethod::ZeroForcing);
}

}  // namespace swiptbf
