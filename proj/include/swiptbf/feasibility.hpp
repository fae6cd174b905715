// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <stdexcept>

#include "swiptbf/model.hpp"

namespace swiptbf {

inline constexpr double kRankRelTol = 1e-10;

/// Number of singular values above rel_tol times the largest one.
inline int effective_rank(const MatrixXcd& H, double rel_tol = kRankRelTol) {
    if (H.size() == 0 || H.norm() == 0.0)
        throw std::invalid_argument("effective_rank: matrix is zero");
    Eigen::JacobiSVD<MatrixXcd> svd(H);
    const auto& sv = svd.singularValues();
    const double cutoff = rel_tol * sv[0];
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > cutoff) ++rank;
    return rank;
}

struct FeasibilityReport {
    bool feasible = false;
    double margin = 0.0;      // rank(H) - sum_k gamma_k / (1 + gamma_k)
    int rank = 0;
    double target_load = 0.0; // sum_k gamma_k / (1 + gamma_k)
};

/// Exact feasibility test for the joint beamforming / power-splitting
/// problem: feasible iff sum_k gamma_k/(1+gamma_k) <= rank(H). The harvest
/// targets do not enter; feasibility depends on the SINR targets alone.
/// The boundary (margin == 0) counts as feasible, though solvers may only
/// approach such targets asymptotically in power.
inline FeasibilityReport is_feasible(const VectorXd& sinr_targets, const MatrixXcd& H,
                                     double rel_tol = kRankRelTol) {
    for (Eigen::Index k = 0; k < sinr_targets.size(); ++k)
        if (!(sinr_targets[k] > 0.0))
            throw std::invalid_argument("is_feasible: SINR targets must be > 0");
    FeasibilityReport rep;
    rep.rank = effective_rank(H, rel_tol);
    rep.target_load = 0.0;
    for (Eigen::Index k = 0; k < sinr_targets.size(); ++k)
        rep.target_load += sinr_targets[k] / (1.0 + sinr_targets[k]);
    rep.margin = rep.rank - rep.target_load;
    rep.feasible = rep.margin >= 0.0;
    return rep;
}

}  // namespace swiptbf
