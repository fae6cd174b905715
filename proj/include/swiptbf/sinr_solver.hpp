// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>

#include "swiptbf/errors.hpp"
#include "swiptbf/model.hpp"

namespace swiptbf {

struct SinrOnlyOptions {
    double tol = 1e-12;        // relative change in sum(q) ending the fixed point
    int max_iterations = 500;  // typical runs take 10-50
    double tightness_tol = 1e-8;
};

struct SinrOnlyResult {
    MatrixXcd beamformers;  // v_hat_k, columns
    VectorXd uplink_powers; // fixed-point multipliers q_k (normalized units)
    int iterations = 0;
};

/// Minimum-power beamforming under SINR constraints alone (receive noise
/// sigma_k^2 + delta_k^2, no power splitting), via the uplink-downlink
/// duality fixed point:
///
///   q_k <- gamma_k / (h_k^H (I + sum_{j != k} q_j h_j h_j^H)^{-1} h_k)
///
/// with the uplink noise covariance normalized to the identity (the user
/// noise powers enter only the downlink power system below). At the fixed
/// point the downlink directions are the normalized MMSE vectors
/// (I + sum_j q_j h_j h_j^H)^{-1} h_k and the downlink powers solve the
/// K x K linear system that makes every SINR constraint tight.
inline SinrOnlyResult solve_sinr_only(const SystemInstance& inst, const VectorXd& gamma,
                                      const SinrOnlyOptions& opt = {}) {
    const int nt = inst.num_antennas;
    const int K = inst.num_users;
    if (gamma.size() != K)
        throw std::invalid_argument("solve_sinr_only: target count does not match the instance");

    // Channels normalized to unit norm for conditioning; q absorbs the scale.
    MatrixXcd Hn(nt, K);
    VectorXd hnorm2(K);
    for (int k = 0; k < K; ++k) {
        hnorm2[k] = inst.channels.col(k).squaredNorm();
        Hn.col(k) = inst.channels.col(k) / std::sqrt(hnorm2[k]);
    }

    VectorXd q = VectorXd::Zero(K);
    double sum_prev = 0.0;
    int it = 0;
    bool converged = false;
    for (; it < opt.max_iterations; ++it) {
        MatrixXcd Sigma = MatrixXcd::Identity(nt, nt);
        for (int j = 0; j < K; ++j) Sigma += q[j] * Hn.col(j) * Hn.col(j).adjoint();
        Eigen::LLT<MatrixXcd> llt(Sigma);
        if (llt.info() != Eigen::Success)
            throw NumericalFailureError("solve_sinr_only: uplink covariance not PD");
        const MatrixXcd Sinv_H = llt.solve(Hn);
        for (int k = 0; k < K; ++k) {
            // h^H Sigma_{-k}^{-1} h from the full inverse via Sherman-Morrison.
            const double a = (Hn.col(k).adjoint() * Sinv_H.col(k)).real().value();
            const double denom = a / std::max(1.0 - q[k] * a, 1e-300);
            q[k] = gamma[k] / denom;
        }
        const double sum_q = q.sum();
        if (it > 0 && std::abs(sum_q - sum_prev) <= opt.tol * sum_q) {
            converged = true;
            ++it;
            break;
        }
        sum_prev = sum_q;
    }
    if (!converged)
        throw NotConvergedError("solve_sinr_only: duality fixed point did not converge (" +
                                std::to_string(opt.max_iterations) + " iterations)");

    // MMSE downlink directions at the fixed point.
    MatrixXcd Sigma = MatrixXcd::Identity(nt, nt);
    for (int j = 0; j < K; ++j) Sigma += q[j] * Hn.col(j) * Hn.col(j).adjoint();
    MatrixXcd U = Sigma.llt().solve(Hn);
    for (int k = 0; k < K; ++k) U.col(k).normalize();

    // Downlink powers forcing SINR equality: (1/gamma_k) p_k |h_k^H u_k|^2
    // - sum_{j != k} p_j |h_k^H u_j|^2 = sigma_k^2 + delta_k^2.
    Eigen::MatrixXd M(K, K);
    VectorXd noise(K);
    for (int k = 0; k < K; ++k) {
        noise[k] = inst.antenna_noise[k] + inst.id_noise[k];
        for (int j = 0; j < K; ++j) {
            const double g = std::norm((inst.channels.col(k).adjoint() * U.col(j)).value());
            M(k, j) = (j == k) ? g / gamma[k] : -g;
        }
    }
    const VectorXd p = M.partialPivLu().solve(noise);
    for (int k = 0; k < K; ++k)
        if (!(p[k] > 0.0))
            throw NumericalFailureError("solve_sinr_only: nonpositive downlink power");

    SinrOnlyResult res;
    res.beamformers = U * p.cwiseSqrt().asDiagonal();
    res.uplink_powers = std::move(q);
    res.iterations = it;

    // Tightness is the convergence contract; verify it on the way out.
    const VectorXd ones = VectorXd::Ones(K);
    for (int k = 0; k < K; ++k) {
        const VectorXcd gains = res.beamformers.adjoint() * inst.channels.col(k);
        double interference = 0.0;
        for (int j = 0; j < K; ++j)
            if (j != k) interference += std::norm(gains[j]);
        const double sinr = std::norm(gains[k]) / (interference + noise[k]);
        if (std::abs(sinr / gamma[k] - 1.0) > opt.tightness_tol)
            throw NotConvergedError("solve_sinr_only: SINR constraints not tight after convergence");
    }
    (void)ones;
    return res;
}

/// Quantities behind the common-scaling step: with SINR-optimal beams fixed,
/// scaling them by sqrt(alpha) and re-splitting power admits a per-user
/// quadratic whose largest root bounds the feasible alpha from below.
struct ScalingIntermediates {
    VectorXd c;          // |h_k^H v_k|^2 / gamma_k - interference   [W]
    VectorXd d;          // total received beam power at user k      [W]
    VectorXd alpha_bar;  // largest root of g_k(alpha) = 1, each > 1
    double alpha_star = 0.0;  // max_k alpha_bar_k
};

/// g_k(alpha) = delta_k^2/(alpha c_k - sigma_k^2) + e_k/(zeta_k (alpha d_k + sigma_k^2)).
inline double scaling_g(double c, double d, double sigma2, double delta2, double e, double zeta,
                        double alpha) {
    return delta2 / (alpha * c - sigma2) + e / (zeta * (alpha * d + sigma2));
}

inline ScalingIntermediates scaling_roots(const SystemInstance& inst, const Targets& targets,
                                          const MatrixXcd& Vhat) {
    const int K = inst.num_users;
    ScalingIntermediates out;
    out.c.resize(K);
    out.d.resize(K);
    out.alpha_bar.resize(K);
    for (int k = 0; k < K; ++k) {
        const VectorXcd gains = Vhat.adjoint() * inst.channels.col(k);
        double interference = 0.0, total = 0.0;
        for (int j = 0; j < K; ++j) {
            total += std::norm(gains[j]);
            if (j != k) interference += std::norm(gains[j]);
        }
        out.c[k] = std::norm(gains[k]) / targets.sinr[k] - interference;
        out.d[k] = total;
        if (!(out.c[k] > 0.0))
            throw DegenerateQuadratic("scaling_roots: c_k <= 0; beamformers do not meet target");

        const double sigma2 = inst.antenna_noise[k];
        const double delta2 = inst.id_noise[k];
        const double e = targets.harvest[k];
        const double zeta = inst.eh_efficiency[k];
        const double c = out.c[k], d = out.d[k];

        // g_k(alpha) = 1 expands to a quadratic; take the larger root with
        // the cancellation-free formula, then fall back to bisection if the
        // coefficients lost precision (parameters span ~10 decades).
        const double a2 = zeta * c * d;
        const double a1 = zeta * sigma2 * (c - d) - zeta * delta2 * d - e * c;
        const double a0 = sigma2 * (e - zeta * sigma2 - zeta * delta2);
        double root = 0.0;
        const double disc = a1 * a1 - 4.0 * a2 * a0;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            const double qq = -0.5 * (a1 + (a1 >= 0.0 ? sq : -sq));
            root = std::max(qq / a2, a0 != 0.0 ? a0 / qq : 0.0);
        }
        const auto g = [&](double alpha) { return scaling_g(c, d, sigma2, delta2, e, zeta, alpha); };
        if (!(root > 1.0) || !(std::abs(g(root) - 1.0) <= 1e-10)) {
            double hi = 2.0;
            while (g(hi) > 1.0) {
                hi *= 2.0;
                if (hi > 1e30)
                    throw DegenerateQuadratic("scaling_roots: no root with g <= 1 found");
            }
            double lo = 1.0;
            for (int i = 0; i < 200 && (hi - lo) > 1e-15 * hi; ++i) {
                const double mid = 0.5 * (lo + hi);
                (g(mid) > 1.0 ? lo : hi) = mid;
            }
            root = hi;
        }
        out.alpha_bar[k] = root;
    }
    out.alpha_star = out.alpha_bar.maxCoeff();
    return out;
}

/// SINR-optimal suboptimal design: duality beams, then one common power
/// scale plus per-user PS ratios chosen so every user meets both targets.
inline JbpsSolution solve_sinr_opt(const SystemInstance& inst, const Targets& targets,
                                   const SinrOnlyOptions& opt = {}) {
    const SinrOnlyResult so = solve_sinr_only(inst, targets.sinr, opt);
    const ScalingIntermediates sc = scaling_roots(inst, targets, so.beamformers);
    const double alpha = sc.alpha_star;
    VectorXd rho(inst.num_users);
    for (int k = 0; k < inst.num_users; ++k) {
        rho[k] = inst.id_noise[k] / (alpha * sc.c[k] - inst.antenna_noise[k]);
        if (!(rho[k] > 0.0) || !(rho[k] < 1.0))
            throw NumericalFailureError("solve_sinr_opt: PS ratio escaped (0, 1)");
    }
    return make_solution(inst, std::sqrt(alpha) * so.beamformers, std::move(rho),
                         SolveMethod::SinrOptimal);
}

}  // namespace swiptbf
