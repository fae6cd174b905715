// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "swiptbf/units.hpp"

namespace swiptbf {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// Optimal receive power-splitting ratios are strictly interior, 0 < rho < 1.
// Metric evaluation accepts the whole open interval; solvers assert their
// outputs stay inside this guard band so interiority is checkable in
// floating point.
inline constexpr double kPsGuard = 1e-9;

/// Physical problem data for one multi-user MISO downlink: channel matrix,
/// per-user noise powers and energy-conversion efficiencies. Immutable after
/// construction; all powers in linear watts.
struct SystemInstance {
    int num_antennas = 0;       // N_t
    int num_users = 0;          // K
    MatrixXcd channels;         // N_t x K, column k is the conjugated channel h_k
    VectorXd antenna_noise;     // sigma_k^2 [W]
    VectorXd id_noise;          // delta_k^2 [W], added by the information decoder
    VectorXd eh_efficiency;     // zeta_k in (0, 1]

    SystemInstance() = default;

    SystemInstance(MatrixXcd H, VectorXd sigma2, VectorXd delta2, VectorXd zeta)
        : num_antennas(static_cast<int>(H.rows())),
          num_users(static_cast<int>(H.cols())),
          channels(std::move(H)),
          antenna_noise(std::move(sigma2)),
          id_noise(std::move(delta2)),
          eh_efficiency(std::move(zeta)) {
        if (num_antennas < 1 || num_users < 1)
            throw std::invalid_argument("SystemInstance: empty channel matrix");
        auto check_len = [this](const VectorXd& v, const char* what) {
            if (v.size() != num_users)
                throw std::invalid_argument(std::string("SystemInstance: ") + what +
                                            " length must equal the number of users");
        };
        check_len(antenna_noise, "antenna_noise");
        check_len(id_noise, "id_noise");
        check_len(eh_efficiency, "eh_efficiency");
        for (int k = 0; k < num_users; ++k) {
            if (!(antenna_noise[k] > 0.0) || !(id_noise[k] > 0.0))
                throw std::invalid_argument("SystemInstance: noise powers must be > 0");
            if (!(eh_efficiency[k] > 0.0) || eh_efficiency[k] > 1.0)
                throw std::invalid_argument("SystemInstance: eh_efficiency must lie in (0, 1]");
            if (channels.col(k).norm() == 0.0)
                throw std::invalid_argument("SystemInstance: channel column " +
                                            std::to_string(k) + " is all-zero");
        }
    }

    const VectorXcd channel(int k) const { return channels.col(k); }
};

/// Per-user SINR targets (linear, not dB) and harvested-power targets (watts).
struct Targets {
    VectorXd sinr;     // gamma_k > 0, linear
    VectorXd harvest;  // e_k > 0, watts

    Targets() = default;

    Targets(VectorXd gamma, VectorXd e) : sinr(std::move(gamma)), harvest(std::move(e)) {
        if (sinr.size() != harvest.size())
            throw std::invalid_argument("Targets: sinr and harvest lengths differ");
        for (Eigen::Index k = 0; k < sinr.size(); ++k)
            if (!(sinr[k] > 0.0) || !(harvest[k] > 0.0))
                throw std::invalid_argument("Targets: all entries must be > 0");
    }

    int num_users() const { return static_cast<int>(sinr.size()); }
};

enum class SolveMethod { SdrOptimal, ZeroForcing, SinrOptimal };

inline const char* method_name(SolveMethod m) {
    switch (m) {
        case SolveMethod::SdrOptimal: return "optimal";
        case SolveMethod::ZeroForcing: return "zf";
        case SolveMethod::SinrOptimal: return "sinr-opt";
    }
    return "?";
}

namespace detail {

inline void check_user_index(const SystemInstance& inst, int k) {
    if (k < 0 || k >= inst.num_users) throw std::out_of_range("user index out of range");
}

inline void check_ps_ratio(double rho) {
    if (!(rho > 0.0) || !(rho < 1.0))
        throw std::invalid_argument("ps ratio outside the open interval (0, 1)");
}

inline void check_dimensions(const SystemInstance& inst, const MatrixXcd& V, const VectorXd& rho) {
    if (V.rows() != inst.num_antennas || V.cols() != inst.num_users)
        throw std::invalid_argument("beamformer matrix dimensions do not match the instance");
    if (rho.size() != inst.num_users)
        throw std::invalid_argument("ps vector length does not match the instance");
}

}  // namespace detail

/// SINR at the information decoder of user k for beamformers V and PS
/// ratios rho:
///   rho_k |h_k^H v_k|^2 / (rho_k sum_{j != k} |h_k^H v_j|^2 + rho_k sigma_k^2 + delta_k^2)
inline double achieved_sinr(const SystemInstance& inst, const MatrixXcd& V, const VectorXd& rho,
                            int k) {
    detail::check_user_index(inst, k);
    detail::check_dimensions(inst, V, rho);
    detail::check_ps_ratio(rho[k]);
    const VectorXcd gains = V.adjoint() * inst.channels.col(k);  // gains[j] = v_j^H h_k
    double interference = 0.0;
    for (int j = 0; j < inst.num_users; ++j)
        if (j != k) interference += std::norm(gains[j]);
    const double signal = std::norm(gains[k]);
    return rho[k] * signal / (rho[k] * interference + rho[k] * inst.antenna_noise[k] + inst.id_noise[k]);
}

/// Power captured by the energy harvester of user k:
///   zeta_k (1 - rho_k) (sum_j |h_k^H v_j|^2 + sigma_k^2)
inline double harvested_power(const SystemInstance& inst, const MatrixXcd& V, const VectorXd& rho,
                              int k) {
    detail::check_user_index(inst, k);
    detail::check_dimensions(inst, V, rho);
    detail::check_ps_ratio(rho[k]);
    const double received = (V.adjoint() * inst.channels.col(k)).squaredNorm();
    return inst.eh_efficiency[k] * (1.0 - rho[k]) * (received + inst.antenna_noise[k]);
}

/// A candidate or solved design point: beamformers, PS ratios and the metrics
/// they achieve. Use make_solution() so the cached fields stay consistent
/// with the metric definitions.
struct JbpsSolution {
    MatrixXcd beamformers;     // N_t x K, column k is v_k [sqrt(W)]
    VectorXd ps_ratios;        // rho_k in (0, 1)
    double total_power = 0.0;  // sum_k ||v_k||^2 [W]
    SolveMethod method = SolveMethod::SdrOptimal;
    VectorXd per_user_sinr;    // achieved, linear
    VectorXd per_user_harvest; // achieved, watts
};

inline JbpsSolution make_solution(const SystemInstance& inst, MatrixXcd V, VectorXd rho,
                                  SolveMethod method) {
    detail::check_dimensions(inst, V, rho);
    JbpsSolution s;
    s.method = method;
    s.per_user_sinr.resize(inst.num_users);
    s.per_user_harvest.resize(inst.num_users);
    for (int k = 0; k < inst.num_users; ++k) {
        s.per_user_sinr[k] = achieved_sinr(inst, V, rho, k);
        s.per_user_harvest[k] = harvested_power(inst, V, rho, k);
    }
    s.total_power = V.squaredNorm();
    s.beamformers = std::move(V);
    s.ps_ratios = std::move(rho);
    return s;
}

/// Constraint slacks of a solution relative to its targets.
/// feasible <=> every slack >= -tolerance.
struct ConstraintReport {
    VectorXd sinr_slack;     // achieved/gamma_k - 1
    VectorXd harvest_slack;  // achieved/e_k - 1
    bool feasible = false;
    double tolerance = 0.0;
};

inline ConstraintReport check_solution(const SystemInstance& inst, const Targets& targets,
                                       const JbpsSolution& sol, double tol = 1e-6) {
    detail::check_dimensions(inst, sol.beamformers, sol.ps_ratios);
    if (targets.num_users() != inst.num_users)
        throw std::invalid_argument("check_solution: target count does not match the instance");
    ConstraintReport rep;
    rep.tolerance = tol;
    rep.sinr_slack.resize(inst.num_users);
    rep.harvest_slack.resize(inst.num_users);
    rep.feasible = true;
    for (int k = 0; k < inst.num_users; ++k) {
        rep.sinr_slack[k] =
            achieved_sinr(inst, sol.beamformers, sol.ps_ratios, k) / targets.sinr[k] - 1.0;
        rep.harvest_slack[k] =
            harvested_power(inst, sol.beamformers, sol.ps_ratios, k) / targets.harvest[k] - 1.0;
        if (rep.sinr_slack[k] < -tol || rep.harvest_slack[k] < -tol) rep.feasible = false;
    }
    return rep;
}

inline double max_violation(const ConstraintReport& rep) {
    double v = 0.0;
    for (Eigen::Index k = 0; k < rep.sinr_slack.size(); ++k) {
        v = std::max(v, -rep.sinr_slack[k]);
        v = std::max(v, -rep.harvest_slack[k]);
    }
    return std::max(v, 0.0);
}

}  // namespace swiptbf
