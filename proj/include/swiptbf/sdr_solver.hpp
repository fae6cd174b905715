// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#ifdef SWIPTBF_BARRIER_TRACE
#include <cstdio>
#endif
#include <string>
#include <utility>
#include <vector>

#include "swiptbf/errors.hpp"
#include "swiptbf/feasibility.hpp"
#include "swiptbf/hermitian.hpp"
#include "swiptbf/model.hpp"
#include "swiptbf/sinr_solver.hpp"
#include "swiptbf/zf_solver.hpp"

namespace swiptbf {

struct SdrSolveOptions {
    double kkt_tol = 1e-8;       // relative duality-gap and tightness target
    double rank_one_tol = 1e-6;  // lambda2/lambda1 cap at beamformer extraction
    int max_iterations = 200;    // total Newton iterations across all barrier stages
    double t_initial = 0.0;      // barrier parameter; 0 = nu / f(start)
    double t_increase = 10.0;    // multiplier per outer stage
    double center_tol = 1e-12;   // squared Newton decrement ending a centering
    int max_center_iterations = 60;
    // Bound on the relative constraint slack of the returned point. The
    // barrier phase saturates near its rounding floor; the tightness polish
    // then lands both constraint families on equality (residuals ~1e-13).
    // Solves that still exceed this bound are a NumericalFailure.
    double tightness_accept = 1e-6;
    // Test hook: pin every rho_k to this value and optimize the covariances
    // only (0 disables). Used to cross-check the SINR-only solver.
    double fixed_ps_ratio = 0.0;
};

enum class SdrStatus { Optimal, Infeasible, NumericalFailure };

inline const char* to_string(SdrStatus s) {
    switch (s) {
        case SdrStatus::Optimal: return "optimal";
        case SdrStatus::Infeasible: return "infeasible";
        case SdrStatus::NumericalFailure: return "numerical-failure";
    }
    return "?";
}

/// Dual variables and residuals backing an optimality claim. lambda_k / mu_k
/// multiply the SINR / harvest constraints; the dual matrices
///   A_k = I + sum_j (lambda_j - mu_j) h_j h_j^H - (lambda_k/gamma_k + lambda_k) h_k h_k^H
/// must be PSD with A_k X_k = 0 at the optimum, and dual_objective is a
/// valid lower bound on the total transmit power whenever every A_k is PSD.
struct KktCertificate {
    VectorXd lambda;  // SINR duals, > 0
    VectorXd mu;      // harvest duals, > 0
    std::vector<MatrixXcd> dual_matrices;  // A_k rebuilt from (lambda, mu)
    double stationarity = 0.0;     // rho-stationarity residual, relative
    double complementarity = 0.0;  // max_k ||A_k X_k||_F / (1 + ||X_k||_F)
    double psd_violation = 0.0;    // max_k max(0, -lambda_min(A_k))
    double tightness = 0.0;        // max relative slack over both constraint families
    double dual_objective = 0.0;   // watts, lower bound on the optimum
};

struct SdrRelaxationSolution {
    std::vector<MatrixXcd> X;  // transmit covariances, watts
    VectorXd ps_ratios;
    double objective = 0.0;  // sum_k tr(X_k), watts
    SdrStatus status = SdrStatus::NumericalFailure;
    std::string message;
    int newton_iterations = 0;
    KktCertificate certificate;
};

/// Rebuild the dual matrix A_k from the multipliers.
inline MatrixXcd sdr_dual_matrix(const SystemInstance& inst, const Targets& targets,
                                 const VectorXd& lambda, const VectorXd& mu, int k) {
    const int nt = inst.num_antennas;
    MatrixXcd A = MatrixXcd::Identity(nt, nt);
    for (int j = 0; j < inst.num_users; ++j)
        A += (lambda[j] - mu[j]) * inst.channels.col(j) * inst.channels.col(j).adjoint();
    A -= (lambda[k] / targets.sinr[k] + lambda[k]) * inst.channels.col(k) *
         inst.channels.col(k).adjoint();
    return A;
}

/// Relative slacks of the relaxed constraints at (X, rho): the SINR slack is
/// measured against the achieved interference-plus-noise, the harvest slack
/// against the required receive power. Both are >= 0 at a feasible point and
/// ~0 at the optimum.
struct RelaxationSlacks {
    VectorXd sinr_rel, harvest_rel;
};

inline RelaxationSlacks relaxation_slacks(const SystemInstance& inst, const Targets& targets,
                                          const std::vector<MatrixXcd>& X,
                                          const VectorXd& rho) {
    const int K = inst.num_users;
    RelaxationSlacks out;
    out.sinr_rel.resize(K);
    out.harvest_rel.resize(K);
    for (int k = 0; k < K; ++k) {
        double own = 0.0, interf = 0.0, total = 0.0;
        for (int j = 0; j < K; ++j) {
            const double q = (inst.channels.col(k).adjoint() * X[j] * inst.channels.col(k))
                                 .value()
                                 .real();
            total += q;
            if (j == k)
                own = q;
            else
                interf += q;
        }
        const double noise = inst.antenna_noise[k] + inst.id_noise[k] / rho[k];
        out.sinr_rel[k] = (own / targets.sinr[k] - interf - noise) / (interf + noise);
        const double s2 = total + inst.antenna_noise[k] -
                          targets.harvest[k] / (inst.eh_efficiency[k] * (1.0 - rho[k]));
        out.harvest_rel[k] = s2 * inst.eh_efficiency[k] * (1.0 - rho[k]) / targets.harvest[k];
    }
    return out;
}

namespace detail {

/// Interior-point core for the relaxed problem, in scaled units: channels
/// divided by s_H (rms column norm), powers by s_P (mean receive noise),
/// which keeps iterates near unit scale. Covariances map back as
/// X = X_s * s_P / s_H^2 and duals as lambda = lambda_s / s_H^2.
///
/// Primal path-following log barrier over the joint variables ({X_k}, {rho_k}):
///   -sum_k log det X_k - sum_k [log rho_k + log(1 - rho_k)]
///   -sum_k [log s1_k + log s2_k]
/// with s1/s2 the SINR / harvest constraint slacks. Complex arithmetic is
/// native; each Newton system is posed in Cholesky-whitened coordinates
/// dX_hat = L^{-1} dX L^{-H}, where the log-det Hessian is the identity and
/// the constraint curvature a rank-2K update, so a step costs one (2K x 2K)
/// Woodbury solve instead of a dense factorization in K N_t^2 + K unknowns.
class JbpsBarrier {
  public:
    struct Slacks {
        Eigen::MatrixXd Q;  // Q(k, j) = h_k^H X_j h_k
        VectorXd s1, s2;
        bool positive = false;
    };

    struct Result {
        SdrStatus status = SdrStatus::NumericalFailure;
        std::string message;
        std::vector<MatrixXcd> X;  // scaled
        VectorXd rho;
        VectorXd lambda, mu;  // scaled duals
        int newton_iterations = 0;
        double final_t = 0.0;
    };

    JbpsBarrier(std::vector<VectorXcd> h, VectorXd sigma2, VectorXd delta2, VectorXd zeta,
                VectorXd gamma, VectorXd e, const SdrSolveOptions& opt)
        : h_(std::move(h)),
          sigma2_(std::move(sigma2)),
          delta2_(std::move(delta2)),
          zeta_(std::move(zeta)),
          gamma_(std::move(gamma)),
          e_(std::move(e)),
          opt_(opt),
          K_(static_cast<int>(h_.size())),
          n_(static_cast<int>(h_[0].size())),
          nv_(n_ * n_),
          nz_(K_ * nv_ + K_),
          fixed_ps_(opt.fixed_ps_ratio > 0.0) {
        nu_ = static_cast<double>(K_) * (n_ + (fixed_ps_ ? 2 : 4));
    }

    Slacks slacks(const std::vector<MatrixXcd>& X, const VectorXd& rho) const {
        Slacks sl;
        sl.Q.resize(K_, K_);
        sl.s1.resize(K_);
        sl.s2.resize(K_);
        for (int k = 0; k < K_; ++k)
            for (int j = 0; j < K_; ++j)
                sl.Q(k, j) = (h_[k].adjoint() * X[j] * h_[k]).value().real();
        sl.positive = true;
        for (int k = 0; k < K_; ++k) {
            double sum = 0.0, interf = 0.0;
            for (int j = 0; j < K_; ++j) {
                sum += sl.Q(k, j);
                if (j != k) interf += sl.Q(k, j);
            }
            sl.s1[k] = sl.Q(k, k) / gamma_[k] - interf - sigma2_[k] - delta2_[k] / rho[k];
            sl.s2[k] = sum + sigma2_[k] - e_[k] / (zeta_[k] * (1.0 - rho[k]));
            if (!(sl.s1[k] > 0.0) || !(sl.s2[k] > 0.0)) sl.positive = false;
        }
        return sl;
    }

    bool strictly_feasible(const std::vector<MatrixXcd>& X, const VectorXd& rho) const {
        return rho_interior(rho) && all_pd(X) && slacks(X, rho).positive;
    }

    /// Barrier value t * f0 + Phi, or ok = false outside the domain.
    double barrier_value(double t, const std::vector<MatrixXcd>& X, const VectorXd& rho,
                         bool& ok) const {
        ok = false;
        if (!rho_interior(rho)) return 0.0;
        double value = 0.0;
        for (const auto& Xk : X) {
            Eigen::LLT<MatrixXcd> llt(Xk);
            if (llt.info() != Eigen::Success) return 0.0;
            value += t * Xk.real().trace();
            for (int i = 0; i < n_; ++i)
                value -= 2.0 * std::log(MatrixXcd(llt.matrixL())(i, i).real());
        }
        const Slacks sl = slacks(X, rho);
        if (!sl.positive) return 0.0;
        for (int k = 0; k < K_; ++k) {
            value -= std::log(sl.s1[k]) + std::log(sl.s2[k]);
            if (!fixed_ps_) value -= std::log(rho[k]) + std::log(1.0 - rho[k]);
        }
        ok = true;
        return value;
    }

    Result run(std::vector<MatrixXcd> X, VectorXd rho) {
        Result res;
        if (!strictly_feasible(X, rho)) {
            res.message = "starting point is not strictly feasible";
            return res;
        }
        double f0 = 0.0;
        for (const auto& Xk : X) f0 += Xk.real().trace();
        double t = opt_.t_initial > 0.0 ? opt_.t_initial : nu_ / f0;

        int newton_total = 0;
        double best_slack = std::numeric_limits<double>::infinity();
        int stalled_stages = 0;
        for (int outer = 0; outer < 200; ++outer) {
            bool centered = false;
            // Damped Newton while the decrement is large; full steps inside
            // the quadratic-convergence region. No objective line search is
            // needed for a self-concordant barrier, which also avoids
            // comparing barrier values that exceed double resolution at
            // large t.
            for (int inner = 0; inner < opt_.max_center_iterations; ++inner) {
                if (newton_total >= opt_.max_iterations) {
                    res.message = "Newton iteration cap reached";
                    res.newton_iterations = newton_total;
                    return res;
                }
                Step st;
                if (!newton_step(t, X, rho, st)) {
                    res.message = "Newton system could not be formed (loss of positivity)";
                    res.newton_iterations = newton_total;
                    return res;
                }
                if (st.decrement2 <= opt_.center_tol) {
                    centered = true;
                    break;
                }
#ifdef SWIPTBF_BARRIER_TRACE
                std::fprintf(stderr, "  inner=%d dec2=%.3e\n", inner, st.decrement2);
#endif
                const double lambda_nt = std::sqrt(std::max(st.decrement2, 0.0));
                // Inside the quadratic region a full step needs no objective
                // test (and barrier values at large t exceed double
                // resolution anyway); farther out, backtrack with Armijo.
                const bool check_descent = lambda_nt > 0.25;
                bool f0_ok = false;
                const double f_cur = check_descent ? barrier_value(t, X, rho, f0_ok) : 0.0;
                bool moved = false;
                std::vector<MatrixXcd> Xt(K_);
                VectorXd rhot;
                for (double alpha = 1.0; alpha > 1e-14; alpha *= 0.5) {
                    for (int k = 0; k < K_; ++k) Xt[k] = X[k] + alpha * st.dX[k];
                    rhot = rho + alpha * st.drho;
                    if (check_descent && f0_ok) {
                        bool ok = false;
                        const double f_trial = barrier_value(t, Xt, rhot, ok);
                        if (!ok || f_trial > f_cur - 0.1 * alpha * st.decrement2) continue;
                    } else if (!strictly_feasible(Xt, rhot)) {
                        continue;
                    }
                    moved = true;
                    break;
                }
                if (!moved) {
                    // Cannot move in floating point; accept if already well
                    // centered, otherwise fail honestly.
#ifdef SWIPTBF_BARRIER_TRACE
                    std::fprintf(stderr, "stall: t=%.3e dec2=%.3e inner=%d\n", t, st.decrement2,
                                 inner);
#endif
                    if (st.decrement2 <= 1e-6) {
                        centered = true;
                        break;
                    }
                    res.message = "step search stalled away from the central path";
                    res.newton_iterations = newton_total;
                    return res;
                }
                X.swap(Xt);
                rho.swap(rhot);
                ++newton_total;
            }
            if (!centered) {
                res.message = "centering did not converge";
                res.newton_iterations = newton_total;
                return res;
            }

            const Slacks sl = slacks(X, rho);
            double f = 0.0;
            for (const auto& Xk : X) f += Xk.real().trace();
            const double gap_rel = nu_ / (t * f);
            const double slack = max_rel_slack(sl, rho);
#ifdef SWIPTBF_BARRIER_TRACE
            std::fprintf(stderr, "t=%.3e f=%.6e gap_rel=%.3e slack=%.3e newton=%d\n", t, f,
                         gap_rel, slack, newton_total);
            for (int k = 0; k < K_; ++k)
                std::fprintf(stderr, "   k=%d s1=%.3e s2=%.3e rho=%.6e Qkk=%.3e\n", k, sl.s1[k],
                             sl.s2[k], rho[k], sl.Q(k, k));
#endif
            if (fixed_ps_ || slack < 0.5 * best_slack) {
                // Still tracking the central path: the multipliers 1/(t s)
                // are meaningful here. Past the rounding floor they go stale
                // because t keeps growing while the slacks freeze.
                best_slack = std::min(best_slack, slack);
                stalled_stages = 0;
                res.lambda = (t * sl.s1.array()).inverse().matrix();
                res.mu = (t * sl.s2.array()).inverse().matrix();
                res.final_t = t;
            } else {
                ++stalled_stages;
            }
            // Tightness follows ~1/t until rounding noise in the Newton
            // system takes over; detect the floor instead of driving t into
            // degeneracy. The caller restores exact tightness afterwards.
            const bool tight_done =
                fixed_ps_ || slack <= opt_.kkt_tol || stalled_stages >= 2;
            if (gap_rel <= opt_.kkt_tol && tight_done) {
                res.status = SdrStatus::Optimal;
                res.X = std::move(X);
                res.rho = std::move(rho);
                res.newton_iterations = newton_total;
                return res;
            }
            if (stalled_stages >= 6) {
                res.message = "constraint tightness saturated at " + std::to_string(best_slack) +
                              " before the duality gap closed";
                res.newton_iterations = newton_total;
                return res;
            }
            t *= opt_.t_increase;
            if (!(t < 1e60)) {
                res.message = "barrier parameter overflow before reaching tolerance";
                res.newton_iterations = newton_total;
                return res;
            }
        }
        res.message = "outer iteration cap reached";
        res.newton_iterations = newton_total;
        return res;
    }

    struct Step {
        std::vector<MatrixXcd> dX;
        VectorXd drho;
        double decrement2 = 0.0;
    };

  private:

  public:
    bool compute_step(double t, const std::vector<MatrixXcd>& X, const VectorXd& rho,
                      Step& st) const {
        return newton_step(t, X, rho, st);
    }

  private:
    double max_rel_slack(const Slacks& sl, const VectorXd& rho) const {
        double worst = 0.0;
        for (int k = 0; k < K_; ++k) {
            double interf = sigma2_[k] + delta2_[k] / rho[k];
            for (int j = 0; j < K_; ++j)
                if (j != k) interf += sl.Q(k, j);
            worst = std::max(worst, sl.s1[k] / interf);
            worst = std::max(worst, sl.s2[k] * zeta_[k] * (1.0 - rho[k]) / e_[k]);
        }
        return worst;
    }

    bool rho_interior(const VectorXd& rho) const {
        if (fixed_ps_) return true;
        for (int k = 0; k < K_; ++k)
            if (!(rho[k] > 1e-12) || !(rho[k] < 1.0 - 1e-12)) return false;
        return true;
    }

    static bool all_pd(const std::vector<MatrixXcd>& X) {
        for (const auto& Xk : X)
            if (Eigen::LLT<MatrixXcd>(Xk).info() != Eigen::Success) return false;
        return true;
    }

    bool newton_step(double t, const std::vector<MatrixXcd>& X, const VectorXd& rho,
                     Step& st) const {
        std::vector<MatrixXcd> L(K_);
        for (int k = 0; k < K_; ++k) {
            Eigen::LLT<MatrixXcd> llt(X[k]);
            if (llt.info() != Eigen::Success) return false;
            L[k] = llt.matrixL();
        }

        // y(k, j) = L_j^H h_k, so h_k^H X_j h_k = ||y(k, j)||^2.
        std::vector<std::vector<VectorXcd>> y(K_, std::vector<VectorXcd>(K_));
        Eigen::MatrixXd Q(K_, K_);
        for (int k = 0; k < K_; ++k)
            for (int j = 0; j < K_; ++j) {
                y[k][j] = L[j].adjoint() * h_[k];
                Q(k, j) = y[k][j].squaredNorm();
            }

        VectorXd s1(K_), s2(K_), a(K_), b(K_);
        for (int k = 0; k < K_; ++k) {
            double sum = 0.0, interf = 0.0;
            for (int j = 0; j < K_; ++j) {
                sum += Q(k, j);
                if (j != k) interf += Q(k, j);
            }
            s1[k] = Q(k, k) / gamma_[k] - interf - sigma2_[k] - delta2_[k] / rho[k];
            s2[k] = sum + sigma2_[k] - e_[k] / (zeta_[k] * (1.0 - rho[k]));
            if (!(s1[k] > 0.0) || !(s2[k] > 0.0)) return false;
            a[k] = 1.0 / s1[k];
            b[k] = 1.0 / s2[k];
        }

        // psi(k, j) = vec(y_kj y_kj^H): footprint of constraint k on
        // whitened block j.
        std::vector<std::vector<VectorXd>> psi(K_, std::vector<VectorXd>(K_));
        for (int k = 0; k < K_; ++k)
            for (int j = 0; j < K_; ++j)
                psi[k][j] = hermitian_to_vec(y[k][j] * y[k][j].adjoint());

        // Whitened gradient: per block, L^H grad L; the log-det part is -I.
        VectorXd g(nz_);
        for (int k = 0; k < K_; ++k) {
            MatrixXcd Gk = t * (L[k].adjoint() * L[k]) - MatrixXcd::Identity(n_, n_);
            for (int j = 0; j < K_; ++j) {
                const double m = (j == k) ? -(a[k] / gamma_[k] + b[k]) : (a[j] - b[j]);
                Gk += m * y[j][k] * y[j][k].adjoint();
            }
            g.segment(k * nv_, nv_) = hermitian_to_vec(Gk);
        }
        for (int k = 0; k < K_; ++k) {
            double grho = 0.0;
            if (!fixed_ps_) {
                const double r = rho[k], om = 1.0 - rho[k];
                grho = -1.0 / r + 1.0 / om - a[k] * delta2_[k] / (r * r) +
                       b[k] * e_[k] / (zeta_[k] * om * om);
            }
            g[K_ * nv_ + k] = grho;
        }

        // Hessian D + U U^T with diagonal D (identity on whitened X blocks).
        VectorXd D = VectorXd::Ones(nz_);
        for (int k = 0; k < K_; ++k) {
            double d = 1.0;
            if (!fixed_ps_) {
                const double r = rho[k], om = 1.0 - rho[k];
                d = 1.0 / (r * r) + 1.0 / (om * om) + 2.0 * a[k] * delta2_[k] / (r * r * r) +
                    2.0 * b[k] * e_[k] / (zeta_[k] * om * om * om);
            }
            D[K_ * nv_ + k] = d;
        }
        Eigen::MatrixXd U = Eigen::MatrixXd::Zero(nz_, 2 * K_);
        for (int k = 0; k < K_; ++k) {
            for (int j = 0; j < K_; ++j) {
                const double c1 = (j == k) ? 1.0 / gamma_[k] : -1.0;
                U.col(k).segment(j * nv_, nv_) = (a[k] * c1) * psi[k][j];
                U.col(K_ + k).segment(j * nv_, nv_) = b[k] * psi[k][j];
            }
            if (!fixed_ps_) {
                const double r = rho[k], om = 1.0 - rho[k];
                U(K_ * nv_ + k, k) = a[k] * delta2_[k] / (r * r);
                U(K_ * nv_ + k, K_ + k) = -b[k] * e_[k] / (zeta_[k] * om * om);
            }
        }

        // delta = -(D + U U^T)^{-1} g via Woodbury.
        const VectorXd Dinv_g = g.cwiseQuotient(D);
        const Eigen::MatrixXd DinvU = D.cwiseInverse().asDiagonal() * U;
        Eigen::MatrixXd S =
            Eigen::MatrixXd::Identity(2 * K_, 2 * K_) + U.transpose() * DinvU;
        Eigen::LLT<Eigen::MatrixXd> Sllt(S);
        if (Sllt.info() != Eigen::Success) return false;
        const VectorXd w = Sllt.solve(U.transpose() * Dinv_g);
        const VectorXd delta = -(Dinv_g - DinvU * w);

        st.decrement2 = -g.dot(delta);
        if (!std::isfinite(st.decrement2)) return false;

        st.dX.resize(K_);
        for (int k = 0; k < K_; ++k) {
            const MatrixXcd Dhat = vec_to_hermitian(delta.segment(k * nv_, nv_), n_);
            const MatrixXcd dXk = L[k] * Dhat * L[k].adjoint();
            st.dX[k] = 0.5 * (dXk + dXk.adjoint());
        }
        st.drho = fixed_ps_ ? VectorXd(VectorXd::Zero(K_))
                            : VectorXd(delta.segment(K_ * nv_, K_));
        return true;
    }

    std::vector<VectorXcd> h_;
    VectorXd sigma2_, delta2_, zeta_, gamma_, e_;
    SdrSolveOptions opt_;
    int K_, n_, nv_, nz_;
    bool fixed_ps_;
    double nu_;
};

/// Power / PS-ratio refinement with frozen beam directions. At the optimum
/// every SINR and harvest constraint holds with equality, so the per-user
/// powers are the root of K equations (the PS ratios follow from harvest
/// equality); Newton lands on it to machine precision from the barrier
/// iterate, whose own tightness saturates near the rounding floor.
/// Returns false (p, rho untouched) if Newton cannot converge.
inline bool tightness_polish(const std::vector<VectorXcd>& h, const VectorXd& sigma2,
                             const VectorXd& delta2, const VectorXd& zeta, const VectorXd& gamma,
                             const VectorXd& e, const std::vector<VectorXcd>& u, VectorXd& p,
                             VectorXd& rho) {
    const int K = static_cast<int>(h.size());

    Eigen::MatrixXd G(K, K);
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < K; ++j) G(k, j) = std::norm((h[k].adjoint() * u[j]).value());

    const auto receive = [&](const VectorXd& pw, int k) {
        double rx = sigma2[k];
        for (int j = 0; j < K; ++j) rx += pw[j] * G(k, j);
        return rx;
    };
    const auto residual = [&](const VectorXd& pw, VectorXd& F, VectorXd& rho_out) {
        for (int k = 0; k < K; ++k) {
            const double rx = receive(pw, k);
            const double rho_k = 1.0 - e[k] / (zeta[k] * rx);
            if (!(rho_k > 0.0) || !(rho_k < 1.0)) return false;
            rho_out[k] = rho_k;
            double interf = 0.0;
            for (int j = 0; j < K; ++j)
                if (j != k) interf += pw[j] * G(k, j);
            F[k] = pw[k] * G(k, k) / gamma[k] - interf - sigma2[k] - delta2[k] / rho_k;
        }
        return true;
    };

    VectorXd pw = p;
    VectorXd F(K), rho_new(K);
    if (!residual(pw, F, rho_new)) return false;
    double fnorm = F.cwiseAbs().maxCoeff();
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
        VectorXd scale(K);
        for (int k = 0; k < K; ++k)
            scale[k] = sigma2[k] + delta2[k] / rho_new[k] + std::abs(pw[k]) * G(k, k) / gamma[k];
        if ((F.cwiseAbs().array() / scale.array()).maxCoeff() <= 1e-13) {
            converged = true;
            break;
        }
        Eigen::MatrixXd J(K, K);
        for (int k = 0; k < K; ++k) {
            const double rx = receive(pw, k);
            const double coupling =
                delta2[k] * (1.0 - rho_new[k]) / (rho_new[k] * rho_new[k] * rx);
            for (int j = 0; j < K; ++j) {
                J(k, j) = (j == k ? G(k, k) / gamma[k] : -G(k, j)) + coupling * G(k, j);
            }
        }
        const VectorXd dp = J.partialPivLu().solve(-F);
        if (!dp.allFinite()) return false;
        bool stepped = false;
        for (double alpha = 1.0; alpha > 1e-12; alpha *= 0.5) {
            VectorXd pt = pw + alpha * dp;
            if ((pt.array() <= 0.0).any()) continue;
            VectorXd Ft(K), rt(K);
            if (!residual(pt, Ft, rt)) continue;
            const double fn = Ft.cwiseAbs().maxCoeff();
            if (fn > (1.0 - 0.25 * alpha) * fnorm && fn > 1e-300) continue;
            pw = std::move(pt);
            F = std::move(Ft);
            rho_new = std::move(rt);
            fnorm = fn;
            stepped = true;
            break;
        }
        if (!stepped) return false;
    }
    if (!converged) return false;
    for (int k = 0; k < K; ++k)
        if (!(rho_new[k] > kPsGuard) || !(rho_new[k] < 1.0 - kPsGuard)) return false;
    p = pw;
    rho = rho_new;
    return true;
}

/// Multipliers from the optimality structure at a rank-one primal point:
/// A_k(lambda, mu) u_k = 0 for every beam direction u_k, plus the PS-ratio
/// stationarity lambda_k delta_k^2/rho_k^2 = mu_k e_k/(zeta_k (1-rho_k)^2).
/// Both families are linear in (lambda, mu), so the duals come out of one
/// small least-squares solve, rather than carrying the barrier parameter's
/// centering error. Returns the relative residual (direction error shows up
/// here), or a negative value on breakdown.
inline double recover_duals(const std::vector<VectorXcd>& h, const VectorXd& delta2,
                            const VectorXd& zeta, const VectorXd& gamma, const VectorXd& e,
                            const std::vector<VectorXcd>& u, const VectorXd& rho,
                            VectorXd& lambda, VectorXd& mu) {
    const int K = static_cast<int>(h.size());
    const int n = static_cast<int>(h[0].size());
    const int rows = 2 * n * K + K;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, 2 * K);
    VectorXd rhs = VectorXd::Zero(rows);

    for (int k = 0; k < K; ++k) {
        for (int j = 0; j < K; ++j) {
            const std::complex<double> gain = (h[j].adjoint() * u[k]).value();
            const VectorXcd col = gain * h[j];
            const double wl = (j == k) ? -1.0 / gamma[k] : 1.0;
            for (int i = 0; i < n; ++i) {
                A(2 * (k * n + i), j) = wl * col[i].real();
                A(2 * (k * n + i) + 1, j) = wl * col[i].imag();
                A(2 * (k * n + i), K + j) = -col[i].real();
                A(2 * (k * n + i) + 1, K + j) = -col[i].imag();
            }
        }
        for (int i = 0; i < n; ++i) {
            rhs[2 * (k * n + i)] = -u[k][i].real();
            rhs[2 * (k * n + i) + 1] = -u[k][i].imag();
        }
        const int r = 2 * n * K + k;
        A(r, k) = delta2[k] / (rho[k] * rho[k]);
        A(r, K + k) = -e[k] / (zeta[k] * (1.0 - rho[k]) * (1.0 - rho[k]));
    }

    const VectorXd x = A.colPivHouseholderQr().solve(rhs);
    if (!x.allFinite()) return -1.0;
    lambda = x.head(K);
    mu = x.tail(K);
    return (A * x - rhs).norm() / rhs.norm();
}

/// Full primal-dual KKT refinement in scaled units. At the optimum the
/// covariances are rank one, both constraint families are tight, the dual
/// matrices annihilate the beams and the PS-ratio stationarity holds; with
/// beam phases gauge-fixed this is a square-plus-gauge nonlinear system in
/// (v, rho, lambda, mu), solved here by damped Gauss-Newton from the barrier
/// iterate. Quadratic local convergence drives every KKT residual to
/// rounding level, past the barrier's own centering floor. Applies the best
/// iterate found; duals are overwritten only when the refined system
/// residual certifies them.
class KktRefiner {
  public:
    KktRefiner(const std::vector<VectorXcd>& h, const VectorXd& sigma2, const VectorXd& delta2,
               const VectorXd& zeta, const VectorXd& gamma, const VectorXd& e)
        : h_(h),
          sigma2_(sigma2),
          delta2_(delta2),
          zeta_(zeta),
          gamma_(gamma),
          e_(e),
          K_(static_cast<int>(h.size())),
          n_(static_cast<int>(h[0].size())) {}

    bool run(std::vector<MatrixXcd>& X, VectorXd& rho, VectorXd& lambda, VectorXd& mu) const {
        const int K = K_, n = n_;
        // Start: principal eigenpairs, powers/splits polished for tightness,
        // duals from the active-structure least squares.
        std::vector<VectorXcd> u(K);
        VectorXd p(K);
        for (int k = 0; k < K; ++k) {
            Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(X[k]);
            if (eig.info() != Eigen::Success) return false;
            u[k] = eig.eigenvectors().col(n - 1);
            p[k] = std::max(eig.eigenvalues()[n - 1], 1e-300);
        }
        VectorXd rho_cur = rho;
        if (!tightness_polish(h_, sigma2_, delta2_, zeta_, gamma_, e_, u, p, rho_cur))
            return false;
        VectorXd lam, mu_cur;
        if (recover_duals(h_, delta2_, zeta_, gamma_, e_, u, rho_cur, lam, mu_cur) < 0.0)
            return false;

        State st;
        st.v.resize(K);
        for (int k = 0; k < K; ++k) {
            VectorXcd v = std::sqrt(p[k]) * u[k];
            const std::complex<double> gain = (h_[k].adjoint() * v).value();
            if (std::abs(gain) == 0.0) return false;
            st.v[k] = v * (std::conj(gain) / std::abs(gain));  // gauge: h_k^H v_k real > 0
        }
        st.rho = rho_cur;
        st.lambda = lam;
        st.mu = mu_cur;

        double res = residual_norm(st);
        State best = st;
        double best_res = res;
        for (int it = 0; it < 40 && res > 1e-12; ++it) {
            VectorXd step;
            if (!gauss_newton_step(st, step)) break;
            bool moved = false;
            for (double alpha = 1.0; alpha > 1e-10; alpha *= 0.5) {
                State trial = apply(st, alpha * step);
                if (!valid(trial)) continue;
                const double tr = residual_norm(trial);
                if (tr < (1.0 - 0.25 * alpha) * res || tr < 1e-13) {
                    st = std::move(trial);
                    res = tr;
                    moved = true;
                    break;
                }
            }
            if (!moved) break;
            if (res < best_res) {
                best = st;
                best_res = res;
            }
        }

        // Accept the primal refinement whenever it kept the constraints
        // tight; accept the duals only at certification quality.
        if (!(best_res < 1e-6)) return false;
        for (int k = 0; k < K; ++k) {
            if (!(best.rho[k] > kPsGuard) || !(best.rho[k] < 1.0 - kPsGuard)) return false;
            X[k] = best.v[k] * best.v[k].adjoint();
        }
        rho = best.rho;
        if (best_res < 1e-9 && best.lambda.minCoeff() > 0.0 && best.mu.minCoeff() > 0.0) {
            lambda = best.lambda;
            mu = best.mu;
        }
        return true;
    }

  private:
    struct State {
        std::vector<VectorXcd> v;
        VectorXd rho, lambda, mu;
    };

    int dim_vars() const { return 2 * n_ * K_ + 3 * K_; }
    int dim_eqs() const { return 2 * n_ * K_ + 4 * K_; }

    MatrixXcd dual_matrix(const State& st, int k) const {
        MatrixXcd A = MatrixXcd::Identity(n_, n_);
        for (int j = 0; j < K_; ++j)
            A += (st.lambda[j] - st.mu[j]) * h_[j] * h_[j].adjoint();
        A -= (st.lambda[k] / gamma_[k] + st.lambda[k]) * h_[k] * h_[k].adjoint();
        return A;
    }

    // Equation scales, so residuals are comparable across families.
    void scales(const State& st, VectorXd& sa, VectorXd& sb, VectorXd& sc, VectorXd& sd) const {
        sa.resize(K_);
        sb.resize(K_);
        sc.resize(K_);
        sd.resize(K_);
        for (int k = 0; k < K_; ++k) {
            sa[k] = st.v[k].norm();
            double interf = 0.0, total = 0.0;
            for (int j = 0; j < K_; ++j) {
                const double g = std::norm((h_[k].adjoint() * st.v[j]).value());
                total += g;
                if (j != k) interf += g;
            }
            sb[k] = interf + sigma2_[k] + delta2_[k] / st.rho[k];
            sc[k] = total + sigma2_[k] + e_[k] / (zeta_[k] * (1.0 - st.rho[k]));
            sd[k] = st.lambda[k] * delta2_[k] / (st.rho[k] * st.rho[k]) +
                    st.mu[k] * e_[k] /
                        (zeta_[k] * (1.0 - st.rho[k]) * (1.0 - st.rho[k]));
            sa[k] = std::max(sa[k], 1e-300);
            sd[k] = std::max(sd[k], 1e-300);
        }
    }

    VectorXd residuals(const State& st) const {
        VectorXd R(dim_eqs());
        VectorXd sa, sb, sc, sd;
        scales(st, sa, sb, sc, sd);
        int row = 0;
        for (int k = 0; k < K_; ++k) {
            const VectorXcd Av = dual_matrix(st, k) * st.v[k];
            for (int i = 0; i < n_; ++i) {
                R[row++] = Av[i].real() / sa[k];
                R[row++] = Av[i].imag() / sa[k];
            }
        }
        for (int k = 0; k < K_; ++k) {
            double interf = 0.0, total = 0.0, own = 0.0;
            for (int j = 0; j < K_; ++j) {
                const double g = std::norm((h_[k].adjoint() * st.v[j]).value());
                total += g;
                if (j == k)
                    own = g;
                else
                    interf += g;
            }
            R[row++] = (own / gamma_[k] - interf - sigma2_[k] - delta2_[k] / st.rho[k]) / sb[k];
            R[row] = (total + sigma2_[k] - e_[k] / (zeta_[k] * (1.0 - st.rho[k]))) / sc[k];
            ++row;
        }
        for (int k = 0; k < K_; ++k) {
            const double lhs = st.lambda[k] * delta2_[k] / (st.rho[k] * st.rho[k]);
            const double rhs = st.mu[k] * e_[k] /
                               (zeta_[k] * (1.0 - st.rho[k]) * (1.0 - st.rho[k]));
            R[row++] = (lhs - rhs) / sd[k];
        }
        for (int k = 0; k < K_; ++k)
            R[row++] = (h_[k].adjoint() * st.v[k]).value().imag() /
                       std::max(h_[k].norm() * st.v[k].norm(), 1e-300);
        return R;
    }

    double residual_norm(const State& st) const { return residuals(st).cwiseAbs().maxCoeff(); }

    bool valid(const State& st) const {
        for (int k = 0; k < K_; ++k) {
            if (!(st.rho[k] > 1e-12) || !(st.rho[k] < 1.0 - 1e-12)) return false;
            if (!(st.v[k].norm() > 0.0)) return false;
        }
        return true;
    }

    State apply(const State& st, const VectorXd& step) const {
        State out = st;
        int idx = 0;
        for (int k = 0; k < K_; ++k)
            for (int i = 0; i < n_; ++i) {
                out.v[k][i] += std::complex<double>(step[idx], step[idx + 1]);
                idx += 2;
            }
        for (int k = 0; k < K_; ++k) out.rho[k] += step[idx++];
        for (int k = 0; k < K_; ++k) out.lambda[k] += step[idx++];
        for (int k = 0; k < K_; ++k) out.mu[k] += step[idx++];
        return out;
    }

    bool gauss_newton_step(const State& st, VectorXd& step) const {
        const int n = n_, K = K_;
        VectorXd sa, sb, sc, sd;
        scales(st, sa, sb, sc, sd);
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dim_eqs(), dim_vars());
        const int col_rho = 2 * n * K, col_lam = col_rho + K, col_mu = col_lam + K;

        // Real 2n x 2n representation of a complex matrix acting on r(v).
        const auto fill_block = [&](int row0, int col0, const MatrixXcd& M, double w) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    J(row0 + 2 * i, col0 + 2 * j) = w * M(i, j).real();
                    J(row0 + 2 * i, col0 + 2 * j + 1) = -w * M(i, j).imag();
                    J(row0 + 2 * i + 1, col0 + 2 * j) = w * M(i, j).imag();
                    J(row0 + 2 * i + 1, col0 + 2 * j + 1) = w * M(i, j).real();
                }
        };
        const auto fill_vec = [&](int row0, int col, const VectorXcd& w, double s) {
            for (int i = 0; i < n; ++i) {
                J(row0 + 2 * i, col) = s * w[i].real();
                J(row0 + 2 * i + 1, col) = s * w[i].imag();
            }
        };

        for (int k = 0; k < K; ++k) {
            const int row0 = 2 * n * k;
            const MatrixXcd A = dual_matrix(st, k);
            fill_block(row0, 2 * n * k, A, 1.0 / sa[k]);
            for (int j = 0; j < K; ++j) {
                const std::complex<double> hv = (h_[j].adjoint() * st.v[k]).value();
                const VectorXcd dA_lam =
                    (j == k ? -1.0 / gamma_[k] : 1.0) * hv * h_[j];
                fill_vec(row0, col_lam + j, dA_lam, 1.0 / sa[k]);
                fill_vec(row0, col_mu + j, VectorXcd(-hv * h_[j]), 1.0 / sa[k]);
            }
        }
        const int row_b = 2 * n * K;
        for (int k = 0; k < K; ++k) {
            // d|h^H v|^2 / d r(v) = 2 r((h h^H) v).
            for (int j = 0; j < K; ++j) {
                const VectorXcd grad =
                    2.0 * (h_[k].adjoint() * st.v[j]).value() * h_[k];
                const double wb = (j == k ? 1.0 / gamma_[k] : -1.0) / sb[k];
                const double wc = 1.0 / sc[k];
                for (int i = 0; i < n; ++i) {
                    J(row_b + 2 * k, 2 * n * j + 2 * i) += wb * grad[i].real();
                    J(row_b + 2 * k, 2 * n * j + 2 * i + 1) += wb * grad[i].imag();
                    J(row_b + 2 * k + 1, 2 * n * j + 2 * i) += wc * grad[i].real();
                    J(row_b + 2 * k + 1, 2 * n * j + 2 * i + 1) += wc * grad[i].imag();
                }
            }
            J(row_b + 2 * k, col_rho + k) = delta2_[k] / (st.rho[k] * st.rho[k]) / sb[k];
            J(row_b + 2 * k + 1, col_rho + k) =
                -e_[k] / (zeta_[k] * (1.0 - st.rho[k]) * (1.0 - st.rho[k])) / sc[k];
        }
        const int row_d = row_b + 2 * K;
        for (int k = 0; k < K; ++k) {
            const double r = st.rho[k], om = 1.0 - st.rho[k];
            J(row_d + k, col_rho + k) =
                (-2.0 * st.lambda[k] * delta2_[k] / (r * r * r) -
                 2.0 * st.mu[k] * e_[k] / (zeta_[k] * om * om * om)) /
                sd[k];
            J(row_d + k, col_lam + k) = delta2_[k] / (r * r) / sd[k];
            J(row_d + k, col_mu + k) = -e_[k] / (zeta_[k] * om * om) / sd[k];
        }
        const int row_g = row_d + K;
        for (int k = 0; k < K; ++k) {
            const double s = 1.0 / std::max(h_[k].norm() * st.v[k].norm(), 1e-300);
            for (int i = 0; i < n; ++i) {
                J(row_g + k, 2 * n * k + 2 * i) = -s * h_[k][i].imag();
                J(row_g + k, 2 * n * k + 2 * i + 1) = s * h_[k][i].real();
            }
        }

        const VectorXd R = residuals(st);
        step = J.colPivHouseholderQr().solve(-R);
        return step.allFinite();
    }

    const std::vector<VectorXcd>& h_;
    const VectorXd &sigma2_, &delta2_, &zeta_, &gamma_, &e_;
    int K_, n_;
};

inline bool kkt_refine(const std::vector<VectorXcd>& h, const VectorXd& sigma2,
                       const VectorXd& delta2, const VectorXd& zeta, const VectorXd& gamma,
                       const VectorXd& e, std::vector<MatrixXcd>& X, VectorXd& rho,
                       VectorXd& lambda, VectorXd& mu) {
    return KktRefiner(h, sigma2, delta2, zeta, gamma, e).run(X, rho, lambda, mu);
}

}  // namespace detail

/// Principal eigenpair of a relaxation covariance, as a beamformer. The
/// reported ratio lambda2/lambda1 measures distance from rank one; the
/// global phase is fixed so the largest-modulus entry is real nonnegative,
/// which makes outputs deterministic.
struct RankOneExtraction {
    VectorXcd v;
    double ratio = 0.0;
};

inline RankOneExtraction extract_rank_one(const MatrixXcd& Xk, double rank_one_tol = 1e-6) {
    if (Xk.rows() != Xk.cols() || Xk.rows() == 0)
        throw std::invalid_argument("extract_rank_one: matrix must be square");
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(Xk);
    if (eig.info() != Eigen::Success)
        throw NumericalFailureError("extract_rank_one: eigendecomposition failed");
    const int n = static_cast<int>(Xk.rows());
    const double l1 = eig.eigenvalues()[n - 1];
    if (!(l1 > 0.0)) throw std::invalid_argument("extract_rank_one: matrix has no positive trace");
    const double l2 = n > 1 ? std::max(eig.eigenvalues()[n - 2], 0.0) : 0.0;

    RankOneExtraction out;
    out.ratio = l2 / l1;
    if (out.ratio > rank_one_tol)
        throw RankOneViolation(out.ratio,
                               "extract_rank_one: eigenvalue ratio " + std::to_string(out.ratio) +
                                   " exceeds tolerance (solver inaccuracy)");
    out.v = std::sqrt(l1) * eig.eigenvectors().col(n - 1);
    int imax = 0;
    for (int i = 1; i < n; ++i)
        if (std::abs(out.v[i]) > std::abs(out.v[imax])) imax = i;
    if (std::abs(out.v[imax]) > 0.0) out.v *= std::conj(out.v[imax]) / std::abs(out.v[imax]);
    return out;
}

namespace detail {

/// Strictly feasible start: a suboptimal design inflated away from its tight
/// constraints, with a small ridge making each covariance positive definite.
inline bool phase1_start(const SystemInstance& inst, const Targets& targets,
                         const SdrSolveOptions& opt, const JbpsBarrier& barrier,
                         double power_scale, double channel_scale2,
                         std::vector<MatrixXcd>& X0, VectorXd& rho0, std::string& note) {
    MatrixXcd V;
    VectorXd rho;
    const bool fixed_ps = opt.fixed_ps_ratio > 0.0;
    try {
        if (fixed_ps) {
            V = solve_sinr_only(inst, targets.sinr).beamformers;
            rho = VectorXd::Constant(inst.num_users, opt.fixed_ps_ratio);
        } else {
            const JbpsSolution s = solve_sinr_opt(inst, targets);
            V = s.beamformers;
            rho = s.ps_ratios;
        }
    } catch (const SolverError&) {
        try {
            const JbpsSolution s = solve_zf(inst, targets);
            V = s.beamformers;
            rho = s.ps_ratios;
            note = "phase-1 fell back to the zero-forcing start";
        } catch (const SolverError&) {
            note = "no strictly feasible starting point could be constructed";
            return false;
        }
    }

    const double vscale = std::sqrt(channel_scale2 / power_scale);
    const MatrixXcd Vs = V * vscale;  // matches the scaled-unit covariances
    if (!fixed_ps)
        for (int k = 0; k < inst.num_users; ++k)
            rho[k] = std::min(std::max(rho[k], 1e-8), 1.0 - 1e-8);

    double ridge = 1e-6;
    for (double w = 1.5; w < 1e8; w *= 2.0, ridge *= 0.5) {
        X0.assign(inst.num_users, MatrixXcd());
        for (int k = 0; k < inst.num_users; ++k) {
            const VectorXcd v = Vs.col(k);
            X0[k] = w * v * v.adjoint() +
                    (ridge * w * v.squaredNorm()) *
                        MatrixXcd::Identity(inst.num_antennas, inst.num_antennas);
        }
        rho0 = rho;
        if (barrier.strictly_feasible(X0, rho0)) return true;
    }
    note = "inflating the suboptimal start never reached strict feasibility";
    return false;
}

}  // namespace detail

/// Solve the convex relaxation to certified optimality. Feasibility is
/// decided first by the exact rank condition; near the boundary the SINR
/// targets are only approachable asymptotically in power, so that case is
/// reported as a numerical failure with a diagnostic rather than guessed.
inline SdrRelaxationSolution solve_relaxation(const SystemInstance& inst, const Targets& targets,
                                              const SdrSolveOptions& opt = {}) {
    if (targets.num_users() != inst.num_users)
        throw std::invalid_argument("solve_relaxation: target count does not match the instance");
    const int K = inst.num_users;
    SdrRelaxationSolution sol;

    const FeasibilityReport fr = is_feasible(targets.sinr, inst.channels);
    if (!fr.feasible) {
        sol.status = SdrStatus::Infeasible;
        sol.message = "SINR targets violate the rank condition (margin " +
                      std::to_string(fr.margin) + ")";
        return sol;
    }
    if (fr.margin <= 1e-12 * K) {
        sol.status = SdrStatus::NumericalFailure;
        sol.message = "SINR targets sit on the feasibility boundary; the required power diverges";
        return sol;
    }

    // Scaled-unit problem data. Powers are normalized by the per-user
    // receive-power demand (harvest or SINR driven, whichever is larger), so
    // the scaled objective is O(K) and the Newton systems stay well inside
    // double range; tightness otherwise floors out near sqrt(eps * f).
    double channel_scale2 = 0.0, power_scale = 0.0;
    for (int k = 0; k < K; ++k) {
        channel_scale2 += inst.channels.col(k).squaredNorm();
        power_scale += std::max(targets.harvest[k] / inst.eh_efficiency[k],
                                targets.sinr[k] * (inst.antenna_noise[k] + inst.id_noise[k]));
    }
    channel_scale2 /= K;
    power_scale /= K;

    std::vector<VectorXcd> h(K);
    for (int k = 0; k < K; ++k) h[k] = inst.channels.col(k) / std::sqrt(channel_scale2);
    detail::JbpsBarrier barrier(h, inst.antenna_noise / power_scale, inst.id_noise / power_scale,
                                inst.eh_efficiency, targets.sinr, targets.harvest / power_scale,
                                opt);

    std::vector<MatrixXcd> X0;
    VectorXd rho0;
    std::string note;
    if (!detail::phase1_start(inst, targets, opt, barrier, power_scale, channel_scale2, X0, rho0,
                              note)) {
        sol.status = SdrStatus::NumericalFailure;
        sol.message = note;
        return sol;
    }

    detail::JbpsBarrier::Result r = barrier.run(std::move(X0), std::move(rho0));
    sol.newton_iterations = r.newton_iterations;
    if (r.status != SdrStatus::Optimal) {
        sol.status = r.status;
        sol.message = note.empty() ? r.message : r.message + "; " + note;
        return sol;
    }

    if (opt.fixed_ps_ratio <= 0.0) {
        if (detail::kkt_refine(h, inst.antenna_noise / power_scale,
                               inst.id_noise / power_scale, inst.eh_efficiency, targets.sinr,
                               targets.harvest / power_scale, r.X, r.rho, r.lambda, r.mu)) {
            if (!note.empty()) note += "; ";
            note += "KKT refinement applied";
        }
    }

    const double xmap = power_scale / channel_scale2;
    sol.X.resize(K);
    sol.objective = 0.0;
    for (int k = 0; k < K; ++k) {
        sol.X[k] = xmap * 0.5 * (r.X[k] + r.X[k].adjoint());
        sol.objective += sol.X[k].real().trace();
    }
    sol.ps_ratios = r.rho;

    if (opt.fixed_ps_ratio <= 0.0) {
        const RelaxationSlacks gate = relaxation_slacks(inst, targets, sol.X, sol.ps_ratios);
        const double worst = std::max(gate.sinr_rel.cwiseAbs().maxCoeff(),
                                      gate.harvest_rel.cwiseAbs().maxCoeff());
        if (!(worst <= opt.tightness_accept)) {
            sol.status = SdrStatus::NumericalFailure;
            sol.message = "constraint tightness " + std::to_string(worst) +
                          " exceeds the acceptance bound";
            return sol;
        }
    }
    sol.status = SdrStatus::Optimal;
    sol.message = note;

    // Certificate, in original units.
    KktCertificate& cert = sol.certificate;
    cert.lambda = r.lambda / channel_scale2;
    cert.mu = r.mu / channel_scale2;
    cert.dual_matrices.resize(K);
    for (int k = 0; k < K; ++k)
        cert.dual_matrices[k] = sdr_dual_matrix(inst, targets, cert.lambda, cert.mu, k);

    for (int k = 0; k < K; ++k) {
        const MatrixXcd& A = cert.dual_matrices[k];
        cert.complementarity = std::max(
            cert.complementarity, (A * sol.X[k]).norm() / (1.0 + sol.X[k].norm()));
        const double lmin =
            Eigen::SelfAdjointEigenSolver<MatrixXcd>(A).eigenvalues().minCoeff();
        cert.psd_violation = std::max(cert.psd_violation, std::max(0.0, -lmin));
        if (opt.fixed_ps_ratio <= 0.0) {
            const double lhs = cert.lambda[k] * inst.id_noise[k] /
                               (sol.ps_ratios[k] * sol.ps_ratios[k]);
            const double rhs = cert.mu[k] * targets.harvest[k] /
                               (inst.eh_efficiency[k] * (1.0 - sol.ps_ratios[k]) *
                                (1.0 - sol.ps_ratios[k]));
            cert.stationarity =
                std::max(cert.stationarity, std::abs(lhs - rhs) / std::max(lhs, rhs));
        }
        cert.dual_objective +=
            (cert.lambda[k] - cert.mu[k]) * inst.antenna_noise[k] +
            std::pow(std::sqrt(cert.lambda[k] * inst.id_noise[k]) +
                         std::sqrt(cert.mu[k] * targets.harvest[k] / inst.eh_efficiency[k]),
                     2);
    }
    const RelaxationSlacks rs = relaxation_slacks(inst, targets, sol.X, sol.ps_ratios);
    cert.tightness = std::max(rs.sinr_rel.cwiseAbs().maxCoeff(),
                              rs.harvest_rel.cwiseAbs().maxCoeff());
    return sol;
}

/// Globally optimal joint design: rank check, certified relaxation solve,
/// rank-one extraction per user.
inline JbpsSolution solve_jbps_optimal(const SystemInstance& inst, const Targets& targets,
                                       const SdrSolveOptions& opt = {}) {
    const SdrRelaxationSolution rel = solve_relaxation(inst, targets, opt);
    if (rel.status == SdrStatus::Infeasible) throw InfeasibleError(rel.message);
    if (rel.status != SdrStatus::Optimal) throw NumericalFailureError(rel.message);

    MatrixXcd V(inst.num_antennas, inst.num_users);
    for (int k = 0; k < inst.num_users; ++k)
        V.col(k) = extract_rank_one(rel.X[k], opt.rank_one_tol).v;
    return make_solution(inst, std::move(V), rel.ps_ratios, SolveMethod::SdrOptimal);
}

/// Per-check outcome of the certificate verification.
struct KktReport {
    bool dual_psd = false;         // A_k >= -tol I
    bool complementarity = false;  // ||A_k X_k||_F <= tol (1 + ||X_k||_F)
    bool primal_tight = false;     // both constraints tight within tol
    bool duals_positive = false;   // lambda_k, mu_k strictly positive
    bool dual_rank = false;        // rank(A_k) == N_t - 1
    double min_dual_eigenvalue = 0.0;
    double max_complementarity = 0.0;
    double max_tightness = 0.0;
    double min_dual = 0.0;
    std::vector<int> dual_ranks;

    bool all_passed() const {
        return dual_psd && complementarity && primal_tight && duals_positive && dual_rank;
    }
};

/// Recompute every optimality condition from scratch given the primal point
/// and the multipliers; never throws.
inline KktReport verify_kkt(const SdrRelaxationSolution& primal, const KktCertificate& cert,
                            const SystemInstance& inst, const Targets& targets, double tol = 1e-6,
                            double strict_dual_floor = 0.0) {
    KktReport rep;
    const int K = inst.num_users;
    rep.min_dual_eigenvalue = std::numeric_limits<double>::infinity();
    rep.min_dual = std::numeric_limits<double>::infinity();
    rep.dual_ranks.resize(K, 0);
    bool ranks_ok = true;
    for (int k = 0; k < K; ++k) {
        const MatrixXcd A = sdr_dual_matrix(inst, targets, cert.lambda, cert.mu, k);
        rep.min_dual_eigenvalue =
            std::min(rep.min_dual_eigenvalue,
                     Eigen::SelfAdjointEigenSolver<MatrixXcd>(A).eigenvalues().minCoeff());
        rep.max_complementarity =
            std::max(rep.max_complementarity,
                     (A * primal.X[k]).norm() / (1.0 + primal.X[k].norm()));
        rep.min_dual = std::min({rep.min_dual, cert.lambda[k], cert.mu[k]});

        Eigen::JacobiSVD<MatrixXcd> svd(A);
        const auto& sv = svd.singularValues();
        int rank = 0;
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv[i] > tol * sv[0]) ++rank;
        rep.dual_ranks[k] = rank;
        if (rank != inst.num_antennas - 1) ranks_ok = false;
    }
    const RelaxationSlacks rs = relaxation_slacks(inst, targets, primal.X, primal.ps_ratios);
    rep.max_tightness =
        std::max(rs.sinr_rel.cwiseAbs().maxCoeff(), rs.harvest_rel.cwiseAbs().maxCoeff());

    rep.dual_psd = rep.min_dual_eigenvalue >= -tol;
    rep.complementarity = rep.max_complementarity <= tol;
    rep.primal_tight = rep.max_tightness <= tol;
    rep.duals_positive = rep.min_dual > strict_dual_floor;
    rep.dual_rank = ranks_ok;
    return rep;
}

}  // namespace swiptbf
