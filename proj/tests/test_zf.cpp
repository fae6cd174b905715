// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "oracles.hpp"
#include "swiptbf/sdr_solver.hpp"
#include "swiptbf/zf_solver.hpp"
#include "testutil.hpp"

using namespace swiptbf;

TEST_CASE("null space of a single basis vector") {
    MatrixXcd Hk(3, 1);
    Hk << 1.0, 0.0, 0.0;
    const MatrixXcd U = null_space_basis(Hk);
    REQUIRE(U.cols() == 2);
    CHECK((Hk.adjoint() * U).norm() < 1e-14);
    CHECK((U.adjoint() * U - MatrixXcd::Identity(2, 2)).norm() < 1e-14);
}

TEST_CASE("empty interferer set yields the identity") {
    const MatrixXcd U = null_space_basis(MatrixXcd(4, 0));
    CHECK(U == MatrixXcd::Identity(4, 4));
}

TEST_CASE("null-space projector is an orthogonal projector") {
    const SystemInstance inst = testutil::random_instance(3, 4, 4);
    MatrixXcd Hk = inst.channels.rightCols(3);
    const MatrixXcd U = null_space_basis(Hk);
    const MatrixXcd P = U * U.adjoint();
    CHECK((P * P - P).norm() < 1e-12);
    CHECK((P - P.adjoint()).norm() < 1e-12);
    CHECK((Hk.adjoint() * U).norm() < 1e-12 * Hk.norm());
}

TEST_CASE("full-rank interferers leave no null space") {
    const SystemInstance inst = testutil::random_instance(4, 2, 3);
    CHECK_THROWS_AS(null_space_basis(inst.channels.leftCols(2)), NoNullSpaceError);
}

TEST_CASE("golden-ratio PS split at alpha = beta = 1") {
    CHECK(zf_ps_ratio(1.0, 1.0) == Catch::Approx(0.5 * (std::sqrt(5.0) - 1.0)).epsilon(1e-15));
}

TEST_CASE("PS ratio satisfies its defining equation across ten decades") {
    Philox4x32 rng(123, 9);
    for (int i = 0; i < 1000; ++i) {
        const double alpha = std::pow(10.0, -3.0 + 9.0 * rng.next_unit());
        const double beta = std::pow(10.0, -3.0 + 9.0 * rng.next_unit());
        const double rho = zf_ps_ratio(alpha, beta);
        const double comp = zf_ps_complement(alpha, beta);
        REQUIRE(rho > 0.0);
        REQUIRE(rho < 1.0);
        CHECK(rho + comp == Catch::Approx(1.0).epsilon(1e-12));
        const double resid = alpha / comp - beta / rho - 1.0;
        CHECK(std::abs(resid) <= 1e-9 * (alpha / comp + beta / rho + 1.0));
    }
}

TEST_CASE("paper-regime PS ratio matches the independent root and the small-sigma form") {
    const double gamma = 10.0, delta2 = 1e-8, sigma2 = 1e-10, zeta = 0.5, e = 1e-4;
    const double alpha = e / (zeta * (gamma + 1.0) * sigma2);
    const double beta = gamma * delta2 / ((gamma + 1.0) * sigma2);
    CHECK(alpha == Catch::Approx(1.81818e5).epsilon(1e-5));
    CHECK(beta == Catch::Approx(90.9091).epsilon(1e-5));

    const double rho = zf_ps_ratio(alpha, beta);
    const double rho_oracle = oracles::zf_rho_bisect(alpha, beta);
    CHECK(rho == Catch::Approx(rho_oracle).epsilon(1e-6));
    CHECK(rho == Catch::Approx(4.9975e-4).epsilon(1e-4));

    // The sigma2 -> 0 approximation is off by O(sigma2) here, about 6e-6.
    const double approx = gamma * delta2 / (e / zeta + gamma * delta2);
    CHECK(approx == Catch::Approx(4.99750e-4).epsilon(1e-5));
    CHECK(std::abs(rho - approx) / approx < 1e-5);
}

TEST_CASE("doubling the harvest target lowers the PS split") {
    Philox4x32 rng(5, 5);
    for (int i = 0; i < 100; ++i) {
        const double alpha = std::pow(10.0, -2.0 + 6.0 * rng.next_unit());
        const double beta = std::pow(10.0, -2.0 + 4.0 * rng.next_unit());
        CHECK(zf_ps_ratio(2.0 * alpha, beta) < zf_ps_ratio(alpha, beta));
    }
}

TEST_CASE("PS ratio converges to the small-sigma closed form") {
    const double gamma = 10.0, delta2 = 1e-8, zeta = 0.5, e = 1e-4;
    const double limit = gamma * delta2 / (e / zeta + gamma * delta2);
    double prev_err = 1.0;
    for (double sigma2 = 1e-10; sigma2 > 1e-17; sigma2 *= 1e-2) {
        const double alpha = e / (zeta * (gamma + 1.0) * sigma2);
        const double beta = gamma * delta2 / ((gamma + 1.0) * sigma2);
        const double err = std::abs(zf_ps_ratio(alpha, beta) - limit) / limit;
        CHECK(err < prev_err + 1e-14);
        prev_err = err;
    }
    CHECK(prev_err < 1e-8);
}

TEST_CASE("single-user ZF is the matched filter at closed-form power") {
    const SystemInstance inst = testutil::random_instance(71, 3, 1, 1e-2, 0.2, 0.8);
    const Targets targets(VectorXd::Constant(1, 4.0), VectorXd::Constant(1, 0.05));
    const JbpsSolution sol = solve_zf(inst, targets);
    const double hnorm2 = inst.channels.col(0).squaredNorm();
    const double expected =
        oracles::k1_optimal_power(hnorm2, 4.0, 0.05, 1e-2, 0.2, 0.8);
    CHECK(sol.total_power == Catch::Approx(expected).epsilon(1e-9));
    // Direction is h up to phase.
    const double align = std::abs((inst.channels.col(0).adjoint() * sol.beamformers.col(0)).value());
    CHECK(align == Catch::Approx(inst.channels.col(0).norm() * sol.beamformers.col(0).norm())
                       .epsilon(1e-12));
}

TEST_CASE("ZF solution is tight and zero-forcing on random square instances") {
    for (std::uint64_t seed : {201u, 202u, 203u}) {
        const SystemInstance inst = testutil::random_instance(seed, 4, 4);
        const Targets targets(VectorXd::Constant(4, 2.0), VectorXd::Constant(4, 0.1));
        const JbpsSolution sol = solve_zf(inst, targets);
        const ConstraintReport rep = check_solution(inst, targets, sol, 1e-9);
        CHECK(rep.feasible);
        for (int k = 0; k < 4; ++k) {
            CHECK(std::abs(rep.sinr_slack[k]) <= 1e-9);
            CHECK(std::abs(rep.harvest_slack[k]) <= 1e-9);
            for (int i = 0; i < 4; ++i) {
                if (i == k) continue;
                const double cross =
                    std::abs((inst.channels.col(i).adjoint() * sol.beamformers.col(k)).value());
                CHECK(cross <= 1e-9 * inst.channels.col(i).norm() * sol.beamformers.col(k).norm());
            }
        }
    }
}

TEST_CASE("per-user ZF designs do not couple across users") {
    const SystemInstance inst = testutil::random_instance(301, 5, 3);
    const Targets a(VectorXd::Constant(3, 2.0), VectorXd::Constant(3, 0.1));
    Targets b = a;
    b.sinr[1] *= 7.0;
    b.harvest[2] *= 0.01;
    const JbpsSolution sa = solve_zf(inst, a);
    const JbpsSolution sb = solve_zf(inst, b);
    CHECK(sa.beamformers.col(0) == sb.beamformers.col(0));
    CHECK(sa.ps_ratios[0] == sb.ps_ratios[0]);
}

TEST_CASE("ZF declines underdetermined or rank-deficient instances") {
    const SystemInstance inst = testutil::random_instance(401, 2, 3);
    const Targets targets(VectorXd::Constant(3, 1.0), VectorXd::Constant(3, 0.1));
    CHECK_THROWS_AS(solve_zf(inst, targets), ZfInapplicable);

    MatrixXcd H(3, 2);
    H.col(0) << 1.0, 2.0, -1.0;
    H.col(1) = 0.5 * H.col(0);
    const SystemInstance dep(H, VectorXd::Ones(2), VectorXd::Ones(2),
                             VectorXd::Constant(2, 0.5));
    const Targets t2(VectorXd::Constant(2, 1.0), VectorXd::Constant(2, 0.1));
    CHECK_THROWS_AS(solve_zf(dep, t2), ZfInapplicable);
}
