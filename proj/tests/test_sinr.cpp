// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "oracles.hpp"
#include "swiptbf/sinr_solver.hpp"
#include "swiptbf/zf_solver.hpp"
#include "testutil.hpp"

using namespace swiptbf;

TEST_CASE("single-user duality beam is the matched filter at minimum power") {
    const SystemInstance inst = testutil::random_instance(81, 3, 1, 0.2, 0.3, 0.5);
    const VectorXd gamma = VectorXd::Constant(1, 5.0);
    const SinrOnlyResult res = solve_sinr_only(inst, gamma);
    const double hnorm2 = inst.channels.col(0).squaredNorm();
    const double expected_power = 5.0 * (0.2 + 0.3) / hnorm2;
    CHECK(res.beamformers.col(0).squaredNorm() == Catch::Approx(expected_power).epsilon(1e-10));
    const double align =
        std::abs((inst.channels.col(0).adjoint() * res.beamformers.col(0)).value());
    CHECK(align == Catch::Approx(inst.channels.col(0).norm() * res.beamformers.col(0).norm())
                       .epsilon(1e-12));
}

TEST_CASE("orthogonal users decouple into single-user solutions") {
    MatrixXcd H = MatrixXcd::Zero(4, 2);
    H(0, 0) = 2.0;
    H(1, 1) = std::complex<double>(0.0, 0.5);
    const SystemInstance inst(H, VectorXd::Constant(2, 0.1), VectorXd::Constant(2, 0.4),
                              VectorXd::Constant(2, 0.5));
    VectorXd gamma(2);
    gamma << 3.0, 7.0;
    const SinrOnlyResult res = solve_sinr_only(inst, gamma);
    for (int k = 0; k < 2; ++k) {
        const double expected = gamma[k] * 0.5 / inst.channels.col(k).squaredNorm();
        CHECK(res.beamformers.col(k).squaredNorm() == Catch::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("duality solution makes every SINR constraint tight") {
    for (std::uint64_t seed : {501u, 502u, 503u, 504u}) {
        const SystemInstance inst = testutil::random_instance(seed, 4, 3);
        VectorXd gamma(3);
        gamma << 1.0, 4.0, 9.0;
        const SinrOnlyResult res = solve_sinr_only(inst, gamma);
        CHECK(res.iterations <= 100);
        const VectorXd rho_one = VectorXd::Constant(3, 1.0 - 1e-12);
        for (int k = 0; k < 3; ++k) {
            // rho ~ 1 noise: sigma^2 + delta^2.
            const VectorXcd gains = res.beamformers.adjoint() * inst.channels.col(k);
            double interf = 0.0;
            for (int j = 0; j < 3; ++j)
                if (j != k) interf += std::norm(gains[j]);
            const double sinr =
                std::norm(gains[k]) / (interf + inst.antenna_noise[k] + inst.id_noise[k]);
            CHECK(sinr / gamma[k] - 1.0 == Catch::Approx(0.0).margin(1e-8));
        }
    }
}

TEST_CASE("infeasible targets stall the fixed point") {
    MatrixXcd H(4, 3);
    H.col(0) << 1.0, -1.0, 0.5, 2.0;
    H.col(1) = H.col(0);
    H.col(2) = H.col(0);
    const SystemInstance inst(H, VectorXd::Ones(3), VectorXd::Ones(3),
                              VectorXd::Constant(3, 0.5));
    CHECK_THROWS_AS(solve_sinr_only(inst, VectorXd::Constant(3, 10.0)), SolverError);
}

TEST_CASE("scaling roots bracket and exceed one") {
    const SystemInstance inst = testutil::random_instance(91, 4, 3);
    const Targets targets(VectorXd::Constant(3, 2.0), VectorXd::Constant(3, 0.05));
    const SinrOnlyResult so = solve_sinr_only(inst, targets.sinr);
    const ScalingIntermediates sc = scaling_roots(inst, targets, so.beamformers);
    for (int k = 0; k < 3; ++k) {
        CHECK(sc.alpha_bar[k] > 1.0);
        const auto g = [&](double aa) {
            return scaling_g(sc.c[k], sc.d[k], inst.antenna_noise[k], inst.id_noise[k],
                             targets.harvest[k], inst.eh_efficiency[k], aa);
        };
        CHECK(g(1.0) > 1.0);
        CHECK(std::abs(g(sc.alpha_bar[k]) - 1.0) <= 1e-10);
        CHECK(g(sc.alpha_bar[k] * (1.0 - 1e-6)) > 1.0);
        CHECK(g(sc.alpha_bar[k] * (1.0 + 1e-6)) < 1.0);
    }
    CHECK(sc.alpha_star == sc.alpha_bar.maxCoeff());
}

TEST_CASE("vanishing antenna noise collapses the quadratic to one root") {
    // With sigma2 ~ 0, g(alpha) = (delta2/c + e/(zeta d)) / alpha.
    MatrixXcd H(2, 1);
    H << 1.0, 1.0;
    const SystemInstance inst(H, VectorXd::Constant(1, 1e-30), VectorXd::Constant(1, 0.3),
                              VectorXd::Constant(1, 0.6));
    const Targets targets(VectorXd::Constant(1, 2.0), VectorXd::Constant(1, 0.4));
    const SinrOnlyResult so = solve_sinr_only(inst, targets.sinr);
    const ScalingIntermediates sc = scaling_roots(inst, targets, so.beamformers);
    const double expected = inst.id_noise[0] / sc.c[0] +
                            targets.harvest[0] / (inst.eh_efficiency[0] * sc.d[0]);
    CHECK(sc.alpha_bar[0] == Catch::Approx(expected).epsilon(1e-9));
}

TEST_CASE("beams that miss their target degenerate the quadratic") {
    const SystemInstance inst = testutil::random_instance(92, 4, 3);
    const Targets targets(VectorXd::Constant(3, 2.0), VectorXd::Constant(3, 0.05));
    CHECK_THROWS_AS(
        scaling_roots(inst, targets, testutil::random_beamformers(93, 4, 3, 1e-6)),
        DegenerateQuadratic);
}

TEST_CASE("scaled solution is feasible with the expected tight pattern") {
    for (std::uint64_t seed : {601u, 602u}) {
        const SystemInstance inst = testutil::random_instance(seed, 4, 4);
        const Targets targets(VectorXd::Constant(4, 1.5), VectorXd::Constant(4, 0.08));
        const JbpsSolution sol = solve_sinr_opt(inst, targets);
        const ConstraintReport rep = check_solution(inst, targets, sol, 1e-8);
        CHECK(rep.feasible);

        const SinrOnlyResult so = solve_sinr_only(inst, targets.sinr);
        const ScalingIntermediates sc = scaling_roots(inst, targets, so.beamformers);
        CHECK(sc.alpha_star > 1.0);
        int argmax = 0;
        sc.alpha_bar.maxCoeff(&argmax);
        CHECK(std::abs(rep.sinr_slack[argmax]) <= 1e-8);
        CHECK(std::abs(rep.harvest_slack[argmax]) <= 1e-8);
        for (int k = 0; k < 4; ++k) {
            CHECK(std::abs(rep.sinr_slack[k]) <= 1e-8);  // SINR tight for everyone
            CHECK(rep.harvest_slack[k] >= -1e-8);
            CHECK(sol.ps_ratios[k] > 0.0);
            CHECK(sol.ps_ratios[k] < 1.0);
        }

        // Direction preservation: scaling only.
        for (int k = 0; k < 4; ++k) {
            const VectorXcd a = sol.beamformers.col(k).normalized();
            const VectorXcd b = so.beamformers.col(k).normalized();
            CHECK((a - b).norm() < 1e-12);
        }
    }
}

TEST_CASE("K = 1 all three designs coincide") {
    const SystemInstance inst = testutil::random_instance(111, 4, 1, 0.05, 0.2, 0.7);
    const Targets targets(VectorXd::Constant(1, 3.0), VectorXd::Constant(1, 0.02));
    const double p_zf = solve_zf(inst, targets).total_power;
    const double p_so = solve_sinr_opt(inst, targets).total_power;
    const double p_oracle = oracles::k1_optimal_power(inst.channels.col(0).squaredNorm(), 3.0,
                                                      0.02, 0.05, 0.2, 0.7);
    CHECK(p_zf == Catch::Approx(p_oracle).epsilon(1e-6));
    CHECK(p_so == Catch::Approx(p_oracle).epsilon(1e-6));
}
