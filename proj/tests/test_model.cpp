// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "swiptbf/model.hpp"
#include "swiptbf/rng.hpp"
#include "swiptbf/units.hpp"
#include "testutil.hpp"

using namespace swiptbf;

TEST_CASE("dBm conversions hit the reference points") {
    CHECK(dbm_to_watts(-70.0) == Catch::Approx(1e-10).epsilon(1e-14));
    CHECK(dbm_to_watts(0.0) == Catch::Approx(1e-3).epsilon(1e-14));
    CHECK(dbm_to_watts(-50.0) == Catch::Approx(1e-8).epsilon(1e-14));
    CHECK(watts_to_dbm(1e-10) == Catch::Approx(-70.0).margin(1e-12));
}

TEST_CASE("dBm round trip is the identity to 1e-12") {
    Philox4x32 rng(7, 0);
    for (int i = 0; i < 200; ++i) {
        const double dbm = -90.0 + 140.0 * rng.next_unit();
        CHECK(watts_to_dbm(dbm_to_watts(dbm)) == Catch::Approx(dbm).margin(1e-12 * std::abs(dbm) + 1e-13));
        const double w = std::pow(10.0, -12.0 + 13.0 * rng.next_unit());
        CHECK(dbm_to_watts(watts_to_dbm(w)) == Catch::Approx(w).epsilon(1e-12));
    }
}

TEST_CASE("single-user SINR closed form") {
    // h = [1, 0], v = [sqrt(p), 0], rho = 1/2, sigma2 = delta2 = 1:
    // SINR = (p/2) / (1/2 + 1) = p/3.
    MatrixXcd H(2, 1);
    H << 1.0, 0.0;
    SystemInstance inst(H, VectorXd::Ones(1), VectorXd::Ones(1), VectorXd::Ones(1));
    const double p = 2.7;
    MatrixXcd V(2, 1);
    V << std::sqrt(p), 0.0;
    VectorXd rho = VectorXd::Constant(1, 0.5);
    CHECK(achieved_sinr(inst, V, rho, 0) == Catch::Approx(p / 3.0).epsilon(1e-14));
}

TEST_CASE("orthogonal beam gives zero SINR") {
    MatrixXcd H(2, 1);
    H << 1.0, 0.0;
    SystemInstance inst(H, VectorXd::Ones(1), VectorXd::Ones(1), VectorXd::Ones(1));
    MatrixXcd V(2, 1);
    V << 0.0, 3.0;
    CHECK(achieved_sinr(inst, V, VectorXd::Constant(1, 0.5), 0) == 0.0);
}

TEST_CASE("metrics match the naive summation oracle") {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        const SystemInstance inst = testutil::random_instance(seed, 4, 3);
        const MatrixXcd V = testutil::random_beamformers(seed + 100, 4, 3);
        Philox4x32 rng(seed, 55);
        VectorXd rho(3);
        for (int k = 0; k < 3; ++k) rho[k] = 0.05 + 0.9 * rng.next_unit();

        std::vector<std::vector<oracles::cxd>> Ho(4, std::vector<oracles::cxd>(3));
        std::vector<std::vector<oracles::cxd>> Vo(4, std::vector<oracles::cxd>(3));
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 3; ++c) {
                Ho[r][c] = inst.channels(r, c);
                Vo[r][c] = V(r, c);
            }
        std::vector<double> rv(rho.data(), rho.data() + 3);
        std::vector<double> s2(3, 0.1), d2(3, 0.5), zt(3, 0.5);
        for (int k = 0; k < 3; ++k) {
            CHECK(achieved_sinr(inst, V, rho, k) ==
                  Catch::Approx(oracles::naive_sinr(Ho, Vo, rv, s2, d2, k)).epsilon(1e-14));
            CHECK(harvested_power(inst, V, rho, k) ==
                  Catch::Approx(oracles::naive_harvest(Ho, Vo, rv, s2, zt, k)).epsilon(1e-14));
        }
    }
}

TEST_CASE("harvested power vanishes as rho approaches one") {
    const SystemInstance inst = testutil::random_instance(21, 4, 2);
    const MatrixXcd V = testutil::random_beamformers(22, 4, 2);
    VectorXd rho = VectorXd::Constant(2, 1.0 - 1e-12);
    for (int k = 0; k < 2; ++k) {
        const double received =
            (V.adjoint() * inst.channels.col(k)).squaredNorm() + inst.antenna_noise[k];
        CHECK(harvested_power(inst, V, rho, k) <= 1e-11 * inst.eh_efficiency[k] * received);
    }
}

TEST_CASE("noise-only harvest") {
    MatrixXcd H(2, 1);
    H << 1.0, 1.0;
    SystemInstance inst(H, VectorXd::Constant(1, 2.0), VectorXd::Ones(1), VectorXd::Ones(1));
    const MatrixXcd V = MatrixXcd::Zero(2, 1);
    CHECK(harvested_power(inst, V, VectorXd::Constant(1, 0.5), 0) == Catch::Approx(1.0));
}

TEST_CASE("metric argument validation") {
    const SystemInstance inst = testutil::random_instance(31, 3, 2);
    const MatrixXcd V = testutil::random_beamformers(32, 3, 2);
    const VectorXd rho = VectorXd::Constant(2, 0.5);
    CHECK_THROWS_AS(achieved_sinr(inst, V, rho, 2), std::out_of_range);
    CHECK_THROWS_AS(achieved_sinr(inst, V, rho, -1), std::out_of_range);
    VectorXd bad = rho;
    bad[0] = 0.0;
    CHECK_THROWS_AS(achieved_sinr(inst, V, bad, 0), std::invalid_argument);
    bad[0] = 1.0;
    CHECK_THROWS_AS(harvested_power(inst, V, bad, 0), std::invalid_argument);
    CHECK_THROWS_AS(achieved_sinr(inst, V.leftCols(1), rho, 0), std::invalid_argument);
}

TEST_CASE("instance and target invariants are enforced") {
    MatrixXcd H = MatrixXcd::Identity(2, 2);
    CHECK_THROWS_AS(SystemInstance(H, VectorXd::Zero(2), VectorXd::Ones(2),
                                   VectorXd::Constant(2, 0.5)),
                    std::invalid_argument);
    CHECK_THROWS_AS(SystemInstance(H, VectorXd::Ones(2), VectorXd::Ones(2),
                                   VectorXd::Constant(2, 1.5)),
                    std::invalid_argument);
    MatrixXcd Hz = H;
    Hz.col(1).setZero();
    CHECK_THROWS_AS(SystemInstance(Hz, VectorXd::Ones(2), VectorXd::Ones(2),
                                   VectorXd::Constant(2, 0.5)),
                    std::invalid_argument);
    CHECK_THROWS_AS(Targets(VectorXd::Zero(2), VectorXd::Ones(2)), std::invalid_argument);
    CHECK_THROWS_AS(Targets(VectorXd::Ones(2), VectorXd::Zero(2)), std::invalid_argument);
}

TEST_CASE("all-zero beamformers fail the constraint check with slack -1") {
    const SystemInstance inst = testutil::random_instance(41, 4, 3);
    const Targets targets(VectorXd::Constant(3, 2.0), VectorXd::Constant(3, 0.3));
    const JbpsSolution sol = make_solution(inst, MatrixXcd::Zero(4, 3),
                                           VectorXd::Constant(3, 0.5), SolveMethod::ZeroForcing);
    const ConstraintReport rep = check_solution(inst, targets, sol);
    CHECK_FALSE(rep.feasible);
    for (int k = 0; k < 3; ++k) CHECK(rep.sinr_slack[k] == Catch::Approx(-1.0));
}

TEST_CASE("solution caches equal freshly computed metrics") {
    const SystemInstance inst = testutil::random_instance(51, 4, 3);
    const MatrixXcd V = testutil::random_beamformers(52, 4, 3);
    const VectorXd rho = VectorXd::Constant(3, 0.37);
    const JbpsSolution sol = make_solution(inst, V, rho, SolveMethod::SinrOptimal);
    CHECK(sol.total_power == Catch::Approx(V.squaredNorm()).epsilon(1e-12));
    for (int k = 0; k < 3; ++k) {
        CHECK(sol.per_user_sinr[k] == achieved_sinr(inst, V, rho, k));
        CHECK(sol.per_user_harvest[k] == harvested_power(inst, V, rho, k));
    }
}

TEST_CASE("SINR is nondecreasing in a common beam scale") {
    const SystemInstance inst = testutil::random_instance(61, 4, 3);
    const MatrixXcd V = testutil::random_beamformers(62, 4, 3);
    const VectorXd rho = VectorXd::Constant(3, 0.4);
    for (int k = 0; k < 3; ++k) {
        double prev = 0.0;
        for (double c = 0.1; c < 10.0; c *= 1.5) {
            const double s = achieved_sinr(inst, c * V, rho, k);
            CHECK(s >= prev - 1e-15 * s);
            prev = s;
        }
    }
}
