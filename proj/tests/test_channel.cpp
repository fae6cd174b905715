// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "swiptbf/channel.hpp"

using namespace swiptbf;

TEST_CASE("broadside steering vector is constant") {
    const VectorXcd v = ula_los(5, 0.0, 0.5, 1e-4);
    for (int n = 0; n < 5; ++n) {
        CHECK(v[n].real() == Catch::Approx(1e-4).epsilon(1e-15));
        CHECK(v[n].imag() == Catch::Approx(0.0).margin(1e-19));
    }
}

TEST_CASE("endfire steering vector alternates sign") {
    // phi = 90 deg, d/lambda = 1/2: theta = -pi, so [1, -1] times the amplitude.
    const VectorXcd v = ula_los(2, 90.0, 0.5, 1e-4);
    CHECK(v[0].real() == Catch::Approx(1e-4));
    CHECK(v[1].real() == Catch::Approx(-1e-4).epsilon(1e-12));
    CHECK(std::abs(v[1].imag()) < 1e-18);
}

TEST_CASE("steering elements all have the configured amplitude") {
    const VectorXcd v = ula_los(8, 37.5, 0.5, 1e-4);
    for (int n = 0; n < 8; ++n) CHECK(std::abs(v[n]) == Catch::Approx(1e-4).epsilon(4e-16));
}

TEST_CASE("huge Rician factor reproduces the LOS component") {
    const VectorXcd los = ula_los(4, -30.0, 0.5, 1e-4);
    Philox4x32 rng(2024, 0);
    const VectorXcd h = rician_draw(rng, los, 1e12, 1e-4);
    CHECK((h - los).cwiseAbs().maxCoeff() < 1e-4 * los.norm());
}

TEST_CASE("zero Rician factor matches the NLOS variance") {
    const VectorXcd los = ula_los(4, 10.0, 0.5, 1e-4);
    const double var = 1e-4;
    double sum = 0.0;
    std::size_t count = 0;
    for (std::uint64_t d = 0; d < 100000; ++d) {
        Philox4x32 rng(99, d);
        const VectorXcd h = rician_draw(rng, los, 0.0, var);
        sum += h.squaredNorm();
        count += h.size();
    }
    CHECK(sum / count == Catch::Approx(var).epsilon(0.03));
}

TEST_CASE("draws are reproducible bit for bit") {
    const VectorXcd los = ula_los(6, 45.0, 0.5, 1e-4);
    Philox4x32 a(7, 3, 1), b(7, 3, 1);
    const VectorXcd ha = rician_draw(a, los, 3.0, 1e-4);
    const VectorXcd hb = rician_draw(b, los, 3.0, 1e-4);
    for (int n = 0; n < 6; ++n) {
        CHECK(ha[n].real() == hb[n].real());
        CHECK(ha[n].imag() == hb[n].imag());
    }
}

TEST_CASE("sample mean converges to the LOS share") {
    const ChannelConfig cfg;  // paper defaults
    const double kr = db_to_linear(cfg.rician_factor_db);
    const VectorXcd los =
        ula_los(cfg.num_antennas, cfg.user_directions_deg[0], 0.5, cfg.los_amplitude);
    const int draws = 10000;
    VectorXcd mean = VectorXcd::Zero(cfg.num_antennas);
    for (int d = 0; d < draws; ++d) {
        Philox4x32 rng(cfg.seed, static_cast<std::uint64_t>(d));
        mean += rician_draw(rng, los, kr, cfg.nlos_variance);
    }
    mean /= draws;
    const VectorXcd expected = std::sqrt(kr / (1.0 + kr)) * los;
    // Each real component has variance nlos_variance / (2 (1 + kr)) / draws.
    const double se = std::sqrt(cfg.nlos_variance / (2.0 * (1.0 + kr)) / draws);
    for (int n = 0; n < cfg.num_antennas; ++n) {
        CHECK(std::abs(mean[n].real() - expected[n].real()) < 3.0 * se);
        CHECK(std::abs(mean[n].imag() - expected[n].imag()) < 3.0 * se);
    }
}

TEST_CASE("generated instances carry the configured link parameters") {
    const ChannelConfig cfg;
    const LinkParams link;
    const SystemInstance inst = generate_instance(cfg, link, 0);
    CHECK(inst.num_users == 4);
    CHECK(inst.num_antennas == 4);
    for (int k = 0; k < 4; ++k) {
        CHECK(inst.antenna_noise[k] == Catch::Approx(1e-10).epsilon(1e-12));
        CHECK(inst.id_noise[k] == Catch::Approx(1e-8).epsilon(1e-12));
        CHECK(inst.eh_efficiency[k] == 0.5);
    }
}

TEST_CASE("instance generation is a pure function of (config, draw)") {
    const ChannelConfig cfg;
    const LinkParams link;
    const SystemInstance a = generate_instance(cfg, link, 17);
    const SystemInstance b = generate_instance(cfg, link, 17);
    const SystemInstance c = generate_instance(cfg, link, 18);
    CHECK(a.channels == b.channels);
    CHECK(a.channels != c.channels);

    ChannelConfig other = cfg;
    other.seed += 1;
    CHECK(generate_instance(other, link, 17).channels != a.channels);
}

TEST_CASE("channel config validation") {
    ChannelConfig cfg;
    cfg.nlos_variance = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = ChannelConfig{};
    cfg.user_directions_deg.clear();
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
