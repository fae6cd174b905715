// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "swiptbf/model.hpp"
#include "swiptbf/rng.hpp"
#include "swiptbf/units.hpp"

namespace swiptbf {

/// Rician fading around a far-field uniform-linear-array line-of-sight
/// component. Angles in degrees and the Rician factor in dB at this
/// boundary; conversion happens once, inside the draw.
struct ChannelConfig {
    int num_antennas = 4;
    std::vector<double> user_directions_deg = {-30.0, -60.0, 60.0, 30.0};
    double rician_factor_db = 5.0;
    double los_amplitude = 1e-4;          // per-element LOS amplitude
    double nlos_variance = 1e-4;          // per-element E|h_NLOS|^2
    double element_spacing_ratio = 0.5;   // d / lambda
    std::uint64_t seed = 1;

    void validate() const {
        if (num_antennas < 1) throw std::invalid_argument("channel: num_antennas must be >= 1");
        if (user_directions_deg.empty())
            throw std::invalid_argument("channel: need at least one user direction");
        if (!(nlos_variance > 0.0)) throw std::invalid_argument("channel: nlos_variance must be > 0");
        if (!(los_amplitude > 0.0)) throw std::invalid_argument("channel: los_amplitude must be > 0");
        if (!(element_spacing_ratio > 0.0))
            throw std::invalid_argument("channel: element_spacing_ratio must be > 0");
    }

    int num_users() const { return static_cast<int>(user_directions_deg.size()); }
};

/// Receiver-side parameters shared by all users of a generated instance.
struct LinkParams {
    double antenna_noise_w = dbm_to_watts(-70.0);  // sigma^2
    double id_noise_w = dbm_to_watts(-50.0);       // delta^2
    double eh_efficiency = 0.5;                    // zeta
};

/// Steering vector of an N_t-element ULA toward azimuth phi:
/// amplitude * [1, e^{j theta}, ..., e^{j (N_t-1) theta}], theta = -2 pi (d/lambda) sin(phi).
inline VectorXcd ula_los(int num_antennas, double phi_deg, double spacing_ratio,
                         double amplitude) {
    const double phi = phi_deg * std::numbers::pi / 180.0;
    const double theta = -2.0 * std::numbers::pi * spacing_ratio * std::sin(phi);
    VectorXcd v(num_antennas);
    for (int n = 0; n < num_antennas; ++n)
        v[n] = amplitude * std::exp(std::complex<double>(0.0, theta * n));
    return v;
}

/// One Rician draw: sqrt(K/(1+K)) * los + sqrt(1/(1+K)) * nlos with i.i.d.
/// CSCG nlos elements of the given per-element variance. K_R linear here.
inline VectorXcd rician_draw(Philox4x32& rng, const VectorXcd& los, double rician_factor,
                             double nlos_variance) {
    if (rician_factor < 0.0) throw std::invalid_argument("rician_draw: K_R must be >= 0");
    const double w_los = std::sqrt(rician_factor / (1.0 + rician_factor));
    const double w_nlos = std::sqrt(1.0 / (1.0 + rician_factor));
    VectorXcd h(los.size());
    for (Eigen::Index n = 0; n < los.size(); ++n)
        h[n] = w_los * los[n] + w_nlos * rng.next_cnormal(nlos_variance);
    return h;
}

/// Instance for one Monte-Carlo draw. Channel k uses the Philox substream
/// keyed by (seed; draw_index, k), so the result is a pure function of
/// (config, params, draw_index).
inline SystemInstance generate_instance(const ChannelConfig& config, const LinkParams& params,
                                        std::uint64_t draw_index) {
    config.validate();
    const int nt = config.num_antennas;
    const int k_users = config.num_users();
    const double kr = db_to_linear(config.rician_factor_db);

    MatrixXcd H(nt, k_users);
    for (int k = 0; k < k_users; ++k) {
        Philox4x32 rng(config.seed, draw_index, static_cast<std::uint64_t>(k));
        const VectorXcd los = ula_los(nt, config.user_directions_deg[k],
                                      config.element_spacing_ratio, config.los_amplitude);
        H.col(k) = rician_draw(rng, los, kr, config.nlos_variance);
    }

    const VectorXd sigma2 = VectorXd::Constant(k_users, params.antenna_noise_w);
    const VectorXd delta2 = VectorXd::Constant(k_users, params.id_noise_w);
    const VectorXd zeta = VectorXd::Constant(k_users, params.eh_efficiency);
    return SystemInstance(H, sigma2, delta2, zeta);
}

}  // namespace swiptbf
