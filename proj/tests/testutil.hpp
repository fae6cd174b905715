// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "swiptbf/model.hpp"
#include "swiptbf/rng.hpp"

namespace testutil {

// Unit-scale complex Gaussian channels; convenient for solver math checks
// where the physical magnitudes do not matter.
inline swiptbf::SystemInstance random_instance(std::uint64_t seed, int nt, int k_users,
                                               double sigma2 = 0.1, double delta2 = 0.5,
                                               double zeta = 0.5) {
    swiptbf::Philox4x32 rng(seed, 0xfeed);
    swiptbf::MatrixXcd H(nt, k_users);
    for (int c = 0; c < k_users; ++c)
        for (int r = 0; r < nt; ++r) H(r, c) = rng.next_cnormal(1.0);
    return swiptbf::SystemInstance(H, swiptbf::VectorXd::Constant(k_users, sigma2),
                                   swiptbf::VectorXd::Constant(k_users, delta2),
                                   swiptbf::VectorXd::Constant(k_users, zeta));
}

inline swiptbf::MatrixXcd random_beamformers(std::uint64_t seed, int nt, int k_users,
                                             double scale = 1.0) {
    swiptbf::Philox4x32 rng(seed, 0xbeef);
    swiptbf::MatrixXcd V(nt, k_users);
    for (int c = 0; c < k_users; ++c)
        for (int r = 0; r < nt; ++r) V(r, c) = rng.next_cnormal(scale * scale);
    return V;
}

}  // namespace testutil
