// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace swiptbf {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11 constants).
///
/// State is a 64-bit key plus a 128-bit counter, so independent substreams
/// are cheap: fix (key, stream) and let the block counter run. Draw d of
/// user k maps to stream words (k, d) and is reproducible regardless of
/// call order or thread count.
class Philox4x32 {
  public:
    Philox4x32(std::uint64_t key, std::uint64_t stream_a, std::uint64_t stream_b = 0)
        : key0_(static_cast<std::uint32_t>(key)),
          key1_(static_cast<std::uint32_t>(key >> 32)),
          ctr_{0, static_cast<std::uint32_t>(stream_a),
               static_cast<std::uint32_t>(stream_a >> 32),
               static_cast<std::uint32_t>(stream_b)} {}

    std::uint32_t next_u32() {
        if (idx_ == 4) {
            block_ = round10(ctr_, key0_, key1_);
            ++ctr_[0];
            idx_ = 0;
        }
        return block_[idx_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return lo | (hi << 32);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1]; safe as a log() argument.
    double next_unit_pos() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

    /// Pair of independent standard normals (Box-Muller).
    std::array<double, 2> next_normal_pair() {
        const double r = std::sqrt(-2.0 * std::log(next_unit_pos()));
        const double phi = 2.0 * std::numbers::pi * next_unit();
        return {r * std::cos(phi), r * std::sin(phi)};
    }

    /// Circularly-symmetric complex Gaussian, zero mean, E|z|^2 = variance.
    std::complex<double> next_cnormal(double variance) {
        const auto z = next_normal_pair();
        const double s = std::sqrt(variance / 2.0);
        return {s * z[0], s * z[1]};
    }

  private:
    static std::array<std::uint32_t, 4> round10(std::array<std::uint32_t, 4> c,
                                                std::uint32_t k0, std::uint32_t k1) {
        for (int r = 0; r < 10; ++r) {
            const std::uint64_t p0 = 0xD2511F53ull * c[0];
            const std::uint64_t p1 = 0xCD9E8D57ull * c[2];
            c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k0,
                 static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k1,
                 static_cast<std::uint32_t>(p0)};
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        return c;
    }

    std::uint32_t key0_, key1_;
    std::array<std::uint32_t, 4> ctr_;
    std::array<std::uint32_t, 4> block_{};
    int idx_ = 4;
};

}  // namespace swiptbf
