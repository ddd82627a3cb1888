// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "npnkit/geo.hpp"
#include "npnkit/rng.hpp"

namespace npnkit {

// Spatially smooth lognormal shadowing: white Gaussian noise on a regular
// 3D grid, smoothed with a separable Gaussian kernel whose 1D taps are
// normalized to unit L2 norm (grid-node variance stays exactly sigma^2),
// then trilinearly interpolated. The white noise at a node is a pure
// function of (seed, node index), so the field is identical no matter
// which region is materialized first, and repeated flights through the
// same airspace see the same fades.
class ShadowingField {
  public:
    ShadowingField(std::uint64_t seed, double sigma_db, double correlation_m = 5.0,
                   double spacing_m = 1.0)
        : seed_(seed), sigma_(sigma_db), spacing_(spacing_m) {
        if (sigma_db < 0.0) throw std::invalid_argument("ShadowingField: sigma must be >= 0");
        if (spacing_m <= 0.0 || correlation_m <= 0.0)
            throw std::invalid_argument("ShadowingField: spacing and correlation must be > 0");
        const double lambda = correlation_m / spacing_m; // kernel width in cells
        halfwidth_ = std::max(1, static_cast<int>(std::ceil(3.0 * lambda)));
        taps_.resize(2 * halfwidth_ + 1);
        double norm2 = 0.0;
        for (int m = -halfwidth_; m <= halfwidth_; ++m) {
            const double g = std::exp(-0.5 * (m * m) / (lambda * lambda));
            taps_[m + halfwidth_] = g;
            norm2 += g * g;
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& t : taps_) t *= inv;
    }

    double sigma_db() const { return sigma_; }

    // Field value in dB at an arbitrary point.
    double at(const GeoPoint& p) const {
        if (sigma_ == 0.0) return 0.0;
        const double gx = p.x / spacing_;
        const double gy = p.y / spacing_;
        const double gz = p.z / spacing_;
        const int ix = static_cast<int>(std::floor(gx));
        const int iy = static_cast<int>(std::floor(gy));
        const int iz = static_cast<int>(std::floor(gz));
        const double fx = gx - ix;
        const double fy = gy - iy;
        const double fz = gz - iz;

        std::lock_guard<std::mutex> lock(mutex_);
        double v = 0.0;
        for (int dx = 0; dx <= 1; ++dx)
            for (int dy = 0; dy <= 1; ++dy)
                for (int dz = 0; dz <= 1; ++dz) {
                    const double w = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy) *
                                     (dz ? fz : 1.0 - fz);
                    if (w > 0.0) v += w * node_value(ix + dx, iy + dy, iz + dz);
                }
        return sigma_ * v;
    }

  private:
    static constexpr int kChunk = 32; // grid nodes per chunk edge

    struct ChunkKey {
        int cx, cy, cz;
        bool operator==(const ChunkKey& o) const {
            return cx == o.cx && cy == o.cy && cz == o.cz;
        }
    };
    struct ChunkKeyHash {
        std::size_t operator()(const ChunkKey& k) const {
            return static_cast<std::size_t>(
                mix_seed(static_cast<std::uint64_t>(static_cast<std::int64_t>(k.cx)),
                         static_cast<std::uint64_t>(static_cast<std::int64_t>(k.cy)),
                         static_cast<std::uint64_t>(static_cast<std::int64_t>(k.cz))));
        }
    };

    static int floor_div(int a, int b) {
        const int q = a / b;
        return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
    }

    double white_noise(int ix, int iy, int iz) const {
        SplitMix64 g(mix_seed(seed_, static_cast<std::uint64_t>(static_cast<std::int64_t>(ix)),
                              static_cast<std::uint64_t>(static_cast<std::int64_t>(iy)),
                              static_cast<std::uint64_t>(static_cast<std::int64_t>(iz))));
        return g.normal();
    }

    // Smoothed values for one chunk: fill white noise over the chunk plus
    // a kernel-halfwidth halo, then run the three separable passes.
    std::vector<double> build_chunk(const ChunkKey& key) const {
        const int n = kChunk;
        const int m = halfwidth_;
        const int wn = n + 2 * m;
        const int x0 = key.cx * n - m;
        const int y0 = key.cy * n - m;
        const int z0 = key.cz * n - m;

        std::vector<double> white(static_cast<std::size_t>(wn) * wn * wn);
        for (int x = 0; x < wn; ++x)
            for (int y = 0; y < wn; ++y) {
                double* row = &white[(static_cast<std::size_t>(x) * wn + y) * wn];
                for (int z = 0; z < wn; ++z) row[z] = white_noise(x0 + x, y0 + y, z0 + z);
            }

        // z pass: (wn, wn, wn) -> (wn, wn, n)
        std::vector<double> bz(static_cast<std::size_t>(wn) * wn * n);
        for (int x = 0; x < wn; ++x)
            for (int y = 0; y < wn; ++y) {
                const double* in = &white[(static_cast<std::size_t>(x) * wn + y) * wn];
                double* out = &bz[(static_cast<std::size_t>(x) * wn + y) * n];
                for (int z = 0; z < n; ++z) {
                    double acc = 0.0;
                    for (int k = 0; k <= 2 * m; ++k) acc += taps_[k] * in[z + k];
                    out[z] = acc;
                }
            }
        white.clear();
        white.shrink_to_fit();

        // y pass: (wn, wn, n) -> (wn, n, n)
        std::vector<double> by(static_cast<std::size_t>(wn) * n * n);
        for (int x = 0; x < wn; ++x)
            for (int y = 0; y < n; ++y) {
                double* out = &by[(static_cast<std::size_t>(x) * n + y) * n];
                for (int z = 0; z < n; ++z) out[z] = 0.0;
                for (int k = 0; k <= 2 * m; ++k) {
                    const double w = taps_[k];
                    const double* in = &bz[(static_cast<std::size_t>(x) * wn + y + k) * n];
                    for (int z = 0; z < n; ++z) out[z] += w * in[z];
                }
            }
        bz.clear();
        bz.shrink_to_fit();

        // x pass: (wn, n, n) -> (n, n, n)
        std::vector<double> result(static_cast<std::size_t>(n) * n * n, 0.0);
        for (int x = 0; x < n; ++x) {
            double* out_plane = &result[static_cast<std::size_t>(x) * n * n];
            for (int k = 0; k <= 2 * m; ++k) {
                const double w = taps_[k];
                const double* in_plane = &by[static_cast<std::size_t>(x + k) * n * n];
                for (int i = 0; i < n * n; ++i) out_plane[i] += w * in_plane[i];
            }
        }
        return result;
    }

    // Caller holds mutex_.
    double node_value(int ix, int iy, int iz) const {
        const ChunkKey key{floor_div(ix, kChunk), floor_div(iy, kChunk), floor_div(iz, kChunk)};
        auto it = cache_.find(key);
        if (it == cache_.end()) it = cache_.emplace(key, build_chunk(key)).first;
        const int lx = ix - key.cx * kChunk;
        const int ly = iy - key.cy * kChunk;
        const int lz = iz - key.cz * kChunk;
        return it->second[(static_cast<std::size_t>(lx) * kChunk + ly) * kChunk + lz];
    }

    std::uint64_t seed_;
    double sigma_;
    double spacing_;
    int halfwidth_ = 1;
    std::vector<double> taps_;
    mutable std::mutex mutex_;
    mutable std::unordered_map<ChunkKey, std::vector<double>, ChunkKeyHash> cache_;
};

} // namespace npnkit
