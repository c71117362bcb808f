#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "mbfs/knn/sample_block.hpp"

namespace mbfs::synthetic {

using knn::SampleBlock;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
};

// Two disjoint radius intervals; R is uniform over their union.
using Rings = std::array<Interval, 2>;

/// [0.25, 0.5] and [0.75, 1.0]: the convention the MI oracle is derived under.
inline constexpr Rings kUnitRings{{{0.25, 0.5}, {0.75, 1.0}}};
/// [1, 2] and [3, 4]: the convention of the 2D experiment and the sphere DAG.
inline constexpr Rings kWideRings{{{1.0, 2.0}, {3.0, 4.0}}};

void validate_rings(const Rings& rings);

struct BullseyeConfig {
    double epsilon = 0.3;  // noise half-width, in [0, 0.5]
    std::size_t n = 2000;
    Rings rings = kUnitRings;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Bullseye2d {
    SampleBlock x;  // n x 2, (R cos T, R sin T)
    SampleBlock y;  // n x 1, R + N
    SampleBlock r;  // n x 1
};

// R uniform over the rings, T uniform on [0, 2 pi), N uniform on [-eps, eps].
Bullseye2d gen_bullseye_2d(const BullseyeConfig& cfg);

/// Draws one radius uniformly from the union of the rings.
template <class Rng>
double draw_ring_radius(const Rings& rings, Rng& rng);

// I(X;Y) = h(R + N) - log(2 eps) in nats. The density of R + N is the exact
// convolution of the ring law with the noise, a piecewise-linear function;
// h is integrated piece by piece with Gauss-Kronrod quadrature. Overlap of
// the two smeared rings (2 eps larger than the gap) is handled exactly.
double mi_oracle_bullseye(double epsilon, const Rings& rings = kUnitRings);

/// Density of R + N at y.
double bullseye_y_density(double y, double epsilon, const Rings& rings);

}  // namespace mbfs::synthetic

#include <random>

namespace mbfs::synthetic {

template <class Rng>
double draw_ring_radius(const Rings& rings, Rng& rng) {
    const double total = rings[0].length() + rings[1].length();
    const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    return u < rings[0].length() ? rings[0].lo + u : rings[1].lo + (u - rings[0].length());
}

}  // namespace mbfs::synthetic
