#pragma once

#include <cstddef>
#include <cstdint>

#include "mbfs/knn/sample_block.hpp"

namespace mbfs::synthetic {

struct GaussianPair {
    knn::SampleBlock x;
    knn::SampleBlock y;
};

/// Standard bivariate normal with correlation rho.
GaussianPair gen_gaussian_pair(std::size_t n, double rho, std::uint64_t seed);

struct GaussianTriple {
    knn::SampleBlock x;
    knn::SampleBlock y;
    knn::SampleBlock z;
};

// Chain X -> Z -> Y with unit-variance Gaussian noise: Z = a X + e1,
// Y = b Z + e2. X and Y are independent given Z.
GaussianTriple gen_gaussian_chain(std::size_t n, double a, double b, std::uint64_t seed);

}  // namespace mbfs::synthetic
