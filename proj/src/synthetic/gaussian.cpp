#include "mbfs/synthetic/gaussian.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "mbfs/error.hpp"

namespace mbfs::synthetic {

GaussianPair gen_gaussian_pair(std::size_t n, double rho, std::uint64_t seed) {
    if (n == 0) throw Error(ErrorKind::invalid_argument, "n must be positive");
    if (!(rho > -1.0 && rho < 1.0)) throw Error(ErrorKind::invalid_argument, "rho must lie in (-1, 1)");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<double> x(n), y(n);
    const double s = std::sqrt(1.0 - rho * rho);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = g(rng);
        y[i] = rho * x[i] + s * g(rng);
    }
    return {knn::SampleBlock(n, 1, std::move(x)), knn::SampleBlock(n, 1, std::move(y))};
}

GaussianTriple gen_gaussian_chain(std::size_t n, double a, double b, std::uint64_t seed) {
    if (n == 0) throw Error(ErrorKind::invalid_argument, "n must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<double> x(n), y(n), z(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = g(rng);
        z[i] = a * x[i] + g(rng);
        y[i] = b * z[i] + g(rng);
    }
    return {knn::SampleBlock(n, 1, std::move(x)), knn::SampleBlock(n, 1, std::move(y)),
            knn::SampleBlock(n, 1, std::move(z))};
}

}  // namespace mbfs::synthetic
