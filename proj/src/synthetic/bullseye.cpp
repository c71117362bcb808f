#include "mbfs/synthetic/bullseye.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mbfs/error.hpp"

namespace mbfs::synthetic {

void validate_rings(const Rings& rings) {
    for (const auto& r : rings) {
        if (!(std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo >= 0.0 && r.hi > r.lo)) {
            throw Error(ErrorKind::invalid_argument, "ring intervals need 0 <= lo < hi");
        }
    }
    if (rings[0].hi > rings[1].lo && rings[1].hi > rings[0].lo) {
        throw Error(ErrorKind::invalid_argument, "ring intervals must be disjoint");
    }
}

void BullseyeConfig::validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 0.5)) throw Error(ErrorKind::invalid_argument, "epsilon must lie in [0, 0.5]");
    if (n == 0) throw Error(ErrorKind::invalid_argument, "n must be positive");
    validate_rings(rings);
}

Bullseye2d gen_bullseye_2d(const BullseyeConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> noise(-cfg.epsilon, cfg.epsilon);
    std::vector<double> x(2 * cfg.n), y(cfg.n), r(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        const double radius = draw_ring_radius(cfg.rings, rng);
        const double t = angle(rng);
        x[2 * i] = radius * std::cos(t);
        x[2 * i + 1] = radius * std::sin(t);
        r[i] = radius;
        y[i] = cfg.epsilon > 0.0 ? radius + noise(rng) : radius;
    }
    return {SampleBlock(cfg.n, 2, std::move(x)), SampleBlock(cfg.n, 1, std::move(y)),
            SampleBlock(cfg.n, 1, std::move(r))};
}

double bullseye_y_density(double y, double epsilon, const Rings& rings) {
    const double total = rings[0].length() + rings[1].length();
    double covered = 0.0;
    for (const auto& ring : rings) {
        covered += std::max(0.0, std::min(y + epsilon, ring.hi) - std::max(y - epsilon, ring.lo));
    }
    return covered / (2.0 * epsilon * total);
}

double mi_oracle_bullseye(double epsilon, const Rings& rings) {
    if (!(epsilon > 0.0 && epsilon <= 0.5)) throw Error(ErrorKind::invalid_argument, "oracle needs 0 < epsilon <= 0.5");
    validate_rings(rings);

    std::vector<double> knots;
    for (const auto& ring : rings) {
        for (double end : {ring.lo, ring.hi}) {
            knots.push_back(end - epsilon);
            knots.push_back(end + epsilon);
        }
    }
    std::sort(knots.begin(), knots.end());

    auto integrand = [&](double y) {
        const double p = bullseye_y_density(y, epsilon, rings);
        return p > 0.0 ? -p * std::log(p) : 0.0;
    };
    double h = 0.0;
    for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
        if (knots[s + 1] <= knots[s]) continue;
        h += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, knots[s], knots[s + 1], 10,
                                                                           1e-12);
    }
    return h - std::log(2.0 * epsilon);
}

}  // namespace mbfs::synthetic
