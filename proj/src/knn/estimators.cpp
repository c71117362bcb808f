#include "mbfs/knn/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "mbfs/error.hpp"
#include "mbfs/knn/digamma.hpp"
#include "mbfs/knn/kd_tree.hpp"
#include "mbfs/knn/vp_tree.hpp"

namespace mbfs::knn {
namespace {

// Exact neighbour counts on a 1-D axis by binary search. The search uses the
// same |a - b| predicate as the brute-force scan; it is monotone along the
// sorted axis, so partition_point finds the exact boundaries.
class SortedAxis {
public:
    explicit SortedAxis(const SampleBlock& block) : m_values(block.values()), m_sorted(block.values()) {
        std::sort(m_sorted.begin(), m_sorted.end());
    }

    std::size_t count(std::size_t i, double radius, bool inclusive) const {
        const double c = m_values[i];
        auto inside = [&](double dist) { return inclusive ? dist <= radius : dist < radius; };
        const auto lo = std::partition_point(m_sorted.begin(), m_sorted.end(),
                                             [&](double v) { return v < c && !inside(std::abs(v - c)); });
        const auto hi = std::partition_point(lo, m_sorted.end(),
                                             [&](double v) { return v <= c || inside(std::abs(v - c)); });
        const auto total = static_cast<std::size_t>(hi - lo);
        return inside(0.0) ? total - 1 : total;
    }

private:
    std::vector<double> m_values;
    std::vector<double> m_sorted;
};

// Neighbour counts within one subspace: sorted axis in 1-D, kd-tree otherwise.
class Counter {
public:
    explicit Counter(const SampleBlock& block) {
        if (block.d() == 1) {
            m_axis.emplace(block);
        } else {
            m_index.emplace(block);
        }
    }
    std::size_t count(std::size_t i, double radius, bool inclusive) const {
        return m_axis ? m_axis->count(i, radius, inclusive) : m_index->count_within(i, radius, inclusive);
    }

private:
    std::optional<SortedAxis> m_axis;
    std::optional<KdTree> m_index;
};

// Below this many samples the estimator scans all pairs instead of building trees.
constexpr std::size_t kBruteForceMaxN = 600;

void check_k(int k, std::size_t n) {
    if (k < 1) throw Error(ErrorKind::invalid_argument, "k must be positive, got " + std::to_string(k));
    if (static_cast<std::size_t>(k) >= n) {
        throw Error(ErrorKind::insufficient_samples,
                    "k = " + std::to_string(k) + " requires more than " + std::to_string(k) + " samples, got n = " +
                        std::to_string(n) + "; use a smaller k");
    }
}

}  // namespace

SampleBlock add_jitter(const SampleBlock& block, double jitter, std::uint64_t seed) {
    if (jitter < 0.0) throw Error(ErrorKind::invalid_argument, "jitter must be non-negative");
    if (jitter == 0.0) return block;
    const std::size_t n = block.n();
    const std::size_t d = block.d();
    std::vector<double> values = block.values();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += block(i, j);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) var += (block(i, j) - mean) * (block(i, j) - mean);
        const double scale = jitter * std::sqrt(var / static_cast<double>(n));
        for (std::size_t i = 0; i < n; ++i) values[i * d + j] += scale * unit(rng);
    }
    return SampleBlock(n, d, std::move(values));
}

std::vector<double> knn_distances(const SampleBlock& points, int k) {
    check_k(k, points.n());
    const VpTree tree(points);
    std::vector<double> radii(points.n());
    for (std::size_t i = 0; i < points.n(); ++i) radii[i] = tree.kth_distance(i, static_cast<std::size_t>(k));
    return radii;
}

std::vector<std::vector<std::size_t>> nearest_neighbors(const SampleBlock& points, int k) {
    check_k(k, points.n());
    std::vector<std::vector<std::size_t>> out(points.n());
    const KdTree tree(points);
    for (std::size_t i = 0; i < points.n(); ++i) out[i] = tree.nearest(i, static_cast<std::size_t>(k));
    return out;
}

struct KnnEstimator::Fixed {
    SampleBlock y;
    std::optional<SampleBlock> z;
    std::optional<Counter> y_counter;   // MI: counts in y
    std::optional<Counter> yz_counter;  // CMI: counts in (y,z)
    std::optional<Counter> z_counter;   // CMI: counts in z
    DigammaTable psi;

    Fixed(SampleBlock y_, std::optional<SampleBlock> z_)
        : y(std::move(y_)), z(std::move(z_)), psi(y.n() + 1) {
        if (z) {
            yz_counter.emplace(hconcat(y, *z));
            z_counter.emplace(*z);
        } else {
            y_counter.emplace(y);
        }
    }
};

KnnEstimator::KnnEstimator(SampleBlock y, std::optional<SampleBlock> z, KnnConfig cfg) : m_cfg(cfg) {
    if (y.empty()) throw Error(ErrorKind::dimension_mismatch, "estimator needs a non-empty y block");
    if (z && z->n() != y.n()) {
        throw Error(ErrorKind::dimension_mismatch,
                    "y has " + std::to_string(y.n()) + " samples but z has " + std::to_string(z->n()));
    }
    check_k(cfg.k, y.n());
    if (cfg.jitter > 0.0) {
        y = add_jitter(y, cfg.jitter, cfg.jitter_seed + 1);
        if (z) z = add_jitter(*z, cfg.jitter, cfg.jitter_seed + 2);
    }
    m_fixed = std::make_unique<Fixed>(std::move(y), std::move(z));
}

KnnEstimator::~KnnEstimator() = default;
KnnEstimator::KnnEstimator(KnnEstimator&&) noexcept = default;
KnnEstimator& KnnEstimator::operator=(KnnEstimator&&) noexcept = default;

std::size_t KnnEstimator::n() const { return m_fixed->y.n(); }

double KnnEstimator::estimate(const SampleBlock& x_in) const {
    const Fixed& f = *m_fixed;
    const std::size_t n = f.y.n();
    if (x_in.n() != n) {
        throw Error(ErrorKind::dimension_mismatch,
                    "x has " + std::to_string(x_in.n()) + " samples but y has " + std::to_string(n));
    }
    const SampleBlock x = m_cfg.jitter > 0.0 ? add_jitter(x_in, m_cfg.jitter, m_cfg.jitter_seed) : x_in;
    const auto k = static_cast<std::size_t>(m_cfg.k);
    const bool mixed = m_cfg.tie_mode == TieMode::mixed;
    const double psi_k = f.psi(k);

    // Contribution of one point given its joint radius and marginal counts:
    // a = count in x (or xz), b = in y (or yz), c = in z.
    auto term = [&](double eps, std::size_t k_tilde, std::size_t a, std::size_t b, std::size_t c) {
        if (mixed && eps == 0.0) {
            double t = f.psi(k_tilde) - std::log(a + 1.0) - std::log(b + 1.0);
            return f.z ? t + std::log(c + 1.0) : t;
        }
        double t = psi_k - f.psi(a + 1) - f.psi(b + 1);
        return f.z ? t + f.psi(c + 1) : t;
    };

    double sum = 0.0;
    if (n <= kBruteForceMaxN) {
        // Exact O(n^2) scan; same predicates as the trees, cheaper at small n.
        const std::size_t dx = x.d(), dy = f.y.d(), dz = f.z ? f.z->d() : 0;
        std::vector<double> djoint(n - 1), da(n - 1), db(n - 1), dc(n - 1), scratch(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t t = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                double ex = 0.0, ey = 0.0, ez = 0.0;
                for (std::size_t c = 0; c < dx; ++c) ex = std::max(ex, std::abs(x(i, c) - x(j, c)));
                for (std::size_t c = 0; c < dy; ++c) ey = std::max(ey, std::abs(f.y(i, c) - f.y(j, c)));
                for (std::size_t c = 0; c < dz; ++c) ez = std::max(ez, std::abs((*f.z)(i, c) - (*f.z)(j, c)));
                da[t] = std::max(ex, ez);
                db[t] = std::max(ey, ez);
                dc[t] = ez;
                djoint[t] = std::max(da[t], ey);
                ++t;
            }
            scratch = djoint;
            std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k - 1), scratch.end());
            const double eps = scratch[k - 1];
            const bool inclusive = mixed && eps == 0.0;
            auto count = [&](const std::vector<double>& d) {
                return static_cast<std::size_t>(std::count_if(d.begin(), d.end(), [&](double v) {
                    return inclusive ? v <= eps : v < eps;
                }));
            };
            sum += term(eps, inclusive ? count(djoint) : k, count(da), count(db), f.z ? count(dc) : 0);
        }
    } else if (!f.z) {
        const KdTree joint(hconcat(x, f.y));
        const Counter x_counter(x);
        for (std::size_t i = 0; i < n; ++i) {
            const double eps = joint.kth_distance(i, k);
            const bool inclusive = mixed && eps == 0.0;
            sum += term(eps, inclusive ? joint.count_within(i, 0.0, true) : k, x_counter.count(i, eps, inclusive),
                        f.y_counter->count(i, eps, inclusive), 0);
        }
    } else {
        const KdTree joint(hconcat(x, f.y, *f.z));
        const Counter xz_counter(hconcat(x, *f.z));
        for (std::size_t i = 0; i < n; ++i) {
            const double eps = joint.kth_distance(i, k);
            const bool inclusive = mixed && eps == 0.0;
            sum += term(eps, inclusive ? joint.count_within(i, 0.0, true) : k, xz_counter.count(i, eps, inclusive),
                        f.yz_counter->count(i, eps, inclusive), f.z_counter->count(i, eps, inclusive));
        }
    }
    const double mean = sum / static_cast<double>(n);
    return f.z ? mean : f.psi(n) + mean;
}

double ksg_mi(const SampleBlock& x, const SampleBlock& y, const KnnConfig& cfg) {
    if (x.n() != y.n()) {
        throw Error(ErrorKind::dimension_mismatch,
                    "x has " + std::to_string(x.n()) + " samples but y has " + std::to_string(y.n()));
    }
    return KnnEstimator(y, std::nullopt, cfg).estimate(x);
}

double fp_cmi(const SampleBlock& x, const SampleBlock& y, const SampleBlock& z, const KnnConfig& cfg) {
    if (x.n() != y.n() || x.n() != z.n()) {
        throw Error(ErrorKind::dimension_mismatch, "x, y and z must have equal sample counts");
    }
    return KnnEstimator(y, z, cfg).estimate(x);
}

}  // namespace mbfs::knn
