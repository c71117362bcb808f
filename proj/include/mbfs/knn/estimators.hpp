#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "mbfs/knn/sample_block.hpp"

namespace mbfs::knn {

// strict: KSG / Frenzel-Pompe counts with strict inequality.
// mixed: where the joint k-NN radius is zero (tied samples), k is replaced by
// the multiplicity of the tie and the marginal terms use log(count + 1) with
// inclusive (<= 0) counts. Points with a positive radius are unchanged.
enum class TieMode { strict, mixed };

struct KnnConfig {
    int k = 5;
    TieMode tie_mode = TieMode::strict;
    double jitter = 0.0;             // uniform noise half-width, relative to each column's std
    std::uint64_t jitter_seed = 0;
};

/// Chebyshev distance from every point to its k-th nearest other point.
std::vector<double> knn_distances(const SampleBlock& points, int k);

/// The k nearest other points of every point, ordered by (distance, index).
std::vector<std::vector<std::size_t>> nearest_neighbors(const SampleBlock& points, int k);

/// KSG estimate of I(X;Y) in nats.
double ksg_mi(const SampleBlock& x, const SampleBlock& y, const KnnConfig& cfg = {});

/// Frenzel-Pompe estimate of I(X;Y|Z) in nats.
double fp_cmi(const SampleBlock& x, const SampleBlock& y, const SampleBlock& z, const KnnConfig& cfg = {});

// Holds the index structures over the fixed (y, z) part so the statistic can
// be re-evaluated for many versions of x, as a permutation test does. Without
// z it computes the KSG MI. estimate() is const and thread-safe.
class KnnEstimator {
public:
    KnnEstimator(SampleBlock y, std::optional<SampleBlock> z, KnnConfig cfg);
    ~KnnEstimator();
    KnnEstimator(KnnEstimator&&) noexcept;
    KnnEstimator& operator=(KnnEstimator&&) noexcept;

    std::size_t n() const;
    const KnnConfig& config() const { return m_cfg; }
    double estimate(const SampleBlock& x) const;

private:
    struct Fixed;
    KnnConfig m_cfg;
    std::unique_ptr<Fixed> m_fixed;
};

/// Adds U(-jitter, jitter) * std(column) noise to every column.
SampleBlock add_jitter(const SampleBlock& block, double jitter, std::uint64_t seed);

}  // namespace mbfs::knn
