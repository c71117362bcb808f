#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace mbfs::knn {

// n x d sample matrix, row-major. Every value is finite, n >= 1 and d >= 1.
class SampleBlock {
public:
    SampleBlock() = default;
    SampleBlock(std::size_t n, std::size_t d, std::vector<double> values);

    static SampleBlock column(std::span<const double> values);

    std::size_t n() const { return m_n; }
    std::size_t d() const { return m_d; }
    bool empty() const { return m_n == 0; }

    std::span<const double> row(std::size_t i) const { return {m_values.data() + i * m_d, m_d}; }
    double operator()(std::size_t i, std::size_t j) const { return m_values[i * m_d + j]; }
    const std::vector<double>& values() const { return m_values; }

private:
    std::size_t m_n = 0;
    std::size_t m_d = 0;
    std::vector<double> m_values;
};

/// Column-wise concatenation of blocks with equal sample counts.
SampleBlock hconcat(std::span<const SampleBlock* const> blocks);
SampleBlock hconcat(const SampleBlock& a, const SampleBlock& b);
SampleBlock hconcat(const SampleBlock& a, const SampleBlock& b, const SampleBlock& c);

/// Row i of the result is row perm[i] of `block`.
SampleBlock gather_rows(const SampleBlock& block, std::span<const std::size_t> perm);

inline double chebyshev(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a[j] - b[j]));
    return d;
}

}  // namespace mbfs::knn
