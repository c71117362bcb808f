#include "mbfs/knn/sample_block.hpp"

#include <string>

#include "mbfs/error.hpp"

namespace mbfs::knn {

SampleBlock::SampleBlock(std::size_t n, std::size_t d, std::vector<double> values)
    : m_n(n), m_d(d), m_values(std::move(values)) {
    if (n == 0 || d == 0) {
        throw Error(ErrorKind::dimension_mismatch, "sample block needs n >= 1 and d >= 1");
    }
    if (m_values.size() != n * d) {
        throw Error(ErrorKind::dimension_mismatch,
                    "sample block expects " + std::to_string(n * d) + " values, got " + std::to_string(m_values.size()));
    }
    for (std::size_t i = 0; i < m_values.size(); ++i) {
        if (!std::isfinite(m_values[i])) {
            throw Error(ErrorKind::non_finite, "sample block has a non-finite value at row " + std::to_string(i / d));
        }
    }
}

SampleBlock SampleBlock::column(std::span<const double> values) {
    return SampleBlock(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

SampleBlock hconcat(std::span<const SampleBlock* const> blocks) {
    if (blocks.empty()) throw Error(ErrorKind::dimension_mismatch, "hconcat of zero blocks");
    const std::size_t n = blocks.front()->n();
    std::size_t d = 0;
    for (const auto* b : blocks) {
        if (b->n() != n) {
            throw Error(ErrorKind::dimension_mismatch,
                        "sample counts differ: " + std::to_string(n) + " vs " + std::to_string(b->n()));
        }
        d += b->d();
    }
    std::vector<double> values(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        double* out = values.data() + i * d;
        for (const auto* b : blocks) {
            const auto r = b->row(i);
            out = std::copy(r.begin(), r.end(), out);
        }
    }
    return SampleBlock(n, d, std::move(values));
}

SampleBlock hconcat(const SampleBlock& a, const SampleBlock& b) {
    const SampleBlock* blocks[] = {&a, &b};
    return hconcat(blocks);
}

SampleBlock hconcat(const SampleBlock& a, const SampleBlock& b, const SampleBlock& c) {
    const SampleBlock* blocks[] = {&a, &b, &c};
    return hconcat(blocks);
}

SampleBlock gather_rows(const SampleBlock& block, std::span<const std::size_t> perm) {
    const std::size_t d = block.d();
    std::vector<double> values(perm.size() * d);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        if (perm[i] >= block.n()) throw Error(ErrorKind::invalid_argument, "row index out of range");
        const auto r = block.row(perm[i]);
        std::copy(r.begin(), r.end(), values.begin() + static_cast<std::ptrdiff_t>(i * d));
    }
    return SampleBlock(perm.size(), d, std::move(values));
}

}  // namespace mbfs::knn
