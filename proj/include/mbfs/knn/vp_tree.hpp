#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "mbfs/knn/sample_block.hpp"

namespace mbfs::knn {

// Exact vantage-point tree over the Chebyshev metric. Sets smaller than
// kBruteForceBelow are kept in a single leaf and scanned linearly.
//
// Pruning bounds carry a relative slack of 1e-12 so that rounding in the
// triangle inequality can only make the search visit more nodes, never fewer.
// Results are therefore identical to an O(n^2) scan.
class VpTree {
public:
    static constexpr std::size_t kBruteForceBelow = 256;
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    explicit VpTree(const SampleBlock& points, std::size_t leaf_size = 16);

    std::size_t size() const { return m_index.size(); }
    std::size_t dim() const { return m_dim; }

    /// Distance from point i to its k-th nearest other point (1 <= k < n).
    double kth_distance(std::size_t i, std::size_t k) const;

    /// The k nearest other points of i, ordered by (distance, index).
    std::vector<std::size_t> nearest(std::size_t i, std::size_t k) const;

    /// #{j != exclude : d(q, p_j) < radius}, or <= radius when `inclusive`.
    std::size_t count_within(std::span<const double> q, double radius, bool inclusive,
                             std::size_t exclude = npos) const;

    /// Same, centred on point i and excluding it.
    std::size_t count_within(std::size_t i, double radius, bool inclusive) const;

private:
    struct Node {
        std::uint32_t lo = 0;
        std::uint32_t hi = 0;
        double mu = 0.0;
        double radius = 0.0;
        std::int32_t inner = -1;
        std::int32_t outer = -1;
        bool leaf() const { return inner < 0; }
    };
    struct Candidate {
        double dist;
        std::size_t index;
        bool operator<(const Candidate& o) const {
            return dist < o.dist || (dist == o.dist && index < o.index);
        }
    };

    std::int32_t build(std::vector<std::size_t>& order, const SampleBlock& points, std::size_t lo,
                       std::size_t hi, std::uint64_t& rng_state);
    void search(std::int32_t node, std::span<const double> q, std::size_t self, std::size_t k,
                std::vector<Candidate>& heap) const;
    std::size_t count(std::int32_t node, std::span<const double> q, double radius, bool inclusive,
                      std::size_t exclude_pos) const;
    std::vector<Candidate> knn(std::size_t i, std::size_t k) const;
    std::span<const double> at(std::size_t pos) const { return {m_coords.data() + pos * m_dim, m_dim}; }

    std::size_t m_dim = 0;
    std::size_t m_leaf_size = 16;
    std::vector<double> m_coords;       // points in tree order
    std::vector<std::size_t> m_index;   // tree position -> original index
    std::vector<std::size_t> m_pos;     // original index -> tree position
    std::vector<Node> m_nodes;
};

}  // namespace mbfs::knn
