#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "mbfs/knn/sample_block.hpp"

namespace mbfs::knn {

// Exact kd-tree over the Chebyshev metric with tight per-node bounding boxes.
// Box bounds are computed with the same per-coordinate subtraction as point
// distances; rounding is monotone, so a box bound never exceeds the computed
// distance of a point inside it and pruning is exact without slack.
class KdTree {
public:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    explicit KdTree(const SampleBlock& points, std::size_t leaf_size = 12);

    std::size_t size() const { return m_index.size(); }
    std::size_t dim() const { return m_dim; }

    double kth_distance(std::size_t i, std::size_t k) const;
    std::vector<std::size_t> nearest(std::size_t i, std::size_t k) const;
    std::size_t count_within(std::span<const double> q, double radius, bool inclusive,
                             std::size_t exclude = npos) const;
    std::size_t count_within(std::size_t i, double radius, bool inclusive) const;

private:
    struct Node {
        std::uint32_t lo = 0;
        std::uint32_t hi = 0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        bool leaf() const { return left < 0; }
    };
    struct Candidate {
        double dist;
        std::size_t index;
        bool operator<(const Candidate& o) const {
            return dist < o.dist || (dist == o.dist && index < o.index);
        }
    };

    std::int32_t build(std::vector<std::size_t>& order, const SampleBlock& points, std::size_t lo, std::size_t hi);
    double box_min_dist(std::size_t node, std::span<const double> q) const;
    double box_max_dist(std::size_t node, std::span<const double> q) const;
    void search(std::int32_t node, std::span<const double> q, std::size_t self, std::size_t k,
                std::vector<Candidate>& heap) const;
    std::vector<Candidate> knn(std::size_t i, std::size_t k) const;
    template <int D>
    double kth_impl(std::size_t pos, std::size_t k) const;
    template <int D>
    std::size_t count_impl(const double* q, double radius, bool inclusive, std::size_t exclude_pos) const;
    std::span<const double> at(std::size_t pos) const { return {m_coords.data() + pos * m_dim, m_dim}; }

    std::size_t m_dim = 0;
    std::size_t m_leaf_size = 12;
    std::vector<double> m_coords;      // points in tree order
    std::vector<std::size_t> m_index;  // tree position -> original index
    std::vector<std::size_t> m_pos;    // original index -> tree position
    std::vector<Node> m_nodes;
    std::vector<double> m_boxes;       // per node: d mins then d maxes
};

}  // namespace mbfs::knn
