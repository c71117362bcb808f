#include "mbfs/knn/vp_tree.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "mbfs/error.hpp"

namespace mbfs::knn {
namespace {

constexpr double kSlack = 1e-12;

std::uint64_t splitmix(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

VpTree::VpTree(const SampleBlock& points, std::size_t leaf_size)
    : m_dim(points.d()), m_leaf_size(std::max<std::size_t>(leaf_size, 1)) {
    const std::size_t n = points.n();
    if (n == 0) throw Error(ErrorKind::dimension_mismatch, "vp-tree over an empty sample block");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::uint64_t rng_state = 0x5DEECE66DULL ^ n;
    m_nodes.reserve(2 * n / m_leaf_size + 2);
    build(order, points, 0, n, rng_state);

    m_index = std::move(order);
    m_pos.assign(n, 0);
    m_coords.resize(n * m_dim);
    for (std::size_t p = 0; p < n; ++p) {
        m_pos[m_index[p]] = p;
        const auto r = points.row(m_index[p]);
        std::copy(r.begin(), r.end(), m_coords.begin() + static_cast<std::ptrdiff_t>(p * m_dim));
    }
}

std::int32_t VpTree::build(std::vector<std::size_t>& order, const SampleBlock& points, std::size_t lo,
                           std::size_t hi, std::uint64_t& rng_state) {
    const auto id = static_cast<std::int32_t>(m_nodes.size());
    m_nodes.push_back(Node{static_cast<std::uint32_t>(lo), static_cast<std::uint32_t>(hi)});
    const std::size_t count = hi - lo;
    const bool whole_set_small = lo == 0 && hi == order.size() && count < kBruteForceBelow;
    if (count <= m_leaf_size || whole_set_small) return id;

    std::swap(order[lo], order[lo + splitmix(rng_state) % count]);
    const auto vp = points.row(order[lo]);
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(count - 1);
    double radius = 0.0;
    for (std::size_t p = lo + 1; p < hi; ++p) {
        const double d = chebyshev(vp, points.row(order[p]));
        radius = std::max(radius, d);
        dist.emplace_back(d, order[p]);
    }
    const std::size_t mid = (lo + 1 + hi) / 2;
    const auto mid_it = dist.begin() + static_cast<std::ptrdiff_t>(mid - (lo + 1));
    std::nth_element(dist.begin(), mid_it, dist.end());
    for (std::size_t p = lo + 1; p < hi; ++p) order[p] = dist[p - (lo + 1)].second;

    m_nodes[static_cast<std::size_t>(id)].mu = mid_it->first;
    m_nodes[static_cast<std::size_t>(id)].radius = radius;
    const std::int32_t inner = build(order, points, lo + 1, mid, rng_state);
    const std::int32_t outer = build(order, points, mid, hi, rng_state);
    m_nodes[static_cast<std::size_t>(id)].inner = inner;
    m_nodes[static_cast<std::size_t>(id)].outer = outer;
    return id;
}

void VpTree::search(std::int32_t node_id, std::span<const double> q, std::size_t self, std::size_t k,
                    std::vector<Candidate>& heap) const {
    const Node& node = m_nodes[static_cast<std::size_t>(node_id)];
    auto offer = [&](double d, std::size_t idx) {
        const Candidate c{d, idx};
        if (heap.size() < k) {
            heap.push_back(c);
            std::push_heap(heap.begin(), heap.end());
        } else if (c < heap.front()) {
            std::pop_heap(heap.begin(), heap.end());
            heap.back() = c;
            std::push_heap(heap.begin(), heap.end());
        }
    };
    if (node.leaf()) {
        for (std::size_t p = node.lo; p < node.hi; ++p) {
            if (m_index[p] == self) continue;
            offer(chebyshev(q, at(p)), m_index[p]);
        }
        return;
    }
    const double d = chebyshev(q, at(node.lo));
    if (m_index[node.lo] != self) offer(d, m_index[node.lo]);

    const double slack = kSlack * (d + node.mu);
    const bool inner_first = d < node.mu;
    for (int pass = 0; pass < 2; ++pass) {
        const bool inner = (pass == 0) == inner_first;
        const double tau = heap.size() < k ? std::numeric_limits<double>::infinity() : heap.front().dist;
        const double lower = inner ? d - node.mu : node.mu - d;
        if (lower > tau + slack) continue;
        search(inner ? node.inner : node.outer, q, self, k, heap);
    }
}

std::vector<VpTree::Candidate> VpTree::knn(std::size_t i, std::size_t k) const {
    if (i >= size()) throw Error(ErrorKind::invalid_argument, "query index out of range");
    if (k == 0 || k >= size()) {
        throw Error(ErrorKind::insufficient_samples,
                    "k = " + std::to_string(k) + " needs 1 <= k < n = " + std::to_string(size()));
    }
    std::vector<Candidate> heap;
    heap.reserve(k + 1);
    search(0, at(m_pos[i]), i, k, heap);
    return heap;
}

double VpTree::kth_distance(std::size_t i, std::size_t k) const {
    return knn(i, k).front().dist;
}

std::vector<std::size_t> VpTree::nearest(std::size_t i, std::size_t k) const {
    auto heap = knn(i, k);
    std::sort_heap(heap.begin(), heap.end());
    std::vector<std::size_t> out;
    out.reserve(heap.size());
    for (const auto& c : heap) out.push_back(c.index);
    return out;
}

std::size_t VpTree::count(std::int32_t node_id, std::span<const double> q, double radius, bool inclusive,
                          std::size_t exclude_pos) const {
    const Node& node = m_nodes[static_cast<std::size_t>(node_id)];
    auto inside = [&](double d) { return inclusive ? d <= radius : d < radius; };
    if (node.leaf()) {
        std::size_t c = 0;
        for (std::size_t p = node.lo; p < node.hi; ++p) {
            if (p != exclude_pos && inside(chebyshev(q, at(p)))) ++c;
        }
        return c;
    }
    const double d = chebyshev(q, at(node.lo));
    const double slack = kSlack * (d + node.mu + node.radius);
    const double upper = d + node.radius + slack;
    if (upper < radius || (inclusive && upper <= radius)) {
        const bool excluded_here = exclude_pos >= node.lo && exclude_pos < node.hi;
        return (node.hi - node.lo) - (excluded_here ? 1 : 0);
    }
    if (d - node.radius > radius + slack) return 0;

    std::size_t c = (node.lo != exclude_pos && inside(d)) ? 1 : 0;
    if (!(d - node.mu > radius + slack)) c += count(node.inner, q, radius, inclusive, exclude_pos);
    if (!(node.mu - d > radius + slack)) c += count(node.outer, q, radius, inclusive, exclude_pos);
    return c;
}

std::size_t VpTree::count_within(std::span<const double> q, double radius, bool inclusive,
                                 std::size_t exclude) const {
    if (q.size() != m_dim) throw Error(ErrorKind::dimension_mismatch, "query dimension does not match tree");
    const std::size_t exclude_pos = exclude == npos ? npos : m_pos.at(exclude);
    return count(0, q, radius, inclusive, exclude_pos);
}

std::size_t VpTree::count_within(std::size_t i, double radius, bool inclusive) const {
    if (i >= size()) throw Error(ErrorKind::invalid_argument, "query index out of range");
    return count(0, at(m_pos[i]), radius, inclusive, m_pos[i]);
}

}  // namespace mbfs::knn
