#include "mbfs/knn/kd_tree.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "mbfs/error.hpp"

namespace mbfs::knn {

KdTree::KdTree(const SampleBlock& points, std::size_t leaf_size)
    : m_dim(points.d()), m_leaf_size(std::max<std::size_t>(leaf_size, 1)) {
    const std::size_t n = points.n();
    if (n == 0) throw Error(ErrorKind::dimension_mismatch, "kd-tree over an empty sample block");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    m_nodes.reserve(4 * n / m_leaf_size + 2);
    build(order, points, 0, n);

    m_index = std::move(order);
    m_pos.assign(n, 0);
    m_coords.resize(n * m_dim);
    for (std::size_t p = 0; p < n; ++p) {
        m_pos[m_index[p]] = p;
        const auto r = points.row(m_index[p]);
        std::copy(r.begin(), r.end(), m_coords.begin() + static_cast<std::ptrdiff_t>(p * m_dim));
    }
}

std::int32_t KdTree::build(std::vector<std::size_t>& order, const SampleBlock& points, std::size_t lo,
                           std::size_t hi) {
    const auto id = static_cast<std::int32_t>(m_nodes.size());
    m_nodes.push_back(Node{static_cast<std::uint32_t>(lo), static_cast<std::uint32_t>(hi)});
    const std::size_t box_at = m_boxes.size();
    m_boxes.resize(box_at + 2 * m_dim);
    double* mins = m_boxes.data() + box_at;
    double* maxs = mins + m_dim;
    for (std::size_t j = 0; j < m_dim; ++j) {
        mins[j] = points(order[lo], j);
        maxs[j] = mins[j];
    }
    for (std::size_t p = lo + 1; p < hi; ++p) {
        const auto r = points.row(order[p]);
        for (std::size_t j = 0; j < m_dim; ++j) {
            mins[j] = std::min(mins[j], r[j]);
            maxs[j] = std::max(maxs[j], r[j]);
        }
    }
    if (hi - lo <= m_leaf_size) return id;

    std::size_t split = 0;
    for (std::size_t j = 1; j < m_dim; ++j) {
        if (maxs[j] - mins[j] > maxs[split] - mins[split]) split = j;
    }
    if (maxs[split] == mins[split]) return id;  // all points identical

    const std::size_t mid = (lo + hi) / 2;
    std::nth_element(order.begin() + static_cast<std::ptrdiff_t>(lo), order.begin() + static_cast<std::ptrdiff_t>(mid),
                     order.begin() + static_cast<std::ptrdiff_t>(hi),
                     [&](std::size_t a, std::size_t b) { return points(a, split) < points(b, split); });
    const std::int32_t left = build(order, points, lo, mid);
    const std::int32_t right = build(order, points, mid, hi);
    m_nodes[static_cast<std::size_t>(id)].left = left;
    m_nodes[static_cast<std::size_t>(id)].right = right;
    return id;
}

double KdTree::box_min_dist(std::size_t node, std::span<const double> q) const {
    const double* mins = m_boxes.data() + node * 2 * m_dim;
    const double* maxs = mins + m_dim;
    double d = 0.0;
    for (std::size_t j = 0; j < m_dim; ++j) {
        if (q[j] < mins[j]) {
            d = std::max(d, mins[j] - q[j]);
        } else if (q[j] > maxs[j]) {
            d = std::max(d, q[j] - maxs[j]);
        }
    }
    return d;
}

double KdTree::box_max_dist(std::size_t node, std::span<const double> q) const {
    const double* mins = m_boxes.data() + node * 2 * m_dim;
    const double* maxs = mins + m_dim;
    double d = 0.0;
    for (std::size_t j = 0; j < m_dim; ++j) {
        d = std::max(d, std::max(std::abs(q[j] - mins[j]), std::abs(maxs[j] - q[j])));
    }
    return d;
}

void KdTree::search(std::int32_t node_id, std::span<const double> q, std::size_t self, std::size_t k,
                    std::vector<Candidate>& heap) const {
    const Node& node = m_nodes[static_cast<std::size_t>(node_id)];
    if (node.leaf()) {
        for (std::size_t p = node.lo; p < node.hi; ++p) {
            if (m_index[p] == self) continue;
            const Candidate c{chebyshev(q, at(p)), m_index[p]};
            if (heap.size() < k) {
                heap.push_back(c);
                std::push_heap(heap.begin(), heap.end());
            } else if (c < heap.front()) {
                std::pop_heap(heap.begin(), heap.end());
                heap.back() = c;
                std::push_heap(heap.begin(), heap.end());
            }
        }
        return;
    }
    const double dl = box_min_dist(static_cast<std::size_t>(node.left), q);
    const double dr = box_min_dist(static_cast<std::size_t>(node.right), q);
    const std::int32_t first = dl <= dr ? node.left : node.right;
    const std::int32_t second = dl <= dr ? node.right : node.left;
    const double d_first = std::min(dl, dr);
    const double d_second = std::max(dl, dr);
    auto tau = [&] { return heap.size() < k ? std::numeric_limits<double>::infinity() : heap.front().dist; };
    if (d_first <= tau()) search(first, q, self, k, heap);
    if (d_second <= tau()) search(second, q, self, k, heap);
}

std::vector<KdTree::Candidate> KdTree::knn(std::size_t i, std::size_t k) const {
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

namespace {

// Chebyshev distance with the dimension fixed at compile time when D > 0.
template <int D>
inline double dist(const double* a, const double* b, std::size_t dim) {
    const std::size_t d = D > 0 ? static_cast<std::size_t>(D) : dim;
    double r = 0.0;
    for (std::size_t j = 0; j < d; ++j) r = std::max(r, std::abs(a[j] - b[j]));
    return r;
}

template <int D>
inline double lower_bound(const double* box, const double* q, std::size_t dim) {
    const std::size_t d = D > 0 ? static_cast<std::size_t>(D) : dim;
    double r = 0.0;
    for (std::size_t j = 0; j < d; ++j) r = std::max(r, std::max(box[j] - q[j], q[j] - box[d + j]));
    return r;
}

template <int D>
inline double upper_bound(const double* box, const double* q, std::size_t dim) {
    const std::size_t d = D > 0 ? static_cast<std::size_t>(D) : dim;
    double r = 0.0;
    for (std::size_t j = 0; j < d; ++j) r = std::max(r, std::max(std::abs(q[j] - box[j]), std::abs(box[d + j] - q[j])));
    return r;
}

constexpr std::size_t kStack = 256;

}  // namespace

template <int D>
double KdTree::kth_impl(std::size_t pos, std::size_t k) const {
    const double* q = m_coords.data() + pos * m_dim;
    thread_local std::vector<double> heap;
    heap.clear();
    double tau = std::numeric_limits<double>::infinity();
    std::int32_t stack[kStack];
    double bound[kStack];
    std::size_t top = 0;
    stack[top] = 0;
    bound[top++] = 0.0;
    while (top > 0) {
        --top;
        if (bound[top] >= tau) continue;
        std::int32_t id = stack[top];
        while (true) {
            const Node& node = m_nodes[static_cast<std::size_t>(id)];
            if (node.leaf()) {
                for (std::size_t p = node.lo; p < node.hi; ++p) {
                    if (p == pos) continue;
                    const double d = dist<D>(q, m_coords.data() + p * m_dim, m_dim);
                    if (heap.size() < k) {
                        heap.push_back(d);
                        std::push_heap(heap.begin(), heap.end());
                        if (heap.size() == k) tau = heap.front();
                    } else if (d < tau) {
                        std::pop_heap(heap.begin(), heap.end());
                        heap.back() = d;
                        std::push_heap(heap.begin(), heap.end());
                        tau = heap.front();
                    }
                }
                break;
            }
            const double bl = lower_bound<D>(m_boxes.data() + static_cast<std::size_t>(node.left) * 2 * m_dim, q, m_dim);
            const double br = lower_bound<D>(m_boxes.data() + static_cast<std::size_t>(node.right) * 2 * m_dim, q, m_dim);
            const bool left_first = bl <= br;
            const std::int32_t near = left_first ? node.left : node.right;
            const std::int32_t far = left_first ? node.right : node.left;
            const double b_near = left_first ? bl : br;
            const double b_far = left_first ? br : bl;
            if (b_far < tau) {
                stack[top] = far;
                bound[top++] = b_far;
            }
            if (b_near >= tau) break;
            id = near;
        }
    }
    return heap.front();
}

template <int D>
std::size_t KdTree::count_impl(const double* q, double radius, bool inclusive, std::size_t exclude_pos) const {
    std::int32_t stack[kStack];
    std::size_t top = 0;
    stack[top++] = 0;
    std::size_t c = 0;
    while (top > 0) {
        const auto id = static_cast<std::size_t>(stack[--top]);
        const Node& node = m_nodes[id];
        const double* box = m_boxes.data() + id * 2 * m_dim;
        const double near = lower_bound<D>(box, q, m_dim);
        if (inclusive ? near > radius : near >= radius) continue;
        const double far = upper_bound<D>(box, q, m_dim);
        if (inclusive ? far <= radius : far < radius) {
            c += node.hi - node.lo;
            if (exclude_pos >= node.lo && exclude_pos < node.hi) --c;
            continue;
        }
        if (node.leaf()) {
            for (std::size_t p = node.lo; p < node.hi; ++p) {
                if (p == exclude_pos) continue;
                const double d = dist<D>(q, m_coords.data() + p * m_dim, m_dim);
                if (inclusive ? d <= radius : d < radius) ++c;
            }
            continue;
        }
        stack[top++] = node.left;
        stack[top++] = node.right;
    }
    return c;
}

double KdTree::kth_distance(std::size_t i, std::size_t k) const {
    if (i >= size()) throw Error(ErrorKind::invalid_argument, "query index out of range");
    if (k == 0 || k >= size()) {
        throw Error(ErrorKind::insufficient_samples,
                    "k = " + std::to_string(k) + " needs 1 <= k < n = " + std::to_string(size()));
    }
    const std::size_t pos = m_pos[i];
    switch (m_dim) {
        case 1: return kth_impl<1>(pos, k);
        case 2: return kth_impl<2>(pos, k);
        case 3: return kth_impl<3>(pos, k);
        case 4: return kth_impl<4>(pos, k);
        case 5: return kth_impl<5>(pos, k);
        case 6: return kth_impl<6>(pos, k);
        case 7: return kth_impl<7>(pos, k);
        case 8: return kth_impl<8>(pos, k);
        default: return kth_impl<0>(pos, k);
    }
}

std::vector<std::size_t> KdTree::nearest(std::size_t i, std::size_t k) const {
    auto heap = knn(i, k);
    std::sort_heap(heap.begin(), heap.end());
    std::vector<std::size_t> out;
    out.reserve(heap.size());
    for (const auto& c : heap) out.push_back(c.index);
    return out;
}

std::size_t KdTree::count_within(std::span<const double> q, double radius, bool inclusive,
                                 std::size_t exclude) const {
    if (q.size() != m_dim) throw Error(ErrorKind::dimension_mismatch, "query dimension does not match tree");
    const std::size_t exclude_pos = exclude == npos ? npos : m_pos.at(exclude);
    switch (m_dim) {
        case 1: return count_impl<1>(q.data(), radius, inclusive, exclude_pos);
        case 2: return count_impl<2>(q.data(), radius, inclusive, exclude_pos);
        case 3: return count_impl<3>(q.data(), radius, inclusive, exclude_pos);
        case 4: return count_impl<4>(q.data(), radius, inclusive, exclude_pos);
        case 5: return count_impl<5>(q.data(), radius, inclusive, exclude_pos);
        case 6: return count_impl<6>(q.data(), radius, inclusive, exclude_pos);
        case 7: return count_impl<7>(q.data(), radius, inclusive, exclude_pos);
        case 8: return count_impl<8>(q.data(), radius, inclusive, exclude_pos);
        default: return count_impl<0>(q.data(), radius, inclusive, exclude_pos);
    }
}

std::size_t KdTree::count_within(std::size_t i, double radius, bool inclusive) const {
    if (i >= size()) throw Error(ErrorKind::invalid_argument, "query index out of range");
    return count_within(at(m_pos[i]), radius, inclusive, i);
}

}  // namespace mbfs::knn
