#include "idrank/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "idrank/error.hpp"

namespace idrank {

namespace {

constexpr std::size_t kBruteForceBelow = 64;

void push_candidate(double d, KdTree::TwoBest& best) {
    if (d < best.d1) {
        best.d2 = best.d1;
        best.d1 = d;
    } else if (d < best.d2) {
        best.d2 = d;
    }
}

KdTree::TwoBest brute_two(const PointCloud& cloud, std::size_t self) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    KdTree::TwoBest best{inf, inf};
    const auto q = cloud.point(self);
    for (std::size_t j = 0; j < cloud.n_points(); ++j) {
        if (j != self) push_candidate(squared_distance(q, cloud.point(j)), best);
    }
    return best;
}

}  // namespace

std::vector<std::size_t> distinct_indices(const PointCloud& cloud) {
    const std::size_t n = cloud.n_points();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto less = [&](std::size_t a, std::size_t b) {
        auto pa = cloud.point(a);
        auto pb = cloud.point(b);
        for (std::size_t k = 0; k < pa.size(); ++k) {
            if (pa[k] < pb[k]) return true;
            if (pb[k] < pa[k]) return false;
        }
        return a < b;
    };
    std::sort(order.begin(), order.end(), less);

    std::vector<std::size_t> kept;
    kept.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            auto prev = cloud.point(order[i - 1]);
            auto cur = cloud.point(order[i]);
            if (std::equal(prev.begin(), prev.end(), cur.begin())) continue;
        }
        kept.push_back(order[i]);
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

KdTree::KdTree(const PointCloud& cloud, std::size_t leaf_size)
    : cloud_(cloud),
      leaf_size_(std::max<std::size_t>(leaf_size, 2)),
      dim_(cloud.ambient_dim()),
      order_(cloud.n_points()) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (!order_.empty()) {
        nodes_.reserve(2 * (order_.size() / leaf_size_ + 1));
        build(0, order_.size());
    }
    position_.resize(order_.size());
    packed_.resize(order_.size() * dim_);
    for (std::size_t pos = 0; pos < order_.size(); ++pos) {
        position_[order_[pos]] = pos;
        const auto p = cloud_.point(order_[pos]);
        std::copy(p.begin(), p.end(), packed_.begin() + static_cast<std::ptrdiff_t>(pos * dim_));
    }
}

std::size_t KdTree::build(std::size_t begin, std::size_t end) {
    const std::size_t id = nodes_.size();
    nodes_.push_back(Node{begin, end});
    if (end - begin <= leaf_size_) return id;

    // Split on the coordinate of largest spread.
    const std::size_t dims = cloud_.ambient_dim();
    int best_dim = -1;
    double best_spread = 0.0;
    for (std::size_t k = 0; k < dims; ++k) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t i = begin; i < end; ++i) {
            const double v = cloud_.point(order_[i])[k];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > best_spread) {
            best_spread = hi - lo;
            best_dim = static_cast<int>(k);
        }
    }
    if (best_dim < 0) return id;  // all points coincide

    const std::size_t mid = begin + (end - begin) / 2;
    const auto key = static_cast<std::size_t>(best_dim);
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) {
                         return cloud_.point(a)[key] < cloud_.point(b)[key];
                     });

    // Left holds coordinates <= split, right holds coordinates >= split.
    const double split = cloud_.point(order_[mid])[key];
    const std::size_t left = build(begin, mid);
    const std::size_t right = build(mid, end);
    Node& node = nodes_[id];
    node.dim = best_dim;
    node.split = split;
    node.left = left;
    node.right = right;
    return id;
}

void KdTree::search(std::size_t node_id, std::span<const double> q, std::size_t self_pos,
                    TwoBest& best) const {
    const Node& node = nodes_[node_id];
    if (node.dim < 0) {
        for (std::size_t i = node.begin; i < node.end; ++i) {
            if (i != self_pos) push_candidate(squared_distance(q, row(i)), best);
        }
        return;
    }
    const double diff = q[static_cast<std::size_t>(node.dim)] - node.split;
    const std::size_t near = diff < 0.0 ? node.left : node.right;
    const std::size_t far = diff < 0.0 ? node.right : node.left;
    search(near, q, self_pos, best);
    // Any point across the plane is at least |diff| away along this axis.
    if (diff * diff <= best.d2) search(far, q, self_pos, best);
}

KdTree::TwoBest KdTree::query_at(std::size_t pos) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    TwoBest best{inf, inf};
    if (!nodes_.empty()) search(0, row(pos), pos, best);
    return best;
}

KdTree::TwoBest KdTree::query_two(std::size_t self) const { return query_at(position_.at(self)); }

NeighborStats two_nearest(const PointCloud& cloud, SearchPath path) {
    cloud.validate_finite();

    NeighborStats stats;
    stats.kept_indices = distinct_indices(cloud);
    stats.n_duplicates = cloud.n_points() - stats.kept_indices.size();
    const std::size_t n = stats.kept_indices.size();
    if (n < 3) {
        fail(ErrorCode::TooFewPoints,
             "two-nearest-neighbour search needs at least 3 distinct points, got " +
                 std::to_string(n));
    }

    const PointCloud distinct =
        stats.n_duplicates == 0 ? cloud : cloud.select(stats.kept_indices);

    if (path == SearchPath::Auto) {
        path = n < kBruteForceBelow ? SearchPath::BruteForce : SearchPath::KdTree;
    }

    stats.r1.resize(n);
    stats.r2.resize(n);
    stats.mu.resize(n);

    auto record = [&](std::size_t i, const KdTree::TwoBest& best) {
        stats.r1[i] = std::sqrt(best.d1);
        stats.r2[i] = std::sqrt(best.d2);
        stats.mu[i] = stats.r2[i] / stats.r1[i];
    };

    if (path == SearchPath::BruteForce) {
        for (std::size_t i = 0; i < n; ++i) record(i, brute_two(distinct, i));
    } else {
        const KdTree tree(distinct);
        for (std::size_t pos = 0; pos < n; ++pos) record(tree.index_at(pos), tree.query_at(pos));
    }
    return stats;
}

}  // namespace idrank
