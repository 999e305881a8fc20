#pragma once

#include <cstddef>
#include <vector>

#include "idrank/point_cloud.hpp"

namespace idrank {

/// Per-point first/second nearest-neighbour distances over the distinct points
/// of a cloud. Entry j refers to original point kept_indices[j].
struct NeighborStats {
    std::vector<double> r1;
    std::vector<double> r2;
    std::vector<double> mu;
    std::vector<std::size_t> kept_indices;
    std::size_t n_duplicates = 0;
};

enum class SearchPath {
    Auto,        // kd-tree above a small-size threshold, brute force below
    KdTree,
    BruteForce,
};

/// Indices (ascending) of the first occurrence of every distinct point.
std::vector<std::size_t> distinct_indices(const PointCloud& cloud);

/// Exact two-nearest-neighbour search under the Euclidean metric. Exact
/// duplicates are collapsed to their lowest-index representative first; ties
/// (r1 == r2) are kept and give mu == 1.
///
/// Throws NonFiniteInput for NaN/Inf coordinates and TooFewPoints when fewer
/// than 3 distinct points remain.
NeighborStats two_nearest(const PointCloud& cloud, SearchPath path = SearchPath::Auto);

/// Exact 2-NN over a point set via a median-split kd-tree. Only the leaf
/// scans touch coordinates, through squared_distance().
class KdTree {
public:
    explicit KdTree(const PointCloud& cloud, std::size_t leaf_size = 12);

    struct TwoBest {
        double d1 = 0.0;  // squared
        double d2 = 0.0;  // squared
    };

    /// Two smallest squared distances from point `self` to any other point.
    TwoBest query_two(std::size_t self) const;

    /// Points are stored in leaf order; querying in that order keeps the
    /// working set small. `index_at(pos)` maps back to the cloud index.
    std::size_t size() const noexcept { return order_.size(); }
    std::size_t index_at(std::size_t pos) const { return order_[pos]; }
    TwoBest query_at(std::size_t pos) const;

private:
    struct Node {
        std::size_t begin = 0;
        std::size_t end = 0;
        std::size_t left = 0;
        std::size_t right = 0;
        double split = 0.0;
        int dim = -1;  // -1 marks a leaf
    };

    std::size_t build(std::size_t begin, std::size_t end);
    void search(std::size_t node, std::span<const double> q, std::size_t self_pos, TwoBest& best) const;
    std::span<const double> row(std::size_t pos) const {
        return {packed_.data() + pos * dim_, dim_};
    }

    const PointCloud& cloud_;
    std::size_t leaf_size_;
    std::size_t dim_;
    std::vector<std::size_t> order_;     // tree position -> cloud index
    std::vector<std::size_t> position_;  // cloud index -> tree position
    std::vector<double> packed_;         // coordinates in tree order
    std::vector<Node> nodes_;
};

}  // namespace idrank
