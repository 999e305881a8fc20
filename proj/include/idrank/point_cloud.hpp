#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace idrank {

/// n points in a D-dimensional ambient space, stored row-major.
class PointCloud {
public:
    PointCloud() = default;

    /// Throws InvalidArgument when ambient_dim is 0 or the data length is not
    /// a multiple of it. Finiteness is checked lazily by validate_finite().
    PointCloud(std::size_t ambient_dim, std::vector<double> data);

    std::size_t n_points() const noexcept { return ambient_dim_ ? data_.size() / ambient_dim_ : 0; }
    std::size_t ambient_dim() const noexcept { return ambient_dim_; }
    bool empty() const noexcept { return data_.empty(); }

    std::span<const double> point(std::size_t i) const {
        return {data_.data() + i * ambient_dim_, ambient_dim_};
    }
    std::span<double> point(std::size_t i) {
        return {data_.data() + i * ambient_dim_, ambient_dim_};
    }

    const std::vector<double>& data() const noexcept { return data_; }

    /// Throws NonFiniteInput naming the first offending point.
    void validate_finite() const;

    /// Rows `indices` in the given order.
    PointCloud select(std::span<const std::size_t> indices) const;

    bool operator==(const PointCloud&) const = default;

private:
    std::size_t ambient_dim_ = 1;
    std::vector<double> data_;
};

/// Squared Euclidean distance, summed left to right over coordinates. Every
/// neighbor search path goes through this so distances compare bit-exactly.
inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        s += diff * diff;
    }
    return s;
}

}  // namespace idrank
