#include "idrank/point_cloud.hpp"

#include <cmath>
#include <string>

#include "idrank/error.hpp"

namespace idrank {

PointCloud::PointCloud(std::size_t ambient_dim, std::vector<double> data)
    : ambient_dim_(ambient_dim), data_(std::move(data)) {
    if (ambient_dim_ == 0) {
        fail(ErrorCode::InvalidArgument, "point cloud ambient_dim must be >= 1");
    }
    if (data_.size() % ambient_dim_ != 0) {
        fail(ErrorCode::InvalidArgument,
             "point cloud data length " + std::to_string(data_.size()) +
                 " is not a multiple of ambient_dim " + std::to_string(ambient_dim_));
    }
}

void PointCloud::validate_finite() const {
    for (std::size_t i = 0; i < data_.size(); ++i) {
        if (!std::isfinite(data_[i])) {
            fail(ErrorCode::NonFiniteInput,
                 "non-finite coordinate at point " + std::to_string(i / ambient_dim_) +
                     ", dim " + std::to_string(i % ambient_dim_));
        }
    }
}

PointCloud PointCloud::select(std::span<const std::size_t> indices) const {
    std::vector<double> out;
    out.reserve(indices.size() * ambient_dim_);
    for (std::size_t idx : indices) {
        auto p = point(idx);
        out.insert(out.end(), p.begin(), p.end());
    }
    return PointCloud(ambient_dim_, std::move(out));
}

}  // namespace idrank
