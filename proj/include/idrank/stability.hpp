#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "idrank/point_cloud.hpp"
#include "idrank/twonn.hpp"

namespace idrank {

inline constexpr std::size_t kMinSubsetSize = 10;
inline constexpr double kPlateauTolerance = 0.05;

struct ScaleEstimate {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation over repeats; 0 for a single draw

    bool operator==(const ScaleEstimate&) const = default;
};

struct StabilityReport {
    std::vector<std::size_t> subset_sizes;        // N, N/2, N/4, ...
    std::vector<ScaleEstimate> estimates_per_size;
    double selected_d = 0.0;
    bool plateau_found = false;
    std::uint64_t seed = 0;

    bool operator==(const StabilityReport&) const = default;
};

struct StabilityOptions {
    std::size_t n_scales = 4;
    std::size_t repeats_per_scale = 5;
    std::uint64_t seed = 0;
    EstimateOptions estimate;
};

/// Sorted indices of a uniform random subset of `size` out of `n`, drawn
/// from the substream (seed, scale, repeat).
std::vector<std::size_t> draw_subset(std::size_t n, std::size_t size, std::uint64_t seed,
                                     std::size_t scale, std::size_t repeat);

/// Re-estimates on random subsets of size floor(N / 2^k), k = 0..n_scales-1.
/// Scale 0 is the full cloud. Throws TooFewPoints if any scale falls below
/// kMinSubsetSize.
StabilityReport decimation_stability(const PointCloud& cloud, const StabilityOptions& options);

/// Longest suffix of scales (length >= 2) whose means have a relative sample
/// std below `tolerance` and whose consecutive means differ by less than
/// `tolerance` relative to the larger scale. Returns the index of its
/// first (largest) scale, or -1 when none qualifies.
std::ptrdiff_t find_plateau(const std::vector<ScaleEstimate>& estimates,
                            double tolerance = kPlateauTolerance);

}  // namespace idrank
