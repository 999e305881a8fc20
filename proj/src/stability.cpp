#include "idrank/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "idrank/error.hpp"
#include "idrank/rng.hpp"

namespace idrank {

std::vector<std::size_t> draw_subset(std::size_t n, std::size_t size, std::uint64_t seed,
                                     std::size_t scale, std::size_t repeat) {
    if (size > n) {
        fail(ErrorCode::InvalidArgument, "subset size exceeds population");
    }
    Rng rng = Rng::derive(seed, {scale, repeat});
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    // Partial Fisher-Yates: the first `size` slots become the sample.
    for (std::size_t i = 0; i < size; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(perm[i], perm[j]);
    }
    perm.resize(size);
    std::sort(perm.begin(), perm.end());
    return perm;
}

std::ptrdiff_t find_plateau(const std::vector<ScaleEstimate>& estimates, double tolerance) {
    const std::size_t k = estimates.size();
    if (k < 2) return -1;

    auto close = [&](std::size_t i) {
        const double a = estimates[i].mean;
        const double b = estimates[i + 1].mean;
        return a > 0.0 && std::abs(b - a) / a < tolerance;
    };
    // Relative sample std of the scale means in [start, k).
    auto spread = [&](std::size_t start) {
        const double m = static_cast<double>(k - start);
        double mean = 0.0;
        for (std::size_t i = start; i < k; ++i) mean += estimates[i].mean;
        mean /= m;
        double ss = 0.0;
        for (std::size_t i = start; i < k; ++i) ss += (estimates[i].mean - mean) * (estimates[i].mean - mean);
        return std::sqrt(ss / (m - 1.0)) / mean;
    };

    // Longest qualifying suffix first. Consecutive closeness only has to be
    // checked once per start since a shorter suffix covers fewer pairs.
    std::size_t first_close = k - 1;  // pairs (i, i+1) for i >= first_close are all close
    while (first_close > 0 && close(first_close - 1)) --first_close;
    for (std::size_t start = first_close; start + 2 <= k; ++start) {
        if (estimates[start].mean > 0.0 && spread(start) < tolerance) return static_cast<std::ptrdiff_t>(start);
    }
    return -1;
}

StabilityReport decimation_stability(const PointCloud& cloud, const StabilityOptions& options) {
    if (options.n_scales == 0 || options.repeats_per_scale == 0) {
        fail(ErrorCode::InvalidArgument, "n_scales and repeats_per_scale must be >= 1");
    }
    const std::size_t n = cloud.n_points();

    StabilityReport report;
    report.seed = options.seed;
    for (std::size_t k = 0; k < options.n_scales; ++k) {
        const std::size_t size = k < 64 ? n >> k : 0;
        if (size < kMinSubsetSize) {
            fail(ErrorCode::TooFewPoints,
                 "decimation scale " + std::to_string(k) + " keeps " + std::to_string(size) +
                     " points, below the minimum of " + std::to_string(kMinSubsetSize));
        }
        report.subset_sizes.push_back(size);
    }

    for (std::size_t k = 0; k < options.n_scales; ++k) {
        const std::size_t size = report.subset_sizes[k];
        ScaleEstimate scale;
        if (size == n) {
            // Every full-size draw is the whole cloud.
            scale.mean = estimate_id(cloud, options.estimate).d_hat;
        } else {
            std::vector<double> values;
            values.reserve(options.repeats_per_scale);
            for (std::size_t r = 0; r < options.repeats_per_scale; ++r) {
                const auto idx = draw_subset(n, size, options.seed, k, r);
                values.push_back(estimate_id(cloud.select(idx), options.estimate).d_hat);
            }
            double sum = 0.0;
            for (double v : values) sum += v;
            scale.mean = sum / static_cast<double>(values.size());
            if (values.size() > 1) {
                double ss = 0.0;
                for (double v : values) ss += (v - scale.mean) * (v - scale.mean);
                scale.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
            }
        }
        report.estimates_per_size.push_back(scale);
    }

    const std::ptrdiff_t start = find_plateau(report.estimates_per_size);
    report.plateau_found = start >= 0;
    report.selected_d = report.plateau_found
                            ? report.estimates_per_size[static_cast<std::size_t>(start)].mean
                            : report.estimates_per_size.front().mean;
    return report;
}

}  // namespace idrank
