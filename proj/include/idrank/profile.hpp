#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "idrank/ghs.hpp"
#include "idrank/stability.hpp"
#include "idrank/twonn.hpp"

namespace idrank {

/// How per-token vectors collapse into points. `TokenSample` keeps `k`
/// seeded tokens per sequence instead of one point.
struct Pooling {
    enum class Mode { Mean, FirstToken, LastToken, TokenSample };
    Mode mode = Mode::Mean;
    std::size_t k = 0;

    bool operator==(const Pooling&) const = default;
};

/// Accepts "mean", "first-token", "last-token", "token-sample-<k>".
Pooling parse_pooling(std::string_view text);
std::string to_string(const Pooling& pooling);

/// Pools one sequence of `tokens.size() / dim` token vectors (row-major).
/// Returns 1 row (or k rows for TokenSample), row-major.
std::vector<float> pool_tokens(std::span<const float> tokens, std::size_t dim, const Pooling& pooling,
                               std::uint64_t seed = 0);

inline constexpr std::size_t kDefaultMaxPoints = 20000;

struct ProfileOptions {
    EstimateOptions estimate;
    /// Layers larger than this are estimated on a seeded subsample; the same
    /// rows are used for every layer. 0 disables the cap.
    std::size_t max_points = kDefaultMaxPoints;
    std::uint64_t seed = 0;
    bool with_stability = false;
    std::size_t n_scales = 4;
    std::size_t repeats_per_scale = 5;
};

struct LayerProfile {
    std::vector<double> d;
    std::vector<IdEstimate> diagnostics;
    std::optional<std::vector<StabilityReport>> stability;
    double mean_id = 0.0;
    HiddenStateMetadata metadata;

    /// Profile carrying only the values (diagnostics left empty).
    static LayerProfile from_values(std::vector<double> d, HiddenStateMetadata metadata = {});

    bool operator==(const LayerProfile&) const = default;
};

/// Left-to-right arithmetic mean.
double mean_of(std::span<const double> values);

/// Estimates every layer. With `with_stability`, d_i is the decimation
/// plateau estimate. Estimator failures are re-thrown with their code and
/// the failing layer index in the message.
LayerProfile compute_profile(const HiddenStateSet& states, const ProfileOptions& options = {});

struct ProfileDiff {
    std::vector<double> delta;  // after - before
    double mean_before = 0.0;
    double mean_after = 0.0;
    double mean_delta = 0.0;
    std::vector<std::size_t> layers_compressed;  // indices with delta < 0

    bool operator==(const ProfileDiff&) const = default;
};

/// Throws LengthMismatch when the profiles differ in length.
ProfileDiff profile_diff(const LayerProfile& before, const LayerProfile& after);

}  // namespace idrank
