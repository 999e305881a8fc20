#include "idrank/profile.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "idrank/error.hpp"
#include "idrank/rng.hpp"

namespace idrank {

Pooling parse_pooling(std::string_view text) {
    if (text == "mean") return {Pooling::Mode::Mean, 0};
    if (text == "first-token") return {Pooling::Mode::FirstToken, 0};
    if (text == "last-token") return {Pooling::Mode::LastToken, 0};
    constexpr std::string_view prefix = "token-sample-";
    if (text.starts_with(prefix)) {
        const auto digits = text.substr(prefix.size());
        std::size_t k = 0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
        if (ec == std::errc() && ptr == digits.data() + digits.size() && k > 0) {
            return {Pooling::Mode::TokenSample, k};
        }
    }
    fail(ErrorCode::InvalidArgument,
         "unknown pooling '" + std::string(text) +
             "' (expected mean, first-token, last-token or token-sample-<k>)");
}

std::string to_string(const Pooling& pooling) {
    switch (pooling.mode) {
    case Pooling::Mode::Mean: return "mean";
    case Pooling::Mode::FirstToken: return "first-token";
    case Pooling::Mode::LastToken: return "last-token";
    case Pooling::Mode::TokenSample: return "token-sample-" + std::to_string(pooling.k);
    }
    return "unknown";
}

std::vector<float> pool_tokens(std::span<const float> tokens, std::size_t dim, const Pooling& pooling,
                               std::uint64_t seed) {
    if (dim == 0 || tokens.size() % dim != 0 || tokens.empty()) {
        fail(ErrorCode::DimensionMismatch, "token matrix must be a non-empty multiple of dim");
    }
    const std::size_t n_tokens = tokens.size() / dim;
    auto row = [&](std::size_t t) { return tokens.subspan(t * dim, dim); };

    switch (pooling.mode) {
    case Pooling::Mode::Mean: {
        std::vector<double> acc(dim, 0.0);
        for (std::size_t t = 0; t < n_tokens; ++t) {
            auto r = row(t);
            for (std::size_t k = 0; k < dim; ++k) acc[k] += r[k];
        }
        std::vector<float> out(dim);
        for (std::size_t k = 0; k < dim; ++k) {
            out[k] = static_cast<float>(acc[k] / static_cast<double>(n_tokens));
        }
        return out;
    }
    case Pooling::Mode::FirstToken: {
        auto r = row(0);
        return {r.begin(), r.end()};
    }
    case Pooling::Mode::LastToken: {
        auto r = row(n_tokens - 1);
        return {r.begin(), r.end()};
    }
    case Pooling::Mode::TokenSample: {
        if (pooling.k > n_tokens) {
            fail(ErrorCode::TooFewPoints, "token-sample-" + std::to_string(pooling.k) +
                                              " requested from a sequence of " + std::to_string(n_tokens));
        }
        const auto picks = draw_subset(n_tokens, pooling.k, seed, 0, 0);
        std::vector<float> out;
        out.reserve(pooling.k * dim);
        for (std::size_t t : picks) {
            auto r = row(t);
            out.insert(out.end(), r.begin(), r.end());
        }
        return out;
    }
    }
    return {};
}

double mean_of(std::span<const double> values) {
    if (values.empty()) return 0.0;
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

LayerProfile LayerProfile::from_values(std::vector<double> d, HiddenStateMetadata metadata) {
    LayerProfile p;
    p.mean_id = mean_of(d);
    p.d = std::move(d);
    p.metadata = std::move(metadata);
    return p;
}

LayerProfile compute_profile(const HiddenStateSet& states, const ProfileOptions& options) {
    states.validate();
    if (states.layers.empty()) {
        fail(ErrorCode::LengthMismatch, "hidden-state set has no layers");
    }

    std::vector<std::size_t> rows;
    const bool capped = options.max_points > 0 && states.n_points > options.max_points;
    if (capped) {
        // Stream 0xCA9 keeps the cap draw apart from the decimation draws.
        rows = draw_subset(states.n_points, options.max_points, options.seed, 0xCA9, 0);
    }

    LayerProfile profile;
    profile.metadata = states.metadata;
    if (options.with_stability) profile.stability.emplace();

    for (std::size_t i = 0; i < states.layers.size(); ++i) {
        try {
            PointCloud cloud = states.layer_cloud(i);
            if (capped) cloud = cloud.select(rows);

            IdEstimate est = estimate_id(cloud, options.estimate);
            double d = est.d_hat;
            if (options.with_stability) {
                StabilityOptions so;
                so.n_scales = options.n_scales;
                so.repeats_per_scale = options.repeats_per_scale;
                so.seed = options.seed;
                so.estimate = options.estimate;
                StabilityReport report = decimation_stability(cloud, so);
                d = report.selected_d;
                profile.stability->push_back(std::move(report));
            }
            profile.d.push_back(d);
            profile.diagnostics.push_back(est);
        } catch (const Error& e) {
            throw Error(e.code(), "layer " + std::to_string(i) + ": " + e.what());
        }
    }
    profile.mean_id = mean_of(profile.d);
    return profile;
}

ProfileDiff profile_diff(const LayerProfile& before, const LayerProfile& after) {
    if (before.d.size() != after.d.size()) {
        fail(ErrorCode::LengthMismatch, "profiles differ in length (" + std::to_string(before.d.size()) +
                                            " vs " + std::to_string(after.d.size()) + ")");
    }
    ProfileDiff diff;
    diff.delta.resize(before.d.size());
    for (std::size_t i = 0; i < before.d.size(); ++i) {
        diff.delta[i] = after.d[i] - before.d[i];
        if (diff.delta[i] < 0.0) diff.layers_compressed.push_back(i);
    }
    diff.mean_before = mean_of(before.d);
    diff.mean_after = mean_of(after.d);
    diff.mean_delta = diff.mean_after - diff.mean_before;
    return diff;
}

}  // namespace idrank
