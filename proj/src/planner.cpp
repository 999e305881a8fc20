#include "idrank/planner.hpp"

#include <bit>
#include <algorithm>
#include <cmath>
#include <cstdio>

#include "idrank/error.hpp"

namespace idrank {

namespace {

// Half-to-even, independent of the current floating-point rounding mode.
double round_half_even(double x) {
    const double lower = std::floor(x);
    const double frac = x - lower;
    if (frac < 0.5) return lower;
    if (frac > 0.5) return lower + 1.0;
    return std::fmod(lower, 2.0) == 0.0 ? lower : lower + 1.0;
}

}  // namespace

std::string_view to_string(Rounding rounding) {
    return rounding == Rounding::Ceil ? "ceil" : "nearest";
}

Rounding parse_rounding(std::string_view text) {
    if (text == "ceil") return Rounding::Ceil;
    if (text == "nearest") return Rounding::Nearest;
    fail(ErrorCode::InvalidArgument, "unknown rounding mode '" + std::string(text) + "'");
}

std::string_view to_string(MatrixRole role) {
    switch (role) {
    case MatrixRole::K: return "K";
    case MatrixRole::Q: return "Q";
    case MatrixRole::V: return "V";
    case MatrixRole::O: return "O";
    }
    return "?";
}

ModelShape ModelShape::square(std::size_t num_blocks, std::size_t d_model) {
    ModelShape s;
    s.num_blocks = num_blocks;
    s.d_model = d_model;
    s.matrices.fill({d_model, d_model});
    return s;
}

void ModelShape::validate() const {
    if (num_blocks == 0) fail(ErrorCode::ShapeMismatch, "model shape needs at least one block");
    if (d_model == 0) fail(ErrorCode::ShapeMismatch, "d_model must be >= 1");
    for (auto role : kMatrixRoles) {
        const auto& m = dims(role);
        if (m.in_dim == 0 || m.out_dim == 0) {
            fail(ErrorCode::ShapeMismatch, "matrix " + std::string(to_string(role)) + " has a zero dimension");
        }
    }
}

std::vector<std::uint32_t> compute_ranks(std::span<const double> d, int offset, Rounding rounding) {
    if (d.size() < 2) {
        fail(ErrorCode::LengthMismatch,
             "a profile for L blocks needs L+1 >= 2 entries, got " + std::to_string(d.size()));
    }
    if (offset < 0) fail(ErrorCode::InvalidArgument, "offset must be >= 0");
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!std::isfinite(d[i])) {
            fail(ErrorCode::InvalidArgument, "profile entry " + std::to_string(i) + " is not finite");
        }
    }

    std::vector<std::uint32_t> ranks(d.size() - 1);
    for (std::size_t i = 0; i + 1 < d.size(); ++i) {
        const double growth = std::max(d[i + 1] - d[i], 0.0);
        const double rounded = rounding == Rounding::Ceil ? std::ceil(growth) : round_half_even(growth);
        ranks[i] = static_cast<std::uint32_t>(rounded) + static_cast<std::uint32_t>(offset);
        if (ranks[i] == 0) {
            fail(ErrorCode::ZeroRank, "block " + std::to_string(i) +
                                          " gets rank 0; use an offset >= 1 for non-expanding blocks");
        }
    }
    return ranks;
}

std::uint64_t block_adapter_params(std::uint32_t rank, const ModelShape& shape) {
    std::uint64_t total = 0;
    for (auto role : kMatrixRoles) {
        const auto& m = shape.dims(role);
        total += std::uint64_t{rank} * (m.in_dim + m.out_dim);
    }
    return total;
}

RankPlan make_plan(std::span<const std::uint32_t> ranks, double alpha_ratio, const ModelShape& shape,
                   const PlanProvenance& provenance) {
    shape.validate();
    if (ranks.size() != shape.num_blocks) {
        fail(ErrorCode::ShapeMismatch, "plan has " + std::to_string(ranks.size()) + " ranks for a " +
                                           std::to_string(shape.num_blocks) + "-block model");
    }
    if (!(alpha_ratio > 0.0) || !std::isfinite(alpha_ratio)) {
        fail(ErrorCode::InvalidArgument, "alpha_ratio must be finite and > 0");
    }

    RankPlan plan;
    plan.ranks.assign(ranks.begin(), ranks.end());
    plan.alpha_ratio = alpha_ratio;
    plan.offset = provenance.offset;
    plan.rounding_mode = provenance.rounding;
    plan.shape = shape;
    plan.source_profile_digest = provenance.source_profile_digest;

    std::uint64_t rank_sum = 0;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        if (ranks[i] == 0) fail(ErrorCode::ZeroRank, "block " + std::to_string(i) + " has rank 0");
        plan.alpha.push_back(alpha_ratio * static_cast<double>(ranks[i]));
        plan.total_trainable_params += block_adapter_params(ranks[i], shape);
        rank_sum += ranks[i];
    }
    plan.mean_rank = static_cast<double>(rank_sum) / static_cast<double>(ranks.size());
    plan.rounded_mean_rank = static_cast<std::int64_t>(round_half_even(plan.mean_rank));
    return plan;
}

RankPlan plan_from_profile(const LayerProfile& profile, const ModelShape& shape,
                           const PlanOptions& options) {
    const auto ranks = compute_ranks(profile.d, options.offset, options.rounding);
    return make_plan(ranks, options.alpha_ratio, shape,
                     {options.offset, options.rounding, profile_digest(profile.d)});
}

std::string profile_digest(std::span<const double> d) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double v : d) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xFF;
            h *= 0x100000001b3ULL;
        }
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace idrank
