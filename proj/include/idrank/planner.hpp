#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "idrank/profile.hpp"

namespace idrank {

enum class Rounding { Ceil, Nearest };

std::string_view to_string(Rounding rounding);
Rounding parse_rounding(std::string_view text);

inline constexpr int kDefaultOffset = 1;
inline constexpr double kDefaultAlphaRatio = 32.0;

/// Adapted projection roles inside one block.
enum class MatrixRole { K, Q, V, O };
inline constexpr std::array<MatrixRole, 4> kMatrixRoles = {MatrixRole::K, MatrixRole::Q,
                                                           MatrixRole::V, MatrixRole::O};
std::string_view to_string(MatrixRole role);

struct MatrixDims {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;

    bool operator==(const MatrixDims&) const = default;
};

struct ModelShape {
    std::size_t num_blocks = 0;
    std::size_t d_model = 0;
    std::array<MatrixDims, 4> matrices{};  // indexed by MatrixRole

    /// Every role d_model x d_model.
    static ModelShape square(std::size_t num_blocks, std::size_t d_model);

    const MatrixDims& dims(MatrixRole role) const { return matrices[static_cast<std::size_t>(role)]; }

    /// Throws ShapeMismatch when a count or dimension is zero.
    void validate() const;

    bool operator==(const ModelShape&) const = default;
};

/// Per-block rank r_i = round(max(d_{i+1} - d_i, 0)) + offset, for a profile
/// d_0..d_L of an L-block model.
///
/// Throws LengthMismatch for fewer than 2 entries, InvalidArgument for a
/// negative offset or non-finite entry, ZeroRank if some r_i comes out 0.
std::vector<std::uint32_t> compute_ranks(std::span<const double> d, int offset = kDefaultOffset,
                                         Rounding rounding = Rounding::Ceil);

struct RankPlan {
    static constexpr int kSchemaVersion = 1;

    std::vector<std::uint32_t> ranks;  // by block, shared by K/Q/V/O
    std::vector<double> alpha;         // alpha_i = alpha_ratio * r_i
    double alpha_ratio = kDefaultAlphaRatio;
    int offset = kDefaultOffset;
    Rounding rounding_mode = Rounding::Ceil;
    ModelShape shape;
    std::uint64_t total_trainable_params = 0;
    double mean_rank = 0.0;
    std::int64_t rounded_mean_rank = 0;  // round-half-to-even
    std::string source_profile_digest;

    bool operator==(const RankPlan&) const = default;
};

/// Recorded alongside the ranks; not used in the arithmetic.
struct PlanProvenance {
    int offset = kDefaultOffset;
    Rounding rounding = Rounding::Ceil;
    std::string source_profile_digest;
};

/// Adapter parameters of a single block: sum over roles of r * (in + out).
std::uint64_t block_adapter_params(std::uint32_t rank, const ModelShape& shape);

/// Throws ShapeMismatch when |ranks| != shape.num_blocks, InvalidArgument for
/// alpha_ratio <= 0, ZeroRank for a zero rank.
RankPlan make_plan(std::span<const std::uint32_t> ranks, double alpha_ratio, const ModelShape& shape,
                   const PlanProvenance& provenance = {});

struct PlanOptions {
    int offset = kDefaultOffset;
    Rounding rounding = Rounding::Ceil;
    double alpha_ratio = kDefaultAlphaRatio;
};

/// compute_ranks followed by make_plan, recording the profile digest.
RankPlan plan_from_profile(const LayerProfile& profile, const ModelShape& shape,
                           const PlanOptions& options = {});

/// FNV-1a 64 over the little-endian IEEE-754 bits of d, as "fnv1a64:<hex>".
std::string profile_digest(std::span<const double> d);

}  // namespace idrank
