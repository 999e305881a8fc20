#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "idrank/point_cloud.hpp"

namespace idrank {

struct HiddenStateMetadata {
    std::string model;
    std::string dataset;
    std::string pooling;
    std::vector<std::string> tags;

    bool operator==(const HiddenStateMetadata&) const = default;
};

/// One hidden state: n_points x ambient_dim float32 values, row-major.
struct HiddenLayer {
    std::uint32_t ambient_dim = 0;
    std::vector<float> values;

    bool operator==(const HiddenLayer&) const = default;
};

/// Hidden states of L+1 layers (embedding output, then each block output)
/// over the same n_points examples.
struct HiddenStateSet {
    std::uint32_t n_points = 0;
    std::vector<HiddenLayer> layers;
    HiddenStateMetadata metadata;

    std::size_t num_layers() const noexcept { return layers.size(); }

    /// Layer `i` widened to double. Throws LengthMismatch on a bad index.
    PointCloud layer_cloud(std::size_t i) const;

    /// Throws DimensionMismatch when a layer's payload disagrees with
    /// n_points x ambient_dim or ambient_dim is 0.
    void validate() const;

    bool operator==(const HiddenStateSet&) const = default;
};

// GHS1 layout, all integers little-endian:
//   "GHS1" | u8 version=1 | u8 flags=0 | u16 reserved=0
//   u32 num_layers | u32 n_points
//   per layer: u32 ambient_dim, n_points*ambient_dim float32 (row-major)
//   u32 metadata_length | metadata_length bytes of UTF-8 JSON
inline constexpr std::uint8_t kGhsVersion = 1;

std::vector<std::uint8_t> encode_ghs(const HiddenStateSet& states);

/// Throws FormatError for bad magic/version/flags, truncation or trailing
/// bytes (the message names the layer being read), DimensionMismatch for a
/// zero ambient_dim.
HiddenStateSet decode_ghs(std::span<const std::uint8_t> bytes);

void write_ghs(const std::filesystem::path& path, const HiddenStateSet& states);
HiddenStateSet read_ghs(const std::filesystem::path& path);

/// True when the file starts with the GHS1 magic.
bool looks_like_ghs(const std::filesystem::path& path);

}  // namespace idrank
