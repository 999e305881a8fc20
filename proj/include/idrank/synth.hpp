#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string_view>

#include "idrank/point_cloud.hpp"

namespace idrank {

enum class ManifoldKind { Helix, Hyperplane, Hypercube, Toy5 };

std::string_view to_string(ManifoldKind kind);
ManifoldKind parse_manifold_kind(std::string_view text);

/// Synthetic cloud description. Kinds:
///   helix       [r cos t, r sin t, c t], t ~ U[t_min, t_max], ambient 3
///   hyperplane  uniform on the unit d-ball, embedded in R^D
///   hypercube   uniform on [0, 1]^d, embedded in R^D
///   toy5        the fixed 5-point planar set {(0,0),(1,0),(2,0),(0,1),(2,2)}
/// Embeddings use a seeded random orthonormal frame plus a seeded offset.
struct ManifoldSpec {
    ManifoldKind kind = ManifoldKind::Hyperplane;
    std::size_t intrinsic_dim = 2;
    std::size_t ambient_dim = 10;
    std::size_t n_points = 1000;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    double helix_radius = 1.0;
    double helix_vertical_scale = 0.2;
    double helix_t_min = 0.0;
    double helix_t_max = 12.0 * std::numbers::pi;

    static ManifoldSpec helix(std::size_t n_points, std::uint64_t seed = 0);
    static ManifoldSpec hyperplane(std::size_t d, std::size_t ambient, std::size_t n_points,
                                   std::uint64_t seed = 0);
    static ManifoldSpec hypercube(std::size_t d, std::size_t ambient, std::size_t n_points,
                                  std::uint64_t seed = 0);
    static ManifoldSpec toy5();
};

/// Throws InvalidSpec when a ManifoldSpec violates its invariants.
void validate(const ManifoldSpec& spec);

/// Pure function of its argument: bitwise-identical output for identical ManifoldSpecs.
PointCloud generate(const ManifoldSpec& spec);

}  // namespace idrank
