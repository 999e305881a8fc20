#include "idrank/synth.hpp"

#include <Eigen/QR>
#include <cmath>
#include <string>
#include <vector>

#include "idrank/error.hpp"
#include "idrank/rng.hpp"

namespace idrank {

namespace {

// Substream tags under ManifoldSpec::seed.
enum Stream : std::uint64_t { kPoints = 1, kNoise = 2, kFrame = 3, kOffset = 4 };

std::vector<double> sample_intrinsic(const ManifoldSpec& spec, std::size_t i) {
    Rng rng = Rng::derive(spec.seed, {kPoints, i});
    const std::size_t d = spec.intrinsic_dim;
    std::vector<double> u(d);
    if (spec.kind == ManifoldKind::Hypercube) {
        for (auto& v : u) v = rng.uniform();
        return u;
    }
    // Unit d-ball: Gaussian direction scaled by U^(1/d).
    double norm2 = 0.0;
    do {
        norm2 = 0.0;
        for (auto& v : u) {
            v = rng.normal();
            norm2 += v * v;
        }
    } while (norm2 == 0.0);
    const double radius = std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
    const double scale = radius / std::sqrt(norm2);
    for (auto& v : u) v *= scale;
    return u;
}

Eigen::MatrixXd random_frame(const ManifoldSpec& spec) {
    const auto rows = static_cast<Eigen::Index>(spec.ambient_dim);
    const auto cols = static_cast<Eigen::Index>(spec.intrinsic_dim);
    Rng rng = Rng::derive(spec.seed, {kFrame});
    Eigen::MatrixXd g(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) g(r, c) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
}

void add_noise(const ManifoldSpec& spec, std::vector<double>& data) {
    if (spec.noise_sigma == 0.0) return;
    const std::size_t dim = spec.ambient_dim;
    for (std::size_t i = 0; i < spec.n_points; ++i) {
        Rng rng = Rng::derive(spec.seed, {kNoise, i});
        for (std::size_t k = 0; k < dim; ++k) data[i * dim + k] += spec.noise_sigma * rng.normal();
    }
}

}  // namespace

std::string_view to_string(ManifoldKind kind) {
    switch (kind) {
    case ManifoldKind::Helix: return "helix";
    case ManifoldKind::Hyperplane: return "hyperplane";
    case ManifoldKind::Hypercube: return "hypercube";
    case ManifoldKind::Toy5: return "toy5";
    }
    return "unknown";
}

ManifoldKind parse_manifold_kind(std::string_view text) {
    if (text == "helix") return ManifoldKind::Helix;
    if (text == "hyperplane") return ManifoldKind::Hyperplane;
    if (text == "hypercube") return ManifoldKind::Hypercube;
    if (text == "toy5") return ManifoldKind::Toy5;
    fail(ErrorCode::InvalidSpec, "unknown manifold kind '" + std::string(text) + "'");
}

ManifoldSpec ManifoldSpec::helix(std::size_t n_points, std::uint64_t seed) {
    ManifoldSpec s;
    s.kind = ManifoldKind::Helix;
    s.intrinsic_dim = 1;
    s.ambient_dim = 3;
    s.n_points = n_points;
    s.seed = seed;
    return s;
}

ManifoldSpec ManifoldSpec::hyperplane(std::size_t d, std::size_t ambient, std::size_t n_points,
                                      std::uint64_t seed) {
    ManifoldSpec s;
    s.kind = ManifoldKind::Hyperplane;
    s.intrinsic_dim = d;
    s.ambient_dim = ambient;
    s.n_points = n_points;
    s.seed = seed;
    return s;
}

ManifoldSpec ManifoldSpec::hypercube(std::size_t d, std::size_t ambient, std::size_t n_points,
                                     std::uint64_t seed) {
    ManifoldSpec s = hyperplane(d, ambient, n_points, seed);
    s.kind = ManifoldKind::Hypercube;
    return s;
}

ManifoldSpec ManifoldSpec::toy5() {
    ManifoldSpec s;
    s.kind = ManifoldKind::Toy5;
    s.intrinsic_dim = 1;
    s.ambient_dim = 2;
    s.n_points = 5;
    return s;
}

void validate(const ManifoldSpec& spec) {
    auto bad = [](const std::string& msg) { fail(ErrorCode::InvalidSpec, msg); };
    if (spec.ambient_dim == 0) bad("ambient_dim must be >= 1");
    if (spec.intrinsic_dim == 0) bad("intrinsic_dim must be >= 1");
    if (spec.intrinsic_dim > spec.ambient_dim) bad("intrinsic_dim exceeds ambient_dim");
    if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma)) {
        bad("noise_sigma must be finite and >= 0");
    }
    switch (spec.kind) {
    case ManifoldKind::Helix:
        if (spec.ambient_dim != 3) bad("helix requires ambient_dim = 3");
        if (spec.intrinsic_dim != 1) bad("helix has intrinsic_dim 1");
        if (!(spec.helix_radius > 0.0)) bad("helix radius must be > 0");
        if (!(spec.helix_vertical_scale > 0.0)) bad("helix vertical scale must be > 0");
        if (!(spec.helix_t_min < spec.helix_t_max)) bad("helix requires t_min < t_max");
        break;
    case ManifoldKind::Toy5:
        if (spec.ambient_dim != 2) bad("toy5 lives in ambient_dim = 2");
        if (spec.intrinsic_dim != 1) bad("toy5 has intrinsic_dim 1");
        break;
    case ManifoldKind::Hyperplane:
    case ManifoldKind::Hypercube:
        break;
    }
}

PointCloud generate(const ManifoldSpec& spec) {
    validate(spec);

    if (spec.kind == ManifoldKind::Toy5) {
        return PointCloud(2, {0, 0, 1, 0, 2, 0, 0, 1, 2, 2});
    }

    const std::size_t dim = spec.ambient_dim;
    std::vector<double> data(spec.n_points * dim);

    if (spec.kind == ManifoldKind::Helix) {
        for (std::size_t i = 0; i < spec.n_points; ++i) {
            Rng rng = Rng::derive(spec.seed, {kPoints, i});
            const double t = rng.uniform(spec.helix_t_min, spec.helix_t_max);
            data[i * 3 + 0] = spec.helix_radius * std::cos(t);
            data[i * 3 + 1] = spec.helix_radius * std::sin(t);
            data[i * 3 + 2] = spec.helix_vertical_scale * t;
        }
        add_noise(spec, data);
        return PointCloud(dim, std::move(data));
    }

    const Eigen::MatrixXd frame = random_frame(spec);
    std::vector<double> offset(dim);
    {
        Rng rng = Rng::derive(spec.seed, {kOffset});
        for (auto& v : offset) v = rng.normal();
    }
    for (std::size_t i = 0; i < spec.n_points; ++i) {
        const auto u = sample_intrinsic(spec, i);
        for (std::size_t k = 0; k < dim; ++k) {
            double x = offset[k];
            for (std::size_t j = 0; j < u.size(); ++j) {
                x += frame(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) * u[j];
            }
            data[i * dim + k] = x;
        }
    }
    add_noise(spec, data);
    return PointCloud(dim, std::move(data));
}

}  // namespace idrank
