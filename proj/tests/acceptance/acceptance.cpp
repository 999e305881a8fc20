// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "idrank/error.hpp"
#include "idrank/ghs.hpp"
#include "idrank/neighbors.hpp"
#include "idrank/planner.hpp"
#include "idrank/serialize.hpp"
#include "idrank/stability.hpp"
#include "idrank/synth.hpp"
#include "idrank/twonn.hpp"
#include "oracles.hpp"

using namespace idrank;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail << " [failed: " << what << "]";
        }
    }
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

std::string fmt(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

// Independent reference: dedup by coordinate value (first occurrence wins),
// then a linear scan per point for the two smallest squared distances.
struct Reference {
    std::vector<std::size_t> kept;
    std::vector<double> r1, r2;
};

Reference reference_two_nearest(const PointCloud& cloud) {
    Reference ref;
    std::map<std::vector<double>, std::size_t> seen;
    for (std::size_t i = 0; i < cloud.n_points(); ++i) {
        auto p = cloud.point(i);
        if (seen.emplace(std::vector<double>(p.begin(), p.end()), i).second) ref.kept.push_back(i);
    }
    const std::size_t dim = cloud.ambient_dim();
    const auto& x = cloud.data();
    for (std::size_t a : ref.kept) {
        double b1 = INFINITY, b2 = INFINITY;
        for (std::size_t b : ref.kept) {
            if (a == b) continue;
            double s = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                const double diff = x[a * dim + k] - x[b * dim + k];
                s += diff * diff;
            }
            if (s < b1) {
                b2 = b1;
                b1 = s;
            } else if (s < b2) {
                b2 = s;
            }
        }
        ref.r1.push_back(std::sqrt(b1));
        ref.r2.push_back(std::sqrt(b2));
    }
    return ref;
}

Outcome neighbor_oracle() {
    Outcome o;
    std::mt19937_64 gen(2024);
    std::size_t mismatches = 0, largest = 0;
    const auto t0 = Clock::now();
    for (int c = 0; c < 100; ++c) {
        const bool gridded = c % 10 == 9;
        const std::size_t n = 3 + gen() % 1998;
        const std::size_t dim = gridded ? 1 + gen() % 3 : 1 + gen() % 64;
        largest = std::max(largest, n);
        const PointCloud cloud = oracle::random_cloud(n, dim, 1000 + c, gridded);
        const Reference ref = reference_two_nearest(cloud);
        if (ref.kept.size() < 3) continue;
        for (auto path : {SearchPath::KdTree, SearchPath::BruteForce}) {
            const NeighborStats s = two_nearest(cloud, path);
            bool same = s.kept_indices == ref.kept && s.r1 == ref.r1 && s.r2 == ref.r2;
            for (std::size_t i = 0; same && i < s.mu.size(); ++i) {
                const double mu = ref.r1[i] == ref.r2[i] ? 1.0 : ref.r2[i] / ref.r1[i];
                same = s.mu[i] == mu;
            }
            if (!same) ++mismatches;
        }
    }
    const double t = seconds_since(t0);
    o.detail << "100 clouds up to n=" << largest << ", mismatches=" << mismatches << ", " << fmt(t, 2) << " s";
    o.require(mismatches == 0, "exact equality");
    o.require(t < 60.0, "runtime < 60 s");
    return o;
}

Outcome known_dimension_recovery() {
    Outcome o;
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (auto kind : {ManifoldKind::Hyperplane, ManifoldKind::Hypercube}) {
        for (std::size_t d : {1u, 2u, 3u, 5u}) {
            ManifoldSpec spec = kind == ManifoldKind::Hyperplane ? ManifoldSpec::hyperplane(d, 50, 5000, 11)
                                                                 : ManifoldSpec::hypercube(d, 50, 5000, 11);
            const NeighborStats stats = two_nearest(generate(spec));
            const double mle = fit_mle(stats.mu).d_hat;
            const double reg = fit_regression(stats.mu).d_hat;
            const double dd = static_cast<double>(d);
            worst = std::max({worst, rel_err(mle, dd), rel_err(reg, dd)});
            o.detail << to_string(kind) << " d=" << d << ": " << fmt(mle, 3) << "/" << fmt(reg, 3) << "; ";
            o.require(rel_err(mle, dd) <= 0.10, std::string(to_string(kind)) + " d=" + std::to_string(d) + " mle");
            o.require(rel_err(reg, dd) <= 0.10,
                      std::string(to_string(kind)) + " d=" + std::to_string(d) + " regression");
        }
    }
    const double t = seconds_since(t0);
    o.detail << "worst rel err " << fmt(worst, 3) << ", " << fmt(t, 2) << " s";
    o.require(t < 120.0, "runtime < 2 min");
    return o;
}

Outcome helix() {
    Outcome o;
    const auto t0 = Clock::now();
    const PointCloud cloud = generate(ManifoldSpec::helix(2000, 0));
    const double mle = estimate_id(cloud).d_hat;
    EstimateOptions reg_opts;
    reg_opts.method = FitMethod::Regression;
    const double reg = estimate_id(cloud, reg_opts).d_hat;
    const double t = seconds_since(t0);
    o.detail << "mle " << fmt(mle, 3) << ", regression " << fmt(reg, 3) << ", " << fmt(t, 2) << " s";
    o.require(mle >= 0.9 && mle <= 1.2, "mle in [0.9, 1.2]");
    o.require(reg >= 0.9 && reg <= 1.2, "regression in [0.9, 1.2]");
    o.require(t < 5.0, "runtime < 5 s");
    return o;
}

Outcome pareto_self_consistency() {
    Outcome o;
    for (double d : {0.5, 1.0, 3.0, 7.0}) {
        const auto mu = oracle::pareto_sample(d, 10000, static_cast<std::uint64_t>(d * 100) + 5);
        const double mle = fit_mle(mu).d_hat;
        const double reg = fit_regression(mu, 0.1).d_hat;
        const double numeric = oracle::pareto_mle_numeric(mu);
        o.detail << "d=" << d << ": mle " << fmt(mle) << " reg " << fmt(reg) << " |mle-num|/num "
                 << rel_err(mle, numeric) << "; ";
        const std::string tag = "d=" + fmt(d, 1);
        o.require(rel_err(mle, d) <= 0.03, tag + " mle within 3%");
        o.require(rel_err(reg, d) <= 0.07, tag + " regression within 7%");
        o.require(rel_err(mle, numeric) <= 1e-6, tag + " closed form vs numeric");
    }
    return o;
}

Outcome invariance() {
    Outcome o;
    const PointCloud base = generate(ManifoldSpec::hyperplane(3, 12, 1500, 21));
    EstimateOptions reg_opts;
    reg_opts.method = FitMethod::Regression;
    const double mle0 = estimate_id(base).d_hat;
    const double reg0 = estimate_id(base, reg_opts).d_hat;
    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> log_scale(std::log(1e-3), std::log(1e3));
    std::uniform_real_distribution<double> offset(-100.0, 100.0);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        const auto rot = oracle::random_rotation(base.ambient_dim(), 500 + k);
        std::vector<double> shift(base.ambient_dim());
        for (auto& s : shift) s = offset(gen);
        const PointCloud moved = oracle::transform(base, rot, shift, std::exp(log_scale(gen)));
        const double e1 = rel_err(estimate_id(moved).d_hat, mle0);
        const double e2 = rel_err(estimate_id(moved, reg_opts).d_hat, reg0);
        worst = std::max({worst, e1, e2});
    }
    o.detail << "20 transforms, worst rel change " << worst;
    o.require(worst <= 1e-9, "rel change <= 1e-9");
    return o;
}

Outcome plan_arithmetic() {
    Outcome o;
    const auto t0 = Clock::now();
    const std::vector<unsigned> sums{16, 18, 21, 15, 14, 21, 16, 19};
    const std::vector<std::uint64_t> totals{98304, 110592, 129024, 92160, 86016, 129024, 98304, 116736};
    const std::vector<std::string> millions{"0.10", "0.11", "0.13", "0.09", "0.09", "0.13", "0.10", "0.12"};
    const std::vector<std::string> means{"1.33", "1.50", "1.75", "1.25", "1.17", "1.75", "1.33", "1.58"};
    const ModelShape shape = ModelShape::square(12, 768);
    for (std::size_t t = 0; t < sums.size(); ++t) {
        // Profile whose growth yields ranks summing to sums[t]: extra rank goes
        // to the earliest blocks, one unit each.
        std::vector<double> d{10.0};
        unsigned extra = sums[t] - 12;
        for (std::size_t b = 0; b < 12; ++b) {
            const unsigned step = extra / (12 - b) + (extra % (12 - b) ? 1 : 0);
            extra -= step;
            d.push_back(d.back() + step - 0.3);
        }
        const RankPlan plan = plan_from_profile(LayerProfile::from_values(d), shape);
        unsigned rank_sum = 0;
        for (auto r : plan.ranks) rank_sum += r;
        const std::string m = fmt(static_cast<double>(plan.total_trainable_params) / 1e6, 2);
        const std::string mean = fmt(plan.mean_rank, 2);
        o.detail << plan.total_trainable_params << " ";
        const std::string tag = "column " + std::to_string(t);
        o.require(rank_sum == sums[t], tag + " rank sum");
        o.require(plan.total_trainable_params == totals[t], tag + " total");
        o.require(m == millions[t], tag + " millions " + m);
        o.require(mean == means[t], tag + " mean " + mean);
        o.require(plan.alpha.size() == 12 && plan.alpha[0] == 32.0 * plan.ranks[0], tag + " alpha");
    }
    const double t = seconds_since(t0);
    o.detail << "(" << fmt(t * 1e3, 2) << " ms)";
    o.require(t < 1.0, "runtime < 1 s");
    return o;
}

bool same_bits(const StabilityReport& a, const StabilityReport& b) {
    if (a.subset_sizes != b.subset_sizes || a.estimates_per_size.size() != b.estimates_per_size.size()) return false;
    for (std::size_t i = 0; i < a.estimates_per_size.size(); ++i) {
        const auto& x = a.estimates_per_size[i];
        const auto& y = b.estimates_per_size[i];
        if (std::bit_cast<std::uint64_t>(x.mean) != std::bit_cast<std::uint64_t>(y.mean) ||
            std::bit_cast<std::uint64_t>(x.std) != std::bit_cast<std::uint64_t>(y.std))
            return false;
    }
    return std::bit_cast<std::uint64_t>(a.selected_d) == std::bit_cast<std::uint64_t>(b.selected_d) &&
           a.plateau_found == b.plateau_found && a.seed == b.seed;
}

Outcome decimation() {
    Outcome o;
    const PointCloud cloud = generate(ManifoldSpec::hyperplane(2, 10, 8000, 7));
    StabilityOptions opts;
    opts.seed = 7;
    const StabilityReport a = decimation_stability(cloud, opts);
    const StabilityReport b = decimation_stability(cloud, opts);
    opts.seed = 8;
    const StabilityReport other = decimation_stability(cloud, opts);
    o.detail << "plateau " << (a.plateau_found ? "yes" : "no") << ", selected_d " << fmt(a.selected_d, 3);
    o.require(same_bits(a, b), "bitwise-identical reports");
    o.require(to_json(a) == to_json(b), "identical JSON");
    o.require(!same_bits(a, other), "different seed changes draws");
    o.require(a.plateau_found, "plateau found");
    o.require(a.selected_d >= 1.8 && a.selected_d <= 2.2, "selected_d in [1.8, 2.2]");
    return o;
}

HiddenStateSet random_set(std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    HiddenStateSet s;
    s.n_points = static_cast<std::uint32_t>(1 + gen() % 30);
    const std::size_t layers = 1 + gen() % 6;
    for (std::size_t l = 0; l < layers; ++l) {
        HiddenLayer layer;
        layer.ambient_dim = static_cast<std::uint32_t>(1 + gen() % 16);
        layer.values.resize(std::size_t{s.n_points} * layer.ambient_dim);
        for (auto& v : layer.values) v = std::bit_cast<float>(static_cast<std::uint32_t>(gen()));
        s.layers.push_back(std::move(layer));
    }
    s.metadata.model = "m" + std::to_string(gen() % 1000);
    s.metadata.dataset = "set/" + std::to_string(seed);
    s.metadata.pooling = seed % 2 ? "mean" : "last-token";
    if (seed % 3 == 0) s.metadata.tags = {"x", "y\n\"z\""};
    return s;
}

bool decode_raises(const std::vector<std::uint8_t>& bytes, ErrorCode code) {
    try {
        decode_ghs(bytes);
    } catch (const Error& e) {
        return e.code() == code;
    }
    return false;
}

Outcome format_suite() {
    Outcome o;
    std::size_t bad_round_trips = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const HiddenStateSet s = random_set(seed);
        const auto bytes = encode_ghs(s);
        const HiddenStateSet back = decode_ghs(bytes);
        bool same = back.n_points == s.n_points && back.metadata == s.metadata &&
                    back.layers.size() == s.layers.size() && encode_ghs(back) == bytes;
        for (std::size_t l = 0; same && l < s.layers.size(); ++l) {
            same = back.layers[l].ambient_dim == s.layers[l].ambient_dim &&
                   std::memcmp(back.layers[l].values.data(), s.layers[l].values.data(),
                               s.layers[l].values.size() * sizeof(float)) == 0;
        }
        if (!same) ++bad_round_trips;
    }
    o.require(bad_round_trips == 0, "bitwise round trip");

    HiddenStateSet s;
    s.n_points = 3;
    s.layers = {HiddenLayer{2, {1, 2, 3, 4, 5, 6}}, HiddenLayer{1, {7, 8, 9}}};
    s.metadata.model = "m";
    const auto good = encode_ghs(s);

    auto bad_magic = good;
    bad_magic[0] = 'X';
    o.require(decode_raises(bad_magic, ErrorCode::FormatError), "bad magic");
    auto bad_version = good;
    bad_version[4] = 9;
    o.require(decode_raises(bad_version, ErrorCode::FormatError), "bad version");
    for (std::size_t cut : {std::size_t{3}, std::size_t{12}, std::size_t{20}, good.size() - 1}) {
        o.require(decode_raises(std::vector<std::uint8_t>(good.begin(), good.begin() + cut), ErrorCode::FormatError),
                  "truncation at " + std::to_string(cut));
    }
    auto zero_dim = good;
    zero_dim[16] = 0;
    o.require(decode_raises(zero_dim, ErrorCode::DimensionMismatch), "zero ambient dim");
    // Claim a wider first layer than the payload holds.
    auto wide = good;
    wide[16] = 200;
    o.require(decode_raises(wide, ErrorCode::FormatError), "payload shorter than dims");
    auto inconsistent = s;
    inconsistent.layers[1].values.pop_back();
    bool raised = false;
    try {
        encode_ghs(inconsistent);
    } catch (const Error& e) {
        raised = e.code() == ErrorCode::DimensionMismatch;
    }
    o.require(raised, "in-memory dim mismatch");
    o.detail << "100 round trips, " << bad_round_trips << " failures; malformed corpus checked";
    return o;
}

double best_time(const PointCloud& cloud, int reps) {
    double best = INFINITY;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = Clock::now();
        const NeighborStats s = two_nearest(cloud, SearchPath::KdTree);
        best = std::min(best, seconds_since(t0));
        if (s.mu.empty()) return 0.0;
    }
    return best;
}

Outcome complexity() {
    Outcome o;
    std::vector<double> times;
    for (std::size_t n : {10000u, 20000u, 40000u}) {
        times.push_back(best_time(generate(ManifoldSpec::hyperplane(2, 10, n, 3)), 5));
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double ratio = times[i] / times[i - 1];
        o.detail << "t(" << (10000u << i) << ")/t(" << (10000u << (i - 1)) << ") = " << fmt(ratio, 2) << "; ";
        o.require(ratio < 3.0, "ratio < 3");
    }
    o.detail << "times " << fmt(times[0] * 1e3, 1) << "/" << fmt(times[1] * 1e3, 1) << "/" << fmt(times[2] * 1e3, 1)
             << " ms";
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"neighbor-oracle", neighbor_oracle},
        {"known-dimension-recovery", known_dimension_recovery},
        {"helix", helix},
        {"pareto-self-consistency", pareto_self_consistency},
        {"invariance", invariance},
        {"plan-parameter-arithmetic", plan_arithmetic},
        {"decimation-determinism", decimation},
        {"format-suite", format_suite},
        {"complexity", complexity},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        bool ok = false;
        std::string detail;
        try {
            Outcome o = check();
            ok = o.ok;
            detail = o.detail.str();
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        if (!ok) ++failures;
        std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
