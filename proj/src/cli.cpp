#include "idrank/cli.hpp"

#include <algorithm>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "idrank/csv.hpp"
#include "idrank/error.hpp"
#include "idrank/ghs.hpp"
#include "idrank/planner.hpp"
#include "idrank/profile.hpp"
#include "idrank/serialize.hpp"
#include "idrank/stability.hpp"
#include "idrank/synth.hpp"
#include "idrank/twonn.hpp"
#include "json.hpp"

namespace idrank::cli {

namespace {

struct Config {
    std::string subcommand;
    std::string input;
    std::string out;
    std::size_t layer = 0;
    std::string method = "mle";
    double discard_fraction = kDefaultDiscardFraction;
    std::string emit_curve;
    std::uint64_t seed = 0;
    int verbosity = 0;
    bool json_errors = false;

    // synth
    std::string kind;
    std::size_t n_points = 1000;
    std::size_t intrinsic_dim = 2;
    std::size_t ambient_dim = 10;
    double noise = 0.0;
    double radius = 1.0;
    double vertical_scale = 0.2;
    double t_min = 0.0;
    double t_max = 12.0 * std::numbers::pi;
    std::string format;

    // profile / stability
    std::size_t max_points = kDefaultMaxPoints;
    bool with_stability = false;
    std::size_t scales = 4;
    std::size_t repeats = 5;
    std::string pooling = "mean";

    // plan
    std::string profile;
    int offset = kDefaultOffset;
    double alpha_ratio = kDefaultAlphaRatio;
    std::string rounding = "ceil";
    std::size_t blocks = 0;
    std::size_t d_model = 768;
    std::vector<std::string> matrix_dims;

    // diff
    std::string before;
    std::string after;
};

const CLI::Validator kDiscardFraction(
    [](std::string& value) -> std::string {
        double v = 0.0;
        if (!CLI::detail::lexical_cast(value, v) || !(v >= 0.0 && v < 1.0)) {
            return "discard fraction must lie in [0, 1)";
        }
        return {};
    },
    "in [0,1)");

const CLI::Validator kPoolingCheck(
    [](std::string& value) -> std::string {
        try {
            parse_pooling(value);
        } catch (const Error& e) {
            return e.what();
        }
        return {};
    },
    "mean|first-token|last-token|token-sample-<k>");

class Output {
public:
    Output(const std::string& path, std::ostream& fallback) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary | std::ios::trunc);
            if (!file_) fail(ErrorCode::IoError, "cannot open '" + path + "' for writing");
        }
        stream_ = path.empty() ? &fallback : &file_;
    }
    std::ostream& stream() { return *stream_; }
    void finish(const std::string& path) {
        stream_->flush();
        if (!*stream_) fail(ErrorCode::IoError, "write to '" + (path.empty() ? "stdout" : path) + "' failed");
    }

private:
    std::ofstream file_;
    std::ostream* stream_ = nullptr;
};

void write_result(const Config& cfg, std::ostream& out, const std::string& text) {
    Output o(cfg.out, out);
    o.stream() << text << '\n';
    o.finish(cfg.out);
}

PointCloud load_cloud(const Config& cfg) {
    if (looks_like_ghs(cfg.input)) return read_ghs(cfg.input).layer_cloud(cfg.layer);
    return read_csv_cloud(cfg.input);
}

EstimateOptions estimate_options(const Config& cfg) {
    EstimateOptions o;
    o.method = parse_fit_method(cfg.method);
    o.discard_fraction = cfg.discard_fraction;
    return o;
}

MatrixRole parse_role(const std::string& s) {
    for (auto role : kMatrixRoles)
        if (s == to_string(role)) return role;
    fail(ErrorCode::InvalidArgument, "unknown matrix role '" + s + "' (expected K, Q, V or O)");
}

// ROLE=INxOUT, e.g. V=768x256
void apply_matrix_dims(ModelShape& shape, const std::vector<std::string>& specs) {
    for (const auto& spec : specs) {
        const auto eq = spec.find('=');
        const auto x = spec.find('x', eq == std::string::npos ? 0 : eq);
        if (eq == std::string::npos || x == std::string::npos) {
            fail(ErrorCode::InvalidArgument, "matrix dims '" + spec + "' must look like ROLE=INxOUT");
        }
        MatrixDims dims;
        try {
            dims.in_dim = std::stoull(spec.substr(eq + 1, x - eq - 1));
            dims.out_dim = std::stoull(spec.substr(x + 1));
        } catch (const std::exception&) {
            fail(ErrorCode::InvalidArgument, "matrix dims '" + spec + "' must look like ROLE=INxOUT");
        }
        shape.matrices[static_cast<std::size_t>(parse_role(spec.substr(0, eq)))] = dims;
    }
}

void run_estimate(const Config& cfg, std::ostream& out, std::ostream& err) {
    const PointCloud cloud = load_cloud(cfg);
    const EstimateOptions opts = estimate_options(cfg);
    if (cfg.verbosity > 0) {
        err << "estimate: " << cloud.n_points() << " points in R^" << cloud.ambient_dim() << ", method "
            << cfg.method << '\n';
    }
    const NeighborStats stats = two_nearest(cloud, opts.search);
    IdEstimate est = opts.method == FitMethod::Mle ? fit_mle(stats.mu)
                                                    : fit_regression(stats.mu, opts.discard_fraction);
    est.n_duplicates = stats.n_duplicates;
    if (!cfg.emit_curve.empty()) {
        std::ostringstream curve;
        write_csv_curve(curve, regression_curve(stats.mu, opts.discard_fraction));
        write_text_file(cfg.emit_curve, curve.str());
    }
    write_result(cfg, out, to_json(est));
}

void run_synth(const Config& cfg, std::ostream& out, const CLI::App& sub) {
    ManifoldSpec spec;
    spec.kind = parse_manifold_kind(cfg.kind);
    spec.n_points = cfg.n_points;
    spec.intrinsic_dim = cfg.intrinsic_dim;
    spec.ambient_dim = cfg.ambient_dim;
    spec.noise_sigma = cfg.noise;
    spec.seed = cfg.seed;
    spec.helix_radius = cfg.radius;
    spec.helix_vertical_scale = cfg.vertical_scale;
    spec.helix_t_min = cfg.t_min;
    spec.helix_t_max = cfg.t_max;
    // Fixed-geometry kinds take their own dimensions unless overridden.
    if (spec.kind == ManifoldKind::Helix || spec.kind == ManifoldKind::Toy5) {
        const bool helix = spec.kind == ManifoldKind::Helix;
        if (sub.count("--intrinsic-dim") == 0) spec.intrinsic_dim = 1;
        if (sub.count("--ambient-dim") == 0) spec.ambient_dim = helix ? 3 : 2;
    }
    const PointCloud cloud = generate(spec);

    std::string format = cfg.format;
    if (format.empty()) format = cfg.out.ends_with(".ghs") ? "ghs" : "csv";
    if (format == "ghs") {
        if (cfg.out.empty()) fail(ErrorCode::InvalidArgument, "--format ghs requires --out");
        HiddenStateSet states;
        states.n_points = static_cast<std::uint32_t>(cloud.n_points());
        HiddenLayer layer;
        layer.ambient_dim = static_cast<std::uint32_t>(cloud.ambient_dim());
        layer.values.assign(cloud.data().begin(), cloud.data().end());
        states.layers.push_back(std::move(layer));
        states.metadata.dataset = "synth:" + std::string(to_string(spec.kind));
        write_ghs(cfg.out, states);
        return;
    }
    Output o(cfg.out, out);
    write_csv_cloud(o.stream(), cloud);
    o.finish(cfg.out);
}

void run_profile(const Config& cfg, std::ostream& out, std::ostream& err) {
    const HiddenStateSet states = read_ghs(cfg.input);
    const Pooling expected = parse_pooling(cfg.pooling);
    if (!states.metadata.pooling.empty() && states.metadata.pooling != to_string(expected)) {
        err << "warning: file pooling '" << states.metadata.pooling << "' differs from --pooling '"
            << to_string(expected) << "'\n";
    }
    ProfileOptions opts;
    opts.estimate = estimate_options(cfg);
    opts.max_points = cfg.max_points;
    opts.seed = cfg.seed;
    opts.with_stability = cfg.with_stability;
    opts.n_scales = cfg.scales;
    opts.repeats_per_scale = cfg.repeats;
    if (cfg.verbosity > 0) {
        err << "profile: " << states.num_layers() << " layers x " << states.n_points << " points\n";
    }
    const LayerProfile profile = compute_profile(states, opts);
    if (cfg.format == "csv") {
        std::ostringstream csv;
        csv << "layer,d\n";
        for (std::size_t i = 0; i < profile.d.size(); ++i) csv << i << ',' << format_double(profile.d[i]) << '\n';
        Output o(cfg.out, out);
        o.stream() << csv.str();
        o.finish(cfg.out);
        return;
    }
    write_result(cfg, out, to_json(profile));
}

void run_stability(const Config& cfg, std::ostream& out) {
    const PointCloud cloud = load_cloud(cfg);
    StabilityOptions opts;
    opts.n_scales = cfg.scales;
    opts.repeats_per_scale = cfg.repeats;
    opts.seed = cfg.seed;
    opts.estimate = estimate_options(cfg);
    write_result(cfg, out, to_json(decimation_stability(cloud, opts)));
}

void run_plan(const Config& cfg, std::ostream& out) {
    const LayerProfile profile = profile_from_json(read_text_file(cfg.profile));
    if (profile.d.size() < 2) {
        fail(ErrorCode::LengthMismatch, "profile needs at least 2 entries to plan any block");
    }
    const std::size_t blocks = profile.d.size() - 1;
    if (cfg.blocks != 0 && cfg.blocks != blocks) {
        fail(ErrorCode::LengthMismatch, "profile has " + std::to_string(profile.d.size()) +
                                            " entries (" + std::to_string(blocks) + " blocks) but --blocks is " +
                                            std::to_string(cfg.blocks));
    }
    ModelShape shape = ModelShape::square(blocks, cfg.d_model);
    apply_matrix_dims(shape, cfg.matrix_dims);
    PlanOptions opts;
    opts.offset = cfg.offset;
    opts.rounding = parse_rounding(cfg.rounding);
    opts.alpha_ratio = cfg.alpha_ratio;
    write_result(cfg, out, to_json(plan_from_profile(profile, shape, opts)));
}

void run_diff(const Config& cfg, std::ostream& out) {
    const auto before = profile_from_json(read_text_file(cfg.before));
    const auto after = profile_from_json(read_text_file(cfg.after));
    write_result(cfg, out, to_json(profile_diff(before, after)));
}

void report(std::ostream& err, bool json_errors, std::string_view code, const std::string& message,
            int exit_code) {
    err << "error: " << message << '\n';
    if (json_errors) {
        nlohmann::ordered_json j;
        j["error"] = {{"code", code}, {"message", message}, {"exit_code", exit_code}};
        err << j.dump() << '\n';
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Config cfg;
    CLI::App app{"Intrinsic-dimension profiling and geometry-aware LoRA rank planning", "idrank"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1, 1);
    app.fallthrough();  // global flags may follow the subcommand
    app.set_help_all_flag("--help-all", "Print help for every subcommand");

    app.add_option("--seed", cfg.seed, "Random seed for all sampling")->envname("IDRANK_SEED");
    app.add_flag("-v,--verbose", cfg.verbosity, "Progress messages on stderr (repeatable)");
    app.add_flag("--json-errors", cfg.json_errors, "Append a JSON diagnostic line to stderr on failure");

    auto add_common_fit = [&](CLI::App* sub) {
        sub->add_option("--method", cfg.method, "Fit method")->check(CLI::IsMember({"mle", "regression"}));
        sub->add_option("--discard-fraction", cfg.discard_fraction,
                        "Fraction of largest mu ratios dropped by the regression fit")
            ->check(kDiscardFraction);
    };
    auto add_out = [&](CLI::App* sub) { sub->add_option("--out", cfg.out, "Output path (default stdout)"); };

    auto* estimate = app.add_subcommand("estimate", "Estimate the intrinsic dimension of one point cloud");
    estimate->add_option("--input", cfg.input, "CSV or GHS1 point cloud")->required();
    estimate->add_option("--layer", cfg.layer, "Layer index when the input is GHS1");
    add_common_fit(estimate);
    estimate->add_option("--emit-curve", cfg.emit_curve,
                         "Write the (ln mu, -ln(1-F)) pairs of the regression fit to this CSV");
    add_out(estimate);

    auto* synth = app.add_subcommand("synth", "Generate a synthetic cloud of known intrinsic dimension");
    synth->add_option("--kind", cfg.kind, "Manifold kind")
        ->required()
        ->check(CLI::IsMember({"helix", "hyperplane", "hypercube", "toy5"}));
    synth->add_option("--n", cfg.n_points, "Number of points");
    synth->add_option("--intrinsic-dim", cfg.intrinsic_dim, "Intrinsic dimension (hyperplane/hypercube)");
    synth->add_option("--ambient-dim", cfg.ambient_dim, "Ambient dimension (hyperplane/hypercube)");
    synth->add_option("--noise", cfg.noise, "Isotropic Gaussian noise sigma")->check(CLI::NonNegativeNumber);
    synth->add_option("--radius", cfg.radius, "Helix radius")->check(CLI::PositiveNumber);
    synth->add_option("--vertical-scale", cfg.vertical_scale, "Helix vertical scale")->check(CLI::PositiveNumber);
    synth->add_option("--t-min", cfg.t_min, "Helix parameter lower bound");
    synth->add_option("--t-max", cfg.t_max, "Helix parameter upper bound");
    synth->add_option("--format", cfg.format, "csv or ghs (default: from --out extension)")
        ->check(CLI::IsMember({"csv", "ghs"}));
    add_out(synth);

    auto* profile = app.add_subcommand("profile", "Intrinsic-dimension profile of every layer in a GHS1 file");
    profile->add_option("--input", cfg.input, "GHS1 hidden-state file")->required();
    add_common_fit(profile);
    profile->add_option("--max-points", cfg.max_points, "Seeded subsample cap per layer (0 = no cap)");
    profile->add_flag("--stability", cfg.with_stability, "Use the decimation plateau estimate per layer");
    profile->add_option("--scales", cfg.scales, "Decimation scales")->check(CLI::PositiveNumber);
    profile->add_option("--repeats", cfg.repeats, "Random subsets per scale")->check(CLI::PositiveNumber);
    profile->add_option("--pooling", cfg.pooling, "Expected pooling of the hidden states")->check(kPoolingCheck);
    profile->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    add_out(profile);

    auto* stability = app.add_subcommand("stability", "Decimation stability analysis of one point cloud");
    stability->add_option("--input", cfg.input, "CSV or GHS1 point cloud")->required();
    stability->add_option("--layer", cfg.layer, "Layer index when the input is GHS1");
    stability->add_option("--scales", cfg.scales, "Decimation scales")->check(CLI::PositiveNumber);
    stability->add_option("--repeats", cfg.repeats, "Random subsets per scale")->check(CLI::PositiveNumber);
    add_common_fit(stability);
    add_out(stability);

    auto* plan = app.add_subcommand("plan", "Per-block LoRA rank plan from a layer profile");
    plan->add_option("--profile", cfg.profile, "LayerProfile JSON")->required();
    plan->add_option("--offset", cfg.offset, "Rank offset added to every block")->check(CLI::NonNegativeNumber);
    plan->add_option("--alpha-ratio", cfg.alpha_ratio, "Constant alpha/rank ratio")->check(CLI::PositiveNumber);
    plan->add_option("--rounding", cfg.rounding, "Rounding of dimension growth")
        ->check(CLI::IsMember({"ceil", "nearest"}));
    plan->add_option("--blocks", cfg.blocks, "Expected number of blocks (0 = profile length - 1)");
    plan->add_option("--d-model", cfg.d_model, "Hidden size for square K/Q/V/O matrices")
        ->check(CLI::PositiveNumber);
    plan->add_option("--matrix", cfg.matrix_dims, "Override one role's dims, ROLE=INxOUT (repeatable)");
    add_out(plan);

    auto* diff = app.add_subcommand("diff", "Compare two layer profiles");
    diff->add_option("--before", cfg.before, "LayerProfile JSON before")->required();
    diff->add_option("--after", cfg.after, "LayerProfile JSON after")->required();
    add_out(diff);

    std::vector<const char*> argv{"idrank"};
    for (const auto& a : args) argv.push_back(a.c_str());
    cfg.json_errors = std::find(args.begin(), args.end(), "--json-errors") != args.end();

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        report(err, cfg.json_errors, "UsageError", e.what(), kExitUsage);
        err << app.help();
        return kExitUsage;
    }

    try {
        if (estimate->parsed()) run_estimate(cfg, out, err);
        else if (synth->parsed()) run_synth(cfg, out, *synth);
        else if (profile->parsed()) run_profile(cfg, out, err);
        else if (stability->parsed()) run_stability(cfg, out);
        else if (plan->parsed()) run_plan(cfg, out);
        else if (diff->parsed()) run_diff(cfg, out);
    } catch (const Error& e) {
        report(err, cfg.json_errors, e.code_name(), e.what(), kExitDataError);
        return kExitDataError;
    } catch (const std::exception& e) {
        report(err, cfg.json_errors, "InternalError", e.what(), kExitDataError);
        return kExitDataError;
    }
    return kExitOk;
}

}  // namespace idrank::cli
