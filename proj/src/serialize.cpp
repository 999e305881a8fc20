#include "idrank/serialize.hpp"

#include <fstream>
#include <sstream>

#include "idrank/error.hpp"
#include "json.hpp"

namespace idrank {

namespace {

using ojson = nlohmann::ordered_json;

ojson estimate_json(const IdEstimate& e) {
    ojson j;
    j["d_hat"] = e.d_hat;
    j["method"] = to_string(e.method);
    j["n_used"] = e.n_used;
    if (e.method == FitMethod::Regression) {
        j["discard_fraction"] = e.discard_fraction;
        if (e.residual) j["residual"] = *e.residual;
    }
    j["n_duplicates"] = e.n_duplicates;
    return j;
}

ojson stability_json(const StabilityReport& r) {
    ojson j;
    j["subset_sizes"] = r.subset_sizes;
    ojson per = ojson::array();
    for (const auto& s : r.estimates_per_size) per.push_back({{"mean", s.mean}, {"std", s.std}});
    j["estimates_per_size"] = per;
    j["selected_d"] = r.selected_d;
    j["plateau_found"] = r.plateau_found;
    j["seed"] = r.seed;
    return j;
}

ojson metadata_json(const HiddenStateMetadata& m) {
    return {{"model", m.model}, {"dataset", m.dataset}, {"pooling", m.pooling}, {"tags", m.tags}};
}

ojson parse(std::string_view text) {
    ojson j = ojson::parse(text.begin(), text.end(), nullptr, false);
    if (j.is_discarded()) fail(ErrorCode::FormatError, "invalid JSON document");
    if (!j.is_object()) fail(ErrorCode::FormatError, "expected a JSON object");
    return j;
}

// Typed field access; nlohmann type errors become FormatError.
template <typename T>
T field(const ojson& j, const char* key) {
    if (!j.contains(key)) fail(ErrorCode::FormatError, std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::FormatError, std::string("field '") + key + "': " + e.what());
    }
}

IdEstimate estimate_from(const ojson& j) {
    IdEstimate e;
    e.d_hat = field<double>(j, "d_hat");
    try {
        e.method = parse_fit_method(field<std::string>(j, "method"));
    } catch (const Error& err) {
        fail(ErrorCode::FormatError, err.what());
    }
    e.n_used = field<std::size_t>(j, "n_used");
    if (j.contains("discard_fraction")) e.discard_fraction = field<double>(j, "discard_fraction");
    if (j.contains("residual")) e.residual = field<double>(j, "residual");
    if (j.contains("n_duplicates")) e.n_duplicates = field<std::size_t>(j, "n_duplicates");
    return e;
}

StabilityReport stability_from(const ojson& j) {
    StabilityReport r;
    r.subset_sizes = field<std::vector<std::size_t>>(j, "subset_sizes");
    if (!j.contains("estimates_per_size") || !j["estimates_per_size"].is_array()) {
        fail(ErrorCode::FormatError, "missing array 'estimates_per_size'");
    }
    for (const auto& s : j["estimates_per_size"]) {
        r.estimates_per_size.push_back({field<double>(s, "mean"), field<double>(s, "std")});
    }
    if (r.estimates_per_size.size() != r.subset_sizes.size()) {
        fail(ErrorCode::FormatError, "estimates_per_size is not aligned with subset_sizes");
    }
    r.selected_d = field<double>(j, "selected_d");
    r.plateau_found = field<bool>(j, "plateau_found");
    r.seed = field<std::uint64_t>(j, "seed");
    return r;
}

}  // namespace

std::string to_json(const IdEstimate& estimate, int indent) { return estimate_json(estimate).dump(indent); }

std::string to_json(const StabilityReport& report, int indent) { return stability_json(report).dump(indent); }

std::string to_json(const LayerProfile& profile, int indent) {
    ojson j;
    j["d"] = profile.d;
    ojson diag = ojson::array();
    for (const auto& e : profile.diagnostics) diag.push_back(estimate_json(e));
    j["diagnostics"] = diag;
    if (profile.stability) {
        ojson st = ojson::array();
        for (const auto& r : *profile.stability) st.push_back(stability_json(r));
        j["stability"] = st;
    }
    j["mean_id"] = profile.mean_id;
    j["metadata"] = metadata_json(profile.metadata);
    return j.dump(indent);
}

std::string to_json(const ProfileDiff& diff, int indent) {
    ojson j;
    j["delta"] = diff.delta;
    j["mean_before"] = diff.mean_before;
    j["mean_after"] = diff.mean_after;
    j["mean_delta"] = diff.mean_delta;
    j["layers_compressed"] = diff.layers_compressed;
    return j.dump(indent);
}

std::string to_json(const RankPlan& plan, int indent) {
    ojson j;
    j["schema_version"] = RankPlan::kSchemaVersion;
    j["ranks"] = plan.ranks;
    j["alpha"] = plan.alpha;
    j["alpha_ratio"] = plan.alpha_ratio;
    j["offset"] = plan.offset;
    j["rounding_mode"] = to_string(plan.rounding_mode);
    j["total_trainable_params"] = plan.total_trainable_params;
    j["mean_rank"] = plan.mean_rank;
    j["rounded_mean_rank"] = plan.rounded_mean_rank;
    j["source_profile_digest"] = plan.source_profile_digest;
    ojson shape;
    shape["num_blocks"] = plan.shape.num_blocks;
    shape["d_model"] = plan.shape.d_model;
    ojson matrices;
    for (auto role : kMatrixRoles) {
        const auto& m = plan.shape.dims(role);
        matrices[std::string(to_string(role))] = {{"in_dim", m.in_dim}, {"out_dim", m.out_dim}};
    }
    shape["matrices"] = matrices;
    j["shape"] = shape;
    return j.dump(indent);
}

IdEstimate estimate_from_json(std::string_view text) { return estimate_from(parse(text)); }

StabilityReport stability_from_json(std::string_view text) { return stability_from(parse(text)); }

LayerProfile profile_from_json(std::string_view text) {
    const ojson j = parse(text);
    LayerProfile p;
    p.d = field<std::vector<double>>(j, "d");
    if (j.contains("diagnostics")) {
        for (const auto& e : j["diagnostics"]) p.diagnostics.push_back(estimate_from(e));
    }
    if (j.contains("stability")) {
        p.stability.emplace();
        for (const auto& r : j["stability"]) p.stability->push_back(stability_from(r));
    }
    if (j.contains("metadata")) {
        const auto& m = j["metadata"];
        if (m.contains("model")) p.metadata.model = field<std::string>(m, "model");
        if (m.contains("dataset")) p.metadata.dataset = field<std::string>(m, "dataset");
        if (m.contains("pooling")) p.metadata.pooling = field<std::string>(m, "pooling");
        if (m.contains("tags")) p.metadata.tags = field<std::vector<std::string>>(m, "tags");
    }
    p.mean_id = mean_of(p.d);
    return p;
}

RankPlan plan_from_json(std::string_view text) {
    const ojson j = parse(text);
    const int version = field<int>(j, "schema_version");
    if (version != RankPlan::kSchemaVersion) {
        fail(ErrorCode::FormatError, "unsupported plan schema_version " + std::to_string(version));
    }
    RankPlan plan;
    plan.ranks = field<std::vector<std::uint32_t>>(j, "ranks");
    plan.alpha = field<std::vector<double>>(j, "alpha");
    if (plan.alpha.size() != plan.ranks.size()) {
        fail(ErrorCode::FormatError, "'alpha' and 'ranks' differ in length");
    }
    plan.alpha_ratio = field<double>(j, "alpha_ratio");
    plan.offset = field<int>(j, "offset");
    try {
        plan.rounding_mode = parse_rounding(field<std::string>(j, "rounding_mode"));
    } catch (const Error& err) {
        fail(ErrorCode::FormatError, err.what());
    }
    plan.total_trainable_params = field<std::uint64_t>(j, "total_trainable_params");
    plan.mean_rank = field<double>(j, "mean_rank");
    plan.rounded_mean_rank = field<std::int64_t>(j, "rounded_mean_rank");
    plan.source_profile_digest = field<std::string>(j, "source_profile_digest");

    const auto& shape = j.contains("shape") ? j["shape"] : ojson::object();
    plan.shape.num_blocks = field<std::size_t>(shape, "num_blocks");
    plan.shape.d_model = field<std::size_t>(shape, "d_model");
    const auto& matrices = shape.contains("matrices") ? shape["matrices"] : ojson::object();
    for (auto role : kMatrixRoles) {
        const std::string key(to_string(role));
        if (!matrices.contains(key)) fail(ErrorCode::FormatError, "shape is missing matrix " + key);
        auto& m = plan.shape.matrices[static_cast<std::size_t>(role)];
        m.in_dim = field<std::size_t>(matrices[key], "in_dim");
        m.out_dim = field<std::size_t>(matrices[key], "out_dim");
    }
    return plan;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) fail(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

void emit_plan(const RankPlan& plan, const std::filesystem::path& path) {
    write_text_file(path, to_json(plan) + "\n");
}

RankPlan read_plan(const std::filesystem::path& path) { return plan_from_json(read_text_file(path)); }

}  // namespace idrank
