#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "idrank/cli.hpp"
#include "idrank/csv.hpp"
#include "idrank/ghs.hpp"
#include "idrank/serialize.hpp"
#include "json.hpp"

using namespace idrank;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch() {
    const auto dir = fs::temp_directory_path() / "idrank_cli_unit";
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("synth toy5 writes five rows") {
    const auto path = scratch() / "toy.csv";
    const auto r = run({"synth", "--kind", "toy5", "--out", path.string()});
    REQUIRE(r.code == 0);
    CHECK(read_text_file(path) == "0,0\n1,0\n2,0\n0,1\n2,2\n");
}

TEST_CASE("estimate on a helix") {
    const auto path = scratch() / "helix.csv";
    REQUIRE(run({"synth", "--kind", "helix", "--n", "2000", "--seed", "1", "--out", path.string()}).code == 0);
    const auto r = run({"estimate", "--input", path.string(), "--method", "mle"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["method"] == "mle");
    CHECK(j["d_hat"].get<double>() >= 0.9);
    CHECK(j["d_hat"].get<double>() <= 1.2);
}

TEST_CASE("emitted curve reproduces the regression slope") {
    const auto cloud = scratch() / "plane.csv";
    const auto curve = scratch() / "curve.csv";
    REQUIRE(run({"synth", "--kind", "hyperplane", "--n", "3000", "--intrinsic-dim", "3", "--out", cloud.string()}).code == 0);
    const auto r = run({"estimate", "--input", cloud.string(), "--method", "regression", "--emit-curve", curve.string()});
    REQUIRE(r.code == 0);
    const auto pts = parse_csv_cloud(read_text_file(curve));
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < pts.n_points(); ++i) {
        sxx += pts.point(i)[0] * pts.point(i)[0];
        sxy += pts.point(i)[0] * pts.point(i)[1];
    }
    const auto j = nlohmann::json::parse(r.out);
    CHECK(std::abs(sxy / sxx - j["d_hat"].get<double>()) < 1e-9);
    CHECK(pts.n_points() == j["n_used"].get<std::size_t>());
}

TEST_CASE("plan on a flat 13-entry profile") {
    const auto profile = scratch() / "flat.json";
    write_text_file(profile, to_json(LayerProfile::from_values(std::vector<double>(13, 9.0))));
    const auto r = run({"plan", "--profile", profile.string(), "--offset", "1", "--alpha-ratio", "32",
                        "--blocks", "12", "--d-model", "768"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["ranks"] == nlohmann::json(std::vector<int>(12, 1)));
    CHECK(j["total_trainable_params"] == 73728);
    CHECK(j["schema_version"] == 1);

    const auto mismatch = run({"plan", "--profile", profile.string(), "--blocks", "24"});
    CHECK(mismatch.code == 1);

    const auto custom = run({"plan", "--profile", profile.string(), "--matrix", "V=768x256"});
    REQUIRE(custom.code == 0);
    CHECK(nlohmann::json::parse(custom.out)["total_trainable_params"] == 12 * (3 * 1536 + 1024));
}

TEST_CASE("profile, stability and diff through GHS files") {
    const auto ghs = scratch() / "plane.ghs";
    REQUIRE(run({"synth", "--kind", "hyperplane", "--n", "1500", "--intrinsic-dim", "2", "--out", ghs.string()}).code == 0);
    CHECK(looks_like_ghs(ghs));

    const auto prof = scratch() / "prof.json";
    REQUIRE(run({"profile", "--input", ghs.string(), "--out", prof.string()}).code == 0);
    const auto p = profile_from_json(read_text_file(prof));
    REQUIRE(p.d.size() == 1);
    CHECK(std::abs(p.d[0] - 2.0) < 0.2);

    const auto csv = run({"profile", "--input", ghs.string(), "--format", "csv"});
    REQUIRE(csv.code == 0);
    CHECK(csv.out.starts_with("layer,d\n0,"));

    const auto st = run({"stability", "--input", ghs.string(), "--scales", "3", "--repeats", "2", "--seed", "4"});
    REQUIRE(st.code == 0);
    CHECK(stability_from_json(st.out).subset_sizes == std::vector<std::size_t>{1500, 750, 375});

    const auto d = run({"diff", "--before", prof.string(), "--after", prof.string()});
    REQUIRE(d.code == 0);
    CHECK(nlohmann::json::parse(d.out)["delta"] == nlohmann::json::array({0.0}));
}

TEST_CASE("outputs are byte-identical for identical inputs") {
    const auto path = scratch() / "cube.csv";
    REQUIRE(run({"synth", "--kind", "hypercube", "--n", "800", "--seed", "9", "--out", path.string()}).code == 0);
    const auto a = run({"stability", "--input", path.string(), "--seed", "3"});
    const auto b = run({"stability", "--input", path.string(), "--seed", "3"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(run({"synth", "--kind", "hypercube", "--n", "50", "--seed", "9"}).out ==
          run({"synth", "--kind", "hypercube", "--n", "50", "--seed", "9"}).out);
}

TEST_CASE("seed falls back to IDRANK_SEED") {
    ::setenv("IDRANK_SEED", "17", 1);
    const auto env = run({"synth", "--kind", "hyperplane", "--n", "20"});
    ::unsetenv("IDRANK_SEED");
    const auto flag = run({"synth", "--kind", "hyperplane", "--n", "20", "--seed", "17"});
    const auto none = run({"synth", "--kind", "hyperplane", "--n", "20"});
    CHECK(env.out == flag.out);
    CHECK(env.out != none.out);
}

TEST_CASE("usage errors exit 2, data errors exit 1") {
    CHECK(run({}).code == 2);
    CHECK(run({"estimate"}).code == 2);
    CHECK(run({"estimate", "--input", "x.csv", "--method", "ols"}).code == 2);
    CHECK(run({"estimate", "--input", "x.csv", "--discard-fraction", "1.0"}).code == 2);
    CHECK(run({"plan", "--profile", "p.json", "--offset", "-1"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);

    const auto missing = run({"--json-errors", "estimate", "--input", (scratch() / "nope.csv").string()});
    CHECK(missing.code == 1);
    const auto trimmed = missing.err.substr(0, missing.err.size() - 1);
    const auto last_line = trimmed.substr(trimmed.rfind('\n') + 1);
    const auto j = nlohmann::json::parse(last_line);
    CHECK(j["error"]["code"] == "IoError");
    CHECK(j["error"]["exit_code"] == 1);

    const auto tiny = scratch() / "tiny.csv";
    write_text_file(tiny, "0,0\n1,1\n");
    const auto few = run({"--json-errors", "estimate", "--input", tiny.string()});
    CHECK(few.code == 1);
    CHECK(few.err.find("\"TooFewPoints\"") != std::string::npos);

    const auto usage = run({"--json-errors", "estimate", "--bogus"});
    CHECK(usage.code == 2);
    CHECK(usage.err.find("\"UsageError\"") != std::string::npos);
}

TEST_CASE("help lists flags with their defaults") {
    const auto est = run({"estimate", "--help"});
    CHECK(est.code == 0);
    CHECK(est.out.find("--discard-fraction") != std::string::npos);
    CHECK(est.out.find("0.1") != std::string::npos);
    CHECK(est.out.find("mle") != std::string::npos);

    const auto plan = run({"plan", "--help"});
    CHECK(plan.out.find("--offset") != std::string::npos);
    CHECK(plan.out.find("32") != std::string::npos);
    CHECK(plan.out.find("ceil") != std::string::npos);

    const auto prof = run({"profile", "--help"});
    CHECK(prof.out.find("--pooling") != std::string::npos);
    CHECK(prof.out.find("mean") != std::string::npos);

    const auto all = run({"--help-all"});
    CHECK(all.code == 0);
    for (const char* sub : {"estimate", "synth", "profile", "stability", "plan", "diff"}) {
        CHECK(all.out.find(sub) != std::string::npos);
    }
}
