#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <map>
#include <optional>

#include "idrank/error.hpp"
#include "idrank/ghs.hpp"
#include "idrank/neighbors.hpp"
#include "idrank/planner.hpp"
#include "idrank/profile.hpp"
#include "idrank/serialize.hpp"
#include "idrank/stability.hpp"
#include "idrank/synth.hpp"
#include "idrank/twonn.hpp"

namespace py = pybind11;
using namespace idrank;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

PointCloud to_cloud(const DoubleArray& points) {
    if (points.ndim() != 2) throw py::value_error("points must be a 2-D array (n_points, ambient_dim)");
    const auto n = static_cast<std::size_t>(points.shape(0));
    const auto dim = static_cast<std::size_t>(points.shape(1));
    std::vector<double> data(points.data(), points.data() + n * dim);
    return PointCloud(dim, std::move(data));
}

DoubleArray to_array(const PointCloud& cloud) {
    DoubleArray out({cloud.n_points(), cloud.ambient_dim()});
    std::memcpy(out.mutable_data(), cloud.data().data(), cloud.data().size() * sizeof(double));
    return out;
}

template <typename T>
py::array_t<T> vector_array(const std::vector<T>& v) {
    return py::array_t<T>(static_cast<py::ssize_t>(v.size()), v.data());
}

EstimateOptions estimate_options(const std::string& method, double discard_fraction) {
    EstimateOptions o;
    o.method = parse_fit_method(method);
    o.discard_fraction = discard_fraction;
    return o;
}

SearchPath parse_search(const std::string& s) {
    if (s == "auto") return SearchPath::Auto;
    if (s == "kdtree") return SearchPath::KdTree;
    if (s == "brute") return SearchPath::BruteForce;
    throw py::value_error("search must be 'auto', 'kdtree' or 'brute'");
}

HiddenStateSet make_states(const std::vector<FloatArray>& layers, const HiddenStateMetadata& metadata) {
    HiddenStateSet states;
    states.metadata = metadata;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& a = layers[i];
        if (a.ndim() != 2) throw py::value_error("layer " + std::to_string(i) + " must be 2-D");
        const auto n = static_cast<std::uint32_t>(a.shape(0));
        if (i == 0) states.n_points = n;
        if (n != states.n_points) fail(ErrorCode::DimensionMismatch, "layer " + std::to_string(i) + " has a different number of points");
        HiddenLayer layer;
        layer.ambient_dim = static_cast<std::uint32_t>(a.shape(1));
        layer.values.assign(a.data(), a.data() + a.size());
        states.layers.push_back(std::move(layer));
    }
    states.validate();
    return states;
}

HiddenStateMetadata make_metadata(std::string model, std::string dataset, std::string pooling,
                                  std::vector<std::string> tags) {
    return {std::move(model), std::move(dataset), std::move(pooling), std::move(tags)};
}

py::dict metadata_dict(const HiddenStateMetadata& m) {
    py::dict d;
    d["model"] = m.model;
    d["dataset"] = m.dataset;
    d["pooling"] = m.pooling;
    d["tags"] = m.tags;
    return d;
}

ModelShape shape_for(std::size_t blocks, std::size_t d_model, const std::map<std::string, std::pair<std::size_t, std::size_t>>& matrices) {
    ModelShape shape = ModelShape::square(blocks, d_model);
    for (const auto& [name, dims] : matrices) {
        bool found = false;
        for (auto role : kMatrixRoles) {
            if (name == to_string(role)) {
                shape.matrices[static_cast<std::size_t>(role)] = {dims.first, dims.second};
                found = true;
            }
        }
        if (!found) throw py::value_error("unknown matrix role '" + name + "'");
    }
    return shape;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Intrinsic-dimension estimation and LoRA rank planning";

    static py::exception<Error> error(m, "IdrankError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object inst = py::reinterpret_borrow<py::object>(error.ptr())(py::str(e.what()));
            inst.attr("code") = py::str(std::string(e.code_name()));
            PyErr_SetObject(error.ptr(), inst.ptr());
        }
    });

    py::class_<IdEstimate>(m, "IdEstimate")
        .def_readonly("d_hat", &IdEstimate::d_hat)
        .def_property_readonly("method", [](const IdEstimate& e) { return std::string(to_string(e.method)); })
        .def_readonly("n_used", &IdEstimate::n_used)
        .def_readonly("discard_fraction", &IdEstimate::discard_fraction)
        .def_readonly("residual", &IdEstimate::residual)
        .def_readonly("n_duplicates", &IdEstimate::n_duplicates)
        .def("to_json", [](const IdEstimate& e, int indent) { return to_json(e, indent); }, py::arg("indent") = 2)
        .def("__repr__", [](const IdEstimate& e) { return "IdEstimate(" + to_json(e, -1) + ")"; });

    py::class_<ScaleEstimate>(m, "ScaleEstimate")
        .def_readonly("mean", &ScaleEstimate::mean)
        .def_readonly("std", &ScaleEstimate::std);

    py::class_<StabilityReport>(m, "StabilityReport")
        .def_readonly("subset_sizes", &StabilityReport::subset_sizes)
        .def_readonly("estimates_per_size", &StabilityReport::estimates_per_size)
        .def_readonly("selected_d", &StabilityReport::selected_d)
        .def_readonly("plateau_found", &StabilityReport::plateau_found)
        .def_readonly("seed", &StabilityReport::seed)
        .def("to_json", [](const StabilityReport& r, int indent) { return to_json(r, indent); },
             py::arg("indent") = 2)
        .def(py::self == py::self);

    py::class_<LayerProfile>(m, "LayerProfile")
        .def_readonly("d", &LayerProfile::d)
        .def_readonly("diagnostics", &LayerProfile::diagnostics)
        .def_readonly("stability", &LayerProfile::stability)
        .def_readonly("mean_id", &LayerProfile::mean_id)
        .def_property_readonly("metadata", [](const LayerProfile& p) { return metadata_dict(p.metadata); })
        .def("to_json", [](const LayerProfile& p, int indent) { return to_json(p, indent); },
             py::arg("indent") = 2);

    py::class_<RankPlan>(m, "RankPlan")
        .def_readonly("ranks", &RankPlan::ranks)
        .def_readonly("alpha", &RankPlan::alpha)
        .def_readonly("alpha_ratio", &RankPlan::alpha_ratio)
        .def_readonly("offset", &RankPlan::offset)
        .def_property_readonly("rounding_mode", [](const RankPlan& p) { return std::string(to_string(p.rounding_mode)); })
        .def_readonly("total_trainable_params", &RankPlan::total_trainable_params)
        .def_readonly("mean_rank", &RankPlan::mean_rank)
        .def_readonly("rounded_mean_rank", &RankPlan::rounded_mean_rank)
        .def_readonly("source_profile_digest", &RankPlan::source_profile_digest)
        .def("to_json", [](const RankPlan& p, int indent) { return to_json(p, indent); }, py::arg("indent") = 2)
        .def(py::self == py::self);

    m.def(
        "two_nearest",
        [](const DoubleArray& points, const std::string& search) {
            const NeighborStats s = two_nearest(to_cloud(points), parse_search(search));
            py::dict d;
            d["r1"] = vector_array(s.r1);
            d["r2"] = vector_array(s.r2);
            d["mu"] = vector_array(s.mu);
            d["kept_indices"] = vector_array(s.kept_indices);
            d["n_duplicates"] = s.n_duplicates;
            return d;
        },
        py::arg("points"), py::arg("search") = "auto",
        "Exact first and second neighbour distances after collapsing duplicates.");

    m.def(
        "fit_mle", [](const DoubleArray& mu) { return fit_mle({mu.data(), static_cast<std::size_t>(mu.size())}); },
        py::arg("mu"));
    m.def(
        "fit_regression",
        [](const DoubleArray& mu, double discard_fraction) {
            return fit_regression({mu.data(), static_cast<std::size_t>(mu.size())}, discard_fraction);
        },
        py::arg("mu"), py::arg("discard_fraction") = kDefaultDiscardFraction);

    m.def(
        "estimate_id",
        [](const DoubleArray& points, const std::string& method, double discard_fraction) {
            return estimate_id(to_cloud(points), estimate_options(method, discard_fraction));
        },
        py::arg("points"), py::arg("method") = "mle", py::arg("discard_fraction") = kDefaultDiscardFraction);

    m.def(
        "decimation_stability",
        [](const DoubleArray& points, std::size_t n_scales, std::size_t repeats, std::uint64_t seed,
           const std::string& method, double discard_fraction) {
            StabilityOptions o;
            o.n_scales = n_scales;
            o.repeats_per_scale = repeats;
            o.seed = seed;
            o.estimate = estimate_options(method, discard_fraction);
            return decimation_stability(to_cloud(points), o);
        },
        py::arg("points"), py::arg("n_scales") = 4, py::arg("repeats") = 5, py::arg("seed") = 0,
        py::arg("method") = "mle", py::arg("discard_fraction") = kDefaultDiscardFraction);

    m.def(
        "generate",
        [](const std::string& kind, std::size_t n_points, std::optional<std::size_t> intrinsic_dim,
           std::optional<std::size_t> ambient_dim, double noise, std::uint64_t seed) {
            ManifoldSpec spec;
            spec.kind = parse_manifold_kind(kind);
            if (spec.kind == ManifoldKind::Helix) spec = ManifoldSpec::helix(n_points, seed);
            if (spec.kind == ManifoldKind::Toy5) spec = ManifoldSpec::toy5();
            spec.n_points = n_points;
            spec.seed = seed;
            spec.noise_sigma = noise;
            if (intrinsic_dim) spec.intrinsic_dim = *intrinsic_dim;
            if (ambient_dim) spec.ambient_dim = *ambient_dim;
            return to_array(generate(spec));
        },
        py::arg("kind"), py::arg("n_points") = 1000, py::arg("intrinsic_dim") = py::none(),
        py::arg("ambient_dim") = py::none(), py::arg("noise") = 0.0, py::arg("seed") = 0,
        "Synthetic cloud: 'helix', 'hyperplane', 'hypercube' or 'toy5'.");

    m.def(
        "write_ghs",
        [](const std::filesystem::path& path, const std::vector<FloatArray>& layers, std::string model,
           std::string dataset, std::string pooling, std::vector<std::string> tags) {
            write_ghs(path, make_states(layers, make_metadata(std::move(model), std::move(dataset),
                                                              std::move(pooling), std::move(tags))));
        },
        py::arg("path"), py::arg("layers"), py::arg("model") = "", py::arg("dataset") = "",
        py::arg("pooling") = "", py::arg("tags") = std::vector<std::string>{});

    m.def(
        "read_ghs",
        [](const std::filesystem::path& path) {
            const HiddenStateSet s = read_ghs(path);
            py::list layers;
            for (const auto& l : s.layers) {
                py::array_t<float> a({static_cast<std::size_t>(s.n_points), static_cast<std::size_t>(l.ambient_dim)});
                std::memcpy(a.mutable_data(), l.values.data(), l.values.size() * sizeof(float));
                layers.append(a);
            }
            py::dict d;
            d["n_points"] = s.n_points;
            d["layers"] = layers;
            d["metadata"] = metadata_dict(s.metadata);
            return d;
        },
        py::arg("path"), "Returns {'n_points', 'layers' (float32 arrays), 'metadata'}.");

    m.def(
        "compute_profile",
        [](const py::object& source, const std::string& method, double discard_fraction, std::size_t max_points,
           std::uint64_t seed, bool stability, std::size_t n_scales, std::size_t repeats) {
            HiddenStateSet states;
            if (py::isinstance<py::str>(source) || py::hasattr(source, "__fspath__")) {
                states = read_ghs(source.cast<std::filesystem::path>());
            } else {
                states = make_states(source.cast<std::vector<FloatArray>>(), {});
            }
            ProfileOptions o;
            o.estimate = estimate_options(method, discard_fraction);
            o.max_points = max_points;
            o.seed = seed;
            o.with_stability = stability;
            o.n_scales = n_scales;
            o.repeats_per_scale = repeats;
            return compute_profile(states, o);
        },
        py::arg("source"), py::arg("method") = "mle", py::arg("discard_fraction") = kDefaultDiscardFraction,
        py::arg("max_points") = kDefaultMaxPoints, py::arg("seed") = 0, py::arg("stability") = false,
        py::arg("n_scales") = 4, py::arg("repeats") = 5,
        "Profile of a GHS1 file path or of a list of (n_points, dim) layer arrays.");

    m.def("profile_from_values", [](std::vector<double> d) { return LayerProfile::from_values(std::move(d)); },
          py::arg("d"));
    m.def("profile_from_json", [](const std::string& text) { return profile_from_json(text); }, py::arg("text"));

    m.def(
        "profile_diff",
        [](const std::vector<double>& before, const std::vector<double>& after) {
            const ProfileDiff diff = profile_diff(LayerProfile::from_values(before), LayerProfile::from_values(after));
            py::dict d;
            d["delta"] = diff.delta;
            d["mean_before"] = diff.mean_before;
            d["mean_after"] = diff.mean_after;
            d["mean_delta"] = diff.mean_delta;
            d["layers_compressed"] = diff.layers_compressed;
            return d;
        },
        py::arg("before"), py::arg("after"));

    m.def(
        "compute_ranks",
        [](const std::vector<double>& d, int offset, const std::string& rounding) {
            return compute_ranks(d, offset, parse_rounding(rounding));
        },
        py::arg("d"), py::arg("offset") = kDefaultOffset, py::arg("rounding") = "ceil");

    m.def(
        "make_plan",
        [](const std::vector<std::uint32_t>& ranks, double alpha_ratio, std::size_t d_model,
           const std::map<std::string, std::pair<std::size_t, std::size_t>>& matrices) {
            return make_plan(ranks, alpha_ratio, shape_for(ranks.size(), d_model, matrices));
        },
        py::arg("ranks"), py::arg("alpha_ratio") = kDefaultAlphaRatio, py::arg("d_model") = 768,
        py::arg("matrices") = std::map<std::string, std::pair<std::size_t, std::size_t>>{});

    m.def(
        "plan_from_profile",
        [](const std::vector<double>& d, int offset, const std::string& rounding, double alpha_ratio,
           std::size_t d_model, const std::map<std::string, std::pair<std::size_t, std::size_t>>& matrices) {
            if (d.size() < 2) fail(ErrorCode::LengthMismatch, "profile needs at least 2 entries");
            PlanOptions o;
            o.offset = offset;
            o.rounding = parse_rounding(rounding);
            o.alpha_ratio = alpha_ratio;
            return plan_from_profile(LayerProfile::from_values(d), shape_for(d.size() - 1, d_model, matrices), o);
        },
        py::arg("d"), py::arg("offset") = kDefaultOffset, py::arg("rounding") = "ceil",
        py::arg("alpha_ratio") = kDefaultAlphaRatio, py::arg("d_model") = 768,
        py::arg("matrices") = std::map<std::string, std::pair<std::size_t, std::size_t>>{});

    m.def("plan_from_json", [](const std::string& text) { return plan_from_json(text); }, py::arg("text"));
}
