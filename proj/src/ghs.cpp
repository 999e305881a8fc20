#include "idrank/ghs.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "idrank/error.hpp"
#include "json.hpp"

namespace idrank {

namespace {

constexpr char kMagic[4] = {'G', 'H', 'S', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t remaining() const { return bytes_.size() - pos_; }

    std::uint32_t u32(const std::string& what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

    std::span<const std::uint8_t> take(std::size_t n, const std::string& what) {
        need(n, what);
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    void need(std::size_t n, const std::string& what) const {
        if (remaining() < n) {
            fail(ErrorCode::FormatError, "GHS1: truncated " + what + " (need " + std::to_string(n) +
                                             " bytes, " + std::to_string(remaining()) + " left)");
        }
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

std::string metadata_json(const HiddenStateMetadata& meta) {
    nlohmann::ordered_json j;
    j["model"] = meta.model;
    j["dataset"] = meta.dataset;
    j["pooling"] = meta.pooling;
    j["tags"] = meta.tags;
    return j.dump();
}

HiddenStateMetadata parse_metadata(std::span<const std::uint8_t> raw) {
    HiddenStateMetadata meta;
    if (raw.empty()) return meta;
    nlohmann::json j = nlohmann::json::parse(raw.begin(), raw.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        fail(ErrorCode::FormatError, "GHS1: metadata is not a JSON object");
    }
    auto text = [&](const char* key) -> std::string {
        if (!j.contains(key) || j[key].is_null()) return {};
        if (!j[key].is_string()) fail(ErrorCode::FormatError, std::string("GHS1: metadata '") + key + "' is not a string");
        return j[key].get<std::string>();
    };
    meta.model = text("model");
    meta.dataset = text("dataset");
    meta.pooling = text("pooling");
    if (j.contains("tags")) {
        if (!j["tags"].is_array()) fail(ErrorCode::FormatError, "GHS1: metadata 'tags' is not an array");
        for (const auto& t : j["tags"]) {
            if (!t.is_string()) fail(ErrorCode::FormatError, "GHS1: metadata tag is not a string");
            meta.tags.push_back(t.get<std::string>());
        }
    }
    return meta;
}

}  // namespace

PointCloud HiddenStateSet::layer_cloud(std::size_t i) const {
    if (i >= layers.size()) {
        fail(ErrorCode::LengthMismatch, "layer index " + std::to_string(i) + " out of range (" +
                                            std::to_string(layers.size()) + " layers)");
    }
    const auto& layer = layers[i];
    return PointCloud(layer.ambient_dim, std::vector<double>(layer.values.begin(), layer.values.end()));
}

void HiddenStateSet::validate() const {
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& layer = layers[i];
        if (layer.ambient_dim == 0) {
            fail(ErrorCode::DimensionMismatch, "layer " + std::to_string(i) + " has ambient_dim 0");
        }
        const std::size_t expected = std::size_t{n_points} * layer.ambient_dim;
        if (layer.values.size() != expected) {
            fail(ErrorCode::DimensionMismatch,
                 "layer " + std::to_string(i) + " holds " + std::to_string(layer.values.size()) +
                     " values, expected n_points x ambient_dim = " + std::to_string(expected));
        }
    }
}

std::vector<std::uint8_t> encode_ghs(const HiddenStateSet& states) {
    states.validate();
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    out.push_back(kGhsVersion);
    out.push_back(0);  // flags
    out.push_back(0);  // reserved
    out.push_back(0);
    put_u32(out, static_cast<std::uint32_t>(states.layers.size()));
    put_u32(out, states.n_points);
    for (const auto& layer : states.layers) {
        put_u32(out, layer.ambient_dim);
        for (float v : layer.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
    const std::string meta = metadata_json(states.metadata);
    put_u32(out, static_cast<std::uint32_t>(meta.size()));
    out.insert(out.end(), meta.begin(), meta.end());
    return out;
}

HiddenStateSet decode_ghs(std::span<const std::uint8_t> bytes) {
    Reader in(bytes);
    const auto magic = in.take(4, "header");
    if (std::memcmp(magic.data(), kMagic, 4) != 0) {
        fail(ErrorCode::FormatError, "GHS1: bad magic '" + std::string(magic.begin(), magic.end()) + "'");
    }
    const auto head = in.take(4, "header");
    if (head[0] != kGhsVersion) {
        fail(ErrorCode::FormatError, "GHS1: unsupported version " + std::to_string(head[0]));
    }
    if (head[1] != 0 || head[2] != 0 || head[3] != 0) {
        fail(ErrorCode::FormatError, "GHS1: nonzero flags/reserved bytes");
    }

    HiddenStateSet states;
    const std::uint32_t num_layers = in.u32("header");
    states.n_points = in.u32("header");
    states.layers.reserve(std::min<std::size_t>(num_layers, in.remaining() / 4));

    for (std::uint32_t i = 0; i < num_layers; ++i) {
        const std::string label = "layer " + std::to_string(i);
        HiddenLayer layer;
        layer.ambient_dim = in.u32(label + " ambient_dim");
        if (layer.ambient_dim == 0) {
            fail(ErrorCode::DimensionMismatch, "GHS1: " + label + " has ambient_dim 0");
        }
        const std::uint64_t count = std::uint64_t{states.n_points} * layer.ambient_dim;
        if (count > in.remaining() / 4) {
            fail(ErrorCode::FormatError,
                 "GHS1: " + label + " payload truncated (need " + std::to_string(count) +
                     " float32 values, " + std::to_string(in.remaining() / 4) + " available)");
        }
        const auto raw = in.take(static_cast<std::size_t>(count) * 4, label + " payload");
        layer.values.resize(static_cast<std::size_t>(count));
        for (std::size_t k = 0; k < layer.values.size(); ++k) {
            std::uint32_t bits = 0;
            for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(raw[4 * k + b]) << (8 * b);
            layer.values[k] = std::bit_cast<float>(bits);
        }
        states.layers.push_back(std::move(layer));
    }

    // A short or long layer payload shifts the metadata block; the declared
    // metadata length must account for exactly the bytes left.
    const std::string last = num_layers ? "layer " + std::to_string(num_layers - 1) : "header";
    if (in.remaining() < 4) {
        fail(ErrorCode::FormatError, "GHS1: file ends inside " + last +
                                         " payload or before the metadata length");
    }
    const std::uint32_t meta_len = in.u32("metadata length");
    if (meta_len != in.remaining()) {
        fail(ErrorCode::FormatError,
             "GHS1: " + last + " payload length is inconsistent with the file size (metadata declares " +
                 std::to_string(meta_len) + " bytes, " + std::to_string(in.remaining()) + " remain)");
    }
    states.metadata = parse_metadata(in.take(meta_len, "metadata"));
    return states;
}

void write_ghs(const std::filesystem::path& path, const HiddenStateSet& states) {
    const auto bytes = encode_ghs(states);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

HiddenStateSet read_ghs(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_ghs(bytes);
}

bool looks_like_ghs(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    char magic[4] = {};
    return in.read(magic, 4) && std::memcmp(magic, kMagic, 4) == 0;
}

}  // namespace idrank
