#include "soscal/container.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

// Payloads are written with memcpy semantics, so a little-endian host is
// assumed; that matches every deployment target of this project.
static_assert(std::endian::native == std::endian::little,
              "container payload I/O requires a little-endian host");

namespace soscal {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kMagic = "SOSCAL";
constexpr int kVersion = 1;

json header_base(const char* kind, std::initializer_list<int> shape) {
    json h;
    h["magic"] = kMagic;
    h["version"] = kVersion;
    h["kind"] = kind;
    h["dtype"] = "f32le";
    h["shape"] = std::vector<int>(shape);
    return h;
}

void write_container(const std::string& path, const json& header,
                     const std::vector<float>& payload) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    const std::string line = header.dump();
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
    out.put('\n');
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(float)));
    if (!out) throw IoError("write failed: " + path);
}

struct Loaded {
    json header;
    std::vector<float> payload;
};

Loaded read_container(const std::string& path, const char* expected_kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("missing container header: " + path);

    json header;
    try {
        header = json::parse(line);
    } catch (const json::parse_error& e) {
        throw IoError("bad container header in " + path + ": " + e.what());
    }
    if (header.value("magic", "") != kMagic)
        throw IoError("not a container file (bad magic): " + path);
    if (header.value("version", -1) != kVersion)
        throw IoError("unsupported container version in " + path);
    if (header.value("dtype", "") != "f32le")
        throw IoError("unsupported dtype in " + path);
    if (header.value("kind", "") != expected_kind)
        throw IoError("expected kind '" + std::string(expected_kind) + "' but got '" +
                      header.value("kind", "") + "' in " + path);

    size_t count = 1;
    for (const auto& d : header.at("shape")) {
        const int64_t v = d.get<int64_t>();
        if (v < 1) throw IoError("bad shape in " + path);
        count *= static_cast<size_t>(v);
    }
    std::vector<float> payload(count);
    in.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(count * sizeof(float)));
    if (static_cast<size_t>(in.gcount()) != count * sizeof(float))
        throw IoError("truncated payload in " + path);
    if (in.peek() != EOF) throw IoError("trailing bytes after payload in " + path);
    return {std::move(header), std::move(payload)};
}

json grid_to_json(const ImageGrid& g) {
    json j;
    j["n_x"] = g.n_x;
    j["n_z"] = g.n_z;
    j["x_min"] = g.x_min;
    j["x_max"] = g.x_max;
    j["z_min"] = g.z_min;
    j["z_max"] = g.z_max;
    return j;
}

ImageGrid grid_from_json(const json& j) {
    return ImageGrid(j.at("n_x").get<int>(), j.at("n_z").get<int>(),
                     j.at("x_min").get<double>(), j.at("x_max").get<double>(),
                     j.at("z_min").get<double>(), j.at("z_max").get<double>());
}

// Narrow contract: the reader rethrows model validation failures as IoError so
// corrupt files never surface as config errors.
template <typename F>
auto as_io_error(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const ConfigError& e) {
        throw IoError("invalid content in " + path + ": " + e.what());
    }
}

}  // namespace

void write_rf_container(const std::string& path, const RFChannelData& rf,
                        std::optional<double> true_sos) {
    json h = header_base("rf_channel_data", {rf.n_tx, rf.n_elements, rf.n_samples});
    h["sampling_frequency"] = rf.sampling_frequency;
    h["t0"] = rf.t0;
    h["probe"] = {{"element_count", rf.probe.element_count},
                  {"pitch", rf.probe.pitch},
                  {"center_frequency", rf.probe.center_frequency}};
    json events = json::array();
    for (const TxEvent& ev : rf.tx_events) {
        events.push_back({{"vs_x", ev.vs_x},
                          {"vs_z", ev.vs_z},
                          {"aperture_center_element", ev.aperture_center_element},
                          {"aperture_size", ev.aperture_size}});
    }
    h["tx_events"] = std::move(events);
    if (true_sos) h["true_sos"] = *true_sos;
    write_container(path, h, rf.samples);
}

LoadedRf read_rf_container(const std::string& path) {
    Loaded c = read_container(path, "rf_channel_data");
    return as_io_error(path, [&]() -> LoadedRf {
        const json& h = c.header;
        const json& p = h.at("probe");
        ProbeGeometry probe(p.at("element_count").get<int>(),
                            p.at("pitch").get<double>(),
                            p.at("center_frequency").get<double>());
        std::vector<TxEvent> events;
        for (const auto& e : h.at("tx_events")) {
            events.push_back(TxEvent{e.at("vs_x").get<double>(),
                                     e.at("vs_z").get<double>(),
                                     e.at("aperture_center_element").get<int>(),
                                     e.at("aperture_size").get<int>()});
        }
        RFChannelData rf(h.at("shape")[0].get<int>(), h.at("shape")[1].get<int>(),
                         h.at("shape")[2].get<int>(),
                         h.at("sampling_frequency").get<double>(),
                         h.at("t0").get<double>(), std::move(probe),
                         std::move(events), std::move(c.payload));
        std::optional<double> true_sos;
        if (h.contains("true_sos")) true_sos = h.at("true_sos").get<double>();
        return LoadedRf{std::move(rf), true_sos};
    });
}

void write_rf_image(const std::string& path, const RFImage& img) {
    json h = header_base("rf_image", {img.grid.n_x, img.grid.n_z});
    h["grid"] = grid_to_json(img.grid);
    h["beamform_sos"] = img.beamform_sos;
    h["tx_index"] = img.tx_index;
    write_container(path, h, img.values);
}

RFImage read_rf_image(const std::string& path) {
    Loaded c = read_container(path, "rf_image");
    return as_io_error(path, [&] {
        return RFImage(grid_from_json(c.header.at("grid")),
                       c.header.at("beamform_sos").get<double>(),
                       c.header.at("tx_index").get<int>(), std::move(c.payload));
    });
}

void write_envelope_image(const std::string& path, const EnvelopeImage& img) {
    json h = header_base("envelope_image", {img.grid.n_x, img.grid.n_z});
    h["grid"] = grid_to_json(img.grid);
    h["beamform_sos"] = img.beamform_sos;
    write_container(path, h, img.values);
}

EnvelopeImage read_envelope_image(const std::string& path) {
    Loaded c = read_container(path, "envelope_image");
    return as_io_error(path, [&] {
        return EnvelopeImage(grid_from_json(c.header.at("grid")),
                             c.header.at("beamform_sos").get<double>(),
                             std::move(c.payload));
    });
}

void write_bmode_image(const std::string& path, const BModeImage& img) {
    json h = header_base("bmode_image", {img.grid.n_x, img.grid.n_z});
    h["grid"] = grid_to_json(img.grid);
    h["beamform_sos"] = img.beamform_sos;
    h["dynamic_range"] = img.dynamic_range;
    write_container(path, h, img.values);
}

BModeImage read_bmode_image(const std::string& path) {
    Loaded c = read_container(path, "bmode_image");
    return as_io_error(path, [&] {
        return BModeImage(grid_from_json(c.header.at("grid")),
                          c.header.at("beamform_sos").get<double>(),
                          c.header.at("dynamic_range").get<double>(),
                          std::move(c.payload));
    });
}

namespace {

void write_pgm_bytes(const std::string& path, int n_x, int n_z,
                     const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    // rows = depth, columns = lateral
    out << "P5\n" << n_x << " " << n_z << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace

void write_pgm(const std::string& path, const BModeImage& img) {
    std::vector<uint8_t> bytes(img.grid.pixel_count());
    size_t k = 0;
    for (int iz = 0; iz < img.grid.n_z; ++iz) {
        for (int ix = 0; ix < img.grid.n_x; ++ix) {
            const double u = (img.value(ix, iz) + img.dynamic_range) / img.dynamic_range;
            bytes[k++] = static_cast<uint8_t>(std::lround(255.0 * std::min(std::max(u, 0.0), 1.0)));
        }
    }
    write_pgm_bytes(path, img.grid.n_x, img.grid.n_z, bytes);
}

void write_pgm(const std::string& path, const EnvelopeImage& img) {
    float peak = 0.0f;
    for (float v : img.values) peak = std::max(peak, v);
    const double scale = peak > 0.0f ? 255.0 / peak : 0.0;
    std::vector<uint8_t> bytes(img.grid.pixel_count());
    size_t k = 0;
    for (int iz = 0; iz < img.grid.n_z; ++iz) {
        for (int ix = 0; ix < img.grid.n_x; ++ix)
            bytes[k++] = static_cast<uint8_t>(std::lround(img.value(ix, iz) * scale));
    }
    write_pgm_bytes(path, img.grid.n_x, img.grid.n_z, bytes);
}

}  // namespace soscal
