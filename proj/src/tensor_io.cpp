// SPDX-License-Identifier: Apache-2.0

#include "graspkp/tensor_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace graspkp {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::array<char, 4> kMagic = {'G', 'K', 'T', 'B'};
// Refuse absurd headers before allocating for them.
constexpr std::uint32_t kMaxHeaderBytes = 1u << 20;

std::uint32_t load_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_u32_le(std::uint32_t v, unsigned char* p) {
    p[0] = static_cast<unsigned char>(v & 0xffu);
    p[1] = static_cast<unsigned char>((v >> 8) & 0xffu);
    p[2] = static_cast<unsigned char>((v >> 16) & 0xffu);
    p[3] = static_cast<unsigned char>((v >> 24) & 0xffu);
}

void write_floats_le(const std::vector<float>& values, std::ostream& out) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(values.data()),
                  static_cast<std::streamsize>(values.size() * sizeof(float)));
    } else {
        std::vector<unsigned char> buf(values.size() * 4);
        for (std::size_t i = 0; i < values.size(); ++i) {
            store_u32_le(std::bit_cast<std::uint32_t>(values[i]), buf.data() + 4 * i);
        }
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    }
}

void check_plane_shape(const Grid2D& plane, int height, int width, const std::string& name) {
    if (plane.height() != height || plane.width() != width) {
        throw FormatError(FormatErrc::dimension_mismatch, name,
                          "plane '" + name + "' is " + std::to_string(plane.height()) + "x" +
                              std::to_string(plane.width()) + ", expected " +
                              std::to_string(height) + "x" + std::to_string(width));
    }
}

int header_int(const ordered_json& header, const char* key) {
    auto it = header.find(key);
    if (it == header.end() || !it->is_number_integer()) {
        throw FormatError(FormatErrc::bad_header, "",
                          std::string("header field '") + key + "' missing or not an integer");
    }
    return it->get<int>();
}

void check_range(const std::vector<Grid2D>& planes, const std::string& name, bool halfOpen) {
    for (const auto& plane : planes) {
        for (float v : plane.data()) {
            if (!std::isfinite(v)) {
                throw FormatError(FormatErrc::non_finite, name,
                                  "non-finite value in plane '" + name + "'");
            }
            const bool ok = halfOpen ? (v >= 0.0f && v < 1.0f) : (v >= 0.0f && v <= 1.0f);
            if (!ok) {
                throw FormatError(FormatErrc::out_of_range, name,
                                  "value " + std::to_string(v) + " outside " +
                                      (halfOpen ? "[0,1)" : "[0,1]") + " in plane '" + name + "'");
            }
        }
    }
}

void check_finite(const Grid2D& plane, const std::string& name) {
    for (float v : plane.data()) {
        if (!std::isfinite(v)) {
            throw FormatError(FormatErrc::non_finite, name, "non-finite value in plane '" + name + "'");
        }
    }
}

void check_count(const std::vector<Grid2D>& planes, std::size_t expected, const std::string& name) {
    if (planes.size() != expected) {
        throw FormatError(FormatErrc::dimension_mismatch, name,
                          "plane group '" + name + "' has " + std::to_string(planes.size()) +
                              " planes, expected " + std::to_string(expected));
    }
}

}  // namespace

Grid2D::Grid2D(int height, int width, float fill)
    : height_(height), width_(width),
      data_(static_cast<std::size_t>(std::max(height, 0)) * static_cast<std::size_t>(std::max(width, 0)), fill) {
    if (height <= 0 || width <= 0) {
        throw std::invalid_argument("Grid2D dimensions must be positive");
    }
}

Grid2D::Grid2D(int height, int width, std::vector<float> data)
    : height_(height), width_(width), data_(std::move(data)) {
    if (height <= 0 || width <= 0) {
        throw std::invalid_argument("Grid2D dimensions must be positive");
    }
    if (data_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
        throw std::invalid_argument("Grid2D data length does not match height*width");
    }
}

HeatmapBundle HeatmapBundle::zeros(int numClasses, int height, int width, int downsampleRatio) {
    if (numClasses <= 0 || downsampleRatio <= 0) {
        throw std::invalid_argument("bundle needs positive class count and downsample ratio");
    }
    HeatmapBundle b;
    b.numClasses = numClasses;
    b.downsampleRatio = downsampleRatio;
    const Grid2D zero(height, width);
    b.left.assign(static_cast<std::size_t>(numClasses), zero);
    b.right.assign(static_cast<std::size_t>(numClasses), zero);
    b.center = zero;
    b.offsetL.assign(2, zero);
    b.offsetR.assign(2, zero);
    b.embedL = zero;
    b.embedR = zero;
    return b;
}

const char* to_string(FormatErrc code) {
    switch (code) {
        case FormatErrc::io: return "io";
        case FormatErrc::bad_magic: return "bad_magic";
        case FormatErrc::bad_version: return "bad_version";
        case FormatErrc::bad_header: return "bad_header";
        case FormatErrc::length_mismatch: return "length_mismatch";
        case FormatErrc::dimension_mismatch: return "dimension_mismatch";
        case FormatErrc::non_finite: return "non_finite";
        case FormatErrc::out_of_range: return "out_of_range";
    }
    return "unknown";
}

FormatError::FormatError(FormatErrc code, std::string plane, const std::string& what)
    : std::runtime_error(std::string("GKTB ") + to_string(code) + ": " + what),
      code_(code), plane_(std::move(plane)) {}

const PlaneGroup* PlaneFile::find(const std::string& name) const {
    for (const auto& g : groups) {
        if (g.name == name) return &g;
    }
    return nullptr;
}

std::size_t write_planes(const PlaneFile& file, std::ostream& out) {
    ordered_json header;
    header["num_classes"] = file.numClasses;
    header["height"] = file.height;
    header["width"] = file.width;
    header["downsample_ratio"] = file.downsampleRatio;
    header["planes"] = ordered_json::array();
    for (const auto& group : file.groups) {
        for (const auto& plane : group.planes) {
            check_plane_shape(plane, file.height, file.width, group.name);
        }
        header["planes"].push_back({{"name", group.name}, {"count", group.planes.size()}});
    }
    const std::string text = header.dump();

    unsigned char prefix[9];
    std::memcpy(prefix, kMagic.data(), 4);
    prefix[4] = kGktbVersion;
    store_u32_le(static_cast<std::uint32_t>(text.size()), prefix + 5);
    out.write(reinterpret_cast<const char*>(prefix), sizeof prefix);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));

    std::size_t bytes = sizeof prefix + text.size();
    for (const auto& group : file.groups) {
        for (const auto& plane : group.planes) {
            write_floats_le(plane.data(), out);
            bytes += plane.size() * sizeof(float);
        }
    }
    if (!out) {
        throw FormatError(FormatErrc::io, "", "failed writing GKTB stream");
    }
    return bytes;
}

PlaneFile read_planes(std::istream& in) {
    unsigned char prefix[9];
    in.read(reinterpret_cast<char*>(prefix), sizeof prefix);
    if (in.gcount() != static_cast<std::streamsize>(sizeof prefix)) {
        throw FormatError(FormatErrc::length_mismatch, "", "stream shorter than the fixed prefix");
    }
    if (std::memcmp(prefix, kMagic.data(), 4) != 0) {
        throw FormatError(FormatErrc::bad_magic, "", "magic is not 'GKTB'");
    }
    if (prefix[4] != kGktbVersion) {
        throw FormatError(FormatErrc::bad_version, "",
                          "unsupported version " + std::to_string(prefix[4]));
    }
    const std::uint32_t headerLen = load_u32_le(prefix + 5);
    if (headerLen == 0 || headerLen > kMaxHeaderBytes) {
        throw FormatError(FormatErrc::bad_header, "", "implausible header length");
    }
    std::string text(headerLen, '\0');
    in.read(text.data(), headerLen);
    if (in.gcount() != static_cast<std::streamsize>(headerLen)) {
        throw FormatError(FormatErrc::length_mismatch, "", "header truncated");
    }

    ordered_json header;
    try {
        header = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(FormatErrc::bad_header, "", std::string("header is not JSON: ") + e.what());
    }
    if (!header.is_object()) {
        throw FormatError(FormatErrc::bad_header, "", "header is not a JSON object");
    }

    PlaneFile file;
    file.numClasses = header_int(header, "num_classes");
    file.height = header_int(header, "height");
    file.width = header_int(header, "width");
    file.downsampleRatio = header_int(header, "downsample_ratio");
    if (file.height <= 0 || file.width <= 0) {
        throw FormatError(FormatErrc::dimension_mismatch, "", "non-positive plane dimensions");
    }
    auto planes = header.find("planes");
    if (planes == header.end() || !planes->is_array()) {
        throw FormatError(FormatErrc::bad_header, "", "header field 'planes' missing");
    }

    const std::size_t planeSize = static_cast<std::size_t>(file.height) * static_cast<std::size_t>(file.width);
    for (const auto& entry : *planes) {
        if (!entry.is_object() || !entry.contains("name") || !entry["name"].is_string() ||
            !entry.contains("count") || !entry["count"].is_number_integer() ||
            entry["count"].get<long long>() < 0) {
            throw FormatError(FormatErrc::bad_header, "", "malformed entry in 'planes'");
        }
        PlaneGroup group;
        group.name = entry["name"].get<std::string>();
        const auto count = entry["count"].get<std::size_t>();
        for (std::size_t p = 0; p < count; ++p) {
            std::vector<unsigned char> raw(planeSize * 4);
            in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
            if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
                throw FormatError(FormatErrc::length_mismatch, group.name,
                                  "payload truncated in plane '" + group.name + "'");
            }
            std::vector<float> values(planeSize);
            for (std::size_t i = 0; i < planeSize; ++i) {
                values[i] = std::bit_cast<float>(load_u32_le(raw.data() + 4 * i));
            }
            Grid2D grid(file.height, file.width, std::move(values));
            check_finite(grid, group.name);
            group.planes.push_back(std::move(grid));
        }
        file.groups.push_back(std::move(group));
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw FormatError(FormatErrc::length_mismatch, "", "trailing bytes after declared payload");
    }
    return file;
}

PlaneFile to_plane_file(const HeatmapBundle& bundle) {
    PlaneFile file;
    file.numClasses = bundle.numClasses;
    file.height = bundle.height();
    file.width = bundle.width();
    file.downsampleRatio = bundle.downsampleRatio;
    file.groups = {
        {"left", bundle.left},
        {"right", bundle.right},
        {"center", {bundle.center}},
        {"offsetL", bundle.offsetL},
        {"offsetR", bundle.offsetR},
        {"embedL", {bundle.embedL}},
        {"embedR", {bundle.embedR}},
    };
    return file;
}

HeatmapBundle to_bundle(PlaneFile file) {
    static const char* const kOrder[] = {"left", "right", "center", "offsetL", "offsetR", "embedL", "embedR"};
    if (file.groups.size() != std::size(kOrder)) {
        throw FormatError(FormatErrc::bad_header, "",
                          "expected 7 plane groups, found " + std::to_string(file.groups.size()));
    }
    for (std::size_t i = 0; i < std::size(kOrder); ++i) {
        if (file.groups[i].name != kOrder[i]) {
            throw FormatError(FormatErrc::bad_header, file.groups[i].name,
                              "plane group " + std::to_string(i) + " is '" + file.groups[i].name +
                                  "', expected '" + kOrder[i] + "'");
        }
    }
    auto single = [](PlaneGroup& g) {
        if (g.planes.size() != 1) {
            throw FormatError(FormatErrc::dimension_mismatch, g.name,
                              "plane group '" + g.name + "' must hold exactly 1 plane");
        }
        return std::move(g.planes.front());
    };
    HeatmapBundle b;
    b.numClasses = file.numClasses;
    b.downsampleRatio = file.downsampleRatio;
    b.left = std::move(file.groups[0].planes);
    b.right = std::move(file.groups[1].planes);
    b.center = single(file.groups[2]);
    b.offsetL = std::move(file.groups[3].planes);
    b.offsetR = std::move(file.groups[4].planes);
    b.embedL = single(file.groups[5]);
    b.embedR = single(file.groups[6]);
    validate(b);
    return b;
}

void validate(const HeatmapBundle& b) {
    if (b.numClasses <= 0) {
        throw FormatError(FormatErrc::bad_header, "", "num_classes must be positive");
    }
    if (b.downsampleRatio <= 0) {
        throw FormatError(FormatErrc::bad_header, "", "downsample_ratio must be positive");
    }
    const int h = b.center.height();
    const int w = b.center.width();
    if (h <= 0 || w <= 0) {
        throw FormatError(FormatErrc::dimension_mismatch, "center", "center plane is empty");
    }
    check_count(b.left, static_cast<std::size_t>(b.numClasses), "left");
    check_count(b.right, static_cast<std::size_t>(b.numClasses), "right");
    check_count(b.offsetL, 2, "offsetL");
    check_count(b.offsetR, 2, "offsetR");
    for (const auto& p : b.left) check_plane_shape(p, h, w, "left");
    for (const auto& p : b.right) check_plane_shape(p, h, w, "right");
    for (const auto& p : b.offsetL) check_plane_shape(p, h, w, "offsetL");
    for (const auto& p : b.offsetR) check_plane_shape(p, h, w, "offsetR");
    check_plane_shape(b.embedL, h, w, "embedL");
    check_plane_shape(b.embedR, h, w, "embedR");

    check_range(b.left, "left", false);
    check_range(b.right, "right", false);
    check_range({b.center}, "center", false);
    check_range(b.offsetL, "offsetL", true);
    check_range(b.offsetR, "offsetR", true);
    check_finite(b.embedL, "embedL");
    check_finite(b.embedR, "embedR");
}

std::size_t write_bundle(const HeatmapBundle& bundle, std::ostream& out) {
    validate(bundle);
    return write_planes(to_plane_file(bundle), out);
}

HeatmapBundle read_bundle(std::istream& in) {
    return to_bundle(read_planes(in));
}

std::size_t write_bundle_file(const HeatmapBundle& bundle, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw FormatError(FormatErrc::io, "", "cannot open '" + path + "' for writing");
    }
    return write_bundle(bundle, out);
}

HeatmapBundle read_bundle_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError(FormatErrc::io, "", "cannot open '" + path + "'");
    }
    return read_bundle(in);
}

void write_plane_file(const std::string& path, const std::string& planeName, const Grid2D& grid) {
    PlaneFile file;
    file.numClasses = 1;
    file.height = grid.height();
    file.width = grid.width();
    file.downsampleRatio = 1;
    file.groups = {{planeName, {grid}}};
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw FormatError(FormatErrc::io, "", "cannot open '" + path + "' for writing");
    }
    write_planes(file, out);
}

PlaneFile read_plane_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError(FormatErrc::io, "", "cannot open '" + path + "'");
    }
    return read_planes(in);
}

}  // namespace graspkp
