// SPDX-License-Identifier: Apache-2.0
//
// Dense 2-D grids, the heatmap bundle a keypoint backbone produces, and the
// GKTB container used to move them between processes.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace graspkp {

struct Pixel {
    int row = 0;
    int col = 0;
    friend bool operator==(Pixel, Pixel) = default;
};

/// Row-major single-precision grid.
class Grid2D {
public:
    Grid2D() = default;
    Grid2D(int height, int width, float fill = 0.0f);
    Grid2D(int height, int width, std::vector<float> data);

    int height() const { return height_; }
    int width() const { return width_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    float& at(int row, int col) { return data_[index(row, col)]; }
    float at(int row, int col) const { return data_[index(row, col)]; }
    bool contains(int row, int col) const {
        return row >= 0 && row < height_ && col >= 0 && col < width_;
    }

    const std::vector<float>& data() const { return data_; }
    std::vector<float>& data() { return data_; }

    bool same_shape(const Grid2D& other) const {
        return height_ == other.height_ && width_ == other.width_;
    }

    friend bool operator==(const Grid2D&, const Grid2D&) = default;

private:
    std::size_t index(int row, int col) const {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(col);
    }

    int height_ = 0;
    int width_ = 0;
    std::vector<float> data_;
};

/// Everything the grouping stage consumes: per-class keypoint heatmaps for
/// both roles, the center heatmap, two-plane offset maps and scalar
/// embedding maps.
struct HeatmapBundle {
    int numClasses = 0;
    int downsampleRatio = 1;
    std::vector<Grid2D> left;
    std::vector<Grid2D> right;
    Grid2D center;
    std::vector<Grid2D> offsetL;  // [0] = x offset, [1] = y offset
    std::vector<Grid2D> offsetR;
    Grid2D embedL;
    Grid2D embedR;

    /// Zero-filled bundle with the canonical plane counts.
    static HeatmapBundle zeros(int numClasses, int height, int width, int downsampleRatio);

    int height() const { return center.height(); }
    int width() const { return center.width(); }

    friend bool operator==(const HeatmapBundle&, const HeatmapBundle&) = default;
};

enum class FormatErrc {
    io,
    bad_magic,
    bad_version,
    bad_header,
    length_mismatch,
    dimension_mismatch,
    non_finite,
    out_of_range,
};

const char* to_string(FormatErrc code);

/// Raised for any malformed or invariant-violating GKTB stream. `plane()`
/// names the offending plane group when one is involved.
class FormatError : public std::runtime_error {
public:
    FormatError(FormatErrc code, std::string plane, const std::string& what);

    FormatErrc code() const { return code_; }
    const std::string& plane() const { return plane_; }

private:
    FormatErrc code_;
    std::string plane_;
};

/// A named run of equally-shaped planes inside a GKTB file.
struct PlaneGroup {
    std::string name;
    std::vector<Grid2D> planes;

    friend bool operator==(const PlaneGroup&, const PlaneGroup&) = default;
};

/// Generic GKTB contents. Heatmap bundles, depth images and masks are all
/// stored this way; only the plane names and counts differ.
struct PlaneFile {
    int numClasses = 0;
    int height = 0;
    int width = 0;
    int downsampleRatio = 1;
    std::vector<PlaneGroup> groups;

    const PlaneGroup* find(const std::string& name) const;

    friend bool operator==(const PlaneFile&, const PlaneFile&) = default;
};

inline constexpr std::uint8_t kGktbVersion = 1;

/// Serializes `file`; returns bytes written. Checks shape consistency but
/// nothing about value ranges.
std::size_t write_planes(const PlaneFile& file, std::ostream& out);

/// Parses a GKTB stream. Rejects structural problems and non-finite values;
/// value ranges are left to the typed readers.
PlaneFile read_planes(std::istream& in);

PlaneFile to_plane_file(const HeatmapBundle& bundle);
HeatmapBundle to_bundle(PlaneFile file);

/// Throws FormatError if any HeatmapBundle invariant is violated.
void validate(const HeatmapBundle& bundle);

std::size_t write_bundle(const HeatmapBundle& bundle, std::ostream& out);
HeatmapBundle read_bundle(std::istream& in);

std::size_t write_bundle_file(const HeatmapBundle& bundle, const std::string& path);
HeatmapBundle read_bundle_file(const std::string& path);

/// Single-plane helpers for depth images and masks.
void write_plane_file(const std::string& path, const std::string& planeName, const Grid2D& grid);
PlaneFile read_plane_file(const std::string& path);

}  // namespace graspkp
