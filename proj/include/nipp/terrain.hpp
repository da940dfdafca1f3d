#pragma once

// Labeled raster worlds: bundle I/O, synthetic generation, and grid slicing.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nipp/grid.hpp"

namespace nipp {

inline constexpr int kDefaultCellSize = 128;

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    bool operator==(const Rgb&) const = default;
};

struct ClassEntry {
    std::uint8_t id = 0;
    std::string name;

    bool operator==(const ClassEntry&) const = default;
};

/// Half-open pixel rectangle [row, row + height) x [col, col + width).
struct PixelRect {
    int row = 0;
    int col = 0;
    int height = 0;
    int width = 0;
};

/// RGB imagery plus a per-pixel class raster, discretized into square cells.
/// Immutable once constructed; the constructor enforces every invariant.
class LabeledMap {
public:
    LabeledMap(int width_px, int height_px, int cell_size_px, std::vector<std::uint8_t> imagery,
               std::vector<std::uint8_t> labels, std::vector<ClassEntry> classes);

    int width_px() const noexcept { return width_; }
    int height_px() const noexcept { return height_; }
    int cell_size_px() const noexcept { return cell_size_; }
    GridDims grid() const noexcept { return {height_ / cell_size_, width_ / cell_size_}; }

    const std::vector<std::uint8_t>& imagery() const noexcept { return imagery_; }
    const std::vector<std::uint8_t>& labels() const noexcept { return labels_; }
    const std::vector<ClassEntry>& classes() const noexcept { return classes_; }

    Rgb pixel(int row, int col) const noexcept {
        const std::size_t i = (static_cast<std::size_t>(row) * width_ + col) * 3;
        return {imagery_[i], imagery_[i + 1], imagery_[i + 2]};
    }
    std::uint8_t label(int row, int col) const noexcept {
        return labels_[static_cast<std::size_t>(row) * width_ + col];
    }
    /// Position of `id` in classes(), or -1.
    int class_index(std::uint8_t id) const noexcept;

    bool operator==(const LabeledMap&) const = default;

private:
    int width_;
    int height_;
    int cell_size_;
    std::vector<std::uint8_t> imagery_;
    std::vector<std::uint8_t> labels_;
    std::vector<ClassEntry> classes_;
};

/// Square RGB image of one grid cell, as seen by the simulated camera.
struct Patch {
    int side_px = 0;
    int origin_row = 0;
    int origin_col = 0;
    std::vector<std::uint8_t> pixels;  // row-major RGB, side_px * side_px * 3 bytes

    Rgb pixel(int row, int col) const noexcept {
        const std::size_t i = (static_cast<std::size_t>(row) * side_px + col) * 3;
        return {pixels[i], pixels[i + 1], pixels[i + 2]};
    }
};

/// Bundle format: imagery.ppm (P6), labels.pgm (P5), meta.txt.
LabeledMap load_map_bundle(const std::filesystem::path& directory);
void save_map_bundle(const LabeledMap& map, const std::filesystem::path& directory);

struct ClassStyle {
    std::string name;
    Rgb mean;
};

/// Parameters of a synthetic world. Class ids are assigned 0..n-1 in declaration
/// order; when rare_fraction is set the last class is confined to a compact
/// region of whole cells and excluded from the Voronoi sites.
struct SyntheticSpec {
    int grid_rows = 8;
    int grid_cols = 8;
    int cell_size_px = kDefaultCellSize;
    std::vector<ClassStyle> classes;
    int noise = 0;        // uniform noise amplitude per channel, in gray levels
    int region_sites = 8;
    std::optional<double> rare_fraction;
};

/// key=value text: rows, cols, cell_size, noise, sites, rare_fraction, class=<name>:<r>,<g>,<b>.
SyntheticSpec parse_synthetic_spec(const std::string& text);
std::string serialize_synthetic_spec(const SyntheticSpec& spec);

LabeledMap generate_synthetic_map(const SyntheticSpec& spec, std::uint64_t seed);

Patch cell_patch(const LabeledMap& map, GridCoord cell);

/// Most frequent label inside `rect`; ties go to the smallest class id.
std::uint8_t majority_label(const LabeledMap& map, const PixelRect& rect);

/// Pixel rectangle covered by a grid cell.
PixelRect cell_rect(const LabeledMap& map, GridCoord cell);

}  // namespace nipp
