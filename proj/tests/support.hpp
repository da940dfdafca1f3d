#pragma once

// Small world builders shared by the unit and acceptance tests.

#include <cstdint>
#include <random>
#include <vector>

#include "nipp/terrain.hpp"

namespace nipp::testing {

/// Map whose pixels are painted by `paint(row, col) -> class index`, each class a flat colour.
template <class Paint>
LabeledMap painted_map(int width, int height, int cell, const std::vector<Rgb>& colours, Paint&& paint) {
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(width) * height * 3);
    std::vector<std::uint8_t> labels(static_cast<std::size_t>(width) * height);
    std::vector<ClassEntry> classes;
    for (std::size_t i = 0; i < colours.size(); ++i) {
        classes.push_back({static_cast<std::uint8_t>(i), "c" + std::to_string(i)});
    }
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            const int k = paint(r, c);
            const std::size_t p = static_cast<std::size_t>(r) * width + c;
            labels[p] = static_cast<std::uint8_t>(k);
            rgb[3 * p] = colours[k].r;
            rgb[3 * p + 1] = colours[k].g;
            rgb[3 * p + 2] = colours[k].b;
        }
    }
    return LabeledMap(width, height, cell, std::move(rgb), std::move(labels), std::move(classes));
}

/// Map with random imagery and random two-class labels.
inline LabeledMap noise_map(int width, int height, int cell, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> byte(0, 255);
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(width) * height * 3);
    std::vector<std::uint8_t> labels(static_cast<std::size_t>(width) * height);
    for (auto& v : rgb) v = static_cast<std::uint8_t>(byte(rng));
    for (auto& v : labels) v = static_cast<std::uint8_t>(byte(rng) & 1);
    return LabeledMap(width, height, cell, std::move(rgb), std::move(labels), {{0, "a"}, {1, "b"}});
}

inline SyntheticSpec four_class_spec(int rows, int cols, int cell) {
    SyntheticSpec s;
    s.grid_rows = rows;
    s.grid_cols = cols;
    s.cell_size_px = cell;
    s.noise = 20;
    s.region_sites = 16;
    s.rare_fraction = 0.05;
    s.classes = {{"grass", {80, 170, 60}}, {"tree", {30, 90, 70}}, {"sand", {210, 190, 140}}, {"water", {40, 70, 160}}};
    return s;
}

}  // namespace nipp::testing
