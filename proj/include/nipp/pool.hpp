#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "nipp/grid.hpp"

namespace nipp {

inline constexpr int kFeatureDim = 8;
/// Subpatches per cell side; each cell yields kSubpatchGrid^2 embeddings.
inline constexpr int kSubpatchGrid = 8;
inline constexpr int kSubpatchesPerCell = kSubpatchGrid * kSubpatchGrid;

using Embedding = std::array<double, kFeatureDim>;

struct SubpatchId {
    GridCoord cell;
    int sub_row = 0;
    int sub_col = 0;

    auto operator<=>(const SubpatchId&) const = default;
};

struct FeatureVector {
    Embedding values{};
    SubpatchId source;

    bool operator==(const FeatureVector&) const = default;
};

struct PoolRecord {
    FeatureVector feature;
    std::uint8_t label = 0;
    int mission = 0;

    bool operator==(const PoolRecord&) const = default;
};

/// Append-only store of annotated subpatch embeddings, grouped by source cell.
class TrainingPool {
public:
    /// Adds the records of one cell. Returns false (and changes nothing) when the
    /// cell is already pooled.
    bool add_cell(GridCoord cell, std::span<const PoolRecord> records);

    bool contains(GridCoord cell) const { return cells_.contains(cell); }
    bool empty() const noexcept { return records_.empty(); }
    const std::vector<PoolRecord>& records() const noexcept { return records_; }
    const std::set<GridCoord>& cells() const noexcept { return cells_; }
    /// Bumped on every successful add; used as the database generation.
    std::uint64_t revision() const noexcept { return revision_; }

private:
    std::vector<PoolRecord> records_;
    std::set<GridCoord> cells_;
    std::uint64_t revision_ = 0;
};

}  // namespace nipp
