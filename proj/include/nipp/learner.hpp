#pragma once

// Segmenter proxy: 1-NN subpatch classifier over the training pool, whole-map
// prediction and mIoU at subpatch granularity.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "nipp/novelty.hpp"
#include "nipp/pool.hpp"
#include "nipp/terrain.hpp"

namespace nipp {

/// Subpatch-resolution raster of class ids ((height/sub) x (width/sub)).
struct LabelGrid {
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> labels;

    std::uint8_t at(int r, int c) const { return labels[static_cast<std::size_t>(r) * cols + c]; }
    bool operator==(const LabelGrid&) const = default;
};

/// Per-subpatch embeddings and ground-truth labels of a whole map, computed once.
class MapFeatures {
public:
    explicit MapFeatures(const LabeledMap& map);

    GridDims grid() const noexcept { return grid_; }
    const FeatureGrid& cell(GridCoord c) const { return cells_.at(index(c)); }
    /// Majority label of each subpatch of a cell, row-major.
    const std::array<std::uint8_t, kSubpatchesPerCell>& truth(GridCoord c) const { return truth_.at(index(c)); }
    LabelGrid ground_truth() const;

private:
    std::size_t index(GridCoord c) const {
        if (!grid_.contains(c)) throw PreconditionError("MapFeatures: cell out of bounds");
        return static_cast<std::size_t>(c.row) * grid_.cols + c.col;
    }

    GridDims grid_;
    std::vector<FeatureGrid> cells_;
    std::vector<std::array<std::uint8_t, kSubpatchesPerCell>> truth_;
};

/// Pixel rectangle of subpatch (sub_row, sub_col) inside a cell.
PixelRect subpatch_rect(const LabeledMap& map, GridCoord cell, int sub_row, int sub_col);

/// Pools the 64 annotated subpatches of each new cell; cells already pooled are skipped.
/// Returns the number of cells added.
int add_observations(TrainingPool& pool, const LabeledMap& map, std::span<const GridCoord> cells, int mission_index);
int add_observations(TrainingPool& pool, const MapFeatures& features, std::span<const GridCoord> cells,
                     int mission_index);

class PatchClassifier {
public:
    explicit PatchClassifier(std::shared_ptr<const EmbeddingDatabase> db);

    std::uint64_t generation() const noexcept { return db_->generation(); }
    const EmbeddingDatabase& database() const noexcept { return *db_; }
    std::shared_ptr<const EmbeddingDatabase> shared_database() const noexcept { return db_; }

    /// Label of the most similar pooled embedding. Zero queries take the label of
    /// the first pooled zero vector, else of entry 0.
    std::uint8_t predict(const Embedding& query) const;

private:
    std::shared_ptr<const EmbeddingDatabase> db_;
};

PatchClassifier train_classifier(const TrainingPool& pool);

LabelGrid predict_map(const PatchClassifier& classifier, const LabeledMap& map);
LabelGrid predict_map(const PatchClassifier& classifier, const MapFeatures& features);

/// Whole-map 1-NN prediction kept current across retrainings. Each update scans
/// only the entries appended since the previous one, so successive databases
/// must extend each other (as databases built from one growing pool do).
/// Results equal predict_map exactly.
class MapPredictor {
public:
    explicit MapPredictor(const MapFeatures& features);

    LabelGrid update(const PatchClassifier& classifier);

private:
    const MapFeatures* features_;
    std::size_t scanned_ = 0;
    std::vector<Neighbor> best_;  // index == size marks zero queries
};

struct IouReport {
    /// Indexed like LabeledMap::classes(); nullopt for classes absent from both rasters.
    std::vector<std::optional<double>> per_class;
    double mean = 0.0;
};

/// IoU per class id listed in `class_ids`, mean over classes present in either raster.
IouReport mean_iou(const LabelGrid& pred, const LabelGrid& truth, std::span<const std::uint8_t> class_ids);
IouReport mean_iou(const LabelGrid& pred, const LabeledMap& map);

}  // namespace nipp
