#include "nipp/learner.hpp"

#include <algorithm>
#include <limits>

namespace nipp {

PixelRect subpatch_rect(const LabeledMap& map, GridCoord cell, int sub_row, int sub_col) {
    const PixelRect c = cell_rect(map, cell);
    const int side = map.cell_size_px() / kSubpatchGrid;
    return {c.row + sub_row * side, c.col + sub_col * side, side, side};
}

MapFeatures::MapFeatures(const LabeledMap& map) : grid_(map.grid()) {
    cells_.reserve(grid_.cell_count());
    truth_.reserve(grid_.cell_count());
    for (int r = 0; r < grid_.rows; ++r) {
        for (int c = 0; c < grid_.cols; ++c) {
            cells_.push_back(extract_features(cell_patch(map, {r, c}), {r, c}));
            std::array<std::uint8_t, kSubpatchesPerCell> t{};
            for (int sr = 0; sr < kSubpatchGrid; ++sr) {
                for (int sc = 0; sc < kSubpatchGrid; ++sc) {
                    t[static_cast<std::size_t>(sr * kSubpatchGrid + sc)] =
                        majority_label(map, subpatch_rect(map, {r, c}, sr, sc));
                }
            }
            truth_.push_back(t);
        }
    }
}

namespace {

// Lays out per-cell subpatch values into a subpatch-resolution raster.
template <class PerSubpatch>
LabelGrid assemble(GridDims grid, PerSubpatch&& value) {
    LabelGrid out;
    out.rows = grid.rows * kSubpatchGrid;
    out.cols = grid.cols * kSubpatchGrid;
    out.labels.assign(static_cast<std::size_t>(out.rows) * out.cols, 0);
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            for (int i = 0; i < kSubpatchesPerCell; ++i) {
                const int pr = r * kSubpatchGrid + i / kSubpatchGrid;
                const int pc = c * kSubpatchGrid + i % kSubpatchGrid;
                out.labels[static_cast<std::size_t>(pr) * out.cols + pc] = value(GridCoord{r, c}, i);
            }
        }
    }
    return out;
}

}  // namespace

LabelGrid MapFeatures::ground_truth() const {
    return assemble(grid_, [this](GridCoord c, int i) { return truth(c)[static_cast<std::size_t>(i)]; });
}

int add_observations(TrainingPool& pool, const MapFeatures& features, std::span<const GridCoord> cells,
                     int mission_index) {
    int added = 0;
    std::vector<PoolRecord> records(kSubpatchesPerCell);
    for (GridCoord cell : cells) {
        if (pool.contains(cell)) continue;
        const FeatureGrid& fg = features.cell(cell);
        const auto& truth = features.truth(cell);
        for (std::size_t i = 0; i < records.size(); ++i) records[i] = {fg[i], truth[i], mission_index};
        if (pool.add_cell(cell, records)) ++added;
    }
    return added;
}

int add_observations(TrainingPool& pool, const LabeledMap& map, std::span<const GridCoord> cells, int mission_index) {
    int added = 0;
    std::vector<PoolRecord> records(kSubpatchesPerCell);
    for (GridCoord cell : cells) {
        if (pool.contains(cell)) continue;
        const FeatureGrid fg = extract_features(cell_patch(map, cell), cell);
        for (std::size_t i = 0; i < records.size(); ++i) {
            const auto& src = fg[i].source;
            records[i] = {fg[i], majority_label(map, subpatch_rect(map, cell, src.sub_row, src.sub_col)),
                          mission_index};
        }
        if (pool.add_cell(cell, records)) ++added;
    }
    return added;
}

PatchClassifier::PatchClassifier(std::shared_ptr<const EmbeddingDatabase> db) : db_(std::move(db)) {
    if (!db_ || (db_->empty() && !db_->zero_norm_label())) {
        throw PreconditionError("PatchClassifier: database has no entries");
    }
}

std::uint8_t PatchClassifier::predict(const Embedding& query) const {
    if (euclidean_norm(query) == 0.0 || db_->empty()) {
        if (db_->zero_norm_label()) return *db_->zero_norm_label();
        return db_->label(0);
    }
    return db_->nearest(query).label;
}

PatchClassifier train_classifier(const TrainingPool& pool) {
    return PatchClassifier(std::make_shared<const EmbeddingDatabase>(build_database(pool)));
}

LabelGrid predict_map(const PatchClassifier& classifier, const MapFeatures& features) {
    return assemble(features.grid(), [&](GridCoord c, int i) {
        return classifier.predict(features.cell(c)[static_cast<std::size_t>(i)].values);
    });
}

LabelGrid predict_map(const PatchClassifier& classifier, const LabeledMap& map) {
    const GridDims grid = map.grid();
    std::vector<FeatureGrid> cells;
    cells.reserve(grid.cell_count());
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) cells.push_back(extract_features(cell_patch(map, {r, c}), {r, c}));
    }
    return assemble(grid, [&](GridCoord c, int i) {
        return classifier.predict(cells[static_cast<std::size_t>(c.row) * grid.cols + c.col][static_cast<std::size_t>(i)].values);
    });
}

MapPredictor::MapPredictor(const MapFeatures& features)
    : features_(&features), best_(features.grid().cell_count() * kSubpatchesPerCell) {
    for (auto& b : best_) b.similarity = -std::numeric_limits<double>::infinity();
}

LabelGrid MapPredictor::update(const PatchClassifier& classifier) {
    const EmbeddingDatabase& db = classifier.database();
    if (db.size() < scanned_) throw PreconditionError("MapPredictor: database shrank between updates");
    const GridDims grid = features_->grid();
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            const FeatureGrid& fg = features_->cell({r, c});
            for (int i = 0; i < kSubpatchesPerCell; ++i) {
                Neighbor& best = best_[(static_cast<std::size_t>(r) * grid.cols + c) * kSubpatchesPerCell + i];
                const Embedding& q = fg[static_cast<std::size_t>(i)].values;
                if (euclidean_norm(q) == 0.0) continue;
                const Neighbor fresh = db.nearest_from(q, scanned_);
                if (fresh.similarity > best.similarity) best = fresh;
            }
        }
    }
    scanned_ = db.size();
    return assemble(grid, [&](GridCoord c, int i) {
        const Embedding& q = features_->cell(c)[static_cast<std::size_t>(i)].values;
        if (euclidean_norm(q) == 0.0 || db.empty()) return classifier.predict(q);
        return db.label(best_[(static_cast<std::size_t>(c.row) * grid.cols + c.col) * kSubpatchesPerCell + i].index);
    });
}

IouReport mean_iou(const LabelGrid& pred, const LabelGrid& truth, std::span<const std::uint8_t> class_ids) {
    if (pred.rows != truth.rows || pred.cols != truth.cols || pred.labels.size() != truth.labels.size()) {
        throw PreconditionError("mean_iou: prediction and ground truth dimensions differ");
    }
    std::array<long, 256> pred_count{};
    std::array<long, 256> truth_count{};
    std::array<long, 256> both{};
    for (std::size_t i = 0; i < pred.labels.size(); ++i) {
        ++pred_count[pred.labels[i]];
        ++truth_count[truth.labels[i]];
        if (pred.labels[i] == truth.labels[i]) ++both[pred.labels[i]];
    }
    IouReport report;
    long double sum = 0.0L;  // extended accumulator so ratios like 7/12 round once
    int included = 0;
    for (std::uint8_t id : class_ids) {
        const long uni = pred_count[id] + truth_count[id] - both[id];
        if (uni == 0) {
            report.per_class.push_back(std::nullopt);
            continue;
        }
        const double iou = static_cast<double>(both[id]) / static_cast<double>(uni);
        report.per_class.push_back(iou);
        sum += static_cast<long double>(both[id]) / static_cast<long double>(uni);
        ++included;
    }
    report.mean = included > 0 ? static_cast<double>(sum / included) : 0.0;
    return report;
}

IouReport mean_iou(const LabelGrid& pred, const LabeledMap& map) {
    const GridDims grid = map.grid();
    const LabelGrid truth = assemble(grid, [&](GridCoord c, int i) {
        return majority_label(map, subpatch_rect(map, c, i / kSubpatchGrid, i % kSubpatchGrid));
    });
    std::vector<std::uint8_t> ids;
    for (const auto& c : map.classes()) ids.push_back(c.id);
    return mean_iou(pred, truth, ids);
}

}  // namespace nipp
