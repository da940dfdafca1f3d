#pragma once

// Patch embeddings, the kNN embedding database, and cosine-distance novelty.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "nipp/pool.hpp"
#include "nipp/terrain.hpp"

namespace nipp {

/// 8x8 subpatch embeddings of one cell, row-major (index = sub_row * 8 + sub_col).
using FeatureGrid = std::array<FeatureVector, kSubpatchesPerCell>;

/// Hand-crafted subpatch features: mean RGB, population std of RGB, and the mean
/// and std of the luminance gradient magnitude |dx| + |dy| (forward differences
/// over the whole patch, zero on the last row/column).
FeatureGrid extract_features(const Patch& patch, GridCoord cell = {});

double euclidean_norm(const Embedding& v) noexcept;

struct Neighbor {
    std::size_t index = 0;  // insertion index in the database
    double similarity = 0.0;
    std::uint8_t label = 0;
};

/// Immutable exact-kNN store over cosine similarity. Zero vectors are not
/// indexed; the label of the first one seen is kept for 1-NN lookups of zero
/// queries.
class EmbeddingDatabase {
public:
    struct Entry {
        Embedding values{};
        std::uint8_t label = 0;
    };

    EmbeddingDatabase() = default;
    EmbeddingDatabase(std::span<const Entry> entries, std::uint64_t generation);

    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    std::uint64_t generation() const noexcept { return generation_; }
    std::size_t excluded_zero_norm() const noexcept { return excluded_; }
    std::optional<std::uint8_t> zero_norm_label() const noexcept { return zero_label_; }

    const Embedding& values(std::size_t i) const { return values_.at(i); }
    std::uint8_t label(std::size_t i) const { return labels_.at(i); }
    double norm(std::size_t i) const { return norms_.at(i); }

    /// The k most similar entries, similarity descending, ties by index ascending.
    std::vector<Neighbor> k_nearest(const Embedding& query, std::size_t k) const;
    /// Single most similar entry (same ordering as k_nearest with k = 1).
    Neighbor nearest(const Embedding& query) const;
    /// Most similar entry with index >= first; similarity is -inf when that range is empty.
    Neighbor nearest_from(const Embedding& query, std::size_t first) const;

    /// Binary dump: "NIPPDB1", u32 count, u32 dim, count*dim f64, count u8 labels (little endian).
    void save(const std::filesystem::path& path) const;
    static EmbeddingDatabase load(const std::filesystem::path& path, std::uint64_t generation = 0);

private:
    std::vector<Embedding> values_;
    std::vector<std::uint8_t> labels_;
    std::vector<double> norms_;
    std::vector<double> blocks_;  // unit vectors, simd block layout
    std::uint64_t generation_ = 0;
    std::size_t excluded_ = 0;
    std::optional<std::uint8_t> zero_label_;
};

EmbeddingDatabase build_database(const TrainingPool& pool);

/// Mean cosine distance to the k nearest entries, in [0, 2]. Zero queries score 0.
double novelty_score(const EmbeddingDatabase& db, const Embedding& query, std::size_t k);

using ScoreGrid = std::array<double, kSubpatchesPerCell>;

/// Image-coordinate gradient: +col is East, +row is South.
struct Gradient {
    double dcol = 0.0;
    double drow = 0.0;
};

struct NoveltyHeatmap {
    ScoreGrid scores{};
    double mean_score = 0.0;
    Gradient gradient;

    double at(int sub_row, int sub_col) const { return scores[static_cast<std::size_t>(sub_row * kSubpatchGrid + sub_col)]; }
};

/// Mean of per-cell central differences (one-sided on the edges), as (d/dcol, d/drow).
Gradient heatmap_gradient(const ScoreGrid& scores) noexcept;

NoveltyHeatmap heatmap_from_scores(const ScoreGrid& scores) noexcept;
NoveltyHeatmap novelty_heatmap(const EmbeddingDatabase& db, const FeatureGrid& features, std::size_t k);
NoveltyHeatmap novelty_heatmap(const EmbeddingDatabase& db, const Patch& patch, std::size_t k);

struct Thresholds {
    double alpha = 0.0;
    double beta = 0.0;
};

/// Lower and upper quartiles with linear interpolation at q * (n - 1). Needs >= 4 scores.
Thresholds calibrate_thresholds(std::span<const double> scores);

}  // namespace nipp
