#pragma once

// Multi-mission experiment loop, configuration, metrics and renderings.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nipp/baselines.hpp"
#include "nipp/learner.hpp"
#include "nipp/planner.hpp"

namespace nipp {

enum class PlannerKind { Ipp, BigLawnmower, SmallLawnmower };

std::string_view planner_name(PlannerKind kind) noexcept;
std::optional<PlannerKind> parse_planner(std::string_view name) noexcept;

inline constexpr std::size_t kDefaultNeighbors = 20;

struct ExperimentConfig {
    std::optional<std::string> map_path;
    std::optional<std::string> synthetic_spec_path;
    std::uint64_t seed = 0;
    PlannerKind planner = PlannerKind::Ipp;
    int missions = 1;
    int budget = 0;
    std::vector<GridCoord> starts;  // one per mission, or a single repeated start
    std::size_t k = kDefaultNeighbors;
    PlannerParams params;
    std::string out;

    GridCoord start_for(int mission_index) const;  // 1-based
    bool operator==(const ExperimentConfig&) const = default;
};

/// Line-oriented key=value config. Throws ConfigError naming the line.
ExperimentConfig parse_config(const std::string& text);
std::string serialize_config(const ExperimentConfig& config);

struct MetricsRow {
    int mission = 0;
    std::string planner;
    std::size_t pool_cells = 0;
    double miou = 0.0;
    std::vector<double> per_class_iou;  // NaN for classes absent from prediction and truth
    int high_novelty_cells = 0;

    bool operator==(const MetricsRow&) const = default;
};

std::string metrics_csv(std::span<const MetricsRow> rows, std::span<const std::string> class_names);
void write_metrics(std::span<const MetricsRow> rows, std::span<const std::string> class_names,
                   const std::filesystem::path& path);
/// Inverse of metrics_csv; returns the class names through `class_names` when given.
std::vector<MetricsRow> parse_metrics(const std::string& text, std::vector<std::string>* class_names = nullptr);

/// Gray value clamp(round(255 (v - lo) / (hi - lo)), 0, 255), rounding half away from zero.
std::vector<std::uint8_t> render_heatmap(std::span<const double> values, int width, int height, double lo, double hi);

/// Map imagery with trajectory cells blended halfway to blue and the home cell halfway to red.
std::vector<std::uint8_t> render_path_overlay(const LabeledMap& map, std::span<const GridCoord> trajectory,
                                              GridCoord home);

std::vector<std::uint8_t> render_labels(const LabelGrid& grid);
LabelGrid decode_label_pgm(const std::vector<std::uint8_t>& bytes);

/// Novelty of every subpatch of the map against `db`, subpatch-resolution row-major.
std::vector<double> whole_map_novelty(const EmbeddingDatabase& db, const MapFeatures& features, std::size_t k);

/// Quartile thresholds from the novelty of every pooled subpatch against `db`.
Thresholds calibrate_from_pool(const EmbeddingDatabase& db, const TrainingPool& pool, std::size_t k);

struct ExperimentResult {
    std::vector<MetricsRow> rows;
    std::vector<MissionRecord> missions;
};

/// Loads the bundle or generates the synthetic world named by the config.
LabeledMap load_experiment_map(const ExperimentConfig& config);

/// Runs the mission / retrain loop. Artifacts are written when `out_dir` is set.
ExperimentResult run_experiment(const ExperimentConfig& config, const LabeledMap& map, const MapFeatures& features,
                                const std::optional<std::filesystem::path>& out_dir = std::nullopt);
std::vector<MetricsRow> run_experiment(const ExperimentConfig& config);

}  // namespace nipp
