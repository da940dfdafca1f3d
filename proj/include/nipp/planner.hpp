#pragma once

// Potential-field informative path planner.
//
// The stored potential is a familiarity value (1 - novelty / 2) plus border and
// visited penalties; the planner always moves toward the lowest potential, so
// novel cells attract and penalties repel.

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nipp/grid.hpp"
#include "nipp/novelty.hpp"

namespace nipp {

struct PlannerParams {
    double prior_familiarity = 0.5;  // potential of cells never observed
    double visited_penalty = 2.0;
    double border_weight = 1.0;
    int border_radius = 2;  // cells
    double gradient_weight = 0.5;
    double forward_penalty = 0.5;
    double gradient_floor = 1e-9;

    bool operator==(const PlannerParams&) const = default;
};

struct PotentialField {
    Grid<double> phi;
    Grid<std::uint8_t> visited;
    PlannerParams params;

    GridDims dims() const noexcept { return phi.dims(); }
    bool is_visited(GridCoord c) const { return visited[c] != 0; }
};

/// c_b * max over axes of max(0, r0 - distance to that axis' nearest border) / max(r0, 1).
double border_penalty(GridDims dims, GridCoord cell, const PlannerParams& params) noexcept;

struct PlannerState {
    GridCoord position;
    GridCoord previous;
    std::optional<Direction> heading;
    int energy = 0;
    int budget = 0;
    GridCoord home;
    std::optional<NoveltyHeatmap> last_heatmap;
    /// Mean novelty observed at `previous`, once the planner has moved.
    std::optional<double> previous_novelty;
    Thresholds thresholds;
};

struct Move {
    Direction direction;
};
struct FollowPath {
    std::vector<GridCoord> cells;
};
struct ReturnHome {
    std::vector<GridCoord> cells;
};
struct EndMission {};

using Action = std::variant<Move, FollowPath, ReturnHome, EndMission>;

/// One trajectory entry; `novelty` is NaN when the cell was not evaluated.
struct TraceStep {
    GridCoord cell;
    std::string action;
    double novelty = std::numeric_limits<double>::quiet_NaN();
};

struct MissionRecord {
    std::string planner_name;
    GridCoord home;
    std::vector<GridCoord> trajectory;
    std::vector<TraceStep> steps;  // parallel to trajectory
    std::map<GridCoord, double> observed;  // cell -> mean novelty (NaN if not evaluated)
    int moves_used = 0;

    /// Observed cells in first-visit order.
    std::vector<GridCoord> observed_in_order() const;
};

struct Mission {
    PlannerState state;
    PotentialField field;
};

Mission init_mission(GridDims dims, GridCoord home, int budget, const PlannerParams& params,
                     const Thresholds& thresholds = {});

/// Folds the observation of the current cell into the persistent potential.
void apply_observation(PlannerState& state, PotentialField& field, GridCoord cell, const NoveltyHeatmap& heatmap);

/// Temporary potential for the next decision (gradient, smoothing and edge rules).
Grid<double> effective_field(const PlannerState& state, const PotentialField& field);

/// 3x3 box filter with replicate padding.
Grid<double> box_smooth(const Grid<double>& field);

Action choose_next(const PlannerState& state, const PotentialField& field, const Grid<double>& phi_hat);

/// Shortest 4-adjacent path from `from` (exclusive) to the nearest unvisited cell,
/// choosing the smallest (row, col) target among equals. nullopt when every cell
/// is visited.
std::optional<std::vector<GridCoord>> shortest_escape_path(const Grid<std::uint8_t>& visited, GridCoord from);

/// Row-first Manhattan path from `from` (exclusive) to `to` (inclusive).
std::vector<GridCoord> manhattan_path(GridCoord from, GridCoord to);

/// Novelty of the camera image at a cell.
using HeatmapSource = std::function<NoveltyHeatmap(GridCoord)>;

MissionRecord run_ipp_mission(GridDims dims, GridCoord home, int budget, const Thresholds& thresholds,
                              const PlannerParams& params, const HeatmapSource& observe);

MissionRecord run_ipp_mission(const LabeledMap& map, const EmbeddingDatabase& db, GridCoord home, int budget,
                              const Thresholds& thresholds, const PlannerParams& params, std::size_t k);

/// CSV `step,row,col,mean_novelty,action`, one line per trajectory entry.
std::string trace_csv(const MissionRecord& record);

}  // namespace nipp
