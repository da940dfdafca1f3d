#pragma once

// Lawnmower coverage baselines. Neither planner budgets for the flight home.

#include "nipp/grid.hpp"
#include "nipp/planner.hpp"

namespace nipp {

/// Serpentine position persisted across big-lawnmower missions.
struct LawnmowerCursor {
    GridCoord next_cell{0, 0};
    Direction direction = Direction::East;
    bool exhausted = false;

    bool operator==(const LawnmowerCursor&) const = default;
};

struct BigLawnmowerResult {
    MissionRecord record;
    LawnmowerCursor cursor;
};

/// Whole-map serpentine (row 0 west to east, row 1 east to west, ...). Visits up
/// to budget + 1 cells from the cursor; an exhausted cursor yields an empty record.
BigLawnmowerResult big_lawnmower_mission(const LawnmowerCursor& cursor, int budget, GridDims dims);

struct LawnmowerRect {
    int row = 0;
    int col = 0;
    int height = 0;
    int width = 0;
};

/// Rectangle of floor(sqrt(budget + 1)) columns by ceil((budget + 1) / columns)
/// rows with its top-left corner at `start`, shifted inward to fit the map.
LawnmowerRect small_lawnmower_rect(GridCoord start, int budget, GridDims dims);

/// Serpentine over small_lawnmower_rect, truncated to `budget` moves.
MissionRecord small_lawnmower_mission(GridCoord start, int budget, GridDims dims);

}  // namespace nipp
