#include "nipp/baselines.hpp"

#include <algorithm>

namespace nipp {
namespace {

long serpentine_index(GridCoord c, GridDims dims) {
    const int offset = c.row % 2 == 0 ? c.col : dims.cols - 1 - c.col;
    return static_cast<long>(c.row) * dims.cols + offset;
}

GridCoord serpentine_cell(long index, int row0, int col0, int width) {
    const int r = static_cast<int>(index / width);
    const int k = static_cast<int>(index % width);
    return {row0 + r, col0 + (r % 2 == 0 ? k : width - 1 - k)};
}

void push(MissionRecord& record, GridCoord cell) {
    record.trajectory.push_back(cell);
    record.steps.push_back({cell, record.trajectory.size() == 1 ? "start" : "lawnmower"});
    record.observed.emplace(cell, std::numeric_limits<double>::quiet_NaN());
}

int isqrt(int n) {
    int r = 0;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

}  // namespace

BigLawnmowerResult big_lawnmower_mission(const LawnmowerCursor& cursor, int budget, GridDims dims) {
    if (budget < 0) throw PreconditionError("big_lawnmower_mission: negative budget");
    if (dims.rows <= 0 || dims.cols <= 0) throw PreconditionError("big_lawnmower_mission: empty grid");
    BigLawnmowerResult out;
    out.record.planner_name = "big_lawnmower";
    out.cursor = cursor;
    if (cursor.exhausted) return out;
    if (!dims.contains(cursor.next_cell)) throw PreconditionError("big_lawnmower_mission: cursor out of bounds");

    const long total = static_cast<long>(dims.cell_count());
    const long first = serpentine_index(cursor.next_cell, dims);
    const long last = std::min(total - 1, first + budget);
    for (long i = first; i <= last; ++i) push(out.record, serpentine_cell(i, 0, 0, dims.cols));
    out.record.home = out.record.trajectory.front();
    out.record.moves_used = static_cast<int>(out.record.trajectory.size()) - 1;

    if (last + 1 >= total) {
        out.cursor.exhausted = true;
    } else {
        out.cursor.next_cell = serpentine_cell(last + 1, 0, 0, dims.cols);
        out.cursor.direction = out.cursor.next_cell.row % 2 == 0 ? Direction::East : Direction::West;
    }
    return out;
}

LawnmowerRect small_lawnmower_rect(GridCoord start, int budget, GridDims dims) {
    if (budget < 0) throw PreconditionError("small_lawnmower_mission: negative budget");
    if (!dims.contains(start)) throw PreconditionError("small_lawnmower_mission: start out of bounds");
    const int cells = budget + 1;
    int width = std::min(isqrt(cells), dims.cols);
    int height = std::min((cells + width - 1) / width, dims.rows);
    LawnmowerRect rect;
    rect.width = width;
    rect.height = height;
    rect.row = std::min(start.row, dims.rows - height);
    rect.col = std::min(start.col, dims.cols - width);
    return rect;
}

MissionRecord small_lawnmower_mission(GridCoord start, int budget, GridDims dims) {
    const LawnmowerRect rect = small_lawnmower_rect(start, budget, dims);
    MissionRecord record;
    record.planner_name = "small_lawnmower";
    const long n = std::min<long>(static_cast<long>(rect.width) * rect.height, static_cast<long>(budget) + 1);
    for (long i = 0; i < n; ++i) push(record, serpentine_cell(i, rect.row, rect.col, rect.width));
    record.home = record.trajectory.front();
    record.moves_used = static_cast<int>(record.trajectory.size()) - 1;
    return record;
}

}  // namespace nipp
