#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdlib>
#include <optional>
#include <string_view>
#include <vector>

#include "nipp/errors.hpp"

namespace nipp {

/// Cell position in grid units. Row grows southward, column eastward.
struct GridCoord {
    int row = 0;
    int col = 0;

    auto operator<=>(const GridCoord&) const = default;
};

struct GridDims {
    int rows = 0;
    int cols = 0;

    bool contains(GridCoord c) const noexcept {
        return c.row >= 0 && c.col >= 0 && c.row < rows && c.col < cols;
    }
    std::size_t cell_count() const noexcept { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
    bool operator==(const GridDims&) const = default;
};

enum class Direction { North, East, South, West };

/// Fixed tie-break order used by every planner decision.
inline constexpr std::array<Direction, 4> kDirectionOrder = {Direction::North, Direction::East, Direction::South,
                                                              Direction::West};

constexpr GridCoord step(GridCoord c, Direction d) noexcept {
    switch (d) {
        case Direction::North: return {c.row - 1, c.col};
        case Direction::East: return {c.row, c.col + 1};
        case Direction::South: return {c.row + 1, c.col};
        case Direction::West: return {c.row, c.col - 1};
    }
    return c;
}

/// Unit vector of a direction in image coordinates, as (d_col, d_row).
constexpr std::array<double, 2> unit_vector(Direction d) noexcept {
    switch (d) {
        case Direction::North: return {0.0, -1.0};
        case Direction::East: return {1.0, 0.0};
        case Direction::South: return {0.0, 1.0};
        case Direction::West: return {-1.0, 0.0};
    }
    return {0.0, 0.0};
}

constexpr std::string_view direction_name(Direction d) noexcept {
    switch (d) {
        case Direction::North: return "N";
        case Direction::East: return "E";
        case Direction::South: return "S";
        case Direction::West: return "W";
    }
    return "?";
}

inline int manhattan(GridCoord a, GridCoord b) noexcept { return std::abs(a.row - b.row) + std::abs(a.col - b.col); }

inline bool adjacent(GridCoord a, GridCoord b) noexcept { return manhattan(a, b) == 1; }

/// Direction taking `from` to the 4-adjacent cell `to`, if they are adjacent.
inline std::optional<Direction> direction_between(GridCoord from, GridCoord to) noexcept {
    for (Direction d : kDirectionOrder) {
        if (step(from, d) == to) return d;
    }
    return std::nullopt;
}

/// Dense row-major 2D array indexed by GridCoord.
template <class T>
class Grid {
public:
    Grid() = default;
    Grid(GridDims dims, T fill) : dims_(dims), data_(dims.cell_count(), fill) {}

    GridDims dims() const noexcept { return dims_; }
    int rows() const noexcept { return dims_.rows; }
    int cols() const noexcept { return dims_.cols; }

    T& operator[](GridCoord c) { return data_[index(c)]; }
    const T& operator[](GridCoord c) const { return data_[index(c)]; }

    T& at(GridCoord c) {
        check(c);
        return data_[index(c)];
    }
    const T& at(GridCoord c) const {
        check(c);
        return data_[index(c)];
    }

    std::vector<T>& values() noexcept { return data_; }
    const std::vector<T>& values() const noexcept { return data_; }

    bool operator==(const Grid&) const = default;

private:
    std::size_t index(GridCoord c) const noexcept {
        return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(dims_.cols) + static_cast<std::size_t>(c.col);
    }
    void check(GridCoord c) const {
        if (!dims_.contains(c)) throw PreconditionError("grid coordinate out of bounds");
    }

    GridDims dims_{};
    std::vector<T> data_;
};

}  // namespace nipp
