#include "nipp/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <set>

namespace nipp {

double border_penalty(GridDims dims, GridCoord cell, const PlannerParams& params) noexcept {
    const int r0 = params.border_radius;
    const int row_dist = std::min(cell.row, dims.rows - 1 - cell.row);
    const int col_dist = std::min(cell.col, dims.cols - 1 - cell.col);
    const int worst = std::max(std::max(0, r0 - row_dist), std::max(0, r0 - col_dist));
    return params.border_weight * static_cast<double>(worst) / static_cast<double>(std::max(r0, 1));
}

std::vector<GridCoord> MissionRecord::observed_in_order() const {
    std::vector<GridCoord> out;
    std::set<GridCoord> seen;
    for (GridCoord c : trajectory) {
        if (seen.insert(c).second) out.push_back(c);
    }
    return out;
}

Mission init_mission(GridDims dims, GridCoord home, int budget, const PlannerParams& params,
                     const Thresholds& thresholds) {
    if (dims.rows <= 0 || dims.cols <= 0) throw PreconditionError("init_mission: empty grid");
    if (!dims.contains(home)) throw PreconditionError("init_mission: home out of bounds");
    if (budget < 0) throw PreconditionError("init_mission: negative budget");
    Mission m;
    m.field.params = params;
    m.field.phi = Grid<double>(dims, 0.0);
    m.field.visited = Grid<std::uint8_t>(dims, 0);
    for (int r = 0; r < dims.rows; ++r) {
        for (int c = 0; c < dims.cols; ++c) {
            m.field.phi[{r, c}] = params.prior_familiarity + border_penalty(dims, {r, c}, params);
        }
    }
    m.state.position = home;
    m.state.previous = home;
    m.state.home = home;
    m.state.energy = budget;
    m.state.budget = budget;
    m.state.thresholds = thresholds;
    return m;
}

void apply_observation(PlannerState& state, PotentialField& field, GridCoord cell, const NoveltyHeatmap& heatmap) {
    if (cell != state.position) throw PreconditionError("apply_observation: cell is not the current position");
    field.visited[cell] = 1;
    field.phi[cell] = (1.0 - heatmap.mean_score / 2.0) + border_penalty(field.dims(), cell, field.params) +
                      field.params.visited_penalty;
    state.last_heatmap = heatmap;
}

Grid<double> box_smooth(const Grid<double>& field) {
    const GridDims dims = field.dims();
    Grid<double> out(dims, 0.0);
    for (int r = 0; r < dims.rows; ++r) {
        for (int c = 0; c < dims.cols; ++c) {
            double sum = 0.0;
            double lo = field[{r, c}];
            double hi = lo;
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    const int rr = std::clamp(r + dr, 0, dims.rows - 1);
                    const int cc = std::clamp(c + dc, 0, dims.cols - 1);
                    const double v = field[{rr, cc}];
                    sum += v;
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            }
            // Rounding can push a mean one ulp past its inputs; the clamp keeps
            // constants fixed and every value inside its window.
            out[{r, c}] = std::clamp(sum / 9.0, lo, hi);
        }
    }
    return out;
}

Grid<double> effective_field(const PlannerState& state, const PotentialField& field) {
    Grid<double> phi_hat = field.phi;
    if (!state.last_heatmap) return phi_hat;
    const PlannerParams& p = field.params;
    const double novelty = state.last_heatmap->mean_score;
    const Thresholds& t = state.thresholds;

    if (novelty > t.beta) {
        phi_hat = box_smooth(phi_hat);
    } else if (novelty > t.alpha) {
        const Gradient g = state.last_heatmap->gradient;
        const double len = std::hypot(g.dcol, g.drow);
        if (len > p.gradient_floor) {
            for (Direction d : kDirectionOrder) {
                const GridCoord n = step(state.position, d);
                if (!phi_hat.dims().contains(n)) continue;
                const auto u = unit_vector(d);
                const double alignment = (u[0] * g.dcol + u[1] * g.drow) / len;
                phi_hat[n] -= p.gradient_weight * std::max(0.0, alignment);
            }
        }
    }

    // Leaving a high-novelty region: discourage continuing straight on.
    if (state.previous_novelty && *state.previous_novelty > t.beta && novelty <= t.beta && state.heading) {
        const GridCoord straight = step(state.position, *state.heading);
        if (phi_hat.dims().contains(straight)) phi_hat[straight] += p.forward_penalty;
    }
    return phi_hat;
}

std::vector<GridCoord> manhattan_path(GridCoord from, GridCoord to) {
    std::vector<GridCoord> path;
    GridCoord c = from;
    while (c.row != to.row) {
        c.row += c.row < to.row ? 1 : -1;
        path.push_back(c);
    }
    while (c.col != to.col) {
        c.col += c.col < to.col ? 1 : -1;
        path.push_back(c);
    }
    return path;
}

std::optional<std::vector<GridCoord>> shortest_escape_path(const Grid<std::uint8_t>& visited, GridCoord from) {
    const GridDims dims = visited.dims();
    if (!dims.contains(from)) throw PreconditionError("shortest_escape_path: start out of bounds");
    Grid<int> dist(dims, -1);
    Grid<GridCoord> parent(dims, GridCoord{-1, -1});
    std::deque<GridCoord> queue{from};
    dist[from] = 0;
    std::optional<GridCoord> target;
    int target_dist = -1;
    while (!queue.empty()) {
        const GridCoord c = queue.front();
        queue.pop_front();
        if (target && dist[c] > target_dist) break;
        if (c != from && !visited[c]) {
            if (!target || *target > c) {
                target = c;
                target_dist = dist[c];
            }
            continue;
        }
        for (Direction d : kDirectionOrder) {
            const GridCoord n = step(c, d);
            if (!dims.contains(n) || dist[n] >= 0) continue;
            dist[n] = dist[c] + 1;
            parent[n] = c;
            queue.push_back(n);
        }
    }
    if (!target) return std::nullopt;
    std::vector<GridCoord> path;
    for (GridCoord c = *target; c != from; c = parent[c]) path.push_back(c);
    std::reverse(path.begin(), path.end());
    return path;
}

Action choose_next(const PlannerState& state, const PotentialField& field, const Grid<double>& phi_hat) {
    const GridDims dims = field.dims();
    const int to_home = manhattan(state.position, state.home);
    if (state.energy == 0 && state.position == state.home) return EndMission{};
    // A move changes energy - distance by 0 or -2, so a margin below 2 means
    // the next move could strand the vehicle.
    if (state.energy - to_home < 2) return ReturnHome{manhattan_path(state.position, state.home)};

    bool any_unvisited = false;
    for (Direction d : kDirectionOrder) {
        const GridCoord n = step(state.position, d);
        if (dims.contains(n) && !field.is_visited(n)) any_unvisited = true;
    }

    if (!any_unvisited) {
        auto path = shortest_escape_path(field.visited, state.position);
        if (!path) return ReturnHome{manhattan_path(state.position, state.home)};
        std::size_t keep = 0;
        for (std::size_t i = 0; i < path->size(); ++i) {
            const int cost = static_cast<int>(i + 1);
            if (state.energy - cost - manhattan((*path)[i], state.home) >= 0) keep = i + 1;
        }
        if (keep == 0) return ReturnHome{manhattan_path(state.position, state.home)};
        path->resize(keep);
        return FollowPath{std::move(*path)};
    }

    std::optional<Direction> best;
    double best_value = 0.0;
    for (Direction d : kDirectionOrder) {
        const GridCoord n = step(state.position, d);
        if (!dims.contains(n)) continue;
        if (!best || phi_hat[n] < best_value) {
            best = d;
            best_value = phi_hat[n];
        }
    }
    if (!best) return ReturnHome{manhattan_path(state.position, state.home)};
    return Move{*best};
}

MissionRecord run_ipp_mission(GridDims dims, GridCoord home, int budget, const Thresholds& thresholds,
                              const PlannerParams& params, const HeatmapSource& observe) {
    Mission mission = init_mission(dims, home, budget, params, thresholds);
    PlannerState& state = mission.state;
    PotentialField& field = mission.field;
    MissionRecord record;
    record.planner_name = "ipp";
    record.home = home;

    std::map<GridCoord, NoveltyHeatmap> seen;
    const auto enter = [&](GridCoord cell, const char* action) {
        auto it = seen.find(cell);
        if (it == seen.end()) it = seen.emplace(cell, observe(cell)).first;
        apply_observation(state, field, cell, it->second);
        record.trajectory.push_back(cell);
        record.steps.push_back({cell, action, it->second.mean_score});
        record.observed.emplace(cell, it->second.mean_score);
    };
    const auto advance = [&](GridCoord cell, const char* action) {
        if (!adjacent(state.position, cell) || !dims.contains(cell)) {
            throw InvariantError("planner produced a non-adjacent step");
        }
        state.previous_novelty = state.last_heatmap->mean_score;
        state.heading = direction_between(state.position, cell);
        state.previous = state.position;
        state.position = cell;
        --state.energy;
        ++record.moves_used;
        enter(cell, action);
    };

    enter(home, "start");
    bool active = true;
    while (active) {
        const Grid<double> phi_hat = effective_field(state, field);
        const Action action = choose_next(state, field, phi_hat);
        if (const auto* mv = std::get_if<Move>(&action)) {
            advance(step(state.position, mv->direction), "move");
        } else if (const auto* fp = std::get_if<FollowPath>(&action)) {
            for (GridCoord c : fp->cells) advance(c, "follow");
        } else if (const auto* rh = std::get_if<ReturnHome>(&action)) {
            for (GridCoord c : rh->cells) advance(c, "return");
            active = false;
        } else {
            active = false;
        }
        if (state.energy < 0) throw InvariantError("planner overspent its energy budget");
    }
    if (state.position != home) throw InvariantError("mission did not end at home");
    return record;
}

MissionRecord run_ipp_mission(const LabeledMap& map, const EmbeddingDatabase& db, GridCoord home, int budget,
                              const Thresholds& thresholds, const PlannerParams& params, std::size_t k) {
    if (db.empty()) throw PreconditionError("run_ipp_mission: empty database, use the lawnmower fallback");
    return run_ipp_mission(map.grid(), home, budget, thresholds, params, [&](GridCoord cell) {
        return novelty_heatmap(db, extract_features(cell_patch(map, cell), cell), k);
    });
}

std::string trace_csv(const MissionRecord& record) {
    std::string out = "step,row,col,mean_novelty,action\n";
    char buf[128];
    for (std::size_t i = 0; i < record.steps.size(); ++i) {
        const TraceStep& s = record.steps[i];
        if (std::isnan(s.novelty)) {
            std::snprintf(buf, sizeof buf, "%zu,%d,%d,nan,%s\n", i, s.cell.row, s.cell.col, s.action.c_str());
        } else {
            std::snprintf(buf, sizeof buf, "%zu,%d,%d,%.6f,%s\n", i, s.cell.row, s.cell.col, s.novelty,
                          s.action.c_str());
        }
        out += buf;
    }
    return out;
}

}  // namespace nipp
