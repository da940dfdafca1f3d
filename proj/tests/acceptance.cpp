// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "nipp/harness.hpp"
#include "nipp/simd/kernels.hpp"
#include "support.hpp"

using namespace nipp;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail = what;
        pass = pass && ok;
    }
};

struct Criterion {
    int number;
    const char* title;
    double limit_s;
    std::function<Outcome()> run;
};

Embedding random_embedding(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Embedding v;
    for (double& x : v) x = n(rng);
    return v;
}

EmbeddingDatabase database_of(const std::vector<Embedding>& vs) {
    std::vector<EmbeddingDatabase::Entry> e;
    for (const auto& v : vs) e.push_back({v, 0});
    return EmbeddingDatabase(e, 1);
}

// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
    Outcome out;
    std::mt19937_64 rng(1);

    std::vector<Embedding> vs;
    for (int i = 0; i < 200; ++i) vs.push_back(random_embedding(rng));
    for (int i = 0; i < 10; ++i) vs[static_cast<std::size_t>(190 + i)] = vs[static_cast<std::size_t>(i * 3)];
    const EmbeddingDatabase db = database_of(vs);
    int knn_checked = 0;
    for (int q = 0; q < 50; ++q) {
        const Embedding query = random_embedding(rng);
        std::vector<std::pair<double, std::size_t>> ranked;
        for (std::size_t i = 0; i < vs.size(); ++i) {
            double ab = 0, aa = 0, bb = 0;
            for (int d = 0; d < kFeatureDim; ++d) {
                ab += vs[i][d] * query[d];
                aa += vs[i][d] * vs[i][d];
                bb += query[d] * query[d];
            }
            ranked.push_back({-ab / std::sqrt(aa * bb), i});
        }
        std::sort(ranked.begin(), ranked.end());
        for (std::size_t k : {1u, 5u, 20u}) {
            const auto got = db.k_nearest(query, k);
            for (std::size_t i = 0; i < k; ++i) {
                out.require(got[i].index == ranked[i].second, "k_nearest disagrees with the exhaustive scan");
            }
            ++knn_checked;
        }
    }

    int paths = 0;
    for (int t = 0; t < 50; ++t) {
        Grid<std::uint8_t> mask({16, 16}, 0);
        std::bernoulli_distribution visited(0.55 + 0.44 * t / 50.0);
        for (auto& v : mask.values()) v = visited(rng) ? 1 : 0;
        const GridCoord from{static_cast<int>(rng() % 16), static_cast<int>(rng() % 16)};
        Grid<int> dist({16, 16}, -1);
        std::deque<GridCoord> q{from};
        dist[from] = 0;
        int best = -1;
        while (!q.empty()) {
            const GridCoord c = q.front();
            q.pop_front();
            if (c != from && !mask[c] && (best < 0 || dist[c] < best)) best = dist[c];
            for (Direction d : kDirectionOrder) {
                const GridCoord n = step(c, d);
                if (mask.dims().contains(n) && dist[n] < 0) {
                    dist[n] = dist[c] + 1;
                    q.push_back(n);
                }
            }
        }
        const auto path = shortest_escape_path(mask, from);
        if (best < 0) {
            out.require(!path, "escape path reported on a fully visited grid");
        } else {
            out.require(path && static_cast<int>(path->size()) == best, "escape path length differs from BFS");
        }
        ++paths;
    }

    const std::vector<std::uint8_t> ids{0, 1};
    const IouReport r = mean_iou(LabelGrid{1, 4, {0, 0, 1, 0}}, LabelGrid{1, 4, {0, 0, 1, 1}}, ids);
    out.require(r.mean == 7.0 / 12.0, "mean IoU of the hand-counted example is not 7/12");
    if (out.pass) {
        out.detail = std::to_string(knn_checked) + " kNN queries, " + std::to_string(paths) +
                     " escape masks, mIoU 7/12 exact";
    }
    return out;
}

Outcome numerical_invariants() {
    Outcome out;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-5.0, 5.0);

    for (int t = 0; t < 1000; ++t) {
        std::vector<Embedding> vs;
        const std::size_t n = 1 + rng() % 40;
        for (std::size_t i = 0; i < n; ++i) vs.push_back(random_embedding(rng));
        const std::size_t k = 1 + rng() % n;
        const double s = novelty_score(database_of(vs), random_embedding(rng), k);
        out.require(s >= 0.0 && s <= 2.0, "novelty outside [0,2]");

        const Embedding dup = random_embedding(rng);
        for (std::size_t i = 0; i < k; ++i) vs.push_back(dup);
        out.require(novelty_score(database_of(vs), dup, k) == 0.0, "duplicated query has non-zero novelty");
    }

    for (int t = 0; t < 100; ++t) {
        const double a = u(rng), b = u(rng), c = u(rng);
        ScoreGrid s;
        for (int r = 0; r < kSubpatchGrid; ++r) {
            for (int col = 0; col < kSubpatchGrid; ++col) s[static_cast<std::size_t>(r * kSubpatchGrid + col)] = a * col + b * r + c;
        }
        const Gradient g = heatmap_gradient(s);
        out.require(std::fabs(g.dcol - a) <= 1e-9 && std::fabs(g.drow - b) <= 1e-9, "affine gradient not recovered");
    }

    for (int t = 0; t < 100; ++t) {
        const GridDims dims{1 + static_cast<int>(rng() % 12), 1 + static_cast<int>(rng() % 12)};
        const double v = u(rng);
        const Grid<double> constant(dims, v);
        out.require(box_smooth(constant) == constant, "constant field is not a fixed point");

        Grid<double> field(dims, 0.0);
        for (double& x : field.values()) x = u(rng);
        const Grid<double> s = box_smooth(field);
        for (int r = 0; r < dims.rows; ++r) {
            for (int col = 0; col < dims.cols; ++col) {
                double lo = std::numeric_limits<double>::infinity(), hi = -lo;
                for (int dr = -1; dr <= 1; ++dr) {
                    for (int dc = -1; dc <= 1; ++dc) {
                        const double x = field[{std::clamp(r + dr, 0, dims.rows - 1), std::clamp(col + dc, 0, dims.cols - 1)}];
                        lo = std::min(lo, x);
                        hi = std::max(hi, x);
                    }
                }
                out.require(s[{r, col}] >= lo && s[{r, col}] <= hi, "smoothed value leaves the 3x3 envelope");
            }
        }
    }
    if (out.pass) out.detail = "1000 novelty cases, 100 affine fields, 100 smoothing fields";
    return out;
}

Outcome planner_safety() {
    Outcome out;
    int missions = 0, moves_checked = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed + 1000);
        SyntheticSpec spec = testing::four_class_spec(4 + static_cast<int>(rng() % 13), 4 + static_cast<int>(rng() % 13), 16);
        spec.noise = static_cast<int>(rng() % 40);
        spec.region_sites = 2 + static_cast<int>(rng() % 10);
        const LabeledMap map = generate_synthetic_map(spec, seed);
        const MapFeatures features(map);
        const GridDims dims = map.grid();
        const auto random_cell = [&] { return GridCoord{static_cast<int>(rng() % dims.rows), static_cast<int>(rng() % dims.cols)}; };

        TrainingPool pool;
        const int seen_budget = 3 + static_cast<int>(rng() % 20);
        add_observations(pool, features, small_lawnmower_mission(random_cell(), seen_budget, dims).observed_in_order(), 1);
        const EmbeddingDatabase db = build_database(pool);
        const std::size_t k = 1 + rng() % std::min<std::size_t>(db.size(), 30);
        const Thresholds calibrated = calibrate_from_pool(db, pool, k);
        const GridCoord home = random_cell();
        const int budget = static_cast<int>(rng() % 70);

        PlannerParams params;
        params.prior_familiarity = 0.2 + 0.6 * static_cast<double>(rng() % 100) / 100.0;
        params.border_radius = static_cast<int>(rng() % 4);
        params.gradient_weight = static_cast<double>(rng() % 100) / 50.0;
        const HeatmapSource observe = [&](GridCoord c) { return novelty_heatmap(db, features.cell(c), k); };

        const MissionRecord a = run_ipp_mission(dims, home, budget, calibrated, params, observe);
        const MissionRecord b = run_ipp_mission(dims, home, budget, calibrated, params, observe);
        ++missions;
        out.require(a.moves_used <= budget, "moves_used exceeds the budget");
        out.require(a.trajectory.front() == home && a.trajectory.back() == home, "trajectory does not start and end at home");
        out.require(trace_csv(a) == trace_csv(b) && a.trajectory == b.trajectory && a.observed == b.observed,
                    "repeated mission differs");

        // Greedy-exploration property with the gradient and smoothing branches off.
        PlannerParams greedy = params;
        greedy.gradient_weight = 0.0;
        greedy.visited_penalty = 2.0;
        greedy.prior_familiarity = 0.5;
        greedy.border_weight = 1.0;
        const Thresholds no_high{calibrated.alpha, std::numeric_limits<double>::infinity()};
        const MissionRecord g = run_ipp_mission(dims, home, budget, no_high, greedy, observe);
        out.require(g.moves_used <= budget && g.trajectory.back() == home, "greedy mission violates energy safety");
        std::set<GridCoord> visited{g.trajectory.front()};
        for (std::size_t i = 1; i < g.trajectory.size(); ++i) {
            const GridCoord from = g.trajectory[i - 1];
            const GridCoord to = g.trajectory[i];
            if (g.steps[i].action == "move") {
                bool unvisited_neighbor = false;
                for (Direction d : kDirectionOrder) {
                    const GridCoord n = step(from, d);
                    unvisited_neighbor |= dims.contains(n) && !visited.contains(n);
                }
                if (unvisited_neighbor) {
                    out.require(!visited.contains(to), "move entered a visited cell next to an unvisited one");
                    ++moves_checked;
                }
            }
            visited.insert(to);
        }
    }
    if (out.pass) {
        out.detail = std::to_string(missions) + " worlds, " + std::to_string(moves_checked) +
                     " greedy moves checked";
    }
    return out;
}

// First mission index reaching the target, or infinity.
double first_reaching(const std::vector<MetricsRow>& rows, double target) {
    for (const auto& r : rows) {
        if (r.miou >= target) return r.mission;
    }
    return std::numeric_limits<double>::infinity();
}

Outcome trend_reproduction() {
    Outcome out;
    const SyntheticSpec spec = testing::four_class_spec(32, 32, 128);
    int better_m3 = 0, faster = 0;
    std::string table;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const LabeledMap map = generate_synthetic_map(spec, seed);
        const MapFeatures features(map);
        const LabelGrid truth = features.ground_truth();

        int rare_cells = 0;
        for (int r = 0; r < 32; ++r) {
            for (int c = 0; c < 32; ++c) rare_cells += majority_label(map, cell_rect(map, {r, c})) == 3 ? 1 : 0;
        }
        out.require(rare_cells > 0 && rare_cells <= 1024 / 20, "rare region outside (0, 5%] of cells");

        ExperimentConfig cfg;
        cfg.synthetic_spec_path = "generated";
        cfg.seed = seed;
        cfg.missions = 5;
        cfg.budget = 64;
        cfg.starts = {{4, 4}, {4, 27}, {27, 4}, {27, 27}, {16, 16}};
        cfg.planner = PlannerKind::Ipp;
        const auto ipp = run_experiment(cfg, map, features).rows;
        cfg.planner = PlannerKind::BigLawnmower;
        const auto big = run_experiment(cfg, map, features).rows;

        const bool m3 = ipp[2].miou >= big[2].miou;
        const double ti = first_reaching(ipp, 0.9), tb = first_reaching(big, 0.9);
        const bool reach = ti <= tb;
        better_m3 += m3 ? 1 : 0;
        faster += reach ? 1 : 0;
        char line[160];
        std::snprintf(line, sizeof line, "      seed %llu: mIoU@3 ipp %.4f big %.4f | reach0.9 ipp %s big %s | rare cells %d\n",
                      static_cast<unsigned long long>(seed), ipp[2].miou, big[2].miou,
                      std::isinf(ti) ? "never" : std::to_string(static_cast<int>(ti)).c_str(),
                      std::isinf(tb) ? "never" : std::to_string(static_cast<int>(tb)).c_str(), rare_cells);
        table += line;
    }
    out.require(better_m3 >= 8, "IPP mIoU after 3 missions below big lawnmower in more than 2 seeds");
    out.require(faster >= 8, "IPP reaches mIoU 0.9 later than big lawnmower in more than 2 seeds");
    const std::string summary = "mIoU@3 " + std::to_string(better_m3) + "/10, reach-0.9 " + std::to_string(faster) + "/10";
    out.detail = (out.pass ? summary : out.detail + " (" + summary + ")") + "\n" + table;
    if (!out.detail.empty() && out.detail.back() == '\n') out.detail.pop_back();
    return out;
}

double mean_observed_novelty(const MissionRecord& rec, const EmbeddingDatabase& db, const MapFeatures& f, std::size_t k) {
    double sum = 0.0;
    for (const auto& [cell, _] : rec.observed) sum += novelty_heatmap(db, f.cell(cell), k).mean_score;
    return sum / static_cast<double>(rec.observed.size());
}

Outcome novelty_seeking() {
    Outcome out;
    constexpr int kGrid = 16;
    constexpr int kBudget = 24;
    constexpr std::size_t kK = 20;
    SyntheticSpec spec = testing::four_class_spec(kGrid, kGrid, 64);
    spec.rare_fraction = 0.06;
    int wins = 0;
    std::string table;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const LabeledMap map = generate_synthetic_map(spec, seed + 100);
        const MapFeatures features(map);
        const GridDims dims = map.grid();

        // Mission 1: a small lawnmower whose rectangle holds no rare-class subpatch.
        std::optional<GridCoord> first;
        const std::vector<GridCoord> candidates{{0, 0}, {0, kGrid - 1}, {kGrid - 1, 0}, {kGrid - 1, kGrid - 1},
                                                {0, kGrid / 2}, {kGrid / 2, 0}, {kGrid - 1, kGrid / 2},
                                                {kGrid / 2, kGrid - 1}};
        for (GridCoord s : candidates) {
            bool clean = true;
            for (GridCoord c : small_lawnmower_mission(s, kBudget, dims).trajectory) {
                for (auto l : features.truth(c)) clean = clean && l != 3;
            }
            if (clean) {
                first = s;
                break;
            }
        }
        out.require(first.has_value(), "no mission-1 start avoids the rare region");
        if (!first) continue;

        TrainingPool pool;
        add_observations(pool, features, small_lawnmower_mission(*first, kBudget, dims).observed_in_order(), 1);
        for (const auto& rec : pool.records()) out.require(rec.label != 3, "rare class leaked into the mission-1 pool");
        const EmbeddingDatabase db = build_database(pool);
        const Thresholds th = calibrate_from_pool(db, pool, kK);

        // Mission 2 leaves from the centre of the map for both planners.
        const GridCoord second{kGrid / 2, kGrid / 2};
        const MissionRecord ipp = run_ipp_mission(dims, second, kBudget, th, PlannerParams{}, [&](GridCoord c) {
            return novelty_heatmap(db, features.cell(c), kK);
        });
        const MissionRecord small = small_lawnmower_mission(second, kBudget, dims);
        const double ni = mean_observed_novelty(ipp, db, features, kK);
        const double ns = mean_observed_novelty(small, db, features, kK);
        wins += ni > ns ? 1 : 0;
        char line[128];
        std::snprintf(line, sizeof line, "      seed %llu: ipp %.4f small %.4f\n",
                      static_cast<unsigned long long>(seed + 100), ni, ns);
        table += line;
    }
    out.require(wins >= 8, "IPP mission 2 was not more novel in at least 8 seeds");
    const std::string summary = std::to_string(wins) + "/10 seeds";
    out.detail = (out.pass ? summary : out.detail + " (" + summary + ")") + "\n" + table;
    if (!out.detail.empty() && out.detail.back() == '\n') out.detail.pop_back();
    return out;
}

Outcome coverage_sanity() {
    Outcome out;
    std::string values;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const LabeledMap map = generate_synthetic_map(testing::four_class_spec(16, 16, 64), seed);
        const MapFeatures features(map);
        ExperimentConfig cfg;
        cfg.synthetic_spec_path = "generated";
        cfg.planner = PlannerKind::BigLawnmower;
        cfg.missions = 4;
        cfg.budget = 63;  // 4 * 64 cells = the whole 16x16 grid
        const auto rows = run_experiment(cfg, map, features).rows;
        out.require(rows.back().pool_cells == 256, "big lawnmower did not cover the map");
        out.require(rows.back().miou == 1.0, "full coverage mIoU is not exactly 1");
        values += (values.empty() ? "" : ", ") + std::to_string(rows.back().miou);
    }
    if (out.pass) out.detail = "final mIoU " + values;
    return out;
}

}  // namespace

int main() {
    std::printf("similarity kernels: %s\n", std::string(simd::level_name(simd::active_level())).c_str());
    const std::vector<Criterion> criteria{
        {1, "oracle equivalence", 10.0, oracle_equivalence},
        {2, "numerical invariants", 5.0, numerical_invariants},
        {3, "planner safety and determinism", 60.0, planner_safety},
        {4, "trend reproduction at desk scale", 120.0, trend_reproduction},
        {5, "novelty-seeking behaviour", 60.0, novelty_seeking},
        {6, "coverage sanity", std::numeric_limits<double>::infinity(), coverage_sanity},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        const bool in_time = secs < c.limit_s;
        const bool pass = o.pass && in_time;
        if (!pass) ++failures;
        std::printf("[PRIMARY] criterion %d %s: %s (%.2f s%s) %s\n", c.number, c.title, pass ? "PASS" : "FAIL", secs,
                    in_time ? "" : ", over time limit", o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
