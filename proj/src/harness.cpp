#include "nipp/harness.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

#include "keyvalue.hpp"
#include "nipp/netpbm.hpp"

namespace nipp {

std::string_view planner_name(PlannerKind kind) noexcept {
    switch (kind) {
        case PlannerKind::Ipp: return "ipp";
        case PlannerKind::BigLawnmower: return "big_lawnmower";
        case PlannerKind::SmallLawnmower: return "small_lawnmower";
    }
    return "unknown";
}

std::optional<PlannerKind> parse_planner(std::string_view name) noexcept {
    for (PlannerKind k : {PlannerKind::Ipp, PlannerKind::BigLawnmower, PlannerKind::SmallLawnmower}) {
        if (planner_name(k) == name) return k;
    }
    return std::nullopt;
}

GridCoord ExperimentConfig::start_for(int mission_index) const {
    if (starts.empty()) return {0, 0};
    if (starts.size() == 1) return starts.front();
    return starts.at(static_cast<std::size_t>(mission_index - 1));
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

std::string format_real(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::set<std::string> seen;
    bool have_planner = false;
    bool have_missions = false;
    bool have_budget = false;

    for (const auto& kv : detail::parse_key_values(text)) {
        if (kv.key != "start" && !seen.insert(kv.key).second) {
            throw ConfigError(kv.line, "duplicate key '" + kv.key + "'");
        }
        const auto integer = [&kv](long lo) {
            const auto v = detail::parse_int<long>(kv.value);
            if (!v) throw ConfigError(kv.line, kv.key + " must be an integer");
            if (*v < lo) throw ConfigError(kv.line, kv.key + " must be >= " + std::to_string(lo));
            if (*v > 1'000'000'000) throw ConfigError(kv.line, kv.key + " is out of range");
            return *v;
        };
        const auto real = [&kv](bool non_negative) {
            const auto v = detail::parse_real(kv.value);
            if (!v || !std::isfinite(*v)) throw ConfigError(kv.line, kv.key + " must be a finite real");
            if (non_negative && *v < 0.0) throw ConfigError(kv.line, kv.key + " must be non-negative");
            return *v;
        };

        if (kv.key == "map") {
            cfg.map_path = kv.value;
        } else if (kv.key == "synthetic_spec") {
            cfg.synthetic_spec_path = kv.value;
        } else if (kv.key == "seed") {
            const auto v = detail::parse_int<std::uint64_t>(kv.value);
            if (!v) throw ConfigError(kv.line, "seed must be a non-negative integer");
            cfg.seed = *v;
        } else if (kv.key == "planner") {
            const auto p = parse_planner(kv.value);
            if (!p) throw ConfigError(kv.line, "planner must be ipp, big_lawnmower or small_lawnmower");
            cfg.planner = *p;
            have_planner = true;
        } else if (kv.key == "missions") {
            cfg.missions = static_cast<int>(integer(1));
            have_missions = true;
        } else if (kv.key == "budget") {
            cfg.budget = static_cast<int>(integer(0));
            have_budget = true;
        } else if (kv.key == "start") {
            const auto parts = detail::split(kv.value, ',');
            const auto r = parts.size() == 2 ? detail::parse_int<int>(parts[0]) : std::nullopt;
            const auto c = parts.size() == 2 ? detail::parse_int<int>(parts[1]) : std::nullopt;
            if (!r || !c) throw ConfigError(kv.line, "start must be <row>,<col>");
            if (*r < 0 || *c < 0) throw ConfigError(kv.line, "start coordinates must be non-negative");
            cfg.starts.push_back({*r, *c});
        } else if (kv.key == "k") {
            cfg.k = static_cast<std::size_t>(integer(1));
        } else if (kv.key == "f0") {
            cfg.params.prior_familiarity = real(false);
        } else if (kv.key == "c_visited") {
            cfg.params.visited_penalty = real(true);
        } else if (kv.key == "c_border") {
            cfg.params.border_weight = real(true);
        } else if (kv.key == "border_radius") {
            cfg.params.border_radius = static_cast<int>(integer(0));
        } else if (kv.key == "w_grad") {
            cfg.params.gradient_weight = real(true);
        } else if (kv.key == "c_forward") {
            cfg.params.forward_penalty = real(true);
        } else if (kv.key == "out") {
            cfg.out = kv.value;
        } else {
            throw ConfigError(kv.line, "unknown key '" + kv.key + "'");
        }
    }

    if (cfg.map_path.has_value() == cfg.synthetic_spec_path.has_value()) {
        throw ConfigError(0, "exactly one of map= or synthetic_spec= is required");
    }
    if (!have_planner) throw ConfigError(0, "missing required key 'planner'");
    if (!have_missions) throw ConfigError(0, "missing required key 'missions'");
    if (!have_budget) throw ConfigError(0, "missing required key 'budget'");
    if (cfg.planner != PlannerKind::BigLawnmower && cfg.starts.empty()) {
        throw ConfigError(0, "planner " + std::string(planner_name(cfg.planner)) + " needs start=<row>,<col>");
    }
    if (cfg.starts.size() > 1 && cfg.starts.size() != static_cast<std::size_t>(cfg.missions)) {
        throw ConfigError(0, "give one start per mission or a single start");
    }
    return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::string out;
    if (cfg.map_path) out += "map=" + *cfg.map_path + "\n";
    if (cfg.synthetic_spec_path) out += "synthetic_spec=" + *cfg.synthetic_spec_path + "\n";
    out += "seed=" + std::to_string(cfg.seed) + "\n";
    out += "planner=" + std::string(planner_name(cfg.planner)) + "\n";
    out += "missions=" + std::to_string(cfg.missions) + "\n";
    out += "budget=" + std::to_string(cfg.budget) + "\n";
    for (GridCoord s : cfg.starts) out += "start=" + std::to_string(s.row) + "," + std::to_string(s.col) + "\n";
    out += "k=" + std::to_string(cfg.k) + "\n";
    out += "f0=" + format_real(cfg.params.prior_familiarity) + "\n";
    out += "c_visited=" + format_real(cfg.params.visited_penalty) + "\n";
    out += "c_border=" + format_real(cfg.params.border_weight) + "\n";
    out += "border_radius=" + std::to_string(cfg.params.border_radius) + "\n";
    out += "w_grad=" + format_real(cfg.params.gradient_weight) + "\n";
    out += "c_forward=" + format_real(cfg.params.forward_penalty) + "\n";
    if (!cfg.out.empty()) out += "out=" + cfg.out + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Metrics

std::string metrics_csv(std::span<const MetricsRow> rows, std::span<const std::string> class_names) {
    std::string out = "mission,planner,pool_cells,miou";
    for (const auto& name : class_names) out += ",iou_" + name;
    out += ",high_novelty_cells\n";
    char buf[64];
    const auto real = [&buf](double v) {
        if (std::isnan(v)) return std::string("nan");
        std::snprintf(buf, sizeof buf, "%.6f", v);
        return std::string(buf);
    };
    for (const auto& row : rows) {
        if (row.per_class_iou.size() != class_names.size()) {
            throw PreconditionError("metrics row has a different class count than the header");
        }
        out += std::to_string(row.mission) + "," + row.planner + "," + std::to_string(row.pool_cells) + "," +
               real(row.miou);
        for (double v : row.per_class_iou) out += "," + real(v);
        out += "," + std::to_string(row.high_novelty_cells) + "\n";
    }
    return out;
}

void write_metrics(std::span<const MetricsRow> rows, std::span<const std::string> class_names,
                   const std::filesystem::path& path) {
    netpbm::write_text(path, metrics_csv(rows, class_names));
}

std::vector<MetricsRow> parse_metrics(const std::string& text, std::vector<std::string>* class_names) {
    std::vector<std::string_view> lines;
    for (std::string_view rest = text; !rest.empty();) {
        const auto nl = rest.find('\n');
        lines.push_back(rest.substr(0, nl));
        rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    }
    if (lines.empty()) throw IoError("metrics: missing header");
    const auto header = detail::split(lines.front(), ',');
    if (header.size() < 5 || header[0] != "mission" || header.back() != "high_novelty_cells") {
        throw IoError("metrics: unexpected header");
    }
    const std::size_t n_classes = header.size() - 5;
    if (class_names) {
        class_names->clear();
        for (std::size_t i = 0; i < n_classes; ++i) class_names->emplace_back(header[4 + i].substr(4));
    }
    const auto real = [](std::string_view s) {
        if (s == "nan") return std::nan("");
        const auto v = detail::parse_real(s);
        if (!v) throw IoError("metrics: bad real '" + std::string(s) + "'");
        return *v;
    };
    std::vector<MetricsRow> rows;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty()) continue;
        const auto f = detail::split(lines[li], ',');
        if (f.size() != header.size()) throw IoError("metrics: wrong field count on line " + std::to_string(li + 1));
        MetricsRow row;
        const auto mission = detail::parse_int<int>(f[0]);
        const auto pool = detail::parse_int<std::size_t>(f[2]);
        const auto high = detail::parse_int<int>(f.back());
        if (!mission || !pool || !high) throw IoError("metrics: bad integer on line " + std::to_string(li + 1));
        row.mission = *mission;
        row.planner = std::string(f[1]);
        row.pool_cells = *pool;
        row.miou = real(f[3]);
        for (std::size_t i = 0; i < n_classes; ++i) row.per_class_iou.push_back(real(f[4 + i]));
        row.high_novelty_cells = *high;
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Rendering

std::vector<std::uint8_t> render_heatmap(std::span<const double> values, int width, int height, double lo, double hi) {
    if (!(lo < hi)) throw PreconditionError("render_heatmap: lo must be below hi");
    if (values.size() != static_cast<std::size_t>(width) * height) {
        throw PreconditionError("render_heatmap: value count does not match dimensions");
    }
    std::vector<std::uint8_t> gray(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double scaled = std::round(255.0 * (values[i] - lo) / (hi - lo));
        gray[i] = static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
    }
    return netpbm::encode_pgm(width, height, gray);
}

std::vector<std::uint8_t> render_path_overlay(const LabeledMap& map, std::span<const GridCoord> trajectory,
                                              GridCoord home) {
    std::vector<std::uint8_t> rgb = map.imagery();
    const auto tint = [&](GridCoord cell, std::array<int, 3> target) {
        const PixelRect rect = cell_rect(map, cell);
        for (int r = rect.row; r < rect.row + rect.height; ++r) {
            for (int c = rect.col; c < rect.col + rect.width; ++c) {
                const std::size_t i = (static_cast<std::size_t>(r) * map.width_px() + c) * 3;
                for (int ch = 0; ch < 3; ++ch) {
                    rgb[i + ch] = static_cast<std::uint8_t>((map.imagery()[i + ch] + target[ch]) / 2);
                }
            }
        }
    };
    std::set<GridCoord> cells(trajectory.begin(), trajectory.end());
    cells.erase(home);
    for (GridCoord c : cells) tint(c, {0, 0, 255});
    tint(home, {255, 0, 0});
    return netpbm::encode_ppm(map.width_px(), map.height_px(), rgb);
}

std::vector<std::uint8_t> render_labels(const LabelGrid& grid) {
    return netpbm::encode_pgm(grid.cols, grid.rows, grid.labels);
}

LabelGrid decode_label_pgm(const std::vector<std::uint8_t>& bytes) {
    const netpbm::Image img = netpbm::decode(bytes);
    if (img.channels != 1) throw IoError("prediction must be a P5 image");
    return {img.height, img.width, img.pixels};
}

std::vector<double> whole_map_novelty(const EmbeddingDatabase& db, const MapFeatures& features, std::size_t k) {
    const GridDims grid = features.grid();
    const int cols = grid.cols * kSubpatchGrid;
    std::vector<double> out(grid.cell_count() * kSubpatchesPerCell);
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            const FeatureGrid& fg = features.cell({r, c});
            for (int i = 0; i < kSubpatchesPerCell; ++i) {
                const int pr = r * kSubpatchGrid + i / kSubpatchGrid;
                const int pc = c * kSubpatchGrid + i % kSubpatchGrid;
                out[static_cast<std::size_t>(pr) * cols + pc] = novelty_score(db, fg[static_cast<std::size_t>(i)].values, k);
            }
        }
    }
    return out;
}

Thresholds calibrate_from_pool(const EmbeddingDatabase& db, const TrainingPool& pool, std::size_t k) {
    std::vector<double> scores;
    scores.reserve(pool.records().size());
    for (const auto& rec : pool.records()) scores.push_back(novelty_score(db, rec.feature.values, k));
    return calibrate_thresholds(scores);
}

// ---------------------------------------------------------------------------
// Experiment loop

LabeledMap load_experiment_map(const ExperimentConfig& config) {
    if (config.map_path) return load_map_bundle(*config.map_path);
    const auto bytes = netpbm::read_file(*config.synthetic_spec_path);
    const SyntheticSpec spec = parse_synthetic_spec(std::string(bytes.begin(), bytes.end()));
    return generate_synthetic_map(spec, config.seed);
}

namespace {

void write_artifacts(const std::filesystem::path& dir, int mission, const MissionRecord& record,
                     const LabeledMap& map, const LabelGrid& prediction, const PatchClassifier& classifier,
                     const MapFeatures& features, PlannerKind planner, std::size_t k) {
    const std::string suffix = "_m" + std::to_string(mission);
    netpbm::write_text(dir / ("trace" + suffix + ".csv"), trace_csv(record));
    netpbm::write_file(dir / ("prediction" + suffix + ".pgm"), render_labels(prediction));
    if (!record.trajectory.empty()) {
        netpbm::write_file(dir / ("path" + suffix + ".ppm"), render_path_overlay(map, record.trajectory, record.home));
    }
    classifier.database().save(dir / ("pool" + suffix + ".nippdb"));
    // Reporting only: the planner never sees this map.
    if (planner == PlannerKind::Ipp && classifier.database().size() >= k) {
        const auto scores = whole_map_novelty(classifier.database(), features, k);
        netpbm::write_file(dir / ("novelty" + suffix + ".pgm"),
                           render_heatmap(scores, prediction.cols, prediction.rows, 0.0, 2.0));
    }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const LabeledMap& map, const MapFeatures& features,
                                const std::optional<std::filesystem::path>& out_dir) {
    const GridDims grid = map.grid();
    if (config.missions < 1) throw ConfigError(0, "missions must be >= 1");
    if (config.k < 1) throw ConfigError(0, "k must be >= 1");
    for (GridCoord s : config.starts) {
        if (!grid.contains(s)) {
            throw ConfigError(0, "start " + std::to_string(s.row) + "," + std::to_string(s.col) +
                                     " is outside the " + std::to_string(grid.rows) + "x" +
                                     std::to_string(grid.cols) + " grid");
        }
    }
    if (out_dir) {
        std::error_code ec;
        std::filesystem::create_directories(*out_dir, ec);
        if (ec) throw IoError("cannot create " + out_dir->string() + ": " + ec.message());
    }

    std::vector<std::uint8_t> class_ids;
    std::vector<std::string> class_names;
    for (const auto& c : map.classes()) {
        class_ids.push_back(c.id);
        class_names.push_back(c.name);
    }
    const LabelGrid truth = features.ground_truth();

    ExperimentResult result;
    TrainingPool pool;
    LawnmowerCursor cursor;
    std::shared_ptr<const EmbeddingDatabase> db;
    MapPredictor predictor(features);

    for (int m = 1; m <= config.missions; ++m) {
        const GridCoord start = config.start_for(m);
        std::optional<Thresholds> thresholds;
        if (db) {
            if (db->size() < config.k) throw ConfigError(0, "k exceeds the number of pooled embeddings");
            thresholds = calibrate_from_pool(*db, pool, config.k);
        }
        const auto heatmap_of = [&](GridCoord cell) { return novelty_heatmap(*db, features.cell(cell), config.k); };

        MissionRecord record;
        switch (config.planner) {
            case PlannerKind::Ipp:
                if (!db) {
                    record = small_lawnmower_mission(start, config.budget, grid);
                } else {
                    record = run_ipp_mission(grid, start, config.budget, *thresholds, config.params, heatmap_of);
                }
                record.planner_name = "ipp";
                break;
            case PlannerKind::BigLawnmower: {
                auto big = big_lawnmower_mission(cursor, config.budget, grid);
                cursor = big.cursor;
                record = std::move(big.record);
                break;
            }
            case PlannerKind::SmallLawnmower:
                record = small_lawnmower_mission(start, config.budget, grid);
                break;
        }

        // Novelty of what was seen, judged against the database the mission flew with.
        int high = 0;
        if (db) {
            for (auto& [cell, novelty] : record.observed) {
                if (std::isnan(novelty)) novelty = heatmap_of(cell).mean_score;
                if (novelty > thresholds->beta) ++high;
            }
            for (auto& s : record.steps) s.novelty = record.observed.at(s.cell);
        }

        add_observations(pool, features, record.observed_in_order(), m);
        if (pool.empty()) throw InvariantError("training pool is empty after a mission");
        const PatchClassifier classifier = train_classifier(pool);
        const LabelGrid prediction = predictor.update(classifier);
        const IouReport iou = mean_iou(prediction, truth, class_ids);

        MetricsRow row;
        row.mission = m;
        row.planner = std::string(planner_name(config.planner));
        row.pool_cells = pool.cells().size();
        row.miou = iou.mean;
        for (const auto& v : iou.per_class) row.per_class_iou.push_back(v ? *v : std::nan(""));
        row.high_novelty_cells = high;
        if (!result.rows.empty() && row.pool_cells < result.rows.back().pool_cells) {
            throw InvariantError("pool shrank between missions");
        }

        if (out_dir) write_artifacts(*out_dir, m, record, map, prediction, classifier, features, config.planner, config.k);
        result.rows.push_back(std::move(row));
        result.missions.push_back(std::move(record));
        db = classifier.shared_database();
    }

    if (out_dir) {
        write_metrics(result.rows, class_names, *out_dir / "metrics.csv");
        netpbm::write_text(*out_dir / "notes.txt",
                           "Lawnmower baselines do not reserve energy for the flight home; their moves_used may "
                           "equal the budget while IPP missions always end at home.\n");
    }
    return result;
}

std::vector<MetricsRow> run_experiment(const ExperimentConfig& config) {
    const LabeledMap map = load_experiment_map(config);
    const MapFeatures features(map);
    std::optional<std::filesystem::path> out;
    if (!config.out.empty()) out = config.out;
    return run_experiment(config, map, features, out).rows;
}

}  // namespace nipp
