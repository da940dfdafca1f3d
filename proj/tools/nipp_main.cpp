// nipp: novelty-driven informative path planning simulator.
//
// Exit codes: 0 ok, 1 configuration error, 2 I/O error, 3 internal invariant violation.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>

#include "nipp/harness.hpp"
#include "nipp/netpbm.hpp"
#include "nipp/simd/kernels.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;
constexpr int kExitInvariant = 3;

std::string read_text(const std::string& path) {
    const auto bytes = nipp::netpbm::read_file(path);
    return {bytes.begin(), bytes.end()};
}

nipp::GridCoord parse_coord(const std::string& text) {
    const auto comma = text.find(',');
    try {
        if (comma == std::string::npos) throw std::invalid_argument("no comma");
        const int r = std::stoi(text.substr(0, comma));
        const int c = std::stoi(text.substr(comma + 1));
        return {r, c};
    } catch (const std::exception&) {
        throw nipp::ConfigError(0, "expected <row>,<col> but got '" + text + "'");
    }
}

int cmd_gen_map(const std::string& spec_path, std::uint64_t seed, const std::string& out) {
    const auto spec = nipp::parse_synthetic_spec(read_text(spec_path));
    const auto map = nipp::generate_synthetic_map(spec, seed);
    nipp::save_map_bundle(map, out);
    std::printf("wrote %dx%d px map (%dx%d cells) to %s\n", map.width_px(), map.height_px(), map.grid().rows,
                map.grid().cols, out.c_str());
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& out) {
    auto config = nipp::parse_config(read_text(config_path));
    if (!out.empty()) config.out = out;
    std::fprintf(stderr, "similarity kernels: %s\n",
                 std::string(nipp::simd::level_name(nipp::simd::active_level())).c_str());
    const auto rows = nipp::run_experiment(config);
    for (const auto& row : rows) {
        std::printf("mission %d  %-15s pool_cells=%zu  mIoU=%.4f  high_novelty=%d\n", row.mission, row.planner.c_str(),
                    row.pool_cells, row.miou, row.high_novelty_cells);
    }
    if (config.planner != nipp::PlannerKind::Ipp) {
        std::fprintf(stderr, "note: lawnmower baselines do not reserve energy for the return flight\n");
    }
    return 0;
}

int cmd_plan(const std::string& map_dir, const std::string& db_path, const std::string& start_text, int budget,
             std::size_t k, const std::string& out, std::optional<double> alpha, std::optional<double> beta) {
    const auto map = nipp::load_map_bundle(map_dir);
    const auto db = nipp::EmbeddingDatabase::load(db_path);
    const auto start = parse_coord(start_text);
    if (!map.grid().contains(start)) throw nipp::ConfigError(0, "start is outside the map grid");
    if (budget < 0) throw nipp::ConfigError(0, "budget must be non-negative");
    if (k < 1 || k > db.size()) throw nipp::ConfigError(0, "k must be in [1, database size]");

    nipp::Thresholds t;
    if (alpha && beta) {
        t = {*alpha, *beta};
    } else {
        // Without a pool, the dump itself serves as the calibration set.
        std::vector<double> scores;
        scores.reserve(db.size());
        for (std::size_t i = 0; i < db.size(); ++i) scores.push_back(nipp::novelty_score(db, db.values(i), k));
        t = nipp::calibrate_thresholds(scores);
    }
    if (t.alpha > t.beta) throw nipp::ConfigError(0, "alpha must not exceed beta");
    const auto record = nipp::run_ipp_mission(map, db, start, budget, t, nipp::PlannerParams{}, k);
    const std::string csv = nipp::trace_csv(record);
    if (out.empty()) {
        std::fwrite(csv.data(), 1, csv.size(), stdout);
    } else {
        nipp::netpbm::write_text(out, csv);
    }
    std::fprintf(stderr, "alpha=%.6f beta=%.6f moves=%d observed=%zu\n", t.alpha, t.beta, record.moves_used,
                 record.observed.size());
    return 0;
}

int cmd_novelty(const std::string& map_dir, const std::string& db_path, const std::string& out, std::size_t k) {
    const auto map = nipp::load_map_bundle(map_dir);
    const auto db = nipp::EmbeddingDatabase::load(db_path);
    if (k < 1 || k > db.size()) throw nipp::ConfigError(0, "k must be in [1, database size]");
    const nipp::MapFeatures features(map);
    const auto scores = nipp::whole_map_novelty(db, features, k);
    const int cols = map.grid().cols * nipp::kSubpatchGrid;
    const int rows = map.grid().rows * nipp::kSubpatchGrid;
    nipp::netpbm::write_file(out, nipp::render_heatmap(scores, cols, rows, 0.0, 2.0));
    return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& map_dir) {
    const auto map = nipp::load_map_bundle(map_dir);
    const auto pred = nipp::decode_label_pgm(nipp::netpbm::read_file(pred_path));
    const auto report = nipp::mean_iou(pred, map);
    for (std::size_t i = 0; i < report.per_class.size(); ++i) {
        const auto& c = map.classes()[i];
        if (report.per_class[i]) {
            std::printf("iou_%s=%.6f\n", c.name.c_str(), *report.per_class[i]);
        } else {
            std::printf("iou_%s=nan\n", c.name.c_str());
        }
    }
    std::printf("miou=%.6f\n", report.mean);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Novelty-driven informative path planning simulator"};
    app.require_subcommand(1);

    std::string spec_path, out_dir, config_path, map_dir, db_path, pgm_out, pred_path, start_text, trace_out;
    std::uint64_t seed = 0;
    int budget = 0;
    std::size_t k = nipp::kDefaultNeighbors;
    std::optional<double> alpha, beta;

    auto* gen = app.add_subcommand("gen-map", "Generate a synthetic map bundle");
    gen->add_option("--spec", spec_path, "Synthetic spec file")->required();
    gen->add_option("--seed", seed, "Generator seed")->required();
    gen->add_option("--out", out_dir, "Output bundle directory")->required();

    auto* run = app.add_subcommand("run", "Run a multi-mission experiment");
    run->add_option("--config", config_path, "Experiment config file")->required();
    run->add_option("--out", out_dir, "Output directory (overrides out= in the config)");

    auto* plan = app.add_subcommand("plan", "Plan one IPP mission against a database dump");
    plan->add_option("--map", map_dir, "Map bundle directory")->required();
    plan->add_option("--db", db_path, "Embedding database dump")->required();
    plan->add_option("--start", start_text, "Home cell <row>,<col>")->required();
    plan->add_option("--budget", budget, "Move budget")->required();
    plan->add_option("--k", k, "Nearest neighbors");
    plan->add_option("--alpha", alpha, "Low/medium novelty threshold");
    plan->add_option("--beta", beta, "Medium/high novelty threshold");
    plan->add_option("--out", trace_out, "Trace CSV output (stdout when omitted)");

    auto* nov = app.add_subcommand("novelty", "Whole-map novelty heatmap against a database dump");
    nov->add_option("--map", map_dir, "Map bundle directory")->required();
    nov->add_option("--db", db_path, "Embedding database dump")->required();
    nov->add_option("--out", pgm_out, "Output PGM")->required();
    nov->add_option("--k", k, "Nearest neighbors");

    auto* eval = app.add_subcommand("eval", "mIoU of a prediction PGM against a map bundle");
    eval->add_option("--pred", pred_path, "Prediction PGM (class id per subpatch)")->required();
    eval->add_option("--map", map_dir, "Map bundle directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*gen) return cmd_gen_map(spec_path, seed, out_dir);
        if (*run) return cmd_run(config_path, out_dir);
        if (*plan) return cmd_plan(map_dir, db_path, start_text, budget, k, trace_out, alpha, beta);
        if (*nov) return cmd_novelty(map_dir, db_path, pgm_out, k);
        if (*eval) return cmd_eval(pred_path, map_dir);
    } catch (const nipp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const nipp::PreconditionError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitConfig;
    } catch (const nipp::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const nipp::InvariantError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInvariant;
    }
    return kExitInvariant;
}
