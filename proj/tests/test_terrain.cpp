#include <doctest.h>

#include <array>
#include <filesystem>
#include <random>

#include "nipp/netpbm.hpp"
#include "nipp/terrain.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace nipp;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("nipp_terrain_" + name);
    fs::remove_all(p);
    return p;
}

BundleError::Kind load_error_kind(const fs::path& dir) {
    try {
        (void)load_map_bundle(dir);
    } catch (const BundleError& e) {
        return e.kind();
    }
    FAIL("bundle unexpectedly loaded");
    return BundleError::Kind::BadMetadata;
}

LabeledMap quad_map() {
    return testing::painted_map(256, 256, 128, {{10, 20, 30}, {200, 100, 50}},
                                [](int r, int c) { return (r < 128) == (c < 128) ? 0 : 1; });
}

}  // namespace

TEST_CASE("256 px bundle with 128 px cells loads as a 2x2 grid") {
    const auto dir = scratch_dir("quad");
    save_map_bundle(quad_map(), dir);
    for (const char* f : {"imagery.ppm", "labels.pgm", "meta.txt"}) CHECK(fs::exists(dir / f));
    const auto img = netpbm::read_file(dir / "imagery.ppm");
    const auto lab = netpbm::read_file(dir / "labels.pgm");
    CHECK(std::string(img.begin(), img.begin() + 2) == "P6");
    CHECK(std::string(lab.begin(), lab.begin() + 2) == "P5");

    const LabeledMap m = load_map_bundle(dir);
    CHECK(m.grid() == GridDims{2, 2});
    CHECK(m == quad_map());
}

TEST_CASE("bundle save/load/save is byte identical") {
    const auto a = scratch_dir("rt_a");
    const auto b = scratch_dir("rt_b");
    save_map_bundle(testing::noise_map(128, 64, 32, 7), a);
    save_map_bundle(load_map_bundle(a), b);
    for (const char* f : {"imagery.ppm", "labels.pgm", "meta.txt"}) {
        CHECK(netpbm::read_file(a / f) == netpbm::read_file(b / f));
    }
}

TEST_CASE("bundle loader gives a distinct diagnostic per failure") {
    const auto base = scratch_dir("errs");
    save_map_bundle(quad_map(), base);

    SUBCASE("missing file") {
        fs::remove(base / "labels.pgm");
        CHECK(load_error_kind(base) == BundleError::Kind::MissingFile);
    }
    SUBCASE("raster header mismatch") {
        netpbm::write_file(base / "labels.pgm", netpbm::encode_pgm(256, 255, std::vector<std::uint8_t>(256 * 255, 0)));
        CHECK(load_error_kind(base) == BundleError::Kind::DimensionMismatch);
    }
    SUBCASE("not divisible by the cell size") {
        netpbm::write_text(base / "meta.txt", "cell_size=100\nclass=0:c0\nclass=1:c1\n");
        CHECK(load_error_kind(base) == BundleError::Kind::NotCellAligned);
    }
    SUBCASE("label missing from meta.txt") {
        netpbm::write_text(base / "meta.txt", "cell_size=128\nclass=0:c0\n");
        CHECK(load_error_kind(base) == BundleError::Kind::UnknownLabel);
    }
    SUBCASE("corrupt header") {
        netpbm::write_text(base / "imagery.ppm", "P3\n1 1\n255\n0 0 0\n");
        CHECK(load_error_kind(base) == BundleError::Kind::BadHeader);
    }
}

TEST_CASE("saving into an unwritable location is an I/O error") {
    const auto blocker = scratch_dir("blocker");
    netpbm::write_text(blocker, "not a directory");
    CHECK_THROWS_AS(save_map_bundle(quad_map(), blocker / "sub"), IoError);
}

TEST_CASE("single-class noiseless world is flat") {
    SyntheticSpec s;
    s.grid_rows = 2;
    s.grid_cols = 3;
    s.cell_size_px = 16;
    s.classes = {{"only", {12, 34, 56}}};
    const LabeledMap m = generate_synthetic_map(s, 99);
    for (int r = 0; r < m.height_px(); ++r) {
        for (int c = 0; c < m.width_px(); ++c) {
            REQUIRE(m.label(r, c) == 0);
            REQUIRE(m.pixel(r, c) == Rgb{12, 34, 56});
        }
    }
}

TEST_CASE("synthetic generation is seed deterministic") {
    const SyntheticSpec s = testing::four_class_spec(6, 5, 32);
    CHECK(generate_synthetic_map(s, 3) == generate_synthetic_map(s, 3));
    CHECK_FALSE(generate_synthetic_map(s, 3) == generate_synthetic_map(s, 4));

    const auto a = scratch_dir("det_a");
    const auto b = scratch_dir("det_b");
    save_map_bundle(generate_synthetic_map(s, 11), a);
    save_map_bundle(generate_synthetic_map(s, 11), b);
    for (const char* f : {"imagery.ppm", "labels.pgm", "meta.txt"}) {
        CHECK(netpbm::read_file(a / f) == netpbm::read_file(b / f));
    }
}

TEST_CASE("rare class covers at most 5% of a 32x32 grid") {
    const SyntheticSpec s = testing::four_class_spec(32, 32, 16);
    for (std::uint64_t seed : {0u, 1u, 2u, 3u, 4u}) {
        const LabeledMap m = generate_synthetic_map(s, seed);
        int rare_cells = 0;
        for (int r = 0; r < 32; ++r) {
            for (int c = 0; c < 32; ++c) {
                std::array<int, 4> hist{};
                for (int y = r * 16; y < r * 16 + 16; ++y) {
                    for (int x = c * 16; x < c * 16 + 16; ++x) ++hist[m.label(y, x)];
                }
                int best = 0;
                for (int k = 1; k < 4; ++k) {
                    if (hist[k] > hist[best]) best = k;
                }
                if (best == 3) ++rare_cells;
            }
        }
        CHECK(rare_cells <= 52);
        CHECK(rare_cells > 0);
    }
}

TEST_CASE("synthetic spec text round-trips") {
    const SyntheticSpec s = testing::four_class_spec(12, 9, 64);
    const SyntheticSpec back = parse_synthetic_spec(serialize_synthetic_spec(s));
    CHECK(back.grid_rows == 12);
    CHECK(back.grid_cols == 9);
    CHECK(back.cell_size_px == 64);
    CHECK(back.noise == s.noise);
    CHECK(back.region_sites == s.region_sites);
    CHECK(back.rare_fraction == s.rare_fraction);
    REQUIRE(back.classes.size() == 4);
    CHECK(back.classes[3].name == "water");
    CHECK(back.classes[3].mean == Rgb{40, 70, 160});
    CHECK_THROWS_AS(parse_synthetic_spec("rows=4\ncolour=red\n"), ConfigError);
}

TEST_CASE("cell patches start at cell_size multiples and copy imagery") {
    const LabeledMap m = testing::noise_map(384, 256, 128, 5);
    CHECK(cell_patch(m, {0, 0}).origin_row == 0);
    CHECK(cell_patch(m, {0, 0}).origin_col == 0);
    const Patch p = cell_patch(m, {1, 1});
    CHECK(p.origin_row == 128);
    CHECK(p.origin_col == 128);
    CHECK(p.side_px == 128);
    for (int r = 0; r < 128; r += 17) {
        for (int c = 0; c < 128; c += 13) CHECK(p.pixel(r, c) == m.pixel(128 + r, 128 + c));
    }
    CHECK_THROWS_AS(cell_patch(m, {2, 0}), PreconditionError);
}

TEST_CASE("majority label") {
    const LabeledMap split = testing::painted_map(
        32, 32, 16, {{0, 0, 0}, {1, 1, 1}, {2, 2, 2}}, [](int, int c) { return c < 16 ? 2 : 1; });
    CHECK(majority_label(split, {0, 0, 16, 16}) == 2);
    CHECK(majority_label(split, {0, 8, 16, 16}) == 1);  // 50/50 between ids 2 and 1

    const LabeledMap noisy = testing::noise_map(64, 64, 16, 21);
    std::mt19937 rng(4);
    std::uniform_int_distribution<int> pos(0, 48);
    for (int t = 0; t < 20; ++t) {
        const PixelRect rect{pos(rng), pos(rng), 16, 16};
        int ones = 0;
        for (int r = rect.row; r < rect.row + 16; ++r) {
            for (int c = rect.col; c < rect.col + 16; ++c) ones += noisy.label(r, c);
        }
        CHECK(majority_label(noisy, rect) == (ones > 128 ? 1 : 0));
    }
}
