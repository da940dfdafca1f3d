#include "nipp/terrain.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

#include "keyvalue.hpp"
#include "nipp/netpbm.hpp"

namespace nipp {

LabeledMap::LabeledMap(int width_px, int height_px, int cell_size_px, std::vector<std::uint8_t> imagery,
                       std::vector<std::uint8_t> labels, std::vector<ClassEntry> classes)
    : width_(width_px),
      height_(height_px),
      cell_size_(cell_size_px),
      imagery_(std::move(imagery)),
      labels_(std::move(labels)),
      classes_(std::move(classes)) {
    if (width_ <= 0 || height_ <= 0 || cell_size_ <= 0) throw PreconditionError("map dimensions must be positive");
    if (width_ % cell_size_ != 0 || height_ % cell_size_ != 0) {
        throw PreconditionError("map dimensions must be multiples of cell_size_px");
    }
    const std::size_t n = static_cast<std::size_t>(width_) * height_;
    if (imagery_.size() != n * 3 || labels_.size() != n) throw PreconditionError("raster sizes do not match dimensions");
    if (classes_.empty()) throw PreconditionError("class table is empty");
    std::array<bool, 256> known{};
    for (const auto& c : classes_) {
        if (known[c.id]) throw PreconditionError("duplicate class id " + std::to_string(c.id));
        known[c.id] = true;
    }
    for (std::uint8_t l : labels_) {
        if (!known[l]) throw PreconditionError("label " + std::to_string(l) + " missing from class table");
    }
}

int LabeledMap::class_index(std::uint8_t id) const noexcept {
    for (std::size_t i = 0; i < classes_.size(); ++i) {
        if (classes_[i].id == id) return static_cast<int>(i);
    }
    return -1;
}

// ---------------------------------------------------------------------------
// Bundle I/O

namespace {

netpbm::Image read_raster(const std::filesystem::path& path, int channels) {
    if (!std::filesystem::exists(path)) {
        throw BundleError(BundleError::Kind::MissingFile, "missing bundle file " + path.string());
    }
    netpbm::Image img;
    try {
        img = netpbm::decode(netpbm::read_file(path));
    } catch (const IoError& e) {
        throw BundleError(BundleError::Kind::BadHeader, path.filename().string() + ": " + e.what());
    }
    if (img.channels != channels) {
        throw BundleError(BundleError::Kind::BadHeader,
                          path.filename().string() + ": expected " + (channels == 3 ? "P6" : "P5"));
    }
    return img;
}

}  // namespace

LabeledMap load_map_bundle(const std::filesystem::path& directory) {
    const auto meta_path = directory / "meta.txt";
    if (!std::filesystem::exists(meta_path)) {
        throw BundleError(BundleError::Kind::MissingFile, "missing bundle file " + meta_path.string());
    }
    const auto imagery = read_raster(directory / "imagery.ppm", 3);
    const auto labels = read_raster(directory / "labels.pgm", 1);
    if (imagery.width != labels.width || imagery.height != labels.height) {
        throw BundleError(BundleError::Kind::DimensionMismatch,
                          "imagery is " + std::to_string(imagery.width) + "x" + std::to_string(imagery.height) +
                              " but labels are " + std::to_string(labels.width) + "x" + std::to_string(labels.height));
    }

    const auto meta_bytes = netpbm::read_file(meta_path);
    int cell_size = kDefaultCellSize;
    std::vector<ClassEntry> classes;
    try {
        for (const auto& kv : detail::parse_key_values(std::string(meta_bytes.begin(), meta_bytes.end()))) {
            if (kv.key == "cell_size") {
                const auto v = detail::parse_int<int>(kv.value);
                if (!v || *v <= 0) throw ConfigError(kv.line, "cell_size must be a positive integer");
                cell_size = *v;
            } else if (kv.key == "class") {
                const auto colon = kv.value.find(':');
                const auto id = detail::parse_int<int>(std::string_view(kv.value).substr(0, colon));
                if (colon == std::string::npos || !id || *id < 0 || *id > 255) {
                    throw ConfigError(kv.line, "class must be <id>:<name>");
                }
                classes.push_back({static_cast<std::uint8_t>(*id), kv.value.substr(colon + 1)});
            } else {
                throw ConfigError(kv.line, "unknown key '" + kv.key + "'");
            }
        }
    } catch (const ConfigError& e) {
        throw BundleError(BundleError::Kind::BadMetadata, std::string("meta.txt ") + e.what());
    }
    if (classes.empty()) throw BundleError(BundleError::Kind::BadMetadata, "meta.txt declares no classes");

    if (imagery.width % cell_size != 0 || imagery.height % cell_size != 0) {
        throw BundleError(BundleError::Kind::NotCellAligned, "map " + std::to_string(imagery.width) + "x" +
                                                                 std::to_string(imagery.height) +
                                                                 " is not a multiple of cell_size " +
                                                                 std::to_string(cell_size));
    }
    std::array<bool, 256> known{};
    for (const auto& c : classes) known[c.id] = true;
    for (std::uint8_t l : labels.pixels) {
        if (!known[l]) {
            throw BundleError(BundleError::Kind::UnknownLabel,
                              "label id " + std::to_string(l) + " is not declared in meta.txt");
        }
    }
    try {
        return LabeledMap(imagery.width, imagery.height, cell_size, imagery.pixels, labels.pixels, std::move(classes));
    } catch (const PreconditionError& e) {
        throw BundleError(BundleError::Kind::BadMetadata, e.what());
    }
}

void save_map_bundle(const LabeledMap& map, const std::filesystem::path& directory) {
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) throw IoError("cannot create " + directory.string() + ": " + ec.message());
    netpbm::write_file(directory / "imagery.ppm", netpbm::encode_ppm(map.width_px(), map.height_px(), map.imagery()));
    netpbm::write_file(directory / "labels.pgm", netpbm::encode_pgm(map.width_px(), map.height_px(), map.labels()));
    std::string meta = "cell_size=" + std::to_string(map.cell_size_px()) + "\n";
    for (const auto& c : map.classes()) meta += "class=" + std::to_string(c.id) + ":" + c.name + "\n";
    netpbm::write_text(directory / "meta.txt", meta);
}

// ---------------------------------------------------------------------------
// Synthetic worlds

SyntheticSpec parse_synthetic_spec(const std::string& text) {
    SyntheticSpec spec;
    const auto positive = [](const detail::KeyValueLine& kv) {
        const auto v = detail::parse_int<int>(kv.value);
        if (!v || *v <= 0) throw ConfigError(kv.line, kv.key + " must be a positive integer");
        return *v;
    };
    for (const auto& kv : detail::parse_key_values(text)) {
        if (kv.key == "rows") {
            spec.grid_rows = positive(kv);
        } else if (kv.key == "cols") {
            spec.grid_cols = positive(kv);
        } else if (kv.key == "cell_size") {
            spec.cell_size_px = positive(kv);
        } else if (kv.key == "sites") {
            spec.region_sites = positive(kv);
        } else if (kv.key == "noise") {
            const auto v = detail::parse_int<int>(kv.value);
            if (!v || *v < 0 || *v > 255) throw ConfigError(kv.line, "noise must be in [0,255]");
            spec.noise = *v;
        } else if (kv.key == "rare_fraction") {
            const auto v = detail::parse_real(kv.value);
            if (!v) throw ConfigError(kv.line, "rare_fraction must be a real number");
            spec.rare_fraction = *v;
        } else if (kv.key == "class") {
            const auto colon = kv.value.rfind(':');
            if (colon == std::string::npos || colon == 0) throw ConfigError(kv.line, "class must be <name>:<r>,<g>,<b>");
            const auto parts = detail::split(std::string_view(kv.value).substr(colon + 1), ',');
            if (parts.size() != 3) throw ConfigError(kv.line, "class color needs three components");
            std::array<std::uint8_t, 3> rgb{};
            for (int i = 0; i < 3; ++i) {
                const auto c = detail::parse_int<int>(parts[i]);
                if (!c || *c < 0 || *c > 255) throw ConfigError(kv.line, "color component outside [0,255]");
                rgb[i] = static_cast<std::uint8_t>(*c);
            }
            spec.classes.push_back({kv.value.substr(0, colon), {rgb[0], rgb[1], rgb[2]}});
        } else {
            throw ConfigError(kv.line, "unknown key '" + kv.key + "'");
        }
    }
    if (spec.classes.empty()) throw ConfigError(0, "synthetic spec declares no classes");
    return spec;
}

std::string serialize_synthetic_spec(const SyntheticSpec& spec) {
    std::ostringstream out;
    out << "rows=" << spec.grid_rows << "\ncols=" << spec.grid_cols << "\ncell_size=" << spec.cell_size_px
        << "\nnoise=" << spec.noise << "\nsites=" << spec.region_sites << "\n";
    if (spec.rare_fraction) {
        std::array<char, 64> buf{};
        const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), *spec.rare_fraction);
        out << "rare_fraction=" << std::string(buf.data(), res.ptr) << "\n";
    }
    for (const auto& c : spec.classes) {
        out << "class=" << c.name << ":" << int(c.mean.r) << "," << int(c.mean.g) << "," << int(c.mean.b) << "\n";
    }
    return out.str();
}

LabeledMap generate_synthetic_map(const SyntheticSpec& spec, std::uint64_t seed) {
    const int n_classes = static_cast<int>(spec.classes.size());
    if (n_classes < 1) throw PreconditionError("synthetic spec needs at least one class");
    if (n_classes > 255) throw PreconditionError("synthetic spec supports at most 255 classes");
    if (spec.grid_rows <= 0 || spec.grid_cols <= 0 || spec.cell_size_px <= 0 || spec.region_sites <= 0) {
        throw PreconditionError("synthetic grid dimensions must be positive");
    }
    if (spec.noise < 0) throw PreconditionError("noise must be non-negative");
    const bool has_rare = spec.rare_fraction.has_value();
    if (has_rare && !(*spec.rare_fraction > 0.0 && *spec.rare_fraction < 1.0)) {
        throw PreconditionError("rare fraction must lie in (0,1)");
    }
    if (has_rare && n_classes < 2) throw PreconditionError("a rare region needs at least two classes");

    const int width = spec.grid_cols * spec.cell_size_px;
    const int height = spec.grid_rows * spec.cell_size_px;
    const int common = has_rare ? n_classes - 1 : n_classes;
    std::mt19937_64 rng(seed);

    // Voronoi sites, every common class owning at least one.
    const int n_sites = std::max(spec.region_sites, common);
    struct Site {
        int row, col;
        std::uint8_t label;
    };
    std::vector<Site> sites(n_sites);
    std::uniform_int_distribution<int> row_dist(0, height - 1);
    std::uniform_int_distribution<int> col_dist(0, width - 1);
    std::vector<std::uint8_t> assignment(n_sites);
    for (int i = 0; i < n_sites; ++i) {
        sites[i].row = row_dist(rng);
        sites[i].col = col_dist(rng);
        assignment[i] = static_cast<std::uint8_t>(i % common);
    }
    std::shuffle(assignment.begin(), assignment.end(), rng);
    for (int i = 0; i < n_sites; ++i) sites[i].label = assignment[i];

    std::vector<std::uint8_t> labels(static_cast<std::size_t>(width) * height);
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            int best = std::abs(r - sites[0].row) + std::abs(c - sites[0].col);
            std::uint8_t label = sites[0].label;
            for (int i = 1; i < n_sites; ++i) {
                const int d = std::abs(r - sites[i].row) + std::abs(c - sites[i].col);
                if (d < best) {
                    best = d;
                    label = sites[i].label;
                }
            }
            labels[static_cast<std::size_t>(r) * width + c] = label;
        }
    }

    // Rare class: the cells closest (Manhattan, then row, col) to a random center.
    if (has_rare) {
        const GridDims grid{spec.grid_rows, spec.grid_cols};
        const auto max_cells = static_cast<std::size_t>(std::floor(*spec.rare_fraction * grid.cell_count()));
        const GridCoord center{std::uniform_int_distribution<int>(0, grid.rows - 1)(rng),
                               std::uniform_int_distribution<int>(0, grid.cols - 1)(rng)};
        std::vector<GridCoord> cells;
        cells.reserve(grid.cell_count());
        for (int r = 0; r < grid.rows; ++r) {
            for (int c = 0; c < grid.cols; ++c) cells.push_back({r, c});
        }
        std::stable_sort(cells.begin(), cells.end(), [&](GridCoord a, GridCoord b) {
            return manhattan(a, center) < manhattan(b, center);
        });
        const auto rare = static_cast<std::uint8_t>(n_classes - 1);
        for (std::size_t i = 0; i < std::min(max_cells, cells.size()); ++i) {
            const int r0 = cells[i].row * spec.cell_size_px;
            const int c0 = cells[i].col * spec.cell_size_px;
            for (int r = r0; r < r0 + spec.cell_size_px; ++r) {
                std::fill_n(labels.begin() + static_cast<std::ptrdiff_t>(r) * width + c0, spec.cell_size_px, rare);
            }
        }
    }

    std::vector<std::uint8_t> imagery(labels.size() * 3);
    std::uniform_int_distribution<int> noise_dist(-spec.noise, spec.noise);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const Rgb mean = spec.classes[labels[i]].mean;
        const std::array<int, 3> base = {mean.r, mean.g, mean.b};
        for (int ch = 0; ch < 3; ++ch) {
            const int jitter = spec.noise > 0 ? noise_dist(rng) : 0;
            imagery[i * 3 + ch] = static_cast<std::uint8_t>(std::clamp(base[ch] + jitter, 0, 255));
        }
    }

    std::vector<ClassEntry> table;
    for (int i = 0; i < n_classes; ++i) table.push_back({static_cast<std::uint8_t>(i), spec.classes[i].name});
    return LabeledMap(width, height, spec.cell_size_px, std::move(imagery), std::move(labels), std::move(table));
}

// ---------------------------------------------------------------------------
// Slicing

PixelRect cell_rect(const LabeledMap& map, GridCoord cell) {
    if (!map.grid().contains(cell)) throw PreconditionError("cell out of bounds");
    const int s = map.cell_size_px();
    return {cell.row * s, cell.col * s, s, s};
}

Patch cell_patch(const LabeledMap& map, GridCoord cell) {
    const PixelRect rect = cell_rect(map, cell);
    Patch patch;
    patch.side_px = rect.width;
    patch.origin_row = rect.row;
    patch.origin_col = rect.col;
    patch.pixels.resize(static_cast<std::size_t>(rect.width) * rect.height * 3);
    const auto& img = map.imagery();
    const std::size_t row_bytes = static_cast<std::size_t>(rect.width) * 3;
    for (int r = 0; r < rect.height; ++r) {
        const std::size_t src = (static_cast<std::size_t>(rect.row + r) * map.width_px() + rect.col) * 3;
        std::copy_n(img.begin() + static_cast<std::ptrdiff_t>(src), row_bytes,
                    patch.pixels.begin() + static_cast<std::ptrdiff_t>(r * row_bytes));
    }
    return patch;
}

std::uint8_t majority_label(const LabeledMap& map, const PixelRect& rect) {
    if (rect.width <= 0 || rect.height <= 0) throw PreconditionError("majority_label: empty rectangle");
    if (rect.row < 0 || rect.col < 0 || rect.row + rect.height > map.height_px() ||
        rect.col + rect.width > map.width_px()) {
        throw PreconditionError("majority_label: rectangle outside raster");
    }
    std::array<int, 256> counts{};
    for (int r = rect.row; r < rect.row + rect.height; ++r) {
        for (int c = rect.col; c < rect.col + rect.width; ++c) ++counts[map.label(r, c)];
    }
    // max_element returns the first maximum, i.e. the smallest id.
    return static_cast<std::uint8_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

}  // namespace nipp
