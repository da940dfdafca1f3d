#include "nipp/novelty.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include "nipp/netpbm.hpp"
#include "nipp/simd/kernels.hpp"

namespace nipp {

static_assert(kFeatureDim == static_cast<int>(simd::kDim), "kernel dimension must match the embedding");

bool TrainingPool::add_cell(GridCoord cell, std::span<const PoolRecord> records) {
    if (cells_.contains(cell)) return false;
    cells_.insert(cell);
    records_.insert(records_.end(), records.begin(), records.end());
    ++revision_;
    return true;
}

// ---------------------------------------------------------------------------
// Feature extraction

FeatureGrid extract_features(const Patch& patch, GridCoord cell) {
    const int side = patch.side_px;
    if (side <= 0 || side % kSubpatchGrid != 0) throw PreconditionError("patch side must be a positive multiple of 8");
    if (patch.pixels.size() != static_cast<std::size_t>(side) * side * 3) {
        throw PreconditionError("patch raster size does not match side");
    }
    const int block = side / kSubpatchGrid;
    const auto n = static_cast<std::size_t>(side) * side;

    std::vector<double> luma(n);
    for (std::size_t i = 0; i < n; ++i) {
        luma[i] = 0.299 * patch.pixels[i * 3] + 0.587 * patch.pixels[i * 3 + 1] + 0.114 * patch.pixels[i * 3 + 2];
    }
    std::vector<double> grad(n);
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * side + c;
            const double dx = c + 1 < side ? luma[i + 1] - luma[i] : 0.0;
            const double dy = r + 1 < side ? luma[i + side] - luma[i] : 0.0;
            grad[i] = std::abs(dx) + std::abs(dy);
        }
    }

    FeatureGrid out{};
    const double count = static_cast<double>(block) * block;
    for (int br = 0; br < kSubpatchGrid; ++br) {
        for (int bc = 0; bc < kSubpatchGrid; ++bc) {
            std::array<double, 4> sum{};  // R, G, B, gradient
            for (int r = br * block; r < (br + 1) * block; ++r) {
                for (int c = bc * block; c < (bc + 1) * block; ++c) {
                    const std::size_t i = static_cast<std::size_t>(r) * side + c;
                    for (int ch = 0; ch < 3; ++ch) sum[ch] += patch.pixels[i * 3 + ch];
                    sum[3] += grad[i];
                }
            }
            std::array<double, 4> mean{};
            for (int j = 0; j < 4; ++j) mean[j] = sum[j] / count;
            std::array<double, 4> sq{};
            for (int r = br * block; r < (br + 1) * block; ++r) {
                for (int c = bc * block; c < (bc + 1) * block; ++c) {
                    const std::size_t i = static_cast<std::size_t>(r) * side + c;
                    for (int ch = 0; ch < 3; ++ch) {
                        const double d = patch.pixels[i * 3 + ch] - mean[ch];
                        sq[ch] += d * d;
                    }
                    const double d = grad[i] - mean[3];
                    sq[3] += d * d;
                }
            }
            FeatureVector& fv = out[static_cast<std::size_t>(br * kSubpatchGrid + bc)];
            fv.source = {cell, br, bc};
            fv.values = {mean[0], mean[1], mean[2], std::sqrt(sq[0] / count), std::sqrt(sq[1] / count),
                         std::sqrt(sq[2] / count), mean[3], std::sqrt(sq[3] / count)};
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Database

double euclidean_norm(const Embedding& v) noexcept {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

namespace {

// Query and database vectors go through the same normalization so identical
// inputs produce identical unit vectors.
std::optional<Embedding> unit(const Embedding& v) noexcept {
    const double n = euclidean_norm(v);
    if (n == 0.0) return std::nullopt;
    Embedding u{};
    for (int d = 0; d < kFeatureDim; ++d) u[d] = v[d] / n;
    return u;
}

constexpr char kDumpMagic[] = "NIPPDB1";
constexpr std::size_t kMagicLen = sizeof(kDumpMagic) - 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

std::uint64_t get_le(const std::vector<std::uint8_t>& in, std::size_t pos, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(in[pos + i]) << (8 * i);
    return v;
}

}  // namespace

EmbeddingDatabase::EmbeddingDatabase(std::span<const Entry> entries, std::uint64_t generation)
    : generation_(generation) {
    values_.reserve(entries.size());
    for (const Entry& e : entries) {
        const double n = euclidean_norm(e.values);
        if (n == 0.0) {
            ++excluded_;
            if (!zero_label_) zero_label_ = e.label;
            continue;
        }
        values_.push_back(e.values);
        labels_.push_back(e.label);
        norms_.push_back(n);
    }
    blocks_.assign(simd::block_count(values_.size()) * simd::kBlockDoubles, 0.0);
    for (std::size_t i = 0; i < values_.size(); ++i) {
        double* base = blocks_.data() + (i / simd::kLanes) * simd::kBlockDoubles + (i % simd::kLanes);
        for (int d = 0; d < kFeatureDim; ++d) base[d * simd::kLanes] = values_[i][d] / norms_[i];
    }
}

std::vector<Neighbor> EmbeddingDatabase::k_nearest(const Embedding& query, std::size_t k) const {
    if (k == 0) throw PreconditionError("k_nearest: k must be at least 1");
    if (k > size()) throw PreconditionError("k_nearest: k exceeds database size");
    const auto u = unit(query);
    if (!u) throw PreconditionError("k_nearest: zero-norm query");

    thread_local std::vector<double> sims;
    sims.resize(size());
    simd::similarity_scan(blocks_.data(), size(), u->data(), sims.data());

    // Sorted by similarity descending; a later index never displaces an equal one.
    std::vector<Neighbor> top;
    top.reserve(k + 1);
    double floor = -std::numeric_limits<double>::infinity();
    const double* sim = sims.data();
    const std::size_t n = sims.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double s = sim[i];
        if (top.size() == k && !(s > floor)) continue;
        const auto pos =
            std::find_if(top.begin(), top.end(), [s](const Neighbor& nb) { return nb.similarity < s; });
        top.insert(pos, Neighbor{i, s, labels_[i]});
        if (top.size() > k) top.pop_back();
        floor = top.back().similarity;
    }
    return top;
}

Neighbor EmbeddingDatabase::nearest(const Embedding& query) const {
    if (empty()) throw PreconditionError("nearest: empty database");
    const auto u = unit(query);
    if (!u) throw PreconditionError("nearest: zero-norm query");
    const simd::BestMatch best = simd::best_match(blocks_.data(), size(), u->data());
    return {best.index, best.similarity, labels_[best.index]};
}

Neighbor EmbeddingDatabase::nearest_from(const Embedding& query, std::size_t first) const {
    const auto u = unit(query);
    if (!u) throw PreconditionError("nearest_from: zero-norm query");
    Neighbor best{size(), -std::numeric_limits<double>::infinity(), 0};
    if (first >= size()) return best;

    const std::size_t aligned = std::min(size(), (first + simd::kLanes - 1) / simd::kLanes * simd::kLanes);
    if (first < aligned) {
        std::array<double, simd::kLanes> head{};
        const std::size_t block = first / simd::kLanes;
        const std::size_t in_block = std::min(simd::kLanes, size() - block * simd::kLanes);
        simd::similarity_scan(blocks_.data() + block * simd::kBlockDoubles, in_block, u->data(), head.data());
        for (std::size_t i = first; i < aligned; ++i) {
            const double s = head[i - block * simd::kLanes];
            if (s > best.similarity) best = {i, s, labels_[i]};
        }
    }
    if (aligned < size()) {
        const simd::BestMatch tail = simd::best_match(blocks_.data() + (aligned / simd::kLanes) * simd::kBlockDoubles,
                                                      size() - aligned, u->data());
        if (tail.similarity > best.similarity) {
            best = {aligned + tail.index, tail.similarity, labels_[aligned + tail.index]};
        }
    }
    return best;
}

void EmbeddingDatabase::save(const std::filesystem::path& path) const {
    std::vector<std::uint8_t> out(kDumpMagic, kDumpMagic + kMagicLen);
    put_u32(out, static_cast<std::uint32_t>(size()));
    put_u32(out, static_cast<std::uint32_t>(kFeatureDim));
    for (const auto& v : values_) {
        for (double x : v) put_f64(out, x);
    }
    out.insert(out.end(), labels_.begin(), labels_.end());
    netpbm::write_file(path, out);
}

EmbeddingDatabase EmbeddingDatabase::load(const std::filesystem::path& path, std::uint64_t generation) {
    const auto in = netpbm::read_file(path);
    const std::size_t header = kMagicLen + 8;
    if (in.size() < header || std::memcmp(in.data(), kDumpMagic, kMagicLen) != 0) {
        throw IoError(path.string() + ": not an embedding database dump");
    }
    const auto count = static_cast<std::size_t>(get_le(in, kMagicLen, 4));
    const auto dim = static_cast<std::size_t>(get_le(in, kMagicLen + 4, 4));
    if (dim != static_cast<std::size_t>(kFeatureDim)) throw IoError(path.string() + ": unsupported dimension");
    if (in.size() != header + count * dim * 8 + count) throw IoError(path.string() + ": truncated or oversized dump");
    std::vector<Entry> entries(count);
    std::size_t pos = header;
    for (auto& e : entries) {
        for (double& x : e.values) {
            x = std::bit_cast<double>(get_le(in, pos, 8));
            pos += 8;
        }
    }
    for (auto& e : entries) e.label = in[pos++];
    return EmbeddingDatabase(entries, generation);
}

EmbeddingDatabase build_database(const TrainingPool& pool) {
    if (pool.empty()) throw PreconditionError("build_database: empty training pool");
    std::vector<EmbeddingDatabase::Entry> entries;
    entries.reserve(pool.records().size());
    for (const auto& r : pool.records()) entries.push_back({r.feature.values, r.label});
    return EmbeddingDatabase(entries, pool.revision());
}

// ---------------------------------------------------------------------------
// Novelty

double novelty_score(const EmbeddingDatabase& db, const Embedding& query, std::size_t k) {
    if (euclidean_norm(query) == 0.0) {
        if (k == 0 || k > db.size()) throw PreconditionError("novelty_score: k out of range");
        return 0.0;
    }
    const auto neighbors = db.k_nearest(query, k);
    double total = 0.0;
    for (const Neighbor& n : neighbors) {
        // Exact duplicates are at distance zero regardless of rounding in the dot product.
        const double distance = db.values(n.index) == query ? 0.0 : std::clamp(1.0 - n.similarity, 0.0, 2.0);
        total += distance;
    }
    return std::clamp(total / static_cast<double>(k), 0.0, 2.0);
}

Gradient heatmap_gradient(const ScoreGrid& s) noexcept {
    constexpr int n = kSubpatchGrid;
    const auto at = [&s](int r, int c) { return s[static_cast<std::size_t>(r * n + c)]; };
    double gx = 0.0;
    double gy = 0.0;
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            if (c == 0) {
                gx += at(r, 1) - at(r, 0);
            } else if (c == n - 1) {
                gx += at(r, n - 1) - at(r, n - 2);
            } else {
                gx += (at(r, c + 1) - at(r, c - 1)) / 2.0;
            }
            if (r == 0) {
                gy += at(1, c) - at(0, c);
            } else if (r == n - 1) {
                gy += at(n - 1, c) - at(n - 2, c);
            } else {
                gy += (at(r + 1, c) - at(r - 1, c)) / 2.0;
            }
        }
    }
    return {gx / (n * n), gy / (n * n)};
}

NoveltyHeatmap heatmap_from_scores(const ScoreGrid& scores) noexcept {
    NoveltyHeatmap h;
    h.scores = scores;
    h.mean_score = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
    h.gradient = heatmap_gradient(scores);
    return h;
}

NoveltyHeatmap novelty_heatmap(const EmbeddingDatabase& db, const FeatureGrid& features, std::size_t k) {
    ScoreGrid scores{};
    for (std::size_t i = 0; i < features.size(); ++i) scores[i] = novelty_score(db, features[i].values, k);
    return heatmap_from_scores(scores);
}

NoveltyHeatmap novelty_heatmap(const EmbeddingDatabase& db, const Patch& patch, std::size_t k) {
    return novelty_heatmap(db, extract_features(patch), k);
}

Thresholds calibrate_thresholds(std::span<const double> scores) {
    if (scores.size() < 4) throw PreconditionError("calibrate_thresholds: need at least 4 scores");
    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());
    const auto quantile = [&sorted](double q) {
        const double pos = q * static_cast<double>(sorted.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const double frac = pos - static_cast<double>(lo);
        if (lo + 1 >= sorted.size()) return sorted.back();
        return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
    };
    return {quantile(0.25), quantile(0.75)};
}

}  // namespace nipp
