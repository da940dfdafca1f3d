#include "nipp/netpbm.hpp"

#include <cctype>
#include <fstream>
#include <iterator>

#include "nipp/errors.hpp"

namespace nipp::netpbm {
namespace {

std::vector<std::uint8_t> encode(char magic, int width, int height, const std::vector<std::uint8_t>& data) {
    const std::string header = std::string("P") + magic + "\n" + std::to_string(width) + " " + std::to_string(height) +
                               "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), data.begin(), data.end());
    return out;
}

class HeaderReader {
public:
    explicit HeaderReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    int next_int() {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) throw IoError("netpbm: expected integer in header");
        long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > 1'000'000) throw IoError("netpbm: header value too large");
            ++pos_;
        }
        return static_cast<int>(value);
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_start() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) throw IoError("netpbm: missing raster separator");
        return pos_ + 1;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 2;
};

}  // namespace

std::vector<std::uint8_t> encode_pgm(int width, int height, const std::vector<std::uint8_t>& gray) {
    if (gray.size() != static_cast<std::size_t>(width) * height) throw PreconditionError("pgm: raster size mismatch");
    return encode('5', width, height, gray);
}

std::vector<std::uint8_t> encode_ppm(int width, int height, const std::vector<std::uint8_t>& rgb) {
    if (rgb.size() != static_cast<std::size_t>(width) * height * 3) throw PreconditionError("ppm: raster size mismatch");
    return encode('6', width, height, rgb);
}

Image decode(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
        throw IoError("netpbm: unsupported magic (expected P5 or P6)");
    }
    Image img;
    img.channels = bytes[1] == '5' ? 1 : 3;
    HeaderReader reader(bytes);
    img.width = reader.next_int();
    img.height = reader.next_int();
    const int maxval = reader.next_int();
    if (img.width <= 0 || img.height <= 0) throw IoError("netpbm: non-positive dimensions");
    if (maxval != 255) throw IoError("netpbm: maxval must be 255");
    const std::size_t start = reader.raster_start();
    const std::size_t expected = static_cast<std::size_t>(img.width) * img.height * img.channels;
    if (bytes.size() - start < expected) throw IoError("netpbm: truncated raster");
    img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                      bytes.begin() + static_cast<std::ptrdiff_t>(start + expected));
    return img;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

}  // namespace nipp::netpbm
