#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace nipp::netpbm {

/// Decoded binary netpbm image (P5 gray or P6 RGB, maxval 255).
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;  // 1 for P5, 3 for P6
    std::vector<std::uint8_t> pixels;
};

std::vector<std::uint8_t> encode_pgm(int width, int height, const std::vector<std::uint8_t>& gray);
std::vector<std::uint8_t> encode_ppm(int width, int height, const std::vector<std::uint8_t>& rgb);

/// Parses P5/P6 bytes. Throws IoError on malformed headers or truncated data.
Image decode(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace nipp::netpbm
