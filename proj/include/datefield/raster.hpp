#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace datefield {

// 8-bit grayscale raster, row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> samples;

    std::uint8_t at(int x, int y) const { return samples[std::size_t(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return samples[std::size_t(y) * width + x]; }
};

// Bilevel raster: 0 = background, 1 = ink. Row-major, one byte per pixel.
struct BinaryImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    std::uint8_t at(int x, int y) const { return bits[std::size_t(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return bits[std::size_t(y) * width + x]; }
};

GrayImage make_gray(int width, int height, std::uint8_t fill = 255);
BinaryImage make_binary(int width, int height, std::uint8_t fill = 0);

// Decodes a PGM (P5) or PNG file, dispatching on the magic bytes.
// Color PNG is reduced to luminance with Rec.601 weights (0.299 R + 0.587 G
// + 0.114 B, rounded to nearest). 16-bit inputs are rejected.
GrayImage load_image(const std::filesystem::path& path);

GrayImage load_pgm(const std::filesystem::path& path);
GrayImage load_png(const std::filesystem::path& path);

// Writers replace the target atomically (write to a temp file, then rename).
void save_pgm(const GrayImage& img, const std::filesystem::path& path);
void save_png(const GrayImage& img, const std::filesystem::path& path);

// Otsu's global threshold over the intensity histogram. Returns t in [1,255]
// maximizing the between-class variance of the split {v < t} / {v >= t};
// the smallest maximizer wins on plateaus.
int otsu_threshold(const GrayImage& img);

// Dark pixels become ink: sample < threshold -> 1, else 0. When threshold is
// absent it is chosen by otsu_threshold.
BinaryImage binarize(const GrayImage& img, std::optional<int> threshold = std::nullopt);

// Renders ink/background values into a grayscale image.
GrayImage to_gray(const BinaryImage& img, std::uint8_t ink = 0, std::uint8_t background = 255);

} // namespace datefield
