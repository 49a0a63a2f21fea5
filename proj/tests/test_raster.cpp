#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <png.h>

#include "datefield/errors.hpp"
#include "datefield/raster.hpp"
#include "test_support.hpp"

using namespace datefield;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    return fs::temp_directory_path() / ("datefield_raster_" + name);
}

void write_bytes(const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), std::streamsize(bytes.size()));
}

// Minimal RGB PNG writer for decode tests.
void write_rgb_png(const fs::path& path, int w, int h,
                   const std::vector<std::array<std::uint8_t, 3>>& pixels) {
    std::FILE* fp = std::fopen(path.string().c_str(), "wb");
    REQUIRE(fp != nullptr);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    REQUIRE(setjmp(png_jmpbuf(png)) == 0);
    png_init_io(png, fp);
    png_set_IHDR(png, info, png_uint_32(w), png_uint_32(h), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<std::uint8_t> row(std::size_t(w) * 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto& px = pixels[std::size_t(y) * w + x];
            row[std::size_t(x) * 3] = px[0];
            row[std::size_t(x) * 3 + 1] = px[1];
            row[std::size_t(x) * 3 + 2] = px[2];
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

// Exhaustive-search Otsu oracle: recomputes class weights and means per
// threshold directly from the pixels.
double between_class_variance(const GrayImage& img, int t) {
    long n0 = 0, n1 = 0;
    double s0 = 0, s1 = 0;
    for (std::uint8_t v : img.samples) {
        if (v < t) {
            ++n0;
            s0 += v;
        } else {
            ++n1;
            s1 += v;
        }
    }
    if (n0 == 0 || n1 == 0)
        return 0.0;
    const double n = double(img.samples.size());
    const double w0 = n0 / n, w1 = n1 / n;
    const double mu0 = s0 / n0, mu1 = s1 / n1;
    return w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
}

double max_between_class_variance(const GrayImage& img) {
    double best = -1.0;
    for (int t = 1; t <= 255; ++t)
        best = std::max(best, between_class_variance(img, t));
    return best;
}

} // namespace

TEST_CASE("load_pgm decodes raw P5 files") {
    const fs::path p = temp_file("basic.pgm");
    write_bytes(p, std::string("P5\n3 2\n255\n") + std::string(6, char(255)));
    const GrayImage img = load_pgm(p);
    CHECK(img.width == 3);
    CHECK(img.height == 2);
    for (std::uint8_t v : img.samples)
        CHECK(v == 255);

    write_bytes(p, std::string("P5\n1 1\n255\n") + std::string(1, char(0)));
    const GrayImage one = load_pgm(p);
    CHECK(one.width == 1);
    CHECK(one.height == 1);
    CHECK(one.samples[0] == 0);
    fs::remove(p);
}

TEST_CASE("load_pgm handles comments and rejects malformed input") {
    const fs::path p = temp_file("tricky.pgm");
    write_bytes(p, std::string("P5\n# a comment\n 2 # trailing\n1\n255\n") + std::string("\x10\x20", 2));
    const GrayImage img = load_pgm(p);
    CHECK(img.width == 2);
    CHECK(img.samples[1] == 0x20);

    write_bytes(p, "P5\n2 2\n65535\n....");
    CHECK_THROWS_AS(load_pgm(p), FormatError);
    write_bytes(p, std::string("P5\n4 4\n255\n") + std::string(5, 'x'));
    CHECK_THROWS_AS(load_pgm(p), FormatError); // truncated
    write_bytes(p, "P5\n0 0\n255\n");
    CHECK_THROWS_AS(load_pgm(p), ValidationError);
    write_bytes(p, "P6\n1 1\n255\nabc");
    CHECK_THROWS_AS(load_pgm(p), FormatError);
    fs::remove(p);
    CHECK_THROWS_AS(load_pgm(p), IoError);
    CHECK_THROWS_AS(load_image(p), IoError);
}

TEST_CASE("pgm save/load round trip") {
    std::mt19937 rng(7);
    GrayImage img = make_gray(13, 9);
    for (auto& v : img.samples)
        v = std::uint8_t(rng());
    const fs::path p = temp_file("roundtrip.pgm");
    save_pgm(img, p);
    const GrayImage back = load_pgm(p);
    CHECK(back.width == img.width);
    CHECK(back.height == img.height);
    CHECK(back.samples == img.samples);
    fs::remove(p);
}

TEST_CASE("png gray round trip and content-based dispatch") {
    std::mt19937 rng(11);
    GrayImage img = make_gray(17, 5);
    for (auto& v : img.samples)
        v = std::uint8_t(rng());
    const fs::path p = temp_file("gray.png");
    save_png(img, p);
    const GrayImage back = load_png(p);
    CHECK(back.samples == img.samples);

    // load_image dispatches on magic bytes, not the extension
    const fs::path odd = temp_file("actually_png.pgm");
    fs::copy_file(p, odd, fs::copy_options::overwrite_existing);
    const GrayImage via = load_image(odd);
    CHECK(via.samples == img.samples);
    fs::remove(p);
    fs::remove(odd);
}

TEST_CASE("rgb png reduces to Rec.601 luminance") {
    // 0.299*200 + 0.587*100 + 0.114*50 = 124.2 -> 124
    // 0.299*10 + 0.587*20 + 0.114*30 = 18.15 -> 18
    const fs::path p = temp_file("rgb.png");
    write_rgb_png(p, 3, 1, {{{200, 100, 50}}, {{10, 20, 30}}, {{77, 77, 77}}});
    const GrayImage img = load_image(p);
    CHECK(img.samples[0] == 124);
    CHECK(img.samples[1] == 18);
    CHECK(img.samples[2] == 77);
    fs::remove(p);
}

TEST_CASE("unsupported format is rejected") {
    const fs::path p = temp_file("junk.bin");
    write_bytes(p, "GIF89a nonsense");
    CHECK_THROWS_AS(load_image(p), FormatError);
    fs::remove(p);
}

TEST_CASE("binarize with explicit threshold") {
    GrayImage img = make_gray(2, 1);
    img.samples = {0, 255};
    const BinaryImage out = binarize(img, 128);
    CHECK(out.bits == std::vector<std::uint8_t>{1, 0});

    GrayImage blank = make_gray(4, 3, 255);
    const BinaryImage none = binarize(blank, 128);
    for (auto b : none.bits)
        CHECK(b == 0);

    CHECK_THROWS_AS(binarize(img, 300), ValidationError);
}

TEST_CASE("binarize polarity property: ink iff sample < threshold") {
    std::mt19937 rng(3);
    for (int iter = 0; iter < 50; ++iter) {
        GrayImage img = make_gray(9, 7);
        for (auto& v : img.samples)
            v = std::uint8_t(rng());
        const int t = int(rng() % 256);
        const BinaryImage out = binarize(img, t);
        for (std::size_t i = 0; i < img.samples.size(); ++i)
            CHECK(out.bits[i] == (img.samples[i] < t ? 1 : 0));
    }
}

TEST_CASE("binarizing a two-level image between its levels reproduces the mask") {
    std::mt19937 rng(5);
    for (int iter = 0; iter < 20; ++iter) {
        BinaryImage mask = make_binary(8, 8);
        for (auto& b : mask.bits)
            b = std::uint8_t(rng() % 2);
        const GrayImage rendered = to_gray(mask, 40, 200); // ink=40, bg=200
        const int t = 41 + int(rng() % 160);               // strictly between levels
        const BinaryImage again = binarize(rendered, t);
        CHECK(again.bits == mask.bits);
    }
}

TEST_CASE("otsu splits a bimodal histogram at the valley") {
    GrayImage img = make_gray(10, 20);
    for (std::size_t i = 0; i < img.samples.size(); ++i)
        img.samples[i] = i < 100 ? 30 : 220;
    const int t = otsu_threshold(img);
    CHECK(t > 30);
    CHECK(t <= 220);
    const BinaryImage out = binarize(img); // auto threshold
    for (std::size_t i = 0; i < img.samples.size(); ++i)
        CHECK(out.bits[i] == (i < 100 ? 1 : 0));
}

TEST_CASE("otsu threshold maximizes the oracle between-class variance") {
    std::mt19937 rng(17);
    for (int iter = 0; iter < 25; ++iter) {
        GrayImage img = make_gray(16, 16);
        for (auto& v : img.samples)
            v = std::uint8_t(rng());
        const int t = otsu_threshold(img);
        const double var_at_t = between_class_variance(img, t);
        const double best = max_between_class_variance(img);
        CHECK(var_at_t == doctest::Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("otsu on constant images is degenerate but deterministic") {
    const GrayImage white = make_gray(4, 4, 255);
    CHECK(binarize(white).bits == std::vector<std::uint8_t>(16, 0));
    const GrayImage black = make_gray(4, 4, 0);
    CHECK(binarize(black).bits == std::vector<std::uint8_t>(16, 1));
}
