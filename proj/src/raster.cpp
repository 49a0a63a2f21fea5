#include "datefield/raster.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <png.h>

#include "atomic_write.hpp"
#include "datefield/errors.hpp"

namespace datefield {

namespace {

void require_dims(int width, int height, const char* what) {
    if (width <= 0 || height <= 0)
        throw ValidationError(std::string(what) + ": image dimensions must be positive");
}

// Reads the next PGM header token, skipping whitespace and '#' comments.
std::string next_pgm_token(std::istream& in) {
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(char(c));
        c = in.get();
    }
    return tok;
}

int parse_pgm_int(std::istream& in, const char* field) {
    const std::string tok = next_pgm_token(in);
    if (tok.empty())
        throw FormatError(std::string("PGM: missing ") + field);
    for (char ch : tok)
        if (!std::isdigit(static_cast<unsigned char>(ch)))
            throw FormatError(std::string("PGM: malformed ") + field + ": " + tok);
    try {
        return std::stoi(tok);
    } catch (const std::exception&) {
        throw FormatError(std::string("PGM: out-of-range ") + field + ": " + tok);
    }
}

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;

    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

} // namespace

GrayImage make_gray(int width, int height, std::uint8_t fill) {
    require_dims(width, height, "make_gray");
    GrayImage img;
    img.width = width;
    img.height = height;
    img.samples.assign(std::size_t(width) * height, fill);
    return img;
}

BinaryImage make_binary(int width, int height, std::uint8_t fill) {
    require_dims(width, height, "make_binary");
    BinaryImage img;
    img.width = width;
    img.height = height;
    img.bits.assign(std::size_t(width) * height, fill);
    return img;
}

GrayImage load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open: " + path.string());

    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '5')
        throw FormatError("not a P5 PGM: " + path.string());

    const int width = parse_pgm_int(in, "width");
    const int height = parse_pgm_int(in, "height");
    const int maxval = parse_pgm_int(in, "maxval");
    if (width <= 0 || height <= 0)
        throw ValidationError("PGM: zero-dimension image: " + path.string());
    if (maxval <= 0 || maxval > 255)
        throw FormatError("PGM: only 8-bit depth supported, maxval=" + std::to_string(maxval));

    GrayImage img;
    img.width = width;
    img.height = height;
    img.samples.resize(std::size_t(width) * height);
    in.read(reinterpret_cast<char*>(img.samples.data()), std::streamsize(img.samples.size()));
    if (std::size_t(in.gcount()) != img.samples.size())
        throw FormatError("PGM: truncated pixel data: " + path.string());
    return img;
}

GrayImage load_png(const std::filesystem::path& path) {
    PngReader r;
    r.fp = std::fopen(path.string().c_str(), "rb");
    if (!r.fp)
        throw IoError("cannot open: " + path.string());

    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!r.png)
        throw IoError("libpng init failed");
    r.info = png_create_info_struct(r.png);
    if (!r.info)
        throw IoError("libpng init failed");
    if (setjmp(png_jmpbuf(r.png)))
        throw FormatError("PNG decode failed: " + path.string());

    png_init_io(r.png, r.fp);
    png_read_info(r.png, r.info);

    const png_uint_32 width = png_get_image_width(r.png, r.info);
    const png_uint_32 height = png_get_image_height(r.png, r.info);
    const int bit_depth = png_get_bit_depth(r.png, r.info);
    const int color_type = png_get_color_type(r.png, r.info);

    if (width == 0 || height == 0)
        throw ValidationError("PNG: zero-dimension image: " + path.string());
    if (bit_depth > 8)
        throw FormatError("PNG: only 8-bit depth supported: " + path.string());

    if (color_type == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(r.png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
        png_set_expand_gray_1_2_4_to_8(r.png);
    if (png_get_valid(r.png, r.info, PNG_INFO_tRNS))
        png_set_tRNS_to_alpha(r.png);
    if (color_type & PNG_COLOR_MASK_ALPHA || png_get_valid(r.png, r.info, PNG_INFO_tRNS))
        png_set_strip_alpha(r.png);
    png_set_interlace_handling(r.png);
    png_read_update_info(r.png, r.info);

    const png_size_t rowbytes = png_get_rowbytes(r.png, r.info);
    const int channels = png_get_channels(r.png, r.info);
    std::vector<std::uint8_t> rows(std::size_t(rowbytes) * height);
    std::vector<png_bytep> row_ptrs(height);
    for (png_uint_32 y = 0; y < height; ++y)
        row_ptrs[y] = rows.data() + std::size_t(y) * rowbytes;
    png_read_image(r.png, row_ptrs.data());

    GrayImage img;
    img.width = int(width);
    img.height = int(height);
    img.samples.resize(std::size_t(width) * height);
    for (png_uint_32 y = 0; y < height; ++y) {
        const std::uint8_t* row = row_ptrs[y];
        for (png_uint_32 x = 0; x < width; ++x) {
            std::uint8_t v;
            if (channels == 1) {
                v = row[x];
            } else if (channels == 3) {
                const double lum = 0.299 * row[3 * x] + 0.587 * row[3 * x + 1] + 0.114 * row[3 * x + 2];
                v = std::uint8_t(std::lround(lum));
            } else {
                throw FormatError("PNG: unsupported channel layout: " + path.string());
            }
            img.samples[std::size_t(y) * width + x] = v;
        }
    }
    return img;
}

GrayImage load_image(const std::filesystem::path& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe)
        throw IoError("cannot open: " + path.string());
    std::array<unsigned char, 8> magic{};
    probe.read(reinterpret_cast<char*>(magic.data()), magic.size());
    const std::streamsize got = probe.gcount();
    probe.close();

    static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    if (got >= 8 && std::memcmp(magic.data(), png_sig, 8) == 0)
        return load_png(path);
    if (got >= 2 && magic[0] == 'P' && magic[1] == '5')
        return load_pgm(path);
    throw FormatError("unsupported image format: " + path.string());
}

void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
    require_dims(img.width, img.height, "save_pgm");
    std::ostringstream out;
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.samples.data()), std::streamsize(img.samples.size()));
    write_file_atomic(path, out.str());
}

void save_png(const GrayImage& img, const std::filesystem::path& path) {
    require_dims(img.width, img.height, "save_png");
    const std::filesystem::path tmp = path.string() + ".tmp";

    std::FILE* fp = std::fopen(tmp.string().c_str(), "wb");
    if (!fp)
        throw IoError("cannot open for writing: " + tmp.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        std::fclose(fp);
        throw IoError("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("PNG encode failed: " + path.string());
    }

    png_init_io(png, fp);
    png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y)
        png_write_row(png, const_cast<png_bytep>(img.samples.data() + std::size_t(y) * img.width));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);

    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw IoError("rename failed: " + path.string() + ": " + ec.message());
}

int otsu_threshold(const GrayImage& img) {
    require_dims(img.width, img.height, "otsu_threshold");

    std::array<std::int64_t, 256> hist{};
    for (std::uint8_t v : img.samples)
        ++hist[v];

    const std::int64_t total = std::int64_t(img.samples.size());
    std::int64_t sum_all = 0;
    for (int v = 0; v < 256; ++v)
        sum_all += std::int64_t(v) * hist[v];

    // Between-class variance of the split {v < t} / {v >= t}, up to the
    // constant factor 1/N^2: (s0*N - S*w0)^2 / (w0*w1).
    int best_t = 1;
    double best_var = -1.0;
    std::int64_t w0 = 0, s0 = 0;
    for (int t = 1; t <= 255; ++t) {
        w0 += hist[t - 1];
        s0 += std::int64_t(t - 1) * hist[t - 1];
        const std::int64_t w1 = total - w0;
        double var = 0.0;
        if (w0 > 0 && w1 > 0) {
            const double num = double(s0) * double(total) - double(sum_all) * double(w0);
            var = num * num / (double(w0) * double(w1));
        }
        if (var > best_var) {
            best_var = var;
            best_t = t;
        }
    }
    return best_t;
}

BinaryImage binarize(const GrayImage& img, std::optional<int> threshold) {
    require_dims(img.width, img.height, "binarize");
    if (img.samples.size() != std::size_t(img.width) * img.height)
        throw ValidationError("binarize: samples length does not match dimensions");
    if (threshold && (*threshold < 0 || *threshold > 255))
        throw ValidationError("binarize: threshold must be in 0..255");

    const int t = threshold ? *threshold : otsu_threshold(img);
    BinaryImage out;
    out.width = img.width;
    out.height = img.height;
    out.bits.resize(img.samples.size());
    for (std::size_t i = 0; i < img.samples.size(); ++i)
        out.bits[i] = img.samples[i] < t ? 1 : 0;
    return out;
}

GrayImage to_gray(const BinaryImage& img, std::uint8_t ink, std::uint8_t background) {
    GrayImage out;
    out.width = img.width;
    out.height = img.height;
    out.samples.resize(img.bits.size());
    for (std::size_t i = 0; i < img.bits.size(); ++i)
        out.samples[i] = img.bits[i] ? ink : background;
    return out;
}

} // namespace datefield
