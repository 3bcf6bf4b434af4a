#include <png.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "tonelut/error.hpp"
#include "tonelut/formats.hpp"

namespace tonelut {

namespace {

std::uint8_t quantize(double v) {
    return static_cast<std::uint8_t>(std::floor(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5));
}

struct PngImage {
    png_image image{};
    PngImage() { image.version = PNG_IMAGE_VERSION; }
    ~PngImage() { png_image_free(&image); }
    PngImage(const PngImage&) = delete;
    PngImage& operator=(const PngImage&) = delete;
};

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

}  // namespace

ImageBuffer decode_png(std::string_view bytes) {
    PngImage png;
    if (!png_image_begin_read_from_memory(&png.image, bytes.data(), bytes.size())) {
        fail(ErrorCode::format, std::string("invalid PNG: ") + png.image.message);
    }
    if (png.image.format & PNG_FORMAT_FLAG_LINEAR) fail(ErrorCode::format, "unsupported PNG bit depth (16-bit)");
    if (!(png.image.format & PNG_FORMAT_FLAG_COLOR)) fail(ErrorCode::format, "unsupported PNG color type (grayscale)");
    png.image.format = PNG_FORMAT_RGBA;
    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png.image));
    if (!png_image_finish_read(&png.image, nullptr, buffer.data(), 0, nullptr)) {
        fail(ErrorCode::format, std::string("PNG decode failed: ") + png.image.message);
    }
    const int w = static_cast<int>(png.image.width);
    const int h = static_cast<int>(png.image.height);
    std::vector<Rgb> pixels(static_cast<std::size_t>(w) * h);
    for (std::size_t p = 0; p < pixels.size(); ++p) {
        for (int c = 0; c < 3; ++c) pixels[p][c] = buffer[4 * p + c] / 255.0;
    }
    return ImageBuffer(w, h, std::move(pixels));
}

std::string encode_png(const ImageBuffer& image) {
    PngImage png;
    png.image.width = static_cast<png_uint_32>(image.width());
    png.image.height = static_cast<png_uint_32>(image.height());
    png.image.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> raw(image.pixel_count() * 3);
    for (std::size_t p = 0; p < image.pixel_count(); ++p) {
        for (int c = 0; c < 3; ++c) raw[3 * p + c] = quantize(image.pixels()[p][c]);
    }
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&png.image, nullptr, &size, 0, raw.data(), 0, nullptr)) {
        fail(ErrorCode::format, std::string("PNG encode failed: ") + png.image.message);
    }
    std::string out(size, '\0');
    if (!png_image_write_to_memory(&png.image, out.data(), &size, 0, raw.data(), 0, nullptr)) {
        fail(ErrorCode::format, std::string("PNG encode failed: ") + png.image.message);
    }
    out.resize(size);
    return out;
}

ImageBuffer parse_ppm(std::string_view text) {
    // Tokens separated by whitespace; '#' starts a comment to end of line.
    std::vector<std::string_view> tokens;
    std::vector<std::size_t> token_lines;
    std::size_t line = 1;
    for (std::size_t i = 0; i < text.size();) {
        const char ch = text[i];
        if (ch == '#') {
            while (i < text.size() && text[i] != '\n') ++i;
        } else if (std::isspace(static_cast<unsigned char>(ch))) {
            if (ch == '\n') ++line;
            ++i;
        } else {
            std::size_t j = i;
            while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != '#') ++j;
            tokens.push_back(text.substr(i, j - i));
            token_lines.push_back(line);
            i = j;
        }
    }
    auto integer = [&](std::size_t t) {
        if (t >= tokens.size()) fail(ErrorCode::parse, "line " + std::to_string(line) + ": unexpected end of PPM");
        int v = 0;
        const auto [ptr, ec] = std::from_chars(tokens[t].data(), tokens[t].data() + tokens[t].size(), v);
        if (ec != std::errc() || ptr != tokens[t].data() + tokens[t].size()) {
            fail(ErrorCode::parse, "line " + std::to_string(token_lines[t]) + ": expected an integer, found '" +
                                       std::string(tokens[t]) + "'");
        }
        return v;
    };
    if (tokens.empty() || tokens[0] != "P3") fail(ErrorCode::format, "only ASCII P3 PPM files are supported");
    const int w = integer(1);
    const int h = integer(2);
    const int maxval = integer(3);
    if (w <= 0 || h <= 0) fail(ErrorCode::format, "PPM dimensions must be positive");
    if (maxval <= 0 || maxval > 255) fail(ErrorCode::format, "unsupported PPM bit depth (maxval " + std::to_string(maxval) + ")");
    const std::size_t count = static_cast<std::size_t>(w) * h;
    if (tokens.size() != 4 + 3 * count) {
        fail(ErrorCode::parse, "line " + std::to_string(line) + ": PPM needs " + std::to_string(3 * count) +
                                   " samples, found " + std::to_string(tokens.size() - 4));
    }
    std::vector<Rgb> pixels(count);
    for (std::size_t p = 0; p < count; ++p) {
        for (int c = 0; c < 3; ++c) {
            const std::size_t t = 4 + 3 * p + c;
            const int v = integer(t);
            if (v < 0 || v > maxval) {
                fail(ErrorCode::parse, "line " + std::to_string(token_lines[t]) + ": sample out of range");
            }
            pixels[p][c] = static_cast<double>(v) / maxval;
        }
    }
    return ImageBuffer(w, h, std::move(pixels));
}

std::string format_ppm(const ImageBuffer& image) {
    std::string out = "P3\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            const Rgb& p = image.at(x, y);
            out += std::to_string(quantize(p[0])) + " " + std::to_string(quantize(p[1])) + " " +
                   std::to_string(quantize(p[2]));
            out += x + 1 == image.width() ? "\n" : "  ";
        }
    }
    return out;
}

ImageBuffer read_image(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    if (bytes.size() >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) == 0) {
        return decode_png(bytes);
    }
    if (bytes.starts_with("P3")) return parse_ppm(bytes);
    fail(ErrorCode::format, "unsupported image format: " + path.string());
}

void write_image(const ImageBuffer& image, const std::filesystem::path& path) {
    write_file_atomic(path, lower_extension(path) == ".ppm" ? format_ppm(image) : encode_png(image));
}

std::vector<ImageBuffer> read_image_directory(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) fail(ErrorCode::io, "not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const std::string ext = lower_extension(entry.path());
        if (entry.is_regular_file() && (ext == ".png" || ext == ".ppm")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<ImageBuffer> images;
    images.reserve(files.size());
    for (const auto& f : files) images.push_back(read_image(f));
    return images;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io, "cannot open " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) fail(ErrorCode::io, "failed reading " + path.string());
    return data;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view data) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorCode::io, "cannot write " + path.string());
        out.write(data.data(), static_cast<std::streamsize>(data.size()));
        if (!out) fail(ErrorCode::io, "failed writing " + path.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        fail(ErrorCode::io, "cannot move output into place at " + path.string());
    }
}

}  // namespace tonelut
