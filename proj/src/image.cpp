#include "tonelut/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tonelut/error.hpp"

namespace tonelut {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::dimension: return "dimension";
        case ErrorCode::invalid_coordinates: return "invalid_coordinates";
        case ErrorCode::parse: return "parse";
        case ErrorCode::format: return "format";
        case ErrorCode::not_found: return "not_found";
        case ErrorCode::unknown_text: return "unknown_text";
        case ErrorCode::version: return "version";
        case ErrorCode::training: return "training";
        case ErrorCode::degenerate_direction: return "degenerate_direction";
        case ErrorCode::io: return "io";
        case ErrorCode::config: return "config";
    }
    return "unknown";
}

ImageBuffer::ImageBuffer(int width, int height, std::vector<Rgb> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width <= 0 || height <= 0) {
        fail(ErrorCode::dimension, "image dimensions must be positive, got " +
                                       std::to_string(width) + "x" + std::to_string(height));
    }
    if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        fail(ErrorCode::dimension, "image pixel count " + std::to_string(pixels_.size()) +
                                       " does not match " + std::to_string(width) + "x" +
                                       std::to_string(height));
    }
    for (std::size_t p = 0; p < pixels_.size(); ++p) {
        for (double v : pixels_[p]) {
            if (!(v >= 0.0 && v <= 1.0)) {
                fail(ErrorCode::invalid_argument,
                     "pixel " + std::to_string(p) + " has a component outside [0,1]");
            }
        }
    }
}

ImageBuffer ImageBuffer::filled(int width, int height, const Rgb& value) {
    return ImageBuffer(width, height,
                       std::vector<Rgb>(static_cast<std::size_t>(std::max(width, 0)) *
                                            static_cast<std::size_t>(std::max(height, 0)),
                                        value));
}

ImageBuffer clamp_to_image(int width, int height, std::vector<Rgb> pixels) {
    for (auto& p : pixels) {
        for (auto& v : p) v = std::clamp(v, 0.0, 1.0);
    }
    return ImageBuffer(width, height, std::move(pixels));
}

ImageBuffer flip_horizontal(const ImageBuffer& image) {
    std::vector<Rgb> out(image.pixel_count());
    const int w = image.width();
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < w; ++x) {
            out[static_cast<std::size_t>(y) * w + x] = image.at(w - 1 - x, y);
        }
    }
    return ImageBuffer(w, image.height(), std::move(out));
}

double mean_channel(const ImageBuffer& image, int channel) {
    double sum = 0.0;
    for (const auto& p : image.pixels()) sum += p[channel];
    return sum / static_cast<double>(image.pixel_count());
}

double max_abs_difference(const ImageBuffer& a, const ImageBuffer& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        fail(ErrorCode::dimension, "images differ in size");
    }
    double worst = 0.0;
    for (std::size_t p = 0; p < a.pixel_count(); ++p) {
        for (int c = 0; c < 3; ++c) {
            worst = std::max(worst, std::abs(a.pixels()[p][c] - b.pixels()[p][c]));
        }
    }
    return worst;
}

}  // namespace tonelut
