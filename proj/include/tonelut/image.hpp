#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace tonelut {

using Rgb = std::array<double, 3>;

/// Rec.601 luma.
inline double luma(const Rgb& p) noexcept {
    return 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
}

/// Row-major H x W raster of RGB triples with components in [0,1].
class ImageBuffer {
public:
    ImageBuffer() = default;
    /// Throws Error(dimension) on zero size or pixel-count mismatch and
    /// Error(invalid_argument) on any component outside [0,1] or non-finite.
    ImageBuffer(int width, int height, std::vector<Rgb> pixels);

    static ImageBuffer filled(int width, int height, const Rgb& value);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept { return pixels_.size(); }
    bool empty() const noexcept { return pixels_.empty(); }

    const Rgb& at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
    std::span<const Rgb> pixels() const noexcept { return pixels_; }

    bool operator==(const ImageBuffer&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<Rgb> pixels_;
};

/// Clamps each component to [0,1] and builds an image; used by operators
/// whose raw output may leave the unit cube.
ImageBuffer clamp_to_image(int width, int height, std::vector<Rgb> pixels);

ImageBuffer flip_horizontal(const ImageBuffer& image);

double mean_channel(const ImageBuffer& image, int channel);

/// Largest absolute per-component difference. Images must share dimensions.
double max_abs_difference(const ImageBuffer& a, const ImageBuffer& b);

}  // namespace tonelut
