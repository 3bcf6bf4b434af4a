#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "tonelut/image.hpp"

namespace tonelut {

/// Dense N x N x N grid of RGB outputs. Entry (i, j, k) is indexed by the red,
/// green and blue grid positions respectively and stored red-fastest.
class Lut3D {
public:
    Lut3D() = default;
    explicit Lut3D(int size);
    Lut3D(int size, std::vector<Rgb> values);

    int size() const noexcept { return size_; }
    std::size_t entry_count() const noexcept { return values_.size(); }

    std::size_t index(int i, int j, int k) const noexcept {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(size_) * (static_cast<std::size_t>(j) +
                                                  static_cast<std::size_t>(size_) * k);
    }
    const Rgb& at(int i, int j, int k) const noexcept { return values_[index(i, j, k)]; }
    Rgb& at(int i, int j, int k) noexcept { return values_[index(i, j, k)]; }

    std::span<const Rgb> values() const noexcept { return values_; }
    std::span<Rgb> values() noexcept { return values_; }

    bool operator==(const Lut3D&) const = default;

private:
    int size_ = 0;
    std::vector<Rgb> values_;
};

/// Ordered bank of basis LUTs sharing a single grid size.
class BasisLutBank {
public:
    BasisLutBank() = default;
    explicit BasisLutBank(std::vector<Lut3D> luts);

    std::size_t count() const noexcept { return luts_.size(); }
    int grid_size() const noexcept { return luts_.empty() ? 0 : luts_.front().size(); }
    const Lut3D& operator[](std::size_t l) const { return luts_[l]; }
    std::span<const Lut3D> luts() const noexcept { return luts_; }

    bool operator==(const BasisLutBank&) const = default;

private:
    std::vector<Lut3D> luts_;
};

/// Per-channel knot positions; x_c(0) = 0, x_c(N-1) = 1, strictly increasing.
class SamplingCoordinates {
public:
    SamplingCoordinates() = default;
    /// Throws Error(invalid_coordinates) if any invariant is violated.
    explicit SamplingCoordinates(std::array<std::vector<double>, 3> axes);

    static SamplingCoordinates uniform(int size);

    int size() const noexcept { return static_cast<int>(axes_[0].size()); }
    std::span<const double> axis(int channel) const noexcept { return axes_[channel]; }
    const std::array<std::vector<double>, 3>& axes() const noexcept { return axes_; }

    bool operator==(const SamplingCoordinates&) const = default;

private:
    std::array<std::vector<double>, 3> axes_;
};

using LutWeights = std::vector<double>;

/// Gradients of a scalar objective with respect to the inputs of lookup().
struct LookupGradient {
    std::vector<Rgb> lut;                         // one triple per LUT entry
    std::array<std::vector<double>, 3> coords;    // one vector of N per channel
    std::vector<Rgb> image;                       // one triple per pixel
};

Lut3D make_identity(int size);
Lut3D make_gamma(int size, double gamma);
/// Logistic contrast curve centred at 0.5, rescaled so 0 and 1 are fixed.
Lut3D make_contrast_scurve(int size, double steepness);
/// Moves every entry away from (s > 1) or toward (s < 1) its Rec.601 luma.
Lut3D make_saturation(int size, double factor);
Lut3D make_constant(int size, const Rgb& value);

/// {identity, gamma 0.7, contrast s-curve k = 6}.
BasisLutBank default_basis_bank(int size = 17);

Lut3D fuse(const BasisLutBank& bank, std::span<const double> weights);

/// Trilinear lookup through non-uniform coordinates, clamped to [0,1].
ImageBuffer lookup(const Lut3D& lut, const SamplingCoordinates& coords, const ImageBuffer& image);

/// Same interpolation without the final clamp.
std::vector<Rgb> lookup_unclamped(const Lut3D& lut, const SamplingCoordinates& coords,
                                  const ImageBuffer& image);

/// Reverse-mode gradient of lookup() given the upstream gradient on each output
/// pixel. Components whose raw value was clamped receive zero gradient.
LookupGradient lookup_grad(const Lut3D& lut, const SamplingCoordinates& coords,
                           const ImageBuffer& image, std::span<const Rgb> upstream);

/// Cell index i with x(i) <= v <= x(i+1); v == x(i) resolves to the lower
/// knot with t = 0 and v == 1 resolves to cell N-2 with t = 1.
int locate_cell(std::span<const double> axis, double v) noexcept;

}  // namespace tonelut
