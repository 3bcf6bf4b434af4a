#include "tonelut/lut.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tonelut/error.hpp"

namespace tonelut {

namespace {

void require_grid_size(int size) {
    if (size < 2) fail(ErrorCode::dimension, "LUT grid size must be >= 2, got " + std::to_string(size));
}

std::size_t cube(int size) {
    return static_cast<std::size_t>(size) * static_cast<std::size_t>(size) *
           static_cast<std::size_t>(size);
}

template <typename Fn>
Lut3D generate(int size, Fn&& per_entry) {
    require_grid_size(size);
    Lut3D lut(size);
    const double step = 1.0 / (size - 1);
    for (int k = 0; k < size; ++k) {
        for (int j = 0; j < size; ++j) {
            for (int i = 0; i < size; ++i) {
                lut.at(i, j, k) = per_entry(Rgb{i * step, j * step, k * step});
            }
        }
    }
    return lut;
}

// Per-pixel, per-channel cell position. Kept separate from the blend so the
// three binary searches run once per pixel.
struct CellPosition {
    std::array<int, 3> cell;
    std::array<double, 3> t;
    std::array<double, 3> width;
};

CellPosition locate(const SamplingCoordinates& coords, const Rgb& p) {
    CellPosition pos{};
    for (int c = 0; c < 3; ++c) {
        const auto axis = coords.axis(c);
        const int i = locate_cell(axis, p[c]);
        const double lo = axis[i];
        const double width = axis[i + 1] - lo;
        pos.cell[c] = i;
        pos.width[c] = width;
        pos.t[c] = (p[c] - lo) / width;
    }
    return pos;
}

void check_compatible(const Lut3D& lut, const SamplingCoordinates& coords) {
    if (lut.size() < 2) fail(ErrorCode::dimension, "LUT is empty");
    if (coords.size() != lut.size()) {
        fail(ErrorCode::dimension, "coordinate size " + std::to_string(coords.size()) +
                                       " does not match LUT size " + std::to_string(lut.size()));
    }
}

Rgb blend(const Lut3D& lut, const CellPosition& pos) {
    Rgb out{0.0, 0.0, 0.0};
    for (int dk = 0; dk < 2; ++dk) {
        const double wb = dk ? pos.t[2] : 1.0 - pos.t[2];
        for (int dj = 0; dj < 2; ++dj) {
            const double wg = dj ? pos.t[1] : 1.0 - pos.t[1];
            for (int di = 0; di < 2; ++di) {
                const double w = (di ? pos.t[0] : 1.0 - pos.t[0]) * wg * wb;
                const Rgb& v = lut.at(pos.cell[0] + di, pos.cell[1] + dj, pos.cell[2] + dk);
                out[0] += w * v[0];
                out[1] += w * v[1];
                out[2] += w * v[2];
            }
        }
    }
    return out;
}

}  // namespace

Lut3D::Lut3D(int size) : size_(size), values_(cube(size), Rgb{0.0, 0.0, 0.0}) {
    require_grid_size(size);
}

Lut3D::Lut3D(int size, std::vector<Rgb> values) : size_(size), values_(std::move(values)) {
    require_grid_size(size);
    if (values_.size() != cube(size)) {
        fail(ErrorCode::dimension, "LUT of size " + std::to_string(size) + " needs " +
                                       std::to_string(cube(size)) + " entries, got " +
                                       std::to_string(values_.size()));
    }
    for (const auto& v : values_) {
        for (double x : v) {
            if (!std::isfinite(x)) fail(ErrorCode::invalid_argument, "LUT entry is not finite");
        }
    }
}

BasisLutBank::BasisLutBank(std::vector<Lut3D> luts) : luts_(std::move(luts)) {
    if (luts_.empty()) fail(ErrorCode::dimension, "basis bank must hold at least one LUT");
    for (const auto& lut : luts_) {
        if (lut.size() != luts_.front().size()) {
            fail(ErrorCode::dimension, "basis LUTs must share one grid size");
        }
    }
}

SamplingCoordinates::SamplingCoordinates(std::array<std::vector<double>, 3> axes)
    : axes_(std::move(axes)) {
    const std::size_t n = axes_[0].size();
    if (n < 2) fail(ErrorCode::dimension, "sampling coordinates need at least 2 knots");
    for (int c = 0; c < 3; ++c) {
        const auto& a = axes_[c];
        if (a.size() != n) fail(ErrorCode::dimension, "sampling coordinate channels differ in length");
        if (a.front() != 0.0 || a.back() != 1.0) {
            fail(ErrorCode::invalid_coordinates,
                 "channel " + std::to_string(c) + " coordinates must start at 0 and end at 1");
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (!(a[i + 1] > a[i])) {
                fail(ErrorCode::invalid_coordinates, "channel " + std::to_string(c) +
                                                         " coordinates not strictly increasing at " +
                                                         std::to_string(i));
            }
        }
    }
}

SamplingCoordinates SamplingCoordinates::uniform(int size) {
    require_grid_size(size);
    std::vector<double> axis(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) axis[i] = static_cast<double>(i) / (size - 1);
    axis.back() = 1.0;
    return SamplingCoordinates({axis, axis, axis});
}

Lut3D make_identity(int size) {
    return generate(size, [](const Rgb& g) { return g; });
}

Lut3D make_gamma(int size, double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        fail(ErrorCode::invalid_argument, "gamma must be positive and finite");
    }
    return generate(size, [gamma](const Rgb& g) {
        return Rgb{std::pow(g[0], gamma), std::pow(g[1], gamma), std::pow(g[2], gamma)};
    });
}

Lut3D make_contrast_scurve(int size, double steepness) {
    if (!(steepness > 0.0) || !std::isfinite(steepness)) {
        fail(ErrorCode::invalid_argument, "s-curve steepness must be positive and finite");
    }
    const auto logistic = [steepness](double v) { return 1.0 / (1.0 + std::exp(-steepness * (v - 0.5))); };
    const double lo = logistic(0.0);
    const double hi = logistic(1.0);
    return generate(size, [&](const Rgb& g) {
        Rgb out;
        for (int c = 0; c < 3; ++c) out[c] = (logistic(g[c]) - lo) / (hi - lo);
        return out;
    });
}

Lut3D make_saturation(int size, double factor) {
    if (!(factor >= 0.0) || !std::isfinite(factor)) {
        fail(ErrorCode::invalid_argument, "saturation factor must be finite and non-negative");
    }
    return generate(size, [factor](const Rgb& g) {
        const double y = luma(g);
        Rgb out;
        for (int c = 0; c < 3; ++c) out[c] = std::clamp(y + factor * (g[c] - y), 0.0, 1.0);
        return out;
    });
}

Lut3D make_constant(int size, const Rgb& value) {
    return generate(size, [&value](const Rgb&) { return value; });
}

BasisLutBank default_basis_bank(int size) {
    return BasisLutBank({make_identity(size), make_gamma(size, 0.7), make_contrast_scurve(size, 6.0)});
}

Lut3D fuse(const BasisLutBank& bank, std::span<const double> weights) {
    if (bank.count() == 0) fail(ErrorCode::dimension, "basis bank is empty");
    if (weights.size() != bank.count()) {
        fail(ErrorCode::dimension, "expected " + std::to_string(bank.count()) + " LUT weights, got " +
                                       std::to_string(weights.size()));
    }
    const int n = bank.grid_size();
    std::vector<Rgb> out(cube(n), Rgb{0.0, 0.0, 0.0});
    for (std::size_t l = 0; l < bank.count(); ++l) {
        const double w = weights[l];
        const auto src = bank[l].values();
        for (std::size_t e = 0; e < out.size(); ++e) {
            out[e][0] += w * src[e][0];
            out[e][1] += w * src[e][1];
            out[e][2] += w * src[e][2];
        }
    }
    return Lut3D(n, std::move(out));
}

int locate_cell(std::span<const double> axis, double v) noexcept {
    const int last_cell = static_cast<int>(axis.size()) - 2;
    // upper_bound gives the first knot strictly greater than v.
    const auto it = std::upper_bound(axis.begin(), axis.end(), v);
    const int i = static_cast<int>(it - axis.begin()) - 1;
    return std::clamp(i, 0, last_cell);
}

std::vector<Rgb> lookup_unclamped(const Lut3D& lut, const SamplingCoordinates& coords,
                                  const ImageBuffer& image) {
    check_compatible(lut, coords);
    std::vector<Rgb> out(image.pixel_count());
    const auto pixels = image.pixels();
    for (std::size_t p = 0; p < pixels.size(); ++p) {
        out[p] = blend(lut, locate(coords, pixels[p]));
    }
    return out;
}

ImageBuffer lookup(const Lut3D& lut, const SamplingCoordinates& coords, const ImageBuffer& image) {
    return clamp_to_image(image.width(), image.height(), lookup_unclamped(lut, coords, image));
}

LookupGradient lookup_grad(const Lut3D& lut, const SamplingCoordinates& coords,
                           const ImageBuffer& image, std::span<const Rgb> upstream) {
    check_compatible(lut, coords);
    if (upstream.size() != image.pixel_count()) {
        fail(ErrorCode::dimension, "upstream gradient must have one triple per pixel");
    }
    const int n = lut.size();
    LookupGradient grad;
    grad.lut.assign(lut.entry_count(), Rgb{0.0, 0.0, 0.0});
    for (auto& axis : grad.coords) axis.assign(static_cast<std::size_t>(n), 0.0);
    grad.image.assign(image.pixel_count(), Rgb{0.0, 0.0, 0.0});

    const auto pixels = image.pixels();
    for (std::size_t p = 0; p < pixels.size(); ++p) {
        const CellPosition pos = locate(coords, pixels[p]);
        const Rgb raw = blend(lut, pos);
        Rgb g = upstream[p];
        for (int c = 0; c < 3; ++c) {
            if (raw[c] < 0.0 || raw[c] > 1.0) g[c] = 0.0;
        }
        if (g[0] == 0.0 && g[1] == 0.0 && g[2] == 0.0) continue;

        const std::array<double, 2> wr{1.0 - pos.t[0], pos.t[0]};
        const std::array<double, 2> wg{1.0 - pos.t[1], pos.t[1]};
        const std::array<double, 2> wb{1.0 - pos.t[2], pos.t[2]};
        std::array<double, 3> dt{0.0, 0.0, 0.0};

        for (int dk = 0; dk < 2; ++dk) {
            for (int dj = 0; dj < 2; ++dj) {
                for (int di = 0; di < 2; ++di) {
                    const std::size_t e = lut.index(pos.cell[0] + di, pos.cell[1] + dj, pos.cell[2] + dk);
                    const double w = wr[di] * wg[dj] * wb[dk];
                    const Rgb& v = lut.values()[e];
                    const double gv = g[0] * v[0] + g[1] * v[1] + g[2] * v[2];
                    for (int c = 0; c < 3; ++c) grad.lut[e][c] += w * g[c];
                    // d(weight)/dt per axis: +/-1 times the other two weights.
                    dt[0] += (di ? 1.0 : -1.0) * wg[dj] * wb[dk] * gv;
                    dt[1] += (dj ? 1.0 : -1.0) * wr[di] * wb[dk] * gv;
                    dt[2] += (dk ? 1.0 : -1.0) * wr[di] * wg[dj] * gv;
                }
            }
        }
        for (int c = 0; c < 3; ++c) {
            const int i = pos.cell[c];
            const double inv_width = 1.0 / pos.width[c];
            grad.coords[c][i] += dt[c] * (pos.t[c] - 1.0) * inv_width;
            grad.coords[c][i + 1] -= dt[c] * pos.t[c] * inv_width;
            grad.image[p][c] += dt[c] * inv_width;
        }
    }
    return grad;
}

}  // namespace tonelut
