#include "tonelut/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tonelut/embedding_vector.hpp"
#include "tonelut/error.hpp"

namespace tonelut {

namespace {

constexpr double kMinInterval = 1e-12;

void require_same_shape(const ImageBuffer& a, const ImageBuffer& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        fail(ErrorCode::dimension, "images differ in size: " + std::to_string(a.width()) + "x" +
                                       std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                                       "x" + std::to_string(b.height()));
    }
}

// Powered intervals (x(i+1) - x(i))^alpha per channel.
std::array<std::vector<double>, 3> powered_intervals(const BasisLutBank& bank,
                                                     const SamplingCoordinates& coords, double alpha) {
    if (coords.size() != bank.grid_size()) {
        fail(ErrorCode::dimension, "coordinate size does not match the basis LUT size");
    }
    std::array<std::vector<double>, 3> out;
    for (int c = 0; c < 3; ++c) {
        const auto x = coords.axis(c);
        out[c].resize(x.size() - 1);
        for (std::size_t i = 0; i + 1 < x.size(); ++i) {
            const double d = x[i + 1] - x[i];
            if (!(d >= kMinInterval)) {
                fail(ErrorCode::invalid_coordinates, "sampling interval below 1e-12 in channel " + std::to_string(c));
            }
            out[c][i] = std::pow(d, alpha);
        }
    }
    return out;
}

}  // namespace

void LossWeights::validate() const {
    for (double v : {content, clip, lut, weight, interval, alpha}) {
        if (!std::isfinite(v) || v < 0.0) fail(ErrorCode::config, "loss weights must be finite and non-negative");
    }
}

double content_loss(const ImageBuffer& source, const ImageBuffer& adjusted) {
    require_same_shape(source, adjusted);
    double sum = 0.0;
    for (std::size_t p = 0; p < source.pixel_count(); ++p) {
        for (int c = 0; c < 3; ++c) {
            const double d = adjusted.pixels()[p][c] - source.pixels()[p][c];
            sum += d * d;
        }
    }
    return sum / (3.0 * static_cast<double>(source.pixel_count()));
}

std::vector<Rgb> content_loss_grad(const ImageBuffer& source, const ImageBuffer& adjusted) {
    require_same_shape(source, adjusted);
    const double scale = 2.0 / (3.0 * static_cast<double>(source.pixel_count()));
    std::vector<Rgb> g(source.pixel_count());
    for (std::size_t p = 0; p < g.size(); ++p) {
        for (int c = 0; c < 3; ++c) g[p][c] = scale * (adjusted.pixels()[p][c] - source.pixels()[p][c]);
    }
    return g;
}

double clip_directional_loss(std::span<const double> image_delta, std::span<const double> text_delta) {
    if (image_delta.size() != text_delta.size()) fail(ErrorCode::dimension, "direction vectors differ in dimension");
    const double ni = norm(image_delta);
    const double nt = norm(text_delta);
    if (ni < kDegenerateDirectionEps || nt < kDegenerateDirectionEps) return 1.0;
    return 1.0 - dot(image_delta, text_delta) / (ni * nt);
}

std::vector<double> clip_directional_loss_grad(std::span<const double> image_delta,
                                               std::span<const double> text_delta) {
    if (image_delta.size() != text_delta.size()) fail(ErrorCode::dimension, "direction vectors differ in dimension");
    std::vector<double> g(image_delta.size(), 0.0);
    const double ni = norm(image_delta);
    const double nt = norm(text_delta);
    if (ni < kDegenerateDirectionEps || nt < kDegenerateDirectionEps) return g;
    const double cos = dot(image_delta, text_delta) / (ni * nt);
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] = -(text_delta[i] / (ni * nt) - cos * image_delta[i] / (ni * ni));
    }
    return g;
}

std::vector<double> interval_slab_energy(const BasisLutBank& bank, int axis) {
    if (axis < 0 || axis > 2) fail(ErrorCode::invalid_argument, "axis must be 0, 1 or 2");
    const int n = bank.grid_size();
    std::vector<double> out(static_cast<std::size_t>(n - 1), 0.0);
    for (const auto& lut : bank.luts()) {
        for (int k = 0; k < n; ++k) {
            for (int j = 0; j < n; ++j) {
                for (int i = 0; i < n; ++i) {
                    std::array<int, 3> lo{i, j, k};
                    if (lo[axis] == n - 1) continue;
                    std::array<int, 3> hi = lo;
                    ++hi[axis];
                    const Rgb& a = lut.at(lo[0], lo[1], lo[2]);
                    const Rgb& b = lut.at(hi[0], hi[1], hi[2]);
                    double s = 0.0;
                    for (int c = 0; c < 3; ++c) s += (b[c] - a[c]) * (b[c] - a[c]);
                    out[lo[axis]] += s;
                }
            }
        }
    }
    return out;
}

std::vector<double> interval_loss_minimizer(const BasisLutBank& bank, int axis, double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) fail(ErrorCode::invalid_argument, "alpha must be >= 0");
    const std::vector<double> a = interval_slab_energy(bank, axis);
    std::vector<double> d(a.size(), 1.0 / static_cast<double>(a.size()));
    if (*std::min_element(a.begin(), a.end()) <= 0.0) return d;
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += d[i] = std::pow(a[i], 1.0 / (1.0 + 2.0 * alpha));
    for (auto& v : d) v /= sum;
    return d;
}

double weight_l2(std::span<const double> weights) { return dot(weights, weights); }

double interval_loss(const BasisLutBank& bank, const SamplingCoordinates& coords, double alpha) {
    const auto denom = powered_intervals(bank, coords, alpha);
    double total = 0.0;
    for (int axis = 0; axis < 3; ++axis) {
        const auto diffs = interval_slab_energy(bank, axis);
        for (std::size_t i = 0; i < diffs.size(); ++i) total += diffs[i] / (denom[axis][i] * denom[axis][i]);
    }
    return total;
}

std::array<std::vector<double>, 3> interval_loss_grad(const BasisLutBank& bank,
                                                      const SamplingCoordinates& coords, double alpha) {
    powered_intervals(bank, coords, alpha);
    std::array<std::vector<double>, 3> grad;
    for (int axis = 0; axis < 3; ++axis) {
        const auto x = coords.axis(axis);
        const auto diffs = interval_slab_energy(bank, axis);
        grad[axis].assign(x.size(), 0.0);
        for (std::size_t i = 0; i < diffs.size(); ++i) {
            // d/dd [D d^(-2 alpha)] = -2 alpha D d^(-2 alpha - 1)
            const double d = x[i + 1] - x[i];
            const double g = -2.0 * alpha * diffs[i] * std::pow(d, -2.0 * alpha - 1.0);
            grad[axis][i + 1] += g;
            grad[axis][i] -= g;
        }
    }
    return grad;
}

LossReport total_loss(const TotalLossInputs& in, const LossWeights& lambda) {
    lambda.validate();
    LossReport r;
    r.content = content_loss(in.source, in.adjusted);
    r.clip_directional = clip_directional_loss(in.image_delta, in.text_delta);
    r.weight_l2 = weight_l2(in.weights);
    r.interval = interval_loss(in.bank, in.coords, lambda.alpha);
    r.total = lambda.content * r.content + lambda.clip * r.clip_directional +
              lambda.lut * (lambda.weight * r.weight_l2 + lambda.interval * r.interval);
    return r;
}

TotalLossGradient total_loss_grad(const TotalLossInputs& in, const LossWeights& lambda) {
    lambda.validate();
    TotalLossGradient g;
    g.adjusted = content_loss_grad(in.source, in.adjusted);
    for (auto& p : g.adjusted) {
        for (auto& v : p) v *= lambda.content;
    }
    g.image_delta = clip_directional_loss_grad(in.image_delta, in.text_delta);
    for (auto& v : g.image_delta) v *= lambda.clip;
    g.weights.resize(in.weights.size());
    for (std::size_t l = 0; l < in.weights.size(); ++l) {
        g.weights[l] = lambda.lut * lambda.weight * 2.0 * in.weights[l];
    }
    g.coords = interval_loss_grad(in.bank, in.coords, lambda.alpha);
    for (auto& axis : g.coords) {
        for (auto& v : axis) v *= lambda.lut * lambda.interval;
    }
    return g;
}

}  // namespace tonelut
