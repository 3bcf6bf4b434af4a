#include "tonelut/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tonelut/error.hpp"

namespace tonelut {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Rgb mix(const Rgb& a, const Rgb& b, double t) {
    return {a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t};
}

// Moderately saturated color around a random hue.
Rgb natural_color(Rng& rng, double lightness_lo, double lightness_hi) {
    const double hue = uniform(rng, 0.0, 6.0);
    const double sat = uniform(rng, 0.1, 0.45);
    const double light = uniform(rng, lightness_lo, lightness_hi);
    const double x = 1.0 - std::abs(std::fmod(hue, 2.0) - 1.0);
    Rgb base;
    switch (static_cast<int>(hue)) {
        case 0: base = {1, x, 0}; break;
        case 1: base = {x, 1, 0}; break;
        case 2: base = {0, 1, x}; break;
        case 3: base = {0, x, 1}; break;
        case 4: base = {x, 0, 1}; break;
        default: base = {1, 0, x}; break;
    }
    Rgb out;
    for (int c = 0; c < 3; ++c) out[c] = light + sat * (base[c] - 0.5);
    return out;
}

void landscape(std::vector<Rgb>& px, int size, Rng& rng) {
    const Rgb sky_top = natural_color(rng, 0.45, 0.7);
    const Rgb sky_bottom = natural_color(rng, 0.6, 0.85);
    const Rgb ground_near = natural_color(rng, 0.15, 0.4);
    const Rgb ground_far = natural_color(rng, 0.3, 0.55);
    const double horizon = uniform(rng, 0.35, 0.65);
    const double tilt = uniform(rng, -0.15, 0.15);
    const double sun_x = uniform(rng, 0.15, 0.85);
    const double sun_y = uniform(rng, 0.1, horizon * 0.8);
    const double sun_r = uniform(rng, 0.05, 0.12);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double u = (x + 0.5) / size;
            const double v = (y + 0.5) / size;
            const double h = horizon + tilt * (u - 0.5);
            Rgb p = v < h ? mix(sky_top, sky_bottom, v / h) : mix(ground_far, ground_near, (v - h) / (1.0 - h));
            const double d = std::hypot(u - sun_x, v - sun_y);
            if (v < h) p = mix(p, Rgb{0.95, 0.92, 0.8}, std::exp(-(d * d) / (2 * sun_r * sun_r)));
            px[static_cast<std::size_t>(y) * size + x] = p;
        }
    }
}

void subject(std::vector<Rgb>& px, int size, Rng& rng) {
    const Rgb backdrop_a = natural_color(rng, 0.3, 0.7);
    const Rgb backdrop_b = natural_color(rng, 0.2, 0.6);
    const Rgb body = natural_color(rng, 0.35, 0.75);
    const double cx = uniform(rng, 0.35, 0.65);
    const double cy = uniform(rng, 0.4, 0.6);
    const double rx = uniform(rng, 0.15, 0.3);
    const double ry = uniform(rng, 0.2, 0.35);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double u = (x + 0.5) / size;
            const double v = (y + 0.5) / size;
            Rgb p = mix(backdrop_a, backdrop_b, 0.5 * (u + v));
            const double e = ((u - cx) * (u - cx)) / (rx * rx) + ((v - cy) * (v - cy)) / (ry * ry);
            if (e < 1.0) {
                // Lit from the upper left.
                const double shade = 0.75 + 0.35 * (1.0 - e) - 0.25 * (u - cx + v - cy);
                p = {body[0] * shade, body[1] * shade, body[2] * shade};
            }
            px[static_cast<std::size_t>(y) * size + x] = p;
        }
    }
}

void still_life(std::vector<Rgb>& px, int size, Rng& rng) {
    const Rgb table = natural_color(rng, 0.2, 0.5);
    const Rgb wall = natural_color(rng, 0.5, 0.8);
    const double edge = uniform(rng, 0.5, 0.7);
    struct Block {
        double x0, y0, x1, y1;
        Rgb color;
    };
    std::vector<Block> blocks;
    const int count = std::uniform_int_distribution<int>(2, 4)(rng);
    for (int b = 0; b < count; ++b) {
        const double x0 = uniform(rng, 0.05, 0.7);
        const double w = uniform(rng, 0.1, 0.25);
        const double h = uniform(rng, 0.15, 0.4);
        blocks.push_back({x0, edge - h, x0 + w, edge + 0.05, natural_color(rng, 0.15, 0.9)});
    }
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double u = (x + 0.5) / size;
            const double v = (y + 0.5) / size;
            Rgb p = v < edge ? mix(wall, table, 0.3 * v) : mix(table, Rgb{0.1, 0.1, 0.1}, 0.4 * (v - edge));
            for (const auto& b : blocks) {
                if (u >= b.x0 && u <= b.x1 && v >= b.y0 && v <= b.y1) {
                    const double shade = 0.8 + 0.4 * (b.x1 - u) / (b.x1 - b.x0);
                    p = {b.color[0] * shade, b.color[1] * shade, b.color[2] * shade};
                }
            }
            px[static_cast<std::size_t>(y) * size + x] = p;
        }
    }
}

}  // namespace

std::vector<ImageBuffer> generate_corpus(int count, int size, std::uint64_t seed) {
    if (count < 0) fail(ErrorCode::invalid_argument, "corpus size must be non-negative");
    if (size < 8) fail(ErrorCode::dimension, "corpus images must be at least 8x8");
    Rng rng(seed);
    std::vector<ImageBuffer> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int n = 0; n < count; ++n) {
        std::vector<Rgb> px(static_cast<std::size_t>(size) * size);
        switch (n % 3) {
            case 0: landscape(px, size, rng); break;
            case 1: subject(px, size, rng); break;
            default: still_life(px, size, rng); break;
        }
        std::normal_distribution<double> grain(0.0, 0.015);
        for (auto& p : px) {
            for (auto& c : p) c += grain(rng);
        }
        out.push_back(clamp_to_image(size, size, std::move(px)));
    }
    return out;
}

}  // namespace tonelut
