#pragma once

#include <random>
#include <vector>

#include "tonelut/image.hpp"
#include "tonelut/lut.hpp"

namespace tonelut::testing {

inline double draw(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline ImageBuffer random_image(std::mt19937_64& rng, int w, int h, double lo = 0.0, double hi = 1.0) {
    std::vector<Rgb> px(static_cast<std::size_t>(w) * h);
    for (auto& p : px) p = {draw(rng, lo, hi), draw(rng, lo, hi), draw(rng, lo, hi)};
    return ImageBuffer(w, h, std::move(px));
}

inline Lut3D random_lut(std::mt19937_64& rng, int n) {
    Lut3D lut(n);
    for (auto& v : lut.values()) v = {draw(rng, 0, 1), draw(rng, 0, 1), draw(rng, 0, 1)};
    return lut;
}

inline SamplingCoordinates random_coords(std::mt19937_64& rng, int n) {
    std::array<std::vector<double>, 3> axes;
    for (auto& axis : axes) {
        std::vector<double> d(n - 1);
        double total = 0.0;
        for (auto& x : d) total += (x = draw(rng, 0.2, 1.0));
        axis.assign(n, 0.0);
        for (int i = 1; i < n - 1; ++i) axis[i] = axis[i - 1] + d[i - 1] / total;
        axis[n - 1] = 1.0;
    }
    return SamplingCoordinates(std::move(axes));
}

}  // namespace tonelut::testing
