#pragma once

#include <cstdint>
#include <vector>

#include "tonelut/image.hpp"

namespace tonelut {

/// Procedural stand-ins for natural photographs: sky/ground landscapes,
/// subjects on backdrops, and still lifes, each with soft gradients, mid-range
/// tones and mild deterministic grain.
std::vector<ImageBuffer> generate_corpus(int count, int size, std::uint64_t seed);

}  // namespace tonelut
