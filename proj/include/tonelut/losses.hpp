#pragma once

#include <array>
#include <span>
#include <vector>

#include "tonelut/image.hpp"
#include "tonelut/lut.hpp"

namespace tonelut {

/// Coefficients of the training objective
///   total = content * l_content + clip * l_clip
///         + lut * (weight * l_weight + interval * l_interval).
struct LossWeights {
    double content = 1.0;
    double clip = 1.0;
    double lut = 1.0;
    double weight = 1e-4;
    double interval = 0.5;
    double alpha = 0.7;

    void validate() const;
};

struct LossReport {
    double total = 0.0;
    double content = 0.0;
    double clip_directional = 0.0;
    double weight_l2 = 0.0;
    double interval = 0.0;
};

inline constexpr double kDegenerateDirectionEps = 1e-8;

double content_loss(const ImageBuffer& source, const ImageBuffer& adjusted);
std::vector<Rgb> content_loss_grad(const ImageBuffer& source, const ImageBuffer& adjusted);

/// 1 - cos(image_delta, text_delta). When either vector is shorter than
/// 1e-8 the loss is 1 and its gradient is zero.
double clip_directional_loss(std::span<const double> image_delta, std::span<const double> text_delta);
std::vector<double> clip_directional_loss_grad(std::span<const double> image_delta,
                                               std::span<const double> text_delta);

double weight_l2(std::span<const double> weights);

/// Squared forward differences of every basis LUT along each axis, divided
/// by the matching coordinate interval raised to alpha.
double interval_loss(const BasisLutBank& bank, const SamplingCoordinates& coords, double alpha);
/// Per interval index i along `axis`: the summed squared forward
/// differences of every basis LUT and channel across that slab.
std::vector<double> interval_slab_energy(const BasisLutBank& bank, int axis);
/// Intervals along `axis` (summing to 1) minimizing the interval loss for
/// fixed LUT values: d_i proportional to energy_i^(1 / (1 + 2 alpha)). Uniform
/// when some slab has zero energy.
std::vector<double> interval_loss_minimizer(const BasisLutBank& bank, int axis, double alpha);

std::array<std::vector<double>, 3> interval_loss_grad(const BasisLutBank& bank,
                                                      const SamplingCoordinates& coords, double alpha);

struct TotalLossGradient {
    std::vector<Rgb> adjusted;                  // d/d adjusted image
    std::vector<double> image_delta;            // d/d (E(adjusted) - E(source))
    std::vector<double> weights;                // d/d w
    std::array<std::vector<double>, 3> coords;  // d/d x_c
};

struct TotalLossInputs {
    const ImageBuffer& source;
    const ImageBuffer& adjusted;
    std::span<const double> image_delta;
    std::span<const double> text_delta;
    std::span<const double> weights;
    const BasisLutBank& bank;
    const SamplingCoordinates& coords;
};

LossReport total_loss(const TotalLossInputs& in, const LossWeights& lambda);
TotalLossGradient total_loss_grad(const TotalLossInputs& in, const LossWeights& lambda);

}  // namespace tonelut
