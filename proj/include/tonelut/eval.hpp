#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tonelut/embed.hpp"
#include "tonelut/image.hpp"
#include "tonelut/network.hpp"

namespace tonelut {

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

/// SSIM of the Rec.601 luma planes: 11x11 Gaussian window (sigma 1.5),
/// C1 = 0.01^2, C2 = 0.03^2, averaged over every window position that fits.
double grayscale_ssim(const ImageBuffer& a, const ImageBuffer& b);

double image_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// cos(out - in, target - source). Throws Error(degenerate_direction) when
/// either difference is shorter than 1e-8.
double directional_similarity(const EmbeddingVector& image_in, const EmbeddingVector& image_out,
                              const EmbeddingVector& text_source, const EmbeddingVector& text_target);

struct FilterSpec {
    std::string name;
    std::function<Rgb(const Rgb&)> transform;

    ImageBuffer apply(const ImageBuffer& image) const;
};

/// Nine analytic tone filters, each named after a toy-lexicon token.
const std::vector<FilterSpec>& filter_registry();

struct FilterAssessment {
    std::string filter;
    double mean_source = 0.0;
    double mean_filtered = 0.0;
};

/// Mean relative similarity of the source and filtered corpus against each
/// filter's name, with `anchor` as the neutral description.
std::vector<FilterAssessment> assess_filters(const std::vector<ImageBuffer>& corpus,
                                             const std::vector<FilterSpec>& filters,
                                             const EmbeddingProvider& provider,
                                             const std::string& anchor = kDefaultSourcePrompt);

struct EvalRow {
    std::size_t image = 0;
    std::string text;
    double grayscale_ssim = 0.0;
    double image_similarity = 0.0;
    std::optional<double> directional_similarity;  // empty when the image did not change
};

struct EvalReport {
    std::vector<EvalRow> rows;
    double mean_grayscale_ssim = 0.0;
    double mean_image_similarity = 0.0;
    std::optional<double> mean_directional_similarity;
};

EvalReport evaluate(const ModelBundle& bundle, const EmbeddingProvider& provider,
                    const std::vector<ImageBuffer>& images, const std::vector<std::string>& texts, double s);

struct SweepPoint {
    double s = 0.0;
    ImageBuffer output;
    double grayscale_ssim = 0.0;
    double image_similarity = 0.0;
    std::optional<double> directional_similarity;
    double relative_similarity = 0.0;
    double max_delta_from_previous = 0.0;  // 0 for the first point
};

std::vector<SweepPoint> strength_sweep(const ModelBundle& bundle, const EmbeddingProvider& provider,
                                       const ImageBuffer& image, const std::string& text,
                                       const std::vector<double>& s_values);

}  // namespace tonelut
