#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tonelut/embedding_vector.hpp"
#include "tonelut/image.hpp"
#include "tonelut/lut.hpp"

namespace tonelut {

inline constexpr int kHistogramBins = 8;
/// Per channel: mean, population std, 8-bin soft histogram.
inline constexpr int kFeatureCount = 3 + 3 + 3 * kHistogramBins;
inline constexpr const char* kDefaultSourcePrompt = "normal photo";

using FeatureVector = std::vector<double>;

/// Global color statistics: means, stds, then triangular-kernel histograms
/// with centres k/7 and bandwidth 1/7, red block first.
FeatureVector extract_features(const ImageBuffer& image);

/// Pullback of an upstream feature gradient onto the pixels.
std::vector<Rgb> extract_features_grad(const ImageBuffer& image, std::span<const double> upstream);

/// y = W x + b with W stored row-major (out x in).
struct AffineMap {
    int inputs = 0;
    int outputs = 0;
    std::vector<double> weight;
    std::vector<double> bias;

    AffineMap() = default;
    AffineMap(int inputs, int outputs);

    std::size_t parameter_count() const noexcept { return weight.size() + bias.size(); }
    std::vector<double> apply(std::span<const double> x) const;
    /// W^T g
    std::vector<double> apply_transpose(std::span<const double> g) const;

    bool operator==(const AffineMap&) const = default;
};

enum class NeutralStyle {
    /// Zero matrices, bias (1, 0, ..., 0), zero AdaInt head.
    zero,
    /// Same output as `zero` for every image, but with nonzero entries that
    /// multiplicative modulation can move. See BackboneParams::neutral.
    modulatable,
    /// Modulatable, with the AdaInt intervals placed at the minimum of the
    /// interval loss for the bank and the basis weights fitted by least
    /// squares to reproduce the input. Close to, not exactly, the identity.
    settled,
};

/// Parameters the text adapter modulates: the LUT weight predictor and the
/// AdaInt coordinate head. Flattening order: weight predictor matrix
/// (row-major), its bias, AdaInt matrix (row-major), its bias.
struct BackboneParams {
    AffineMap weight_predictor;  // F -> L
    AffineMap adaint_head;       // F -> 3 (N - 1)

    int grid_size() const noexcept { return adaint_head.outputs / 3 + 1; }
    std::size_t parameter_count() const noexcept {
        return weight_predictor.parameter_count() + adaint_head.parameter_count();
    }
    std::vector<double> flatten() const;
    void assign(std::span<const double> flat);

    /// Parameters whose backbone output is "basis LUT 0 through uniform
    /// coordinates" for every input image.
    ///
    /// The modulatable variant relies on two exact cancellations. Each
    /// weight-predictor row holds +a on the red histogram block, -a on the
    /// green block and -c on the blue block with bias beta + c; histograms
    /// sum to one per channel so the row evaluates to beta. Each AdaInt
    /// channel block repeats one row and one bias across its N - 1 logits, and
    /// softmax ignores a shared offset, so the intervals stay uniform.
    ///
    /// `settled` keeps the same structure but gives each logit its own bias
    /// (log of the target interval) and replaces (1, 0, ..., 0) with fitted
    /// weights. `alpha` only matters for `settled`.
    static BackboneParams neutral(const BasisLutBank& bank, NeutralStyle style, double alpha = 0.7);

    bool operator==(const BackboneParams&) const = default;
};

/// Two-layer MLP on the text direction producing one offset per backbone
/// parameter. Flattening order: layer1 matrix, layer1 bias, layer2 matrix,
/// layer2 bias.
struct AdapterNetwork {
    AffineMap layer1;  // D -> H, followed by ReLU
    AffineMap layer2;  // H -> P
    std::string source_prompt = kDefaultSourcePrompt;

    int embedding_dim() const noexcept { return layer1.inputs; }
    std::size_t parameter_count() const noexcept {
        return layer1.parameter_count() + layer2.parameter_count();
    }
    std::vector<double> flatten() const;
    void assign(std::span<const double> flat);

    bool operator==(const AdapterNetwork&) const = default;
};

struct ModulationConfig {
    double s = 1.0;
};

/// Everything inference needs: frozen basis bank and backbone plus the
/// trainable adapter.
struct ModelBundle {
    BasisLutBank bank;
    BackboneParams backbone;
    AdapterNetwork adapter;

    int grid_size() const noexcept { return bank.grid_size(); }
    /// Throws Error(dimension) if the pieces disagree on F, L, N or P.
    void validate() const;

    bool operator==(const ModelBundle&) const = default;
};

LutWeights predict_weights(const BackboneParams& params, const FeatureVector& features);
SamplingCoordinates predict_coords(const BackboneParams& params, const FeatureVector& features);

/// Cumulative sum of per-channel softmax intervals.
SamplingCoordinates coords_from_logits(std::span<const double> logits, int grid_size);

/// Reverse of coords_from_logits for an upstream gradient on the coordinates.
std::vector<double> coords_from_logits_grad(std::span<const double> logits, int grid_size,
                                            const std::array<std::vector<double>, 3>& upstream);

std::vector<double> adapter_forward(const AdapterNetwork& adapter, const EmbeddingVector& target,
                                    const EmbeddingVector& source);

/// theta_hat = theta * (1 + s * delta), elementwise in flattening order.
BackboneParams modulate(const BackboneParams& params, std::span<const double> delta,
                        const ModulationConfig& cfg);

struct ForwardResult {
    ImageBuffer output;
    LutWeights weights;
    SamplingCoordinates coords;
    Lut3D fused;
    FeatureVector features;
    BackboneParams modulated;
    std::vector<double> direction;   // target - source
    std::vector<double> hidden_pre;  // layer1 output before ReLU
    std::vector<double> delta;       // adapter output
};

/// Backbone only, no modulation.
ImageBuffer backbone_forward(const BasisLutBank& bank, const BackboneParams& params,
                             const ImageBuffer& image);

ForwardResult forward(const ModelBundle& bundle, const ImageBuffer& image,
                      const EmbeddingVector& target, const EmbeddingVector& source,
                      const ModulationConfig& cfg);

/// Upstream gradients on the forward outputs a loss can depend on. Empty
/// vectors count as zero.
struct ForwardUpstream {
    std::vector<Rgb> image;
    std::vector<double> weights;
    std::array<std::vector<double>, 3> coords;
};

// Pullbacks of the individual stages. Each takes the gradient of a scalar
// objective on the stage output and returns it on the stage input named in
// the comment; parameter gradients use the owner's flattening order.

/// d/d weights of an objective on fuse(bank, weights).
std::vector<double> fuse_grad(const BasisLutBank& bank, std::span<const Rgb> upstream);
/// d/d backbone parameters (only the weight-predictor block is nonzero).
std::vector<double> predict_weights_grad(const BackboneParams& params, const FeatureVector& features,
                                         std::span<const double> upstream);
/// d/d backbone parameters (only the AdaInt block is nonzero).
std::vector<double> predict_coords_grad(const BackboneParams& params, const FeatureVector& features,
                                        const std::array<std::vector<double>, 3>& upstream);
/// d/d delta, given the gradient on the modulated parameters.
std::vector<double> modulate_grad(const BackboneParams& params, const ModulationConfig& cfg,
                                  std::span<const double> upstream);
/// d/d adapter parameters.
std::vector<double> adapter_forward_grad(const AdapterNetwork& adapter, const EmbeddingVector& target,
                                         const EmbeddingVector& source, std::span<const double> upstream);

/// Gradient with respect to the adapter parameters only, in
/// AdapterNetwork::flatten() order. The backbone and basis LUTs are frozen.
std::vector<double> forward_grad(const ModelBundle& bundle, const ImageBuffer& image,
                                 const ForwardResult& result, const ModulationConfig& cfg,
                                 const ForwardUpstream& upstream);

std::vector<double> forward_grad(const ModelBundle& bundle, const ImageBuffer& image,
                                 const EmbeddingVector& target, const EmbeddingVector& source,
                                 const ModulationConfig& cfg, const ForwardUpstream& upstream);

}  // namespace tonelut
