#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tonelut/embed.hpp"
#include "tonelut/image.hpp"
#include "tonelut/losses.hpp"
#include "tonelut/network.hpp"

namespace tonelut {

using Rng = std::mt19937_64;

struct ModelConfig {
    int grid_size = 17;
    int hidden = 64;
    int embedding_dim = kFeatureCount;
    NeutralStyle neutral = NeutralStyle::settled;
    double alpha = LossWeights{}.alpha;  // interval exponent the settled backbone is placed for
};

struct TrainConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    int steps = 300;
    int batch_size = 1;
    std::uint64_t seed = 0;
    double crop_fraction = 0.9;
    double flip_probability = 0.5;
    double brightness_min = 0.8;
    double brightness_max = 1.2;
    double saturation_min = 0.8;
    double saturation_max = 1.2;
    double s = 1.0;
    LossWeights loss;

    void validate() const;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::int64_t t = 0;

    bool operator==(const AdamState&) const = default;
};

/// Layer matrices ~ U(0, 0.01), biases zero.
AdapterNetwork init_adapter(std::uint64_t seed, int embedding_dim, int hidden, int outputs);

/// Default basis bank, neutral backbone and a freshly initialized adapter.
ModelBundle make_bundle(const ModelConfig& config, std::uint64_t seed);

/// One concrete draw of the augmentation pipeline.
struct AugmentParams {
    int crop_x = 0;
    int crop_y = 0;
    int crop_width = 0;
    int crop_height = 0;
    bool flip = false;
    double brightness = 1.0;
    double saturation = 1.0;
};

AugmentParams sample_augment(const ImageBuffer& image, Rng& rng, const TrainConfig& cfg);
/// Crop, optional horizontal flip, brightness scale with clamp, then
/// saturation scale around Rec.601 luma with clamp.
ImageBuffer apply_augment(const ImageBuffer& image, const AugmentParams& params);
ImageBuffer augment(const ImageBuffer& image, Rng& rng, const TrainConfig& cfg);

/// Bias-corrected Adam update in place. Throws Error(training) on a
/// non-finite gradient, citing the step index.
void adam_step(AdamState& state, std::vector<double>& params, std::span<const double> grads,
               const TrainConfig& cfg);

struct TrainingCorpus {
    std::vector<ImageBuffer> images;
    std::vector<std::string> texts;
};

struct StepRecord {
    std::int64_t step = 0;
    LossReport loss;
};

/// `step=<n> total=<f> content=<f> clip=<f> weight=<f> interval=<f>`
std::string format_progress(const StepRecord& record);

/// Mutable training state that a checkpoint has to capture to resume.
struct TrainerState {
    AdamState adam;
    std::string rng_state;
    std::int64_t step = 0;
};

/// Loss and adapter gradient for one (image, text) sample.
struct SampleGradient {
    LossReport loss;
    std::vector<double> adapter;
};

SampleGradient sample_gradient(const ModelBundle& bundle, const ImageBuffer& image,
                               const EmbeddingVector& target, const EmbeddingVector& source,
                               const TrainConfig& cfg);

/// Unsupervised adapter training: each step samples a text and an image
/// uniformly, augments the image, runs the modulated forward pass, evaluates
/// the full objective and takes one Adam step on the adapter parameters.
class Trainer {
public:
    Trainer(ModelBundle bundle, const EmbeddingProvider& provider, TrainingCorpus corpus, TrainConfig cfg);
    /// Resume from a saved state; the RNG continues where it left off.
    Trainer(ModelBundle bundle, const EmbeddingProvider& provider, TrainingCorpus corpus, TrainConfig cfg,
            const TrainerState& state);

    StepRecord step();
    void run(int steps, const std::function<void(const StepRecord&)>& on_step = {});

    const ModelBundle& bundle() const noexcept { return bundle_; }
    const std::vector<StepRecord>& history() const noexcept { return history_; }
    TrainerState state() const;

private:
    ModelBundle bundle_;
    const EmbeddingProvider& provider_;
    TrainingCorpus corpus_;
    TrainConfig cfg_;
    AdamState adam_;
    Rng rng_;
    std::int64_t step_ = 0;
    std::vector<StepRecord> history_;
    EmbeddingVector source_;
    std::vector<EmbeddingVector> targets_;
};

struct TrainResult {
    ModelBundle bundle;
    std::vector<StepRecord> history;
    TrainerState state;
};

TrainResult train_loop(const TrainingCorpus& corpus, const TrainConfig& cfg, ModelBundle bundle,
                       const EmbeddingProvider& provider,
                       const std::function<void(const StepRecord&)>& on_step = {});

}  // namespace tonelut
