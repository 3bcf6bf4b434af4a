#include "tonelut/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "tonelut/error.hpp"

namespace tonelut {

namespace {

constexpr double kInitUpper = 0.01;

void fill_uniform(std::vector<double>& values, Rng& rng) {
    std::uniform_real_distribution<double> dist(0.0, kInitUpper);
    for (auto& v : values) {
        v = dist(rng);
        if (v >= kInitUpper) v = std::nextafter(kInitUpper, 0.0);
    }
}

bool all_finite(std::span<const double> values) {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail(ErrorCode::config, "learning rate must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        fail(ErrorCode::config, "Adam betas must lie in [0, 1)");
    }
    if (!(adam_epsilon > 0.0)) fail(ErrorCode::config, "Adam epsilon must be positive");
    if (steps < 0) fail(ErrorCode::config, "step count must be non-negative");
    if (batch_size < 1) fail(ErrorCode::config, "batch size must be at least 1");
    if (!(crop_fraction > 0.0 && crop_fraction <= 1.0)) fail(ErrorCode::config, "crop fraction must lie in (0, 1]");
    if (!(flip_probability >= 0.0 && flip_probability <= 1.0)) {
        fail(ErrorCode::config, "flip probability must lie in [0, 1]");
    }
    if (!(brightness_min > 0.0 && brightness_min <= brightness_max)) fail(ErrorCode::config, "invalid brightness range");
    if (!(saturation_min >= 0.0 && saturation_min <= saturation_max)) fail(ErrorCode::config, "invalid saturation range");
    if (!std::isfinite(s)) fail(ErrorCode::config, "scaling factor must be finite");
    loss.validate();
}

AdapterNetwork init_adapter(std::uint64_t seed, int embedding_dim, int hidden, int outputs) {
    Rng rng(seed);
    AdapterNetwork adapter;
    adapter.layer1 = AffineMap(embedding_dim, hidden);
    adapter.layer2 = AffineMap(hidden, outputs);
    fill_uniform(adapter.layer1.weight, rng);
    fill_uniform(adapter.layer2.weight, rng);
    return adapter;
}

ModelBundle make_bundle(const ModelConfig& config, std::uint64_t seed) {
    ModelBundle bundle;
    bundle.bank = default_basis_bank(config.grid_size);
    bundle.backbone = BackboneParams::neutral(bundle.bank, config.neutral, config.alpha);
    bundle.adapter = init_adapter(seed, config.embedding_dim, config.hidden,
                                  static_cast<int>(bundle.backbone.parameter_count()));
    return bundle;
}

AugmentParams sample_augment(const ImageBuffer& image, Rng& rng, const TrainConfig& cfg) {
    AugmentParams p;
    p.crop_width = static_cast<int>(std::floor(cfg.crop_fraction * image.width()));
    p.crop_height = static_cast<int>(std::floor(cfg.crop_fraction * image.height()));
    if (p.crop_width < 1 || p.crop_height < 1) {
        fail(ErrorCode::dimension, "image " + std::to_string(image.width()) + "x" + std::to_string(image.height()) +
                                       " is too small to crop");
    }
    p.crop_x = std::uniform_int_distribution<int>(0, image.width() - p.crop_width)(rng);
    p.crop_y = std::uniform_int_distribution<int>(0, image.height() - p.crop_height)(rng);
    p.flip = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < cfg.flip_probability;
    p.brightness = std::uniform_real_distribution<double>(cfg.brightness_min, cfg.brightness_max)(rng);
    p.saturation = std::uniform_real_distribution<double>(cfg.saturation_min, cfg.saturation_max)(rng);
    return p;
}

ImageBuffer apply_augment(const ImageBuffer& image, const AugmentParams& p) {
    if (p.crop_width < 1 || p.crop_height < 1 || p.crop_x < 0 || p.crop_y < 0 ||
        p.crop_x + p.crop_width > image.width() || p.crop_y + p.crop_height > image.height()) {
        fail(ErrorCode::dimension, "crop window does not fit inside the image");
    }
    std::vector<Rgb> out(static_cast<std::size_t>(p.crop_width) * p.crop_height);
    for (int y = 0; y < p.crop_height; ++y) {
        for (int x = 0; x < p.crop_width; ++x) {
            const int sx = p.flip ? p.crop_x + p.crop_width - 1 - x : p.crop_x + x;
            Rgb v = image.at(sx, p.crop_y + y);
            if (p.brightness != 1.0) {
                for (auto& c : v) c = std::clamp(c * p.brightness, 0.0, 1.0);
            }
            if (p.saturation != 1.0) {
                const double y601 = luma(v);
                for (auto& c : v) c = std::clamp(y601 + p.saturation * (c - y601), 0.0, 1.0);
            }
            out[static_cast<std::size_t>(y) * p.crop_width + x] = v;
        }
    }
    return ImageBuffer(p.crop_width, p.crop_height, std::move(out));
}

ImageBuffer augment(const ImageBuffer& image, Rng& rng, const TrainConfig& cfg) {
    return apply_augment(image, sample_augment(image, rng, cfg));
}

void adam_step(AdamState& state, std::vector<double>& params, std::span<const double> grads,
               const TrainConfig& cfg) {
    if (grads.size() != params.size()) fail(ErrorCode::dimension, "gradient and parameter counts differ");
    if (state.m.empty() && state.v.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    if (state.m.size() != params.size() || state.v.size() != params.size()) {
        fail(ErrorCode::dimension, "optimizer state does not match the parameter count");
    }
    if (!all_finite(grads)) {
        fail(ErrorCode::training, "non-finite gradient at step " + std::to_string(state.t + 1));
    }
    ++state.t;
    const double correction1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double correction2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        const double m_hat = state.m[i] / correction1;
        const double v_hat = state.v[i] / correction2;
        params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_epsilon);
    }
}

std::string format_progress(const StepRecord& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "step=%lld total=%.8g content=%.8g clip=%.8g weight=%.8g interval=%.8g",
                  static_cast<long long>(r.step), r.loss.total, r.loss.content, r.loss.clip_directional,
                  r.loss.weight_l2, r.loss.interval);
    return buf;
}

SampleGradient sample_gradient(const ModelBundle& bundle, const ImageBuffer& image,
                               const EmbeddingVector& target, const EmbeddingVector& source,
                               const TrainConfig& cfg) {
    const ModulationConfig mod{cfg.s};
    const ForwardResult fwd = forward(bundle, image, target, source, mod);

    const EmbeddingVector e_in = embed_image_toy(image);
    const EmbeddingVector e_out = embed_image_toy(fwd.output);
    std::vector<double> image_delta(e_in.dim());
    std::vector<double> text_delta(e_in.dim());
    for (std::size_t i = 0; i < image_delta.size(); ++i) {
        image_delta[i] = e_out[i] - e_in[i];
        text_delta[i] = target[i] - source[i];
    }
    const TotalLossInputs inputs{image, fwd.output, image_delta, text_delta, fwd.weights, bundle.bank, fwd.coords};

    SampleGradient out;
    out.loss = total_loss(inputs, cfg.loss);
    TotalLossGradient g = total_loss_grad(inputs, cfg.loss);

    const std::vector<Rgb> g_embed = embed_image_toy_grad(fwd.output, g.image_delta);
    for (std::size_t p = 0; p < g.adjusted.size(); ++p) {
        for (int c = 0; c < 3; ++c) g.adjusted[p][c] += g_embed[p][c];
    }
    ForwardUpstream up;
    up.image = std::move(g.adjusted);
    up.weights = std::move(g.weights);
    up.coords = std::move(g.coords);
    out.adapter = forward_grad(bundle, image, fwd, mod, up);
    return out;
}

Trainer::Trainer(ModelBundle bundle, const EmbeddingProvider& provider, TrainingCorpus corpus, TrainConfig cfg)
    : bundle_(std::move(bundle)),
      provider_(provider),
      corpus_(std::move(corpus)),
      cfg_(std::move(cfg)),
      rng_(cfg_.seed) {
    cfg_.validate();
    bundle_.validate();
    if (!provider_.differentiable()) {
        fail(ErrorCode::config, "training needs the differentiable toy embedder; file-store embeddings are inference-only");
    }
    if (corpus_.images.empty()) fail(ErrorCode::config, "training corpus has no images");
    if (corpus_.texts.empty()) fail(ErrorCode::config, "training corpus has no texts");
    source_ = provider_.text(bundle_.adapter.source_prompt);
    for (const auto& text : corpus_.texts) targets_.push_back(provider_.text(text));
    if (source_.dim() != static_cast<std::size_t>(bundle_.adapter.embedding_dim())) {
        fail(ErrorCode::config, "adapter embedding dimension does not match the embedder");
    }
}

Trainer::Trainer(ModelBundle bundle, const EmbeddingProvider& provider, TrainingCorpus corpus, TrainConfig cfg,
                 const TrainerState& state)
    : Trainer(std::move(bundle), provider, std::move(corpus), std::move(cfg)) {
    adam_ = state.adam;
    step_ = state.step;
    if (!state.rng_state.empty()) {
        std::istringstream in(state.rng_state);
        in >> rng_;
        if (!in) fail(ErrorCode::format, "corrupt RNG state in training checkpoint");
    }
}

TrainerState Trainer::state() const {
    TrainerState s;
    s.adam = adam_;
    s.step = step_;
    std::ostringstream out;
    out << rng_;
    s.rng_state = out.str();
    return s;
}

StepRecord Trainer::step() {
    std::uniform_int_distribution<std::size_t> pick_text(0, corpus_.texts.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_image(0, corpus_.images.size() - 1);

    std::vector<double> grad(bundle_.adapter.parameter_count(), 0.0);
    StepRecord record;
    record.step = step_ + 1;
    const double inv_batch = 1.0 / cfg_.batch_size;
    for (int b = 0; b < cfg_.batch_size; ++b) {
        const std::size_t t = pick_text(rng_);
        const std::size_t i = pick_image(rng_);
        const ImageBuffer sample = augment(corpus_.images[i], rng_, cfg_);
        const SampleGradient sg = sample_gradient(bundle_, sample, targets_[t], source_, cfg_);
        for (std::size_t p = 0; p < grad.size(); ++p) grad[p] += inv_batch * sg.adapter[p];
        record.loss.total += inv_batch * sg.loss.total;
        record.loss.content += inv_batch * sg.loss.content;
        record.loss.clip_directional += inv_batch * sg.loss.clip_directional;
        record.loss.weight_l2 += inv_batch * sg.loss.weight_l2;
        record.loss.interval += inv_batch * sg.loss.interval;
    }
    if (!std::isfinite(record.loss.total)) {
        fail(ErrorCode::training, "non-finite loss at step " + std::to_string(record.step) + ": " +
                                      format_progress(record));
    }
    std::vector<double> params = bundle_.adapter.flatten();
    adam_step(adam_, params, grad, cfg_);
    bundle_.adapter.assign(params);
    step_ = record.step;
    history_.push_back(record);
    return record;
}

void Trainer::run(int steps, const std::function<void(const StepRecord&)>& on_step) {
    for (int n = 0; n < steps; ++n) {
        const StepRecord r = step();
        if (on_step) on_step(r);
    }
}

TrainResult train_loop(const TrainingCorpus& corpus, const TrainConfig& cfg, ModelBundle bundle,
                       const EmbeddingProvider& provider, const std::function<void(const StepRecord&)>& on_step) {
    Trainer trainer(std::move(bundle), provider, corpus, cfg);
    trainer.run(cfg.steps, on_step);
    return TrainResult{trainer.bundle(), trainer.history(), trainer.state()};
}

}  // namespace tonelut
