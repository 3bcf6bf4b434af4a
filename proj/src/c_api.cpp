#include "tonelut/tonelut.h"

#include <cstring>
#include <filesystem>
#include <new>
#include <optional>
#include <string>

#include "json.hpp"
#include "tonelut/corpus.hpp"
#include "tonelut/error.hpp"
#include "tonelut/eval.hpp"
#include "tonelut/formats.hpp"
#include "tonelut/train.hpp"

using namespace tonelut;
using nlohmann::json;

struct tl_image {
    ImageBuffer value;
};

struct tl_provider {
    EmbeddingProvider value;
};

struct tl_lut {
    Lut3D value;
};

struct tl_model {
    ModelBundle bundle;
    TrainConfig train_config;
    std::optional<TrainerState> trainer;
};

struct tl_adjustment {
    tl_image image;
    LutWeights weights;
    SamplingCoordinates coords;
    Lut3D fused;
};

namespace {

thread_local std::string g_last_error;

tl_status map_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument: return TL_ERR_INVALID_ARGUMENT;
        case ErrorCode::dimension: return TL_ERR_DIMENSION;
        case ErrorCode::invalid_coordinates: return TL_ERR_INVALID_COORDINATES;
        case ErrorCode::parse: return TL_ERR_PARSE;
        case ErrorCode::format: return TL_ERR_FORMAT;
        case ErrorCode::not_found: return TL_ERR_NOT_FOUND;
        case ErrorCode::unknown_text: return TL_ERR_UNKNOWN_TEXT;
        case ErrorCode::version: return TL_ERR_VERSION;
        case ErrorCode::training: return TL_ERR_TRAINING;
        case ErrorCode::degenerate_direction: return TL_ERR_DEGENERATE_DIRECTION;
        case ErrorCode::io: return TL_ERR_IO;
        case ErrorCode::config: return TL_ERR_CONFIG;
    }
    return TL_ERR_INTERNAL;
}

template <typename F>
tl_status guarded(F&& f) {
    try {
        f();
        g_last_error.clear();
        return TL_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return map_code(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return TL_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return TL_ERR_INTERNAL;
    }
}

void require(bool ok, const char* what) {
    if (!ok) fail(ErrorCode::invalid_argument, what);
}

void fill_buffer(tl_buffer* out, const std::string& bytes) {
    require(out != nullptr, "output buffer is null");
    out->data = static_cast<char*>(std::malloc(bytes.size() + 1));
    if (!out->data) throw std::bad_alloc();
    std::memcpy(out->data, bytes.data(), bytes.size());
    out->data[bytes.size()] = '\0';
    out->size = bytes.size();
}

std::vector<ImageBuffer> collect(tl_image* const* images, std::size_t count) {
    require(images != nullptr || count == 0, "image list is null");
    std::vector<ImageBuffer> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        require(images[i] != nullptr, "image list contains a null entry");
        out.push_back(images[i]->value);
    }
    return out;
}

std::vector<std::string> collect(const char* const* texts, std::size_t count) {
    require(texts != nullptr || count == 0, "text list is null");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < count; ++i) {
        require(texts[i] != nullptr, "text list contains a null entry");
        out.emplace_back(texts[i]);
    }
    return out;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

TrainConfig to_core(const tl_train_config& c) {
    TrainConfig t;
    t.learning_rate = c.learning_rate;
    t.beta1 = c.beta1;
    t.beta2 = c.beta2;
    t.adam_epsilon = c.adam_epsilon;
    t.steps = c.steps;
    t.batch_size = c.batch_size;
    t.seed = c.seed;
    t.crop_fraction = c.crop_fraction;
    t.flip_probability = c.flip_probability;
    t.brightness_min = c.brightness_min;
    t.brightness_max = c.brightness_max;
    t.saturation_min = c.saturation_min;
    t.saturation_max = c.saturation_max;
    t.s = c.s;
    t.loss = {c.lambda_content, c.lambda_clip, c.lambda_lut, c.lambda_weight, c.lambda_interval, c.alpha};
    return t;
}

Checkpoint to_checkpoint(const tl_model& m) { return Checkpoint{m.bundle, m.train_config, m.trainer}; }

}  // namespace

extern "C" {

const char* tl_version(void) { return "0.1.0"; }

const char* tl_status_name(tl_status status) {
    switch (status) {
        case TL_OK: return "ok";
        case TL_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case TL_ERR_DIMENSION: return "dimension";
        case TL_ERR_INVALID_COORDINATES: return "invalid_coordinates";
        case TL_ERR_PARSE: return "parse";
        case TL_ERR_FORMAT: return "format";
        case TL_ERR_NOT_FOUND: return "not_found";
        case TL_ERR_UNKNOWN_TEXT: return "unknown_text";
        case TL_ERR_VERSION: return "version";
        case TL_ERR_TRAINING: return "training";
        case TL_ERR_DEGENERATE_DIRECTION: return "degenerate_direction";
        case TL_ERR_IO: return "io";
        case TL_ERR_CONFIG: return "config";
        case TL_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* tl_last_error(void) { return g_last_error.c_str(); }

void tl_buffer_free(tl_buffer* buffer) {
    if (!buffer) return;
    std::free(buffer->data);
    buffer->data = nullptr;
    buffer->size = 0;
}

// ---- images

tl_status tl_image_read(const char* path, tl_image** out) {
    return guarded([&] {
        require(path && out, "null argument");
        *out = new tl_image{read_image(path)};
    });
}

tl_status tl_image_decode(const void* bytes, size_t size, tl_image** out) {
    return guarded([&] {
        require(bytes && out, "null argument");
        const std::string_view data(static_cast<const char*>(bytes), size);
        if (data.size() >= 2 && data.substr(0, 2) == "P3") {
            *out = new tl_image{parse_ppm(data)};
        } else {
            *out = new tl_image{decode_png(data)};
        }
    });
}

tl_status tl_image_probe_png(const void* bytes, size_t size, int* width, int* height) {
    return guarded([&] {
        require(bytes && width && height, "null argument");
        const auto* p = static_cast<const unsigned char*>(bytes);
        static constexpr unsigned char kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
        if (size < 24 || std::memcmp(p, kSig, 8) != 0 || std::memcmp(p + 12, "IHDR", 4) != 0) {
            fail(ErrorCode::format, "not a PNG image");
        }
        auto be32 = [](const unsigned char* q) {
            return (std::uint32_t{q[0]} << 24) | (std::uint32_t{q[1]} << 16) | (std::uint32_t{q[2]} << 8) | q[3];
        };
        const std::uint32_t w = be32(p + 16);
        const std::uint32_t h = be32(p + 20);
        if (w == 0 || h == 0 || w > 0x7fffffff || h > 0x7fffffff) fail(ErrorCode::format, "PNG header has invalid dimensions");
        *width = static_cast<int>(w);
        *height = static_cast<int>(h);
    });
}

tl_status tl_image_create(int width, int height, const double* rgb, tl_image** out) {
    return guarded([&] {
        require(rgb && out, "null argument");
        require(width > 0 && height > 0, "image dimensions must be positive");
        std::vector<Rgb> px(static_cast<std::size_t>(width) * height);
        for (std::size_t i = 0; i < px.size(); ++i) px[i] = {rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]};
        *out = new tl_image{ImageBuffer(width, height, std::move(px))};
    });
}

tl_status tl_image_write(const tl_image* image, const char* path) {
    return guarded([&] {
        require(image && path, "null argument");
        write_image(image->value, path);
    });
}

tl_status tl_image_encode_png(const tl_image* image, tl_buffer* out) {
    return guarded([&] {
        require(image != nullptr, "null image");
        fill_buffer(out, encode_png(image->value));
    });
}

int tl_image_width(const tl_image* image) { return image ? image->value.width() : 0; }
int tl_image_height(const tl_image* image) { return image ? image->value.height() : 0; }

tl_status tl_image_pixels(const tl_image* image, double* rgb, size_t capacity) {
    return guarded([&] {
        require(image && rgb, "null argument");
        const auto px = image->value.pixels();
        if (capacity < 3 * px.size()) fail(ErrorCode::dimension, "pixel buffer is too small");
        for (std::size_t i = 0; i < px.size(); ++i) {
            for (int c = 0; c < 3; ++c) rgb[3 * i + c] = px[i][c];
        }
    });
}

double tl_image_mean_channel(const tl_image* image, int channel) {
    if (!image || channel < 0 || channel > 2) return 0.0;
    return mean_channel(image->value, channel);
}

tl_status tl_image_max_abs_difference(const tl_image* a, const tl_image* b, double* out) {
    return guarded([&] {
        require(a && b && out, "null argument");
        *out = max_abs_difference(a->value, b->value);
    });
}

void tl_image_free(tl_image* image) { delete image; }

tl_status tl_image_read_directory(const char* dir, tl_image*** images, size_t* count) {
    return guarded([&] {
        require(dir && images && count, "null argument");
        auto list = read_image_directory(dir);
        auto* arr = new tl_image*[list.size()];
        for (std::size_t i = 0; i < list.size(); ++i) arr[i] = new tl_image{std::move(list[i])};
        *images = arr;
        *count = list.size();
    });
}

void tl_image_list_free(tl_image** images, size_t count) {
    if (!images) return;
    for (std::size_t i = 0; i < count; ++i) delete images[i];
    delete[] images;
}

tl_status tl_corpus_generate(const char* dir, int count, int size, uint64_t seed) {
    return guarded([&] {
        require(dir != nullptr, "null directory");
        require(count > 0 && size >= 16, "corpus needs a positive count and size of at least 16");
        const auto images = generate_corpus(count, size, seed);
        std::filesystem::create_directories(dir);
        for (int i = 0; i < count; ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "%03d.png", i);
            write_image(images[i], std::filesystem::path(dir) / name);
        }
    });
}

// ---- embeddings

tl_status tl_provider_toy(tl_provider** out) {
    return guarded([&] {
        require(out != nullptr, "null argument");
        *out = new tl_provider{EmbeddingProvider::toy()};
    });
}

tl_status tl_provider_load_store(const char* path, tl_provider** out) {
    return guarded([&] {
        require(path && out, "null argument");
        *out = new tl_provider{read_embedding_store(path)};
    });
}

tl_embedding_mode tl_provider_mode(const tl_provider* provider) {
    return provider && provider->value.mode() == EmbeddingMode::file_store ? TL_EMBEDDING_STORE : TL_EMBEDDING_TOY;
}

int tl_provider_has_text(const tl_provider* provider, const char* text) {
    return provider && text && provider->value.has_text(text) ? 1 : 0;
}

tl_status tl_provider_texts(const tl_provider* provider, tl_buffer* out) {
    return guarded([&] {
        require(provider != nullptr, "null provider");
        std::string joined;
        for (const auto& t : provider->value.texts()) joined += t + "\n";
        fill_buffer(out, joined);
    });
}

tl_status tl_provider_relative_similarity(const tl_provider* provider, const tl_image* image,
                                          const char* image_key, const char* text, const char* anchor,
                                          double* out) {
    return guarded([&] {
        require(provider && text && anchor && out, "null argument");
        if ((image != nullptr) == (image_key != nullptr)) {
            fail(ErrorCode::invalid_argument, "give exactly one of an image or an image key");
        }
        const EmbeddingProvider& p = provider->value;
        const EmbeddingVector target = p.text(text);
        const EmbeddingVector neutral = p.text(anchor);
        const EmbeddingVector e = image ? p.image(image->value) : p.lookup(image_key);
        *out = relative_similarity(e, target, neutral);
    });
}

void tl_provider_free(tl_provider* provider) { delete provider; }

// ---- models

void tl_model_config_default(tl_model_config* config) {
    if (!config) return;
    const ModelConfig d;
    config->grid_size = d.grid_size;
    config->hidden = d.hidden;
    config->neutral = TL_NEUTRAL_SETTLED;
    config->alpha = d.alpha;
}

tl_status tl_model_create(const tl_model_config* config, uint64_t seed, tl_model** out) {
    return guarded([&] {
        require(config && out, "null argument");
        ModelConfig mc;
        mc.grid_size = config->grid_size;
        mc.hidden = config->hidden;
        mc.alpha = config->alpha;
        switch (config->neutral) {
            case TL_NEUTRAL_ZERO: mc.neutral = NeutralStyle::zero; break;
            case TL_NEUTRAL_MODULATABLE: mc.neutral = NeutralStyle::modulatable; break;
            case TL_NEUTRAL_SETTLED: mc.neutral = NeutralStyle::settled; break;
            default: fail(ErrorCode::config, "unknown neutral style");
        }
        if (mc.grid_size < 2 || mc.grid_size > 65) fail(ErrorCode::config, "grid size must be in [2, 65]");
        if (mc.hidden < 1) fail(ErrorCode::config, "hidden width must be positive");
        auto* m = new tl_model{make_bundle(mc, seed), TrainConfig{}, std::nullopt};
        m->train_config.seed = seed;
        *out = m;
    });
}

tl_status tl_model_load(const char* path, tl_model** out) {
    return guarded([&] {
        require(path && out, "null argument");
        Checkpoint ck = load_checkpoint(path);
        *out = new tl_model{std::move(ck.bundle), ck.train_config, std::move(ck.trainer)};
    });
}

tl_status tl_model_save(const tl_model* model, const char* path) {
    return guarded([&] {
        require(model && path, "null argument");
        save_checkpoint(to_checkpoint(*model), path);
    });
}

tl_status tl_model_hash(const tl_model* model, char out[17]) {
    return guarded([&] {
        require(model && out, "null argument");
        const std::string h = content_hash(serialize_checkpoint(to_checkpoint(*model)));
        std::memcpy(out, h.c_str(), 17);
    });
}

const char* tl_model_source_prompt(const tl_model* model) {
    return model ? model->bundle.adapter.source_prompt.c_str() : "";
}

int tl_model_grid_size(const tl_model* model) { return model ? model->bundle.grid_size() : 0; }

tl_status tl_model_base_output(const tl_model* model, const tl_image* image, tl_image** out) {
    return guarded([&] {
        require(model && image && out, "null argument");
        *out = new tl_image{backbone_forward(model->bundle.bank, model->bundle.backbone, image->value)};
    });
}

void tl_model_free(tl_model* model) { delete model; }

// ---- training

void tl_train_config_default(tl_train_config* config) {
    if (!config) return;
    const TrainConfig d;
    *config = tl_train_config{d.learning_rate,    d.beta1,          d.beta2,          d.adam_epsilon,
                              d.steps,            d.batch_size,     d.seed,           d.crop_fraction,
                              d.flip_probability, d.brightness_min, d.brightness_max, d.saturation_min,
                              d.saturation_max,   d.s,              d.loss.content,   d.loss.clip,
                              d.loss.lut,         d.loss.weight,    d.loss.interval,  d.loss.alpha};
}

tl_status tl_model_train(tl_model* model, const tl_provider* provider, tl_image* const* images,
                         size_t image_count, const char* const* texts, size_t text_count,
                         const tl_train_config* config, int resume, tl_progress_fn progress, void* user) {
    return guarded([&] {
        require(model && provider && config, "null argument");
        TrainingCorpus corpus{collect(images, image_count), collect(texts, text_count)};
        const TrainConfig cfg = to_core(*config);
        cfg.validate();
        auto report = [&](const StepRecord& r) {
            if (!progress) return;
            const tl_loss_report out{r.step, r.loss.total, r.loss.content, r.loss.clip_directional,
                                     r.loss.weight_l2, r.loss.interval};
            progress(&out, user);
        };
        std::optional<Trainer> trainer;
        if (resume && model->trainer) {
            trainer.emplace(model->bundle, provider->value, std::move(corpus), cfg, *model->trainer);
        } else {
            trainer.emplace(model->bundle, provider->value, std::move(corpus), cfg);
        }
        trainer->run(cfg.steps, report);
        model->bundle = trainer->bundle();
        model->train_config = cfg;
        model->trainer = trainer->state();
    });
}

// ---- inference

tl_status tl_model_adjust(const tl_model* model, const tl_provider* provider, const tl_image* image,
                          const char* text, double s, tl_adjustment** out) {
    return guarded([&] {
        require(model && provider && image && text && out, "null argument");
        const EmbeddingVector target = provider->value.text(text);
        const EmbeddingVector source = provider->value.text(model->bundle.adapter.source_prompt);
        if (target.dim() != static_cast<std::size_t>(model->bundle.adapter.embedding_dim())) {
            fail(ErrorCode::config, "embedding dimension " + std::to_string(target.dim()) +
                                        " does not match the adapter input " +
                                        std::to_string(model->bundle.adapter.embedding_dim()));
        }
        ForwardResult r = forward(model->bundle, image->value, target, source, ModulationConfig{s});
        *out = new tl_adjustment{tl_image{std::move(r.output)}, std::move(r.weights), std::move(r.coords),
                                 std::move(r.fused)};
    });
}

const tl_image* tl_adjustment_image(const tl_adjustment* adjustment) {
    return adjustment ? &adjustment->image : nullptr;
}

tl_status tl_adjustment_weights(const tl_adjustment* adjustment, double* out, size_t capacity, size_t* count) {
    return guarded([&] {
        require(adjustment && count, "null argument");
        *count = adjustment->weights.size();
        for (std::size_t i = 0; i < std::min(capacity, adjustment->weights.size()); ++i) {
            out[i] = adjustment->weights[i];
        }
    });
}

tl_status tl_adjustment_coords(const tl_adjustment* adjustment, int channel, double* out, size_t capacity,
                               size_t* count) {
    return guarded([&] {
        require(adjustment && count, "null argument");
        require(channel >= 0 && channel < 3, "channel must be 0, 1 or 2");
        const auto axis = adjustment->coords.axis(channel);
        *count = axis.size();
        for (std::size_t i = 0; i < std::min(capacity, axis.size()); ++i) out[i] = axis[i];
    });
}

tl_status tl_adjustment_cube(const tl_adjustment* adjustment, const char* title, tl_buffer* out) {
    return guarded([&] {
        require(adjustment != nullptr, "null adjustment");
        fill_buffer(out, format_cube(adjustment->fused, adjustment->coords, title ? title : ""));
    });
}

void tl_adjustment_free(tl_adjustment* adjustment) { delete adjustment; }

tl_status tl_lut_read(const char* path, tl_lut** out) {
    return guarded([&] {
        require(path && out, "null argument");
        *out = new tl_lut{read_cube(path).lut};
    });
}

tl_status tl_lut_parse(const char* text, size_t size, tl_lut** out) {
    return guarded([&] {
        require(text && out, "null argument");
        *out = new tl_lut{parse_cube(std::string_view(text, size)).lut};
    });
}

int tl_lut_size(const tl_lut* lut) { return lut ? lut->value.size() : 0; }

tl_status tl_lut_apply(const tl_lut* lut, const tl_image* image, tl_image** out) {
    return guarded([&] {
        require(lut && image && out, "null argument");
        *out = new tl_image{lookup(lut->value, SamplingCoordinates::uniform(lut->value.size()), image->value)};
    });
}

void tl_lut_free(tl_lut* lut) { delete lut; }

// ---- evaluation

tl_status tl_evaluate(const tl_model* model, const tl_provider* provider, tl_image* const* images,
                      size_t image_count, const char* const* texts, size_t text_count, double s, tl_buffer* out) {
    return guarded([&] {
        require(model && provider, "null argument");
        const EvalReport r = evaluate(model->bundle, provider->value, collect(images, image_count),
                                      collect(texts, text_count), s);
        json rows = json::array();
        for (const auto& row : r.rows) {
            rows.push_back({{"image", row.image},
                            {"text", row.text},
                            {"grayscale_ssim", row.grayscale_ssim},
                            {"image_similarity", row.image_similarity},
                            {"directional_similarity", optional_number(row.directional_similarity)}});
        }
        const json doc = {{"s", s},
                          {"rows", rows},
                          {"mean",
                           {{"grayscale_ssim", r.mean_grayscale_ssim},
                            {"image_similarity", r.mean_image_similarity},
                            {"directional_similarity", optional_number(r.mean_directional_similarity)}}}};
        fill_buffer(out, doc.dump(2));
    });
}

tl_status tl_assess_filters(const tl_provider* provider, tl_image* const* images, size_t image_count,
                            tl_buffer* out) {
    return guarded([&] {
        require(provider != nullptr, "null provider");
        const auto table = assess_filters(collect(images, image_count), filter_registry(), provider->value);
        json doc = json::array();
        for (const auto& row : table) {
            doc.push_back({{"filter", row.filter}, {"mean_source", row.mean_source}, {"mean_filtered", row.mean_filtered}});
        }
        fill_buffer(out, doc.dump(2));
    });
}

tl_status tl_sweep(const tl_model* model, const tl_provider* provider, const tl_image* image, const char* text,
                   const double* s_values, size_t count, tl_buffer* out, tl_image** outputs) {
    return guarded([&] {
        require(model && provider && image && text && (s_values || count == 0), "null argument");
        const std::vector<double> s(s_values, s_values + count);
        auto points = strength_sweep(model->bundle, provider->value, image->value, text, s);
        json doc = json::array();
        for (const auto& p : points) {
            doc.push_back({{"s", p.s},
                           {"grayscale_ssim", p.grayscale_ssim},
                           {"image_similarity", p.image_similarity},
                           {"directional_similarity", optional_number(p.directional_similarity)},
                           {"relative_similarity", p.relative_similarity},
                           {"max_delta_from_previous", p.max_delta_from_previous}});
        }
        fill_buffer(out, doc.dump(2));
        if (outputs) {
            for (std::size_t i = 0; i < points.size(); ++i) outputs[i] = new tl_image{std::move(points[i].output)};
        }
    });
}

}  // extern "C"
