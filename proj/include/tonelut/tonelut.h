#ifndef TONELUT_H
#define TONELUT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(TONELUT_BUILDING_LIBRARY)
#    define TL_API __declspec(dllexport)
#  else
#    define TL_API __declspec(dllimport)
#  endif
#else
#  define TL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tl_status {
    TL_OK = 0,
    TL_ERR_INVALID_ARGUMENT = 1,
    TL_ERR_DIMENSION = 2,
    TL_ERR_INVALID_COORDINATES = 3,
    TL_ERR_PARSE = 4,
    TL_ERR_FORMAT = 5,
    TL_ERR_NOT_FOUND = 6,
    TL_ERR_UNKNOWN_TEXT = 7,
    TL_ERR_VERSION = 8,
    TL_ERR_TRAINING = 9,
    TL_ERR_DEGENERATE_DIRECTION = 10,
    TL_ERR_IO = 11,
    TL_ERR_CONFIG = 12,
    TL_ERR_INTERNAL = 13
} tl_status;

typedef struct tl_image tl_image;
typedef struct tl_model tl_model;
typedef struct tl_provider tl_provider;
typedef struct tl_lut tl_lut;
typedef struct tl_adjustment tl_adjustment;

/* Bytes owned by the library; release with tl_buffer_free. Text results are
   NUL-terminated, `size` excludes the terminator. */
typedef struct tl_buffer {
    char* data;
    size_t size;
} tl_buffer;

TL_API const char* tl_version(void);
/* Stable snake_case name, e.g. "unknown_text". */
TL_API const char* tl_status_name(tl_status status);
/* Message of the last failing call on this thread. */
TL_API const char* tl_last_error(void);
TL_API void tl_buffer_free(tl_buffer* buffer);

/* ---- images ------------------------------------------------------------ */

TL_API tl_status tl_image_read(const char* path, tl_image** out);
/* PNG or P3 PPM bytes. */
TL_API tl_status tl_image_decode(const void* bytes, size_t size, tl_image** out);
/* Width and height from a PNG header without decoding the pixels. */
TL_API tl_status tl_image_probe_png(const void* bytes, size_t size, int* width, int* height);
/* `rgb` holds width*height triples in [0,1], row-major. */
TL_API tl_status tl_image_create(int width, int height, const double* rgb, tl_image** out);
TL_API tl_status tl_image_write(const tl_image* image, const char* path);
TL_API tl_status tl_image_encode_png(const tl_image* image, tl_buffer* out);
TL_API int tl_image_width(const tl_image* image);
TL_API int tl_image_height(const tl_image* image);
/* Copies 3*width*height doubles into `rgb`. */
TL_API tl_status tl_image_pixels(const tl_image* image, double* rgb, size_t capacity);
TL_API double tl_image_mean_channel(const tl_image* image, int channel);
TL_API tl_status tl_image_max_abs_difference(const tl_image* a, const tl_image* b, double* out);
TL_API void tl_image_free(tl_image* image);

/* Every .png/.ppm in `dir` sorted by name. Free with tl_image_list_free. */
TL_API tl_status tl_image_read_directory(const char* dir, tl_image*** images, size_t* count);
TL_API void tl_image_list_free(tl_image** images, size_t count);

/* Writes `count` procedural size x size PNGs named 000.png, 001.png, ... */
TL_API tl_status tl_corpus_generate(const char* dir, int count, int size, uint64_t seed);

/* ---- embeddings -------------------------------------------------------- */

typedef enum tl_embedding_mode { TL_EMBEDDING_TOY = 0, TL_EMBEDDING_STORE = 1 } tl_embedding_mode;

TL_API tl_status tl_provider_toy(tl_provider** out);
/* JSON-lines embedding store. */
TL_API tl_status tl_provider_load_store(const char* path, tl_provider** out);
TL_API tl_embedding_mode tl_provider_mode(const tl_provider* provider);
TL_API int tl_provider_has_text(const tl_provider* provider, const char* text);
/* Newline-separated tokens or keys. */
TL_API tl_status tl_provider_texts(const tl_provider* provider, tl_buffer* out);
/* Relative similarity of an image against `text` with `anchor` as the
   neutral description. The image comes from `image` (toy mode) or from the
   stored vector under `image_key`; exactly one must be given. */
TL_API tl_status tl_provider_relative_similarity(const tl_provider* provider, const tl_image* image,
                                                 const char* image_key, const char* text, const char* anchor,
                                                 double* out);
TL_API void tl_provider_free(tl_provider* provider);

/* ---- models ------------------------------------------------------------ */

typedef enum tl_neutral_style {
    TL_NEUTRAL_ZERO = 0,
    TL_NEUTRAL_MODULATABLE = 1,
    TL_NEUTRAL_SETTLED = 2
} tl_neutral_style;

typedef struct tl_model_config {
    int grid_size;
    int hidden;
    tl_neutral_style neutral;
    double alpha;
} tl_model_config;

TL_API void tl_model_config_default(tl_model_config* config);
TL_API tl_status tl_model_create(const tl_model_config* config, uint64_t seed, tl_model** out);
TL_API tl_status tl_model_load(const char* path, tl_model** out);
/* Includes optimizer and RNG state when the model has been trained. */
TL_API tl_status tl_model_save(const tl_model* model, const char* path);
/* 16 hex digits of the serialized checkpoint plus NUL. */
TL_API tl_status tl_model_hash(const tl_model* model, char out[17]);
TL_API const char* tl_model_source_prompt(const tl_model* model);
TL_API int tl_model_grid_size(const tl_model* model);
/* Unmodulated backbone applied to the image. */
TL_API tl_status tl_model_base_output(const tl_model* model, const tl_image* image, tl_image** out);
TL_API void tl_model_free(tl_model* model);

/* ---- training ---------------------------------------------------------- */

typedef struct tl_train_config {
    double learning_rate;
    double beta1;
    double beta2;
    double adam_epsilon;
    int steps;
    int batch_size;
    uint64_t seed;
    double crop_fraction;
    double flip_probability;
    double brightness_min;
    double brightness_max;
    double saturation_min;
    double saturation_max;
    double s;
    double lambda_content;
    double lambda_clip;
    double lambda_lut;
    double lambda_weight;
    double lambda_interval;
    double alpha;
} tl_train_config;

typedef struct tl_loss_report {
    int64_t step;
    double total;
    double content;
    double clip_directional;
    double weight_l2;
    double interval;
} tl_loss_report;

typedef void (*tl_progress_fn)(const tl_loss_report* report, void* user);

TL_API void tl_train_config_default(tl_train_config* config);
/* Trains the model's adapter in place. With `resume` set and a model that
   carries trainer state, continues that run instead of starting fresh. */
TL_API tl_status tl_model_train(tl_model* model, const tl_provider* provider, tl_image* const* images,
                                size_t image_count, const char* const* texts, size_t text_count,
                                const tl_train_config* config, int resume, tl_progress_fn progress, void* user);

/* ---- inference --------------------------------------------------------- */

TL_API tl_status tl_model_adjust(const tl_model* model, const tl_provider* provider, const tl_image* image,
                                 const char* text, double s, tl_adjustment** out);
/* Borrowed; valid until the adjustment is freed. */
TL_API const tl_image* tl_adjustment_image(const tl_adjustment* adjustment);
/* Writes up to `capacity` values and sets `count` to the total available. */
TL_API tl_status tl_adjustment_weights(const tl_adjustment* adjustment, double* out, size_t capacity,
                                       size_t* count);
TL_API tl_status tl_adjustment_coords(const tl_adjustment* adjustment, int channel, double* out,
                                      size_t capacity, size_t* count);
/* Rebaked uniform .cube text. */
TL_API tl_status tl_adjustment_cube(const tl_adjustment* adjustment, const char* title, tl_buffer* out);
TL_API void tl_adjustment_free(tl_adjustment* adjustment);

TL_API tl_status tl_lut_read(const char* path, tl_lut** out);
TL_API tl_status tl_lut_parse(const char* text, size_t size, tl_lut** out);
TL_API int tl_lut_size(const tl_lut* lut);
TL_API tl_status tl_lut_apply(const tl_lut* lut, const tl_image* image, tl_image** out);
TL_API void tl_lut_free(tl_lut* lut);

/* ---- evaluation (JSON reports) ---------------------------------------- */

/* {"rows": [{"image", "text", "grayscale_ssim", "image_similarity",
   "directional_similarity"}], "mean": {...}} */
TL_API tl_status tl_evaluate(const tl_model* model, const tl_provider* provider, tl_image* const* images,
                             size_t image_count, const char* const* texts, size_t text_count, double s,
                             tl_buffer* json);
/* [{"filter", "mean_source", "mean_filtered"}] over the built-in filters. */
TL_API tl_status tl_assess_filters(const tl_provider* provider, tl_image* const* images, size_t image_count,
                                   tl_buffer* json);
/* One JSON object per s value. When `outputs` is non-null it receives
   `count` images the caller frees. */
TL_API tl_status tl_sweep(const tl_model* model, const tl_provider* provider, const tl_image* image,
                          const char* text, const double* s_values, size_t count, tl_buffer* json,
                          tl_image** outputs);

#ifdef __cplusplus
}
#endif

#endif
