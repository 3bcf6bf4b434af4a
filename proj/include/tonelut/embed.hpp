#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tonelut/embedding_vector.hpp"
#include "tonelut/image.hpp"

namespace tonelut {

inline constexpr int kSwatchSize = 8;
inline constexpr double kSwatchChecker = 0.1;

struct LexiconEntry {
    std::string token;
    Rgb color;
};

/// The built-in 64-word color/tone lexicon. Always contains "normal".
const std::vector<LexiconEntry>& toy_lexicon();

/// 8x8 swatch of `color` with a +/-0.1 two-tone checker, clamped to [0,1].
ImageBuffer make_swatch(const Rgb& color);

/// "red photo" -> "red"; text without the suffix is returned unchanged.
std::string strip_photo_suffix(std::string_view text);
/// "red" -> "red photo"; text already carrying the suffix is unchanged.
std::string with_photo_suffix(std::string_view text);

/// Normalized color-statistics features of an image.
EmbeddingVector embed_image_toy(const ImageBuffer& image);
std::vector<Rgb> embed_image_toy_grad(const ImageBuffer& image, std::span<const double> upstream);

enum class EmbeddingMode { toy, file_store };

/// Resolves text (and, for the toy space, images) to embeddings.
///
/// Toy mode embeds a text by rendering its lexicon swatch and passing it
/// through the image embedder, so images and texts share one space and the
/// whole path is differentiable. File-store mode serves vectors exported by an
/// external encoder and supports inference only.
class EmbeddingProvider {
public:
    struct StoreEntry {
        std::string key;
        std::vector<double> values;
    };

    static EmbeddingProvider toy();
    static EmbeddingProvider toy(std::vector<LexiconEntry> lexicon);
    /// Throws Error(format) on inconsistent dimensions and Error(format) on
    /// duplicate keys.
    static EmbeddingProvider file_store(std::vector<StoreEntry> entries, std::string model_name = {});

    EmbeddingMode mode() const noexcept { return mode_; }
    bool differentiable() const noexcept { return mode_ == EmbeddingMode::toy; }
    int dim() const noexcept { return dim_; }
    const std::string& model_name() const noexcept { return model_name_; }

    /// Embedding of a text prompt. Throws Error(unknown_text) listing the
    /// available texts when unresolvable.
    EmbeddingVector text(std::string_view prompt) const;
    bool has_text(std::string_view prompt) const;

    /// Stored vector for `key`, renormalized. Throws Error(not_found).
    EmbeddingVector lookup(std::string_view key) const;

    /// Image embedding; toy mode only, throws Error(config) otherwise.
    EmbeddingVector image(const ImageBuffer& image) const;

    /// Tokens (toy) or keys (store), in definition order.
    std::vector<std::string> texts() const;

    const std::vector<StoreEntry>& store_entries() const noexcept { return entries_; }

private:
    EmbeddingMode mode_ = EmbeddingMode::toy;
    int dim_ = 0;
    std::string model_name_;
    std::vector<LexiconEntry> lexicon_;
    std::map<std::string, Rgb, std::less<>> lexicon_index_;
    std::vector<StoreEntry> entries_;
    std::map<std::string, std::size_t, std::less<>> entry_index_;

    const StoreEntry* find_entry(std::string_view key) const;
};

/// softmax(cos(image, target), cos(image, anchor))[0], with the cosines
/// divided by `temperature`.
double relative_similarity(const EmbeddingVector& image, const EmbeddingVector& target,
                           const EmbeddingVector& anchor, double temperature = 1.0);

}  // namespace tonelut
