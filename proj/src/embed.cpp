#include "tonelut/embed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tonelut/error.hpp"
#include "tonelut/network.hpp"

namespace tonelut {

namespace {

constexpr std::string_view kPhotoSuffix = " photo";

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += ", ";
        out += item;
    }
    return out;
}

}  // namespace

EmbeddingVector EmbeddingVector::normalized(std::span<const double> raw) {
    for (double v : raw) {
        if (!std::isfinite(v)) fail(ErrorCode::invalid_argument, "embedding has a non-finite component");
    }
    const double n = norm(raw);
    if (n < 1e-12) fail(ErrorCode::degenerate_direction, "cannot normalize a zero embedding");
    EmbeddingVector e;
    e.values_.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) e.values_[i] = raw[i] / n;
    return e;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        fail(ErrorCode::dimension, "vector dimensions differ: " + std::to_string(a.size()) + " vs " +
                                       std::to_string(b.size()));
    }
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm(std::span<const double> a) {
    return std::sqrt(std::inner_product(a.begin(), a.end(), a.begin(), 0.0));
}

double cosine(std::span<const double> a, std::span<const double> b, double eps) {
    const double d = dot(a, b);
    const double na = norm(a);
    const double nb = norm(b);
    if (na < eps || nb < eps) fail(ErrorCode::degenerate_direction, "direction vector has (near) zero length");
    return d / (na * nb);
}

const std::vector<LexiconEntry>& toy_lexicon() {
    static const std::vector<LexiconEntry> lexicon = {
        {"normal", {0.50, 0.50, 0.50}},
        {"red", {0.85, 0.15, 0.15}},
        {"green", {0.20, 0.75, 0.25}},
        {"blue", {0.15, 0.25, 0.85}},
        {"yellow", {0.90, 0.85, 0.20}},
        {"cyan", {0.20, 0.80, 0.85}},
        {"magenta", {0.85, 0.20, 0.80}},
        {"orange", {0.95, 0.55, 0.15}},
        {"purple", {0.50, 0.20, 0.70}},
        {"pink", {0.95, 0.60, 0.70}},
        {"brown", {0.50, 0.30, 0.15}},
        {"teal", {0.10, 0.50, 0.50}},
        {"navy", {0.10, 0.15, 0.40}},
        {"maroon", {0.50, 0.10, 0.15}},
        {"olive", {0.50, 0.50, 0.15}},
        {"lime", {0.60, 0.90, 0.20}},
        {"gold", {0.85, 0.70, 0.25}},
        {"silver", {0.75, 0.75, 0.78}},
        {"white", {0.95, 0.95, 0.95}},
        {"black", {0.05, 0.05, 0.05}},
        {"gray", {0.40, 0.40, 0.40}},
        {"beige", {0.85, 0.80, 0.65}},
        {"turquoise", {0.25, 0.85, 0.75}},
        {"lavender", {0.70, 0.65, 0.90}},
        {"coral", {0.95, 0.50, 0.40}},
        {"crimson", {0.80, 0.08, 0.25}},
        {"emerald", {0.10, 0.65, 0.40}},
        {"indigo", {0.30, 0.15, 0.55}},
        {"amber", {0.95, 0.70, 0.10}},
        {"peach", {0.95, 0.75, 0.60}},
        {"mint", {0.65, 0.95, 0.75}},
        {"rose", {0.90, 0.45, 0.55}},
        {"violet", {0.55, 0.35, 0.85}},
        {"ivory", {0.95, 0.93, 0.85}},
        {"charcoal", {0.20, 0.22, 0.24}},
        {"bright", {0.82, 0.82, 0.82}},
        {"dark", {0.18, 0.18, 0.18}},
        {"warm", {0.72, 0.50, 0.32}},
        {"cold", {0.32, 0.48, 0.72}},
        {"faded", {0.66, 0.64, 0.60}},
        {"aged", {0.62, 0.52, 0.38}},
        {"cinematic", {0.30, 0.42, 0.45}},
        {"golden", {0.88, 0.68, 0.30}},
        {"moonlight", {0.25, 0.32, 0.50}},
        {"sepia", {0.60, 0.45, 0.30}},
        {"vintage", {0.70, 0.60, 0.45}},
        {"pastel", {0.85, 0.78, 0.85}},
        {"neon", {0.60, 1.00, 0.30}},
        {"sunset", {0.95, 0.45, 0.25}},
        {"sunrise", {0.95, 0.65, 0.45}},
        {"twilight", {0.35, 0.30, 0.55}},
        {"nighttime", {0.08, 0.10, 0.20}},
        {"foggy", {0.75, 0.76, 0.78}},
        {"autumn", {0.75, 0.45, 0.15}},
        {"spring", {0.55, 0.85, 0.45}},
        {"summer", {0.95, 0.80, 0.40}},
        {"winter", {0.80, 0.88, 0.95}},
        {"dreamy", {0.85, 0.75, 0.90}},
        {"gloomy", {0.30, 0.32, 0.35}},
        {"sunny", {0.98, 0.88, 0.55}},
        {"muted", {0.55, 0.52, 0.50}},
        {"matte", {0.45, 0.44, 0.42}},
        {"cyberpunk", {0.75, 0.20, 0.85}},
        {"underwater", {0.05, 0.45, 0.60}},
    };
    return lexicon;
}

ImageBuffer make_swatch(const Rgb& color) {
    std::vector<Rgb> pixels(static_cast<std::size_t>(kSwatchSize) * kSwatchSize);
    for (int y = 0; y < kSwatchSize; ++y) {
        for (int x = 0; x < kSwatchSize; ++x) {
            const double offset = ((x + y) % 2 == 0) ? kSwatchChecker : -kSwatchChecker;
            Rgb p;
            for (int c = 0; c < 3; ++c) p[c] = std::clamp(color[c] + offset, 0.0, 1.0);
            pixels[static_cast<std::size_t>(y) * kSwatchSize + x] = p;
        }
    }
    return ImageBuffer(kSwatchSize, kSwatchSize, std::move(pixels));
}

std::string strip_photo_suffix(std::string_view text) {
    if (text.size() > kPhotoSuffix.size() && text.ends_with(kPhotoSuffix)) {
        text.remove_suffix(kPhotoSuffix.size());
    }
    return std::string(text);
}

std::string with_photo_suffix(std::string_view text) {
    if (text.ends_with(kPhotoSuffix)) return std::string(text);
    return std::string(text) + std::string(kPhotoSuffix);
}

EmbeddingVector embed_image_toy(const ImageBuffer& image) {
    return EmbeddingVector::normalized(extract_features(image));
}

std::vector<Rgb> embed_image_toy_grad(const ImageBuffer& image, std::span<const double> upstream) {
    const FeatureVector f = extract_features(image);
    if (upstream.size() != f.size()) fail(ErrorCode::dimension, "embedding gradient has the wrong length");
    const double n = norm(f);
    if (n < 1e-12) fail(ErrorCode::degenerate_direction, "cannot normalize a zero embedding");
    // d(f/|f|) = (I - e e^T) / |f|
    double projection = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) projection += f[i] / n * upstream[i];
    std::vector<double> g_features(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) g_features[i] = (upstream[i] - f[i] / n * projection) / n;
    return extract_features_grad(image, g_features);
}

EmbeddingProvider EmbeddingProvider::toy() { return toy(toy_lexicon()); }

EmbeddingProvider EmbeddingProvider::toy(std::vector<LexiconEntry> lexicon) {
    EmbeddingProvider p;
    p.mode_ = EmbeddingMode::toy;
    p.dim_ = kFeatureCount;
    p.model_name_ = "toy-color-statistics";
    for (const auto& entry : lexicon) {
        if (!p.lexicon_index_.emplace(entry.token, entry.color).second) {
            fail(ErrorCode::config, "duplicate lexicon token '" + entry.token + "'");
        }
    }
    if (lexicon.empty() || !p.lexicon_index_.contains(strip_photo_suffix(kDefaultSourcePrompt))) {
        fail(ErrorCode::config, "toy lexicon must contain the 'normal' token");
    }
    p.lexicon_ = std::move(lexicon);
    return p;
}

EmbeddingProvider EmbeddingProvider::file_store(std::vector<StoreEntry> entries, std::string model_name) {
    EmbeddingProvider p;
    p.mode_ = EmbeddingMode::file_store;
    p.model_name_ = std::move(model_name);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (e.values.empty()) fail(ErrorCode::format, "embedding '" + e.key + "' is empty");
        if (p.dim_ == 0) p.dim_ = static_cast<int>(e.values.size());
        if (static_cast<int>(e.values.size()) != p.dim_) {
            fail(ErrorCode::format, "embedding '" + e.key + "' has dimension " + std::to_string(e.values.size()) +
                                        ", store dimension is " + std::to_string(p.dim_));
        }
        if (!p.entry_index_.emplace(e.key, i).second) {
            fail(ErrorCode::format, "duplicate embedding key '" + e.key + "'");
        }
    }
    p.entries_ = std::move(entries);
    return p;
}

const EmbeddingProvider::StoreEntry* EmbeddingProvider::find_entry(std::string_view key) const {
    const auto it = entry_index_.find(key);
    return it == entry_index_.end() ? nullptr : &entries_[it->second];
}

bool EmbeddingProvider::has_text(std::string_view prompt) const {
    if (mode_ == EmbeddingMode::toy) return lexicon_index_.contains(strip_photo_suffix(prompt));
    return find_entry(prompt) != nullptr || find_entry(with_photo_suffix(prompt)) != nullptr;
}

EmbeddingVector EmbeddingProvider::text(std::string_view prompt) const {
    if (mode_ == EmbeddingMode::toy) {
        const auto it = lexicon_index_.find(strip_photo_suffix(prompt));
        if (it == lexicon_index_.end()) {
            fail(ErrorCode::unknown_text,
                 "unknown text '" + std::string(prompt) + "'; available: " + join(texts()));
        }
        return embed_image_toy(make_swatch(it->second));
    }
    const StoreEntry* entry = find_entry(prompt);
    if (entry == nullptr) entry = find_entry(with_photo_suffix(prompt));
    if (entry == nullptr) {
        fail(ErrorCode::unknown_text, "unknown text '" + std::string(prompt) + "'; available: " + join(texts()));
    }
    return EmbeddingVector::normalized(entry->values);
}

EmbeddingVector EmbeddingProvider::lookup(std::string_view key) const {
    const StoreEntry* entry = find_entry(key);
    if (entry == nullptr) fail(ErrorCode::not_found, "no embedding stored under key '" + std::string(key) + "'");
    return EmbeddingVector::normalized(entry->values);
}

EmbeddingVector EmbeddingProvider::image(const ImageBuffer& img) const {
    if (mode_ != EmbeddingMode::toy) {
        fail(ErrorCode::config, "file-store embeddings cannot embed new images; use a stored image key");
    }
    return embed_image_toy(img);
}

std::vector<std::string> EmbeddingProvider::texts() const {
    std::vector<std::string> out;
    if (mode_ == EmbeddingMode::toy) {
        for (const auto& entry : lexicon_) out.push_back(entry.token);
    } else {
        for (const auto& entry : entries_) out.push_back(entry.key);
    }
    return out;
}

double relative_similarity(const EmbeddingVector& image, const EmbeddingVector& target,
                           const EmbeddingVector& anchor, double temperature) {
    if (!(temperature > 0.0)) fail(ErrorCode::invalid_argument, "temperature must be positive");
    const double a = dot(image.values(), target.values()) / temperature;
    const double b = dot(image.values(), anchor.values()) / temperature;
    // exp(a) / (exp(a) + exp(b)) written as a logistic of the difference.
    return 1.0 / (1.0 + std::exp(b - a));
}

}  // namespace tonelut
