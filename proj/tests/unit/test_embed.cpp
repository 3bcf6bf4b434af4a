#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "tonelut/embed.hpp"
#include "tonelut/error.hpp"
#include "tonelut/formats.hpp"

using namespace tonelut;
using namespace tonelut::testing;

namespace {

ImageBuffer tinted(const ImageBuffer& base, const Rgb& gain) {
    std::vector<Rgb> px(base.pixels().begin(), base.pixels().end());
    for (auto& p : px) {
        for (int c = 0; c < 3; ++c) p[c] *= gain[c];
    }
    return clamp_to_image(base.width(), base.height(), std::move(px));
}

}  // namespace

TEST_CASE("image embeddings are unit norm and order free") {
    std::mt19937_64 rng(20);
    for (int t = 0; t < 5; ++t) {
        const auto image = random_image(rng, 7, 5);
        const auto e = embed_image_toy(image);
        CHECK(norm(e.values()) == doctest::Approx(1.0).epsilon(1e-6));
        const auto flipped = embed_image_toy(flip_horizontal(image));
        for (std::size_t i = 0; i < e.dim(); ++i) CHECK(e[i] == doctest::Approx(flipped[i]).epsilon(1e-14));
        const auto f = oracle_features(image);
        const double n = norm(f);
        for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(e[i] - f[i] / n) <= 1e-12);
    }
}

TEST_CASE("text embeddings come from swatches") {
    const auto provider = EmbeddingProvider::toy();
    const auto gray = make_swatch({0.5, 0.5, 0.5});
    CHECK(provider.text("normal photo") == embed_image_toy(gray));
    CHECK(provider.text("normal") == provider.text("normal photo"));
    CHECK(cosine(provider.text("red photo").values(), provider.text("green photo").values()) < 1.0);
    CHECK(toy_lexicon().size() == 64);
    CHECK(strip_photo_suffix("red photo") == "red");
    CHECK(with_photo_suffix("red") == "red photo");
    CHECK(with_photo_suffix("red photo") == "red photo");

    std::mt19937_64 rng(21);
    const auto base = random_image(rng, 16, 16, 0.2, 0.8);
    const auto red = provider.text("red photo");
    const double to_red = cosine(red.values(), embed_image_toy(tinted(base, {1.3, 0.8, 0.8})).values());
    const double to_blue = cosine(red.values(), embed_image_toy(tinted(base, {0.8, 0.8, 1.3})).values());
    CHECK(to_red > to_blue);
}

TEST_CASE("unknown text lists the vocabulary") {
    const auto provider = EmbeddingProvider::toy();
    try {
        provider.text("plaid photo");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::unknown_text);
        CHECK(std::string(e.what()).find("normal") != std::string::npos);
    }
}

TEST_CASE("relative similarity") {
    auto unit = [](std::vector<double> v) { return EmbeddingVector::normalized(v); };
    const auto img = unit({1.0, 0.0, 0.0});
    CHECK(relative_similarity(img, img, img) == doctest::Approx(0.5));
    const auto a = unit({0.3, std::sqrt(1 - 0.09), 0.0});
    const auto b = unit({0.2, 0.0, std::sqrt(1 - 0.04)});
    const double s = relative_similarity(img, a, b);
    CHECK(s == doctest::Approx(1.0 / (1.0 + std::exp(-0.1))).epsilon(1e-12));
    CHECK(s == doctest::Approx(0.52498).epsilon(1e-5));
    CHECK(s + relative_similarity(img, b, a) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s > 0.0);
    CHECK(s < 1.0);
}

TEST_CASE("file store provider") {
    const auto provider = parse_embedding_store(
        "{\"model\": \"test\", \"dim\": 4}\n"
        "{\"key\": \"normal photo\", \"dim\": 4, \"values\": [3, 0, 4, 0]}\n"
        "{\"key\": \"red photo\", \"dim\": 4, \"values\": [0, 1, 0, 0]}\n");
    CHECK(provider.mode() == EmbeddingMode::file_store);
    CHECK_FALSE(provider.differentiable());
    CHECK(provider.texts().size() == 2);
    const auto e = provider.lookup("normal photo");
    CHECK(e[0] == doctest::Approx(0.6));
    CHECK(e[2] == doctest::Approx(0.8));
    CHECK(provider.text("red") == provider.lookup("red photo"));
    try {
        provider.lookup("blue photo");
        FAIL("expected an error");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::not_found);
        CHECK(std::string(err.what()).find("blue photo") != std::string::npos);
    }
    CHECK_THROWS_AS(provider.image(ImageBuffer::filled(2, 2, {0.5, 0.5, 0.5})), Error);
}
