#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "tonelut/error.hpp"
#include "tonelut/eval.hpp"
#include "tonelut/train.hpp"

using namespace tonelut;
using namespace tonelut::testing;

TEST_CASE("SSIM") {
    std::mt19937_64 rng(50);
    const auto a = random_image(rng, 16, 14);
    CHECK(grayscale_ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    const double closed = (kSsimC1 * kSsimC2) / ((1.0 + kSsimC1) * kSsimC2);
    CHECK(grayscale_ssim(ImageBuffer::filled(12, 12, {0, 0, 0}), ImageBuffer::filled(12, 12, {1, 1, 1})) ==
          doctest::Approx(closed).epsilon(1e-9));
    for (int t = 0; t < 3; ++t) {
        const auto x = random_image(rng, 15, 13);
        const auto y = random_image(rng, 15, 13);
        CHECK(std::abs(grayscale_ssim(x, y) - oracle_ssim(x, y)) <= 1e-6);
        CHECK(grayscale_ssim(x, y) == doctest::Approx(grayscale_ssim(y, x)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(grayscale_ssim(ImageBuffer::filled(8, 8, {0, 0, 0}), ImageBuffer::filled(8, 8, {0, 0, 0})), Error);
}

TEST_CASE("embedding similarities") {
    auto unit = [](std::vector<double> v) { return EmbeddingVector::normalized(v); };
    const auto a = unit({1, 0, 0});
    const auto b = unit({-1, 0, 0});
    CHECK(image_similarity(a, a) == doctest::Approx(1.0));
    CHECK(image_similarity(a, b) == doctest::Approx(-1.0));
    const auto zero = unit({0, 0, 1});
    const auto x = unit({0, 1, 1});
    const auto y = unit({1, 0, 1});
    const auto y2 = unit({2, 0, 1});
    CHECK(directional_similarity(zero, x, zero, x) == doctest::Approx(1.0));
    CHECK(directional_similarity(zero, x, x, zero) == doctest::Approx(-1.0));
    CHECK(directional_similarity(a, unit({0, 1, 0}), zero, unit({1, 1, 1})) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(directional_similarity(y, y, y, y2), Error);
}

TEST_CASE("filter assessment") {
    CHECK(filter_registry().size() == 9);
    const auto provider = EmbeddingProvider::toy();
    for (const auto& f : filter_registry()) CHECK(provider.has_text(f.name));

    std::mt19937_64 rng(51);
    std::vector<ImageBuffer> corpus;
    for (int i = 0; i < 4; ++i) corpus.push_back(random_image(rng, 12, 12, 0.2, 0.8));
    const std::vector<FilterSpec> identity{{"normal", [](const Rgb& p) { return p; }}};
    const auto same = assess_filters(corpus, identity, provider);
    CHECK(same[0].mean_source == doctest::Approx(0.5));
    CHECK(same[0].mean_filtered == doctest::Approx(0.5));

    const auto table = assess_filters(corpus, filter_registry(), provider);
    CHECK(table.size() == 9);
    for (const auto& row : table) {
        CHECK(row.mean_source > 0.0);
        CHECK(row.mean_source < 1.0);
        CHECK(row.mean_filtered > 0.0);
        CHECK(row.mean_filtered < 1.0);
    }
    CHECK(table[0].filter == "bright");
    CHECK(table[0].mean_filtered > table[0].mean_source);
}

TEST_CASE("sweep and evaluation reports") {
    const auto bundle = make_bundle(ModelConfig{9, 8, kFeatureCount}, 4);
    const auto provider = EmbeddingProvider::toy();
    std::mt19937_64 rng(52);
    const auto image = random_image(rng, 12, 12, 0.2, 0.8);
    const auto base = backbone_forward(bundle.bank, bundle.backbone, image);
    const auto zero = strength_sweep(bundle, provider, image, "red photo", {0.0});
    REQUIRE(zero.size() == 1);
    CHECK(zero[0].output == base);
    CHECK(zero[0].max_delta_from_previous == 0.0);

    const auto dup = strength_sweep(bundle, provider, image, "red photo", {0.5, 0.5});
    CHECK(dup[0].output == dup[1].output);
    CHECK(dup[1].max_delta_from_previous == 0.0);

    const auto report = evaluate(bundle, provider, {image, image}, {"red photo", "cold photo"}, 1.0);
    CHECK(report.rows.size() == 4);
    for (const auto& row : report.rows) {
        CHECK(row.grayscale_ssim > 0.0);
        CHECK(row.grayscale_ssim <= 1.0 + 1e-12);
    }
    CHECK_THROWS_AS(strength_sweep(bundle, provider, image, "plaid photo", {0.0}), Error);
}
