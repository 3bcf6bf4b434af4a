#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "tonelut/losses.hpp"

using namespace tonelut;
using namespace tonelut::testing;

namespace {

BasisLutBank random_bank(std::mt19937_64& rng, int n, int count) {
    std::vector<Lut3D> luts;
    for (int l = 0; l < count; ++l) luts.push_back(random_lut(rng, n));
    return BasisLutBank(std::move(luts));
}

}  // namespace

TEST_CASE("content loss") {
    std::mt19937_64 rng(30);
    const auto a = random_image(rng, 5, 4);
    CHECK(content_loss(a, a) == 0.0);
    CHECK(content_loss(ImageBuffer::filled(3, 3, {0, 0, 0}), ImageBuffer::filled(3, 3, {0.5, 0.5, 0.5})) ==
          doctest::Approx(0.25));
    const auto b = random_image(rng, 5, 4);
    double sum = 0.0;
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 5; ++x) {
            for (int c = 0; c < 3; ++c) sum += std::pow(a.at(x, y)[c] - b.at(x, y)[c], 2);
        }
    }
    CHECK(std::abs(content_loss(a, b) - sum / 60.0) <= 1e-12);
}

TEST_CASE("directional loss") {
    const std::vector<double> u{1.0, 2.0, 0.0};
    const std::vector<double> neg{-1.0, -2.0, 0.0};
    const std::vector<double> orth{2.0, -1.0, 3.0};
    const std::vector<double> zero{0.0, 0.0, 0.0};
    CHECK(clip_directional_loss(u, u) == doctest::Approx(0.0));
    CHECK(clip_directional_loss(u, neg) == doctest::Approx(2.0));
    CHECK(clip_directional_loss(u, orth) == doctest::Approx(1.0));
    CHECK(clip_directional_loss(zero, u) == 1.0);
    for (double g : clip_directional_loss_grad(zero, u)) CHECK(g == 0.0);
}

TEST_CASE("weight penalty") {
    CHECK(weight_l2(std::vector<double>{0, 0, 0}) == 0.0);
    CHECK(weight_l2(std::vector<double>{0.5, 0.3, 0.2}) == doctest::Approx(0.38).epsilon(1e-15));
}

TEST_CASE("interval loss against brute force") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 4;
        const auto bank = random_bank(rng, n, 1 + trial % 3);
        const auto coords = random_coords(rng, n);
        const double alpha = draw(rng, 0.3, 1.2);
        CHECK(std::abs(interval_loss(bank, coords, alpha) - oracle_interval_loss(bank, coords, alpha)) <= 1e-10);
    }
    const BasisLutBank identity({make_identity(2)});
    CHECK(oracle_interval_loss(identity, SamplingCoordinates::uniform(2), 0.7) == doctest::Approx(12.0));
    CHECK(interval_loss(identity, SamplingCoordinates::uniform(2), 0.7) == doctest::Approx(12.0));
    CHECK(interval_loss(identity, SamplingCoordinates::uniform(2), 1.9) == doctest::Approx(12.0));
    const BasisLutBank flat({make_constant(4, {0.3, 0.3, 0.3})});
    CHECK(interval_loss(flat, random_coords(rng, 4), 0.7) == 0.0);
}

TEST_CASE("shrinking an interval raises the terms it divides") {
    const BasisLutBank bank({make_identity(3)});
    const auto uniform = SamplingCoordinates::uniform(3);
    const SamplingCoordinates squeezed({{{0.0, 0.25, 1.0}, {0.0, 0.5, 1.0}, {0.0, 0.5, 1.0}}});
    // Across each red slab only the red channel moves, by 0.5, at 9 (j, k) pairs.
    const double slab = 9 * 0.25;
    CHECK(interval_slab_energy(bank, 0)[0] == doctest::Approx(slab));
    const double first_before = slab / std::pow(0.5, 1.4);
    const double first_after = slab / std::pow(0.25, 1.4);
    const double second_change = slab / std::pow(0.75, 1.4) - slab / std::pow(0.5, 1.4);
    CHECK(first_after > first_before);
    const double change = oracle_interval_loss(bank, squeezed, 0.7) - oracle_interval_loss(bank, uniform, 0.7);
    CHECK(change == doctest::Approx(first_after - first_before + second_change).epsilon(1e-12));
    CHECK(interval_loss(bank, squeezed, 0.7) == doctest::Approx(oracle_interval_loss(bank, squeezed, 0.7)).epsilon(1e-12));
}

TEST_CASE("interval minimizer") {
    const auto bank = default_basis_bank(9);
    for (int axis = 0; axis < 3; ++axis) {
        const auto d = interval_loss_minimizer(bank, axis, 0.7);
        double total = 0.0;
        for (double v : d) total += v;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
    auto build = [&](double eps, int idx) {
        std::array<std::vector<double>, 3> axes;
        for (int c = 0; c < 3; ++c) {
            auto d = interval_loss_minimizer(bank, c, 0.7);
            if (c == 0) {
                d[idx] += eps;
                d[idx + 1] -= eps;
            }
            axes[c].assign(1, 0.0);
            for (double v : d) axes[c].push_back(axes[c].back() + v);
            axes[c].back() = 1.0;
        }
        return interval_loss(bank, SamplingCoordinates(axes), 0.7);
    };
    const double best = build(0.0, 2);
    CHECK(build(1e-3, 2) > best);
    CHECK(build(-1e-3, 2) > best);
}

TEST_CASE("total loss recombines its terms") {
    std::mt19937_64 rng(32);
    const auto src = random_image(rng, 4, 4);
    const auto adj = random_image(rng, 4, 4);
    const std::vector<double> di{0.1, -0.3, 0.2};
    const std::vector<double> dt{0.4, 0.1, -0.2};
    const std::vector<double> w{0.7, 0.2, 0.1};
    const auto bank = random_bank(rng, 3, 3);
    const auto coords = random_coords(rng, 3);
    const LossWeights lam{1.5, 0.5, 2.0, 3e-2, 0.25, 0.8};
    const auto r = total_loss({src, adj, di, dt, w, bank, coords}, lam);

    double mse = 0.0;
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) {
            for (int c = 0; c < 3; ++c) mse += std::pow(src.at(x, y)[c] - adj.at(x, y)[c], 2);
        }
    }
    mse /= 48.0;
    const double cosv = (0.04 - 0.03 - 0.04) / (std::sqrt(0.14) * std::sqrt(0.21));
    const double wl = 0.49 + 0.04 + 0.01;
    const double il = oracle_interval_loss(bank, coords, 0.8);
    CHECK(std::abs(r.content - mse) <= 1e-12);
    CHECK(std::abs(r.clip_directional - (1 - cosv)) <= 1e-12);
    CHECK(std::abs(r.weight_l2 - wl) <= 1e-12);
    CHECK(std::abs(r.interval - il) <= 1e-10);
    CHECK(std::abs(r.total - (1.5 * mse + 0.5 * (1 - cosv) + 2.0 * (3e-2 * wl + 0.25 * il))) <= 1e-10);

    const LossWeights paper;
    CHECK(paper.content == 1.0);
    CHECK(paper.clip == 1.0);
    CHECK(paper.lut == 1.0);
    CHECK(paper.weight == 1e-4);
    CHECK(paper.interval == 0.5);
    CHECK(paper.alpha == 0.7);

    const BasisLutBank flat({make_constant(3, {0.5, 0.5, 0.5})});
    const std::vector<double> none{0.0};
    const auto zero = total_loss({src, src, di, di, none, flat, coords}, paper);
    CHECK(zero.total == doctest::Approx(0.0));
}
