#pragma once

#include <span>
#include <vector>

namespace tonelut {

/// Unit-norm vector in the shared image/text embedding space.
class EmbeddingVector {
public:
    EmbeddingVector() = default;

    /// Normalizes `raw`; throws Error(degenerate_direction) when its norm is
    /// below 1e-12 and Error(invalid_argument) on non-finite input.
    static EmbeddingVector normalized(std::span<const double> raw);

    std::size_t dim() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    bool operator==(const EmbeddingVector&) const = default;

private:
    std::vector<double> values_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

/// a . b / (|a| |b|); throws Error(degenerate_direction) if either norm < eps.
double cosine(std::span<const double> a, std::span<const double> b, double eps = 1e-8);

}  // namespace tonelut
