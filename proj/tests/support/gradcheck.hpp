#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace tonelut::testing {

/// |a - b| / max(|a|, |b|) over whole vectors; 0 when both are below 1e-12.
double relative_error(std::span<const double> a, std::span<const double> b);

/// Central differences of f at x with step h.
std::vector<double> central_difference(const std::function<double(std::span<const double>)>& f,
                                       std::vector<double> x, double h = 1e-6);

struct GradCheck {
    std::string op;
    int instances = 0;
    double worst = 0.0;  // largest relative error seen
};

/// Every differentiable stage against central differences on randomized
/// small instances.
std::vector<GradCheck> run_gradient_suite(std::uint64_t seed, int instances);

}  // namespace tonelut::testing
