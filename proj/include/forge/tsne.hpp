#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "forge/vector_math.hpp"

namespace forge::analytics {

struct TsneOptions {
    double perplexity = 5.0;
    std::size_t iterations = 1000;
    std::uint64_t seed = 0;
    double learning_rate = 200.0;
    double early_exaggeration = 12.0;
    std::size_t exaggeration_iterations = 250;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    std::size_t momentum_switch = 250;
    double perplexity_tolerance = 1e-5;  // on entropy, i.e. log-perplexity
};

struct Affinities {
    std::vector<std::vector<double>> conditional;  // row i: p_{j|i}
    std::vector<std::vector<double>> joint;        // symmetrized, sums to 1
    std::vector<double> betas;                     // 1 / (2 sigma_i^2)
    std::vector<double> entropies;                 // natural-log entropy per row
};

/// Gaussian input affinities over squared Euclidean distances with each
/// row's bandwidth binary-searched to the target perplexity.
Affinities compute_affinities(std::span<const Vec> points, double perplexity, double tolerance = 1e-5);

using Point2 = std::array<double, 2>;

struct TsneResult {
    std::vector<Point2> points;
    double initial_kl = 0.0;  // KL(P || Q) at the initial layout
    double final_kl = 0.0;
};

/// Exact O(n^2) t-SNE. Throws PreconditionError for fewer than 3 points and
/// UsageError when perplexity >= n.
TsneResult tsne(std::span<const Vec> points, const TsneOptions& options);

/// KL(P || Q) for a joint P and a layout.
double kl_divergence(const std::vector<std::vector<double>>& joint, std::span<const Point2> layout);

}  // namespace forge::analytics
