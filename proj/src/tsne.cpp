#include "forge/tsne.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

#include "forge/error.hpp"
#include "forge/util/random.hpp"

namespace forge::analytics {

namespace {

constexpr double kMinProb = 1e-12;

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

/// Fills row with p_{j|i} for one beta and returns the row entropy.
double gaussian_row(const std::vector<double>& dist, std::size_t self, double beta, std::vector<double>& row) {
    // shift by the smallest distance so the largest weight is exp(0)
    double min_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < dist.size(); ++j)
        if (j != self) min_d = std::min(min_d, dist[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < dist.size(); ++j) {
        row[j] = j == self ? 0.0 : std::exp(-beta * (dist[j] - min_d));
        sum += row[j];
    }
    double h = 0.0;
    for (std::size_t j = 0; j < dist.size(); ++j) {
        row[j] /= sum;
        if (row[j] > 0.0) h -= row[j] * std::log(row[j]);
    }
    return h;
}

}  // namespace

Affinities compute_affinities(std::span<const Vec> points, double perplexity, double tolerance) {
    const std::size_t n = points.size();
    if (n < 2) throw PreconditionError("affinities need at least two points");
    if (!(perplexity > 0.0)) throw UsageError("perplexity must be positive");
    if (perplexity >= static_cast<double>(n))
        throw UsageError(fmt::format("perplexity {} must be below the number of points {}", perplexity, n));

    const double target = std::log(perplexity);
    Affinities a;
    a.conditional.assign(n, std::vector<double>(n, 0.0));
    a.betas.assign(n, 1.0);
    a.entropies.assign(n, 0.0);

    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) dist[j] = squared_distance(points[i], points[j]);
        auto& row = a.conditional[i];
        double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
        double h = gaussian_row(dist, i, beta, row);
        for (int it = 0; it < 500 && std::abs(h - target) > tolerance; ++it) {
            if (h > target) {
                lo = beta;
                beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
            } else {
                hi = beta;
                beta = (beta + lo) / 2.0;
            }
            h = gaussian_row(dist, i, beta, row);
        }
        a.betas[i] = beta;
        a.entropies[i] = h;
    }

    a.joint.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a.joint[i][j] = (a.conditional[i][j] + a.conditional[j][i]) / (2.0 * static_cast<double>(n));
    return a;
}

double kl_divergence(const std::vector<std::vector<double>>& joint, std::span<const Point2> y) {
    const std::size_t n = y.size();
    double z = 0.0;
    std::vector<std::vector<double>> num(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double dx = y[i][0] - y[j][0], dy = y[i][1] - y[j][1];
            num[i][j] = 1.0 / (1.0 + dx * dx + dy * dy);
            z += num[i][j];
        }
    double kl = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || joint[i][j] <= 0.0) continue;
            const double q = std::max(num[i][j] / z, kMinProb);
            kl += joint[i][j] * std::log(std::max(joint[i][j], kMinProb) / q);
        }
    return kl;
}

TsneResult tsne(std::span<const Vec> points, const TsneOptions& opt) {
    const std::size_t n = points.size();
    if (n < 3) throw PreconditionError(fmt::format("t-SNE needs at least 3 points, got {}", n));
    const auto aff = compute_affinities(points, opt.perplexity, opt.perplexity_tolerance);
    const auto& P = aff.joint;

    util::Rng rng(opt.seed);
    std::vector<Point2> y(n), update(n, {0.0, 0.0}), gains(n, {1.0, 1.0}), grad(n);
    for (auto& p : y) p = {rng.normal() * 1e-2, rng.normal() * 1e-2};

    TsneResult result;
    result.initial_kl = kl_divergence(P, y);

    std::vector<std::vector<double>> num(n, std::vector<double>(n, 0.0));
    for (std::size_t iter = 0; iter < opt.iterations; ++iter) {
        const double exaggeration = iter < opt.exaggeration_iterations ? opt.early_exaggeration : 1.0;
        const double momentum = iter < opt.momentum_switch ? opt.initial_momentum : opt.final_momentum;

        double z = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double dx = y[i][0] - y[j][0], dy = y[i][1] - y[j][1];
                num[i][j] = num[j][i] = 1.0 / (1.0 + dx * dx + dy * dy);
                z += 2.0 * num[i][j];
            }
        for (std::size_t i = 0; i < n; ++i) {
            grad[i] = {0.0, 0.0};
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                const double q = std::max(num[i][j] / z, kMinProb);
                const double mult = 4.0 * (exaggeration * P[i][j] - q) * num[i][j];
                grad[i][0] += mult * (y[i][0] - y[j][0]);
                grad[i][1] += mult * (y[i][1] - y[j][1]);
            }
        }
        Point2 mean{0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            for (int d = 0; d < 2; ++d) {
                const bool same_sign = (grad[i][d] > 0.0) == (update[i][d] > 0.0);
                gains[i][d] = same_sign ? gains[i][d] * 0.8 : gains[i][d] + 0.2;
                gains[i][d] = std::max(gains[i][d], 0.01);
                update[i][d] = momentum * update[i][d] - opt.learning_rate * gains[i][d] * grad[i][d];
                y[i][d] += update[i][d];
                mean[d] += y[i][d];
            }
        }
        for (auto& p : y) {
            p[0] -= mean[0] / static_cast<double>(n);
            p[1] -= mean[1] / static_cast<double>(n);
        }
    }
    result.final_kl = kl_divergence(P, y);
    result.points = std::move(y);
    return result;
}

}  // namespace forge::analytics
