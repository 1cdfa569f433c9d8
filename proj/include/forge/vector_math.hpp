#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace forge {

using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    const std::size_t n = a.size() < b.size() ? a.size() : b.size();
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

inline double l2_norm(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

/// Cosine similarity; 0 when either vector is zero.
inline double cosine(std::span<const double> a, std::span<const double> b) noexcept {
    const double na = l2_norm(a);
    const double nb = l2_norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

/// Unit-norm copy; a zero vector is returned unchanged.
inline Vec normalized(std::span<const double> a) {
    Vec out(a.begin(), a.end());
    const double n = l2_norm(a);
    if (n > 0.0)
        for (double& v : out) v /= n;
    return out;
}

}  // namespace forge
