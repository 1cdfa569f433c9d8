#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>

namespace forge::util {

/// Seeded generator whose derived draws are identical on every platform.
/// std::mt19937_64's raw sequence is fixed by the standard; the distribution
/// classes are not, so uniform and normal draws are derived here directly.
class Rng {
    __extension__ using u128 = unsigned __int128;

public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in [0, n). n must be > 0.
    std::size_t index(std::size_t n) {
        const auto wide = static_cast<u128>(engine_()) * n;
        return static_cast<std::size_t>(wide >> 64);
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace forge::util
