/// @file dyadic.hpp
/// @brief Smooth dyadic bump χ supported on [1/2, 2] with Σⱼ χ(r/2ʲ) = 1 for r > 0.
///
/// Built from the exp(−1/x) mollifier: θ is a C^∞ step equal to 1 on [0, 1]
/// and 0 on [2, ∞), and χ(r) = θ(r) − θ(2r). The dyadic sum telescopes, so the
/// partition of unity holds to round-off without a separate normalization.
/// Dyadic Besov values in this library are defined with respect to this χ.
#pragma once

#include <cmath>
#include <utility>

namespace orthoflow::spectral {

class DyadicProfile {
public:
    static double mollifier(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

    /// Smooth step: 1 for r ≤ 1, 0 for r ≥ 2.
    static double step(double r) {
        if (r <= 1.0) return 1.0;
        if (r >= 2.0) return 0.0;
        const double a = mollifier(2.0 - r), b = mollifier(r - 1.0);
        return a / (a + b);
    }

    double operator()(double r) const {
        if (r <= 0.5 || r >= 2.0) return 0.0;
        return step(r) - step(2.0 * r);
    }

    /// χ(|k| / 2ʲ).
    double shell(double kmag, int j) const { return (*this)(kmag / std::ldexp(1.0, j)); }

    /// Inclusive range of j whose shell can be nonzero for some |k| in [kmin, kmax].
    static std::pair<int, int> contributing_shells(double kmin, double kmax) {
        const int lo = static_cast<int>(std::floor(std::log2(kmin))) - 1;
        const int hi = static_cast<int>(std::ceil(std::log2(kmax))) + 1;
        return {lo, hi};
    }
};

}  // namespace orthoflow::spectral
