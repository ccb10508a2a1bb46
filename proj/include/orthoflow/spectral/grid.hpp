/// @file grid.hpp
/// @brief Fourier discretization of the torus [0, 2π)³ with integer wavevectors.
///
/// Storage is axis-major with k₁ slowest. Along an axis of n points the storage
/// index i maps to the wavenumber i for i < n/2 and to i − n for i > n/2. The
/// index i = n/2 is the Nyquist row; it is kept in storage but never carries
/// representable content, so every operator zeroes it.
#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>

namespace orthoflow {

using cplx = std::complex<double>;

/// i·a·z without the library complex product (which handles inf/nan and is slow).
inline cplx mul_i(double a, cplx z) { return {-a * z.imag(), a * z.real()}; }
using Wavevector = std::array<int, 3>;

enum class Axis : int { x1 = 0, x2 = 1, x3 = 2 };

inline constexpr int axis_index(Axis a) { return static_cast<int>(a); }

inline Axis axis_from_int(int one_based) {
    if (one_based < 1 || one_based > 3)
        throw std::invalid_argument("axis must be 1, 2 or 3, got " + std::to_string(one_based));
    return static_cast<Axis>(one_based - 1);
}

/// Memory cap in bytes, read from ORTHOFLOW_MEM_CAP_MB (default 4096 MB).
inline std::size_t memory_cap_bytes() {
    std::size_t mb = 4096;
    if (const char* env = std::getenv("ORTHOFLOW_MEM_CAP_MB")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && v > 0) mb = static_cast<std::size_t>(v);
    }
    return mb * 1024ull * 1024ull;
}

inline int wavenumber_of_index(int i, int n) { return i <= n / 2 ? i : i - n; }

namespace spectral {

class FourierGrid {
public:
    FourierGrid() = default;

    /// Validated constructor. Throws std::invalid_argument naming the axis.
    static FourierGrid make(std::array<int, 3> dims) {
        for (int a = 0; a < 3; ++a) {
            if (dims[a] < 4)
                throw std::invalid_argument("axis " + std::to_string(a) + " too small (" +
                                            std::to_string(dims[a]) + " < 4)");
            if (dims[a] % 2 != 0) throw std::invalid_argument("axis " + std::to_string(a) + " odd");
        }
        const long double bytes = static_cast<long double>(dims[0]) * dims[1] * dims[2] * 3.0L *
                                  static_cast<long double>(sizeof(cplx));
        if (bytes > static_cast<long double>(memory_cap_bytes())) {
            int worst = 0;
            for (int a = 1; a < 3; ++a)
                if (dims[a] > dims[worst]) worst = a;
            throw std::invalid_argument("axis " + std::to_string(worst) + " exceeds memory cap (" +
                                        std::to_string(dims[0]) + "x" + std::to_string(dims[1]) +
                                        "x" + std::to_string(dims[2]) + ")");
        }
        FourierGrid g;
        g.dims_ = dims;
        return g;
    }

    const std::array<int, 3>& dims() const { return dims_; }
    int dim(int axis) const { return dims_[axis]; }
    /// Largest representable |k| along an axis.
    int max_mode(int axis) const { return dims_[axis] / 2 - 1; }
    /// Per-axis 2/3-rule cutoff: modes with |kₐ| above it are dealiased away.
    int dealias_cutoff(int axis) const { return dims_[axis] / 3; }

    std::size_t size() const {
        return static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
    }

    std::size_t index(int i1, int i2, int i3) const {
        return (static_cast<std::size_t>(i1) * dims_[1] + i2) * dims_[2] + i3;
    }

    int wavenumber(int axis, int i) const { return wavenumber_of_index(i, dims_[axis]); }
    bool is_nyquist(int axis, int i) const { return i == dims_[axis] / 2; }

    bool representable(const Wavevector& k) const {
        for (int a = 0; a < 3; ++a)
            if (k[a] > max_mode(a) || k[a] < -max_mode(a)) return false;
        return true;
    }

    std::optional<std::size_t> index_of(const Wavevector& k) const {
        if (!representable(k)) return std::nullopt;
        std::array<int, 3> i{};
        for (int a = 0; a < 3; ++a) i[a] = k[a] >= 0 ? k[a] : k[a] + dims_[a];
        return index(i[0], i[1], i[2]);
    }

    /// Storage index of -k for the storage index triple (i1,i2,i3).
    std::size_t conjugate_index(int i1, int i2, int i3) const {
        auto neg = [](int i, int n) { return i == 0 ? 0 : n - i; };
        return index(neg(i1, dims_[0]), neg(i2, dims_[1]), neg(i3, dims_[2]));
    }

    friend bool operator==(const FourierGrid& a, const FourierGrid& b) { return a.dims_ == b.dims_; }

    std::string describe() const {
        return std::to_string(dims_[0]) + "x" + std::to_string(dims_[1]) + "x" +
               std::to_string(dims_[2]);
    }

private:
    std::array<int, 3> dims_{4, 4, 4};
};

inline FourierGrid make_grid(std::array<int, 3> dims) { return FourierGrid::make(dims); }

/// Visits every storage slot with its wavevector; `nyquist` is true when any
/// axis sits on its Nyquist row.
template <class Fn>
void for_each_mode(const FourierGrid& g, Fn&& fn) {
    const auto& d = g.dims();
    std::size_t idx = 0;
    for (int i1 = 0; i1 < d[0]; ++i1) {
        const int k1 = g.wavenumber(0, i1);
        const bool n1 = g.is_nyquist(0, i1);
        for (int i2 = 0; i2 < d[1]; ++i2) {
            const int k2 = g.wavenumber(1, i2);
            const bool n2 = n1 || g.is_nyquist(1, i2);
            for (int i3 = 0; i3 < d[2]; ++i3, ++idx) {
                const bool nyq = n2 || g.is_nyquist(2, i3);
                fn(idx, Wavevector{k1, k2, g.wavenumber(2, i3)}, nyq);
            }
        }
    }
}

inline double norm2(const Wavevector& k) {
    return double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2];
}

/// Smallest even n ≥ lo whose only prime factors are 2, 3, 5, 7.
inline int good_fft_size(int lo) {
    int n = lo < 2 ? 2 : lo + (lo % 2);
    for (;; n += 2) {
        int m = n;
        for (int p : {2, 3, 5, 7})
            while (m % p == 0) m /= p;
        if (m == 1) return n;
    }
}

}  // namespace spectral
}  // namespace orthoflow
