/// @file fft.hpp
/// @brief FFTW-backed transforms between stored spectra and physical samples.
///
/// Physical samples live on a uniform grid of `n` points per axis, which need
/// not match the storage grid: coefficients are scattered into (or gathered
/// from) a zero-padded buffer. An axis with n = 1 carries only kₐ = 0, which is
/// how fields of two variables are sampled on a plane.
///
/// Conventions: f(x) = Σ û(k) e^{ik·x} (unnormalized backward transform) and
/// û(k) = mean over samples of f(x) e^{-ik·x} (normalized forward transform).
#pragma once

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include "orthoflow/spectral/field.hpp"

namespace orthoflow::spectral {

using PhysicalDims = std::array<int, 3>;

inline std::size_t physical_size(const PhysicalDims& n) {
    return static_cast<std::size_t>(n[0]) * n[1] * n[2];
}

/// fftw_malloc-backed complex buffer; every transform executes in place on one.
class FftBuffer {
public:
    FftBuffer() = default;
    explicit FftBuffer(std::size_t n) : n_(n) {
        p_ = fftw_alloc_complex(n);
        if (!p_) throw std::bad_alloc();
    }
    FftBuffer(const FftBuffer&) = delete;
    FftBuffer& operator=(const FftBuffer&) = delete;
    FftBuffer(FftBuffer&& o) noexcept : p_(o.p_), n_(o.n_) { o.p_ = nullptr; o.n_ = 0; }
    FftBuffer& operator=(FftBuffer&& o) noexcept {
        std::swap(p_, o.p_);
        std::swap(n_, o.n_);
        return *this;
    }
    ~FftBuffer() { if (p_) fftw_free(p_); }

    void resize(std::size_t n) {
        if (n == n_) return;
        FftBuffer tmp(n);
        *this = std::move(tmp);
    }
    void zero() { std::memset(static_cast<void*>(p_), 0, n_ * sizeof(fftw_complex)); }
    std::size_t size() const { return n_; }
    cplx* data() { return reinterpret_cast<cplx*>(p_); }
    const cplx* data() const { return reinterpret_cast<const cplx*>(p_); }
    fftw_complex* raw() { return p_; }
    cplx& operator[](std::size_t i) { return data()[i]; }
    const cplx& operator[](std::size_t i) const { return data()[i]; }

private:
    fftw_complex* p_ = nullptr;
    std::size_t n_ = 0;
};

enum class PlanRigor { estimate, measure };

/// Process-wide cache of in-place plans keyed by physical dims. Planning is
/// serialized; execution through fftw_execute_dft is thread-safe.
class FftPlans {
public:
    static FftPlans& instance() {
        static FftPlans p;
        return p;
    }

    void prepare(const PhysicalDims& n, PlanRigor rigor) { (void)get(n, rigor); }

    void backward(const PhysicalDims& n, FftBuffer& buf) { fftw_execute_dft(get(n).bwd, buf.raw(), buf.raw()); }
    void forward(const PhysicalDims& n, FftBuffer& buf) { fftw_execute_dft(get(n).fwd, buf.raw(), buf.raw()); }

    ~FftPlans() {
        for (auto& [k, p] : plans_) {
            fftw_destroy_plan(p.fwd);
            fftw_destroy_plan(p.bwd);
        }
    }

private:
    struct Pair {
        fftw_plan fwd;
        fftw_plan bwd;
    };

    Pair get(const PhysicalDims& n, PlanRigor rigor = PlanRigor::estimate) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return it->second;
        FftBuffer scratch(physical_size(n));
        const unsigned flags = rigor == PlanRigor::measure ? FFTW_MEASURE : FFTW_ESTIMATE;
        Pair p{fftw_plan_dft_3d(n[0], n[1], n[2], scratch.raw(), scratch.raw(), FFTW_FORWARD, flags),
               fftw_plan_dft_3d(n[0], n[1], n[2], scratch.raw(), scratch.raw(), FFTW_BACKWARD, flags)};
        if (!p.fwd || !p.bwd) throw std::runtime_error("FFTW planning failed");
        plans_.emplace(n, p);
        return p;
    }

    std::mutex mu_;
    std::map<PhysicalDims, Pair> plans_;
};

/// Physical grid that resolves content up to `content[a]` per axis with the
/// given oversampling relative to the minimal 2m+2 points. Flat axes get 1 point.
inline PhysicalDims sampling_dims(const std::array<int, 3>& content, double oversample) {
    PhysicalDims n{};
    for (int a = 0; a < 3; ++a) {
        if (content[a] == 0) {
            n[a] = 1;
            continue;
        }
        const int minimal = 2 * content[a] + 2;
        const int wanted = static_cast<int>(std::ceil(oversample * minimal));
        n[a] = good_fft_size(std::max(minimal, wanted));
    }
    return n;
}

namespace detail {

// Position of wavenumber k on an n-point physical axis, or -1 when it does not fit.
inline int physical_slot(int k, int n) {
    if (n == 1) return k == 0 ? 0 : -1;
    if (k > n / 2 - 1 || k < -(n / 2 - 1)) return -1;
    return k >= 0 ? k : k + n;
}

inline std::vector<int> slot_table(const FourierGrid& g, int axis, int n) {
    std::vector<int> t(g.dim(axis));
    for (int i = 0; i < g.dim(axis); ++i)
        t[i] = g.is_nyquist(axis, i) ? -1 : physical_slot(g.wavenumber(axis, i), n);
    return t;
}

}  // namespace detail

/// Scatters a + i·b (either may be empty) into `buf` laid out on physical dims `n`.
inline void scatter_pair(const FourierGrid& g, std::span<const cplx> a, std::span<const cplx> b,
                         const PhysicalDims& n, FftBuffer& buf) {
    buf.resize(physical_size(n));
    buf.zero();
    const auto t0 = detail::slot_table(g, 0, n[0]);
    const auto t1 = detail::slot_table(g, 1, n[1]);
    const auto t2 = detail::slot_table(g, 2, n[2]);
    const auto& d = g.dims();
    const bool ha = !a.empty(), hb = !b.empty();
    std::size_t idx = 0;
    for (int i1 = 0; i1 < d[0]; ++i1)
        for (int i2 = 0; i2 < d[1]; ++i2)
            for (int i3 = 0; i3 < d[2]; ++i3, ++idx) {
                const cplx va = ha ? a[idx] : cplx{};
                const cplx vb = hb ? b[idx] : cplx{};
                if (va == cplx{} && vb == cplx{}) continue;
                const int s0 = t0[i1], s1 = t1[i2], s2 = t2[i3];
                if (s0 < 0 || s1 < 0 || s2 < 0) {
                    if (g.is_nyquist(0, i1) || g.is_nyquist(1, i2) || g.is_nyquist(2, i3)) continue;
                    throw std::invalid_argument("physical sampling grid too coarse for field content");
                }
                const std::size_t p = (static_cast<std::size_t>(s0) * n[1] + s1) * n[2] + s2;
                buf[p] = va + mul_i(1.0, vb);
            }
}

/// Samples one real scalar spectrum on physical dims `n`.
inline std::vector<double> to_physical(const FourierGrid& g, std::span<const cplx> c, const PhysicalDims& n) {
    FftBuffer buf;
    scatter_pair(g, c, {}, n, buf);
    FftPlans::instance().backward(n, buf);
    std::vector<double> out(buf.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = buf[i].real();
    return out;
}

/// Samples two real spectra with one complex transform (real part ↔ a, imaginary part ↔ b).
inline void to_physical_pair(const FourierGrid& g, std::span<const cplx> a, std::span<const cplx> b,
                             const PhysicalDims& n, std::vector<double>& out_a, std::vector<double>& out_b,
                             FftBuffer& buf) {
    scatter_pair(g, a, b, n, buf);
    FftPlans::instance().backward(n, buf);
    out_a.resize(buf.size());
    out_b.resize(buf.size());
    for (std::size_t i = 0; i < buf.size(); ++i) {
        out_a[i] = buf[i].real();
        out_b[i] = buf[i].imag();
    }
}

/// Forward transform of up to two real sample arrays on dims `n`, gathered onto
/// storage grid `g`. Modes that do not fit either grid, and Nyquist rows, are zero.
inline void from_physical_pair(std::span<const double> a, std::span<const double> b, const PhysicalDims& n,
                               const FourierGrid& g, std::span<cplx> out_a, std::span<cplx> out_b,
                               FftBuffer& buf) {
    const std::size_t np = physical_size(n);
    buf.resize(np);
    const bool hb = !b.empty();
    for (std::size_t i = 0; i < np; ++i) buf[i] = cplx{a[i], hb ? b[i] : 0.0};
    FftPlans::instance().forward(n, buf);
    const double scale = 1.0 / static_cast<double>(np);
    const auto t0 = detail::slot_table(g, 0, n[0]);
    const auto t1 = detail::slot_table(g, 1, n[1]);
    const auto t2 = detail::slot_table(g, 2, n[2]);
    auto neg = [](int s, int m) { return s == 0 ? 0 : m - s; };
    const auto& d = g.dims();
    std::size_t idx = 0;
    for (int i1 = 0; i1 < d[0]; ++i1)
        for (int i2 = 0; i2 < d[1]; ++i2)
            for (int i3 = 0; i3 < d[2]; ++i3, ++idx) {
                const int s0 = t0[i1], s1 = t1[i2], s2 = t2[i3];
                if (s0 < 0 || s1 < 0 || s2 < 0) {
                    out_a[idx] = {};
                    if (hb) out_b[idx] = {};
                    continue;
                }
                const cplx z = buf[(static_cast<std::size_t>(s0) * n[1] + s1) * n[2] + s2];
                if (!hb) {
                    out_a[idx] = z * scale;
                    continue;
                }
                const cplx zc = std::conj(
                    buf[(static_cast<std::size_t>(neg(s0, n[0])) * n[1] + neg(s1, n[1])) * n[2] + neg(s2, n[2])]);
                out_a[idx] = 0.5 * scale * (z + zc);
                out_b[idx] = mul_i(-0.5 * scale, z - zc);
            }
}

}  // namespace orthoflow::spectral
