/// @file field.hpp
/// @brief Fourier-coefficient representations of real periodic fields.
#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "orthoflow/spectral/grid.hpp"

namespace orthoflow::spectral {

/// A single real scalar field stored as its full (Hermitian) Fourier spectrum.
class SpectralScalarField {
public:
    SpectralScalarField() = default;
    explicit SpectralScalarField(FourierGrid g) : grid_(g), c_(g.size(), cplx{}) {}
    SpectralScalarField(FourierGrid g, std::vector<cplx> c) : grid_(g), c_(std::move(c)) {
        if (c_.size() != grid_.size())
            throw std::invalid_argument("coefficient array does not match grid " + grid_.describe());
    }

    const FourierGrid& grid() const { return grid_; }
    std::span<const cplx> coeffs() const { return c_; }
    std::span<cplx> coeffs() { return c_; }
    cplx& operator[](std::size_t i) { return c_[i]; }
    const cplx& operator[](std::size_t i) const { return c_[i]; }

    cplx at(const Wavevector& k) const {
        auto i = grid_.index_of(k);
        return i ? c_[*i] : cplx{};
    }
    void set(const Wavevector& k, cplx v) {
        auto i = grid_.index_of(k);
        if (!i) throw std::out_of_range("wavevector not representable on grid " + grid_.describe());
        c_[*i] = v;
    }
    /// Sets k to v and -k to conj(v).
    void set_hermitian(const Wavevector& k, cplx v) {
        set(k, v);
        set({-k[0], -k[1], -k[2]}, std::conj(v));
    }

    std::vector<cplx>&& release() && { return std::move(c_); }

private:
    FourierGrid grid_;
    std::vector<cplx> c_;
};

/// Three-component velocity field. A component whose storage is empty is
/// identically zero; mutable access allocates it on demand.
class SpectralVectorField {
public:
    SpectralVectorField() = default;
    explicit SpectralVectorField(FourierGrid g, bool mean_zero = true) : grid_(g), mean_zero_(mean_zero) {}

    const FourierGrid& grid() const { return grid_; }
    bool mean_zero() const { return mean_zero_; }
    void set_mean_zero(bool v) { mean_zero_ = v; }

    bool has_component(int c) const { return !data_[c].empty(); }
    std::span<const cplx> component(int c) const { return data_[c]; }
    std::span<cplx> component_mut(int c) {
        if (data_[c].empty()) data_[c].assign(grid_.size(), cplx{});
        return data_[c];
    }
    void clear_component(int c) { data_[c].clear(); data_[c].shrink_to_fit(); }
    void set_component(int c, std::vector<cplx> v) {
        if (!v.empty() && v.size() != grid_.size())
            throw std::invalid_argument("component size does not match grid " + grid_.describe());
        data_[c] = std::move(v);
    }

    SpectralScalarField scalar(int c) const {
        if (!has_component(c)) return SpectralScalarField(grid_);
        return SpectralScalarField(grid_, data_[c]);
    }
    void set_scalar(int c, SpectralScalarField s) {
        if (!(s.grid() == grid_)) throw std::invalid_argument("scalar grid mismatch");
        data_[c] = std::move(s).release();
    }

    cplx at(int c, const Wavevector& k) const {
        if (!has_component(c)) return {};
        auto i = grid_.index_of(k);
        return i ? data_[c][*i] : cplx{};
    }
    void set(int c, const Wavevector& k, cplx v) {
        auto i = grid_.index_of(k);
        if (!i) throw std::out_of_range("wavevector not representable on grid " + grid_.describe());
        component_mut(c)[*i] = v;
    }
    void set_hermitian(int c, const Wavevector& k, cplx v) {
        set(c, k, v);
        set(c, {-k[0], -k[1], -k[2]}, std::conj(v));
    }

    SpectralVectorField& operator+=(const SpectralVectorField& o) { return axpy(1.0, o); }
    SpectralVectorField& operator-=(const SpectralVectorField& o) { return axpy(-1.0, o); }
    SpectralVectorField& operator*=(double s) {
        for (auto& d : data_)
            for (auto& v : d) v *= s;
        return *this;
    }
    /// this += s * o
    SpectralVectorField& axpy(double s, const SpectralVectorField& o) {
        if (!(o.grid_ == grid_)) throw std::invalid_argument("grid mismatch in vector field arithmetic");
        for (int c = 0; c < 3; ++c) {
            if (!o.has_component(c)) continue;
            auto dst = component_mut(c);
            auto src = o.component(c);
            for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += s * src[i];
        }
        mean_zero_ = mean_zero_ && o.mean_zero_;
        return *this;
    }

    friend SpectralVectorField operator+(SpectralVectorField a, const SpectralVectorField& b) { return a += b; }
    friend SpectralVectorField operator-(SpectralVectorField a, const SpectralVectorField& b) { return a -= b; }
    friend SpectralVectorField operator*(double s, SpectralVectorField a) { return a *= s; }

    /// Coefficient ℓ² norm; equals the normalized-measure L² norm by Parseval.
    double l2() const {
        double s = 0.0;
        for (const auto& d : data_)
            for (const auto& v : d) s += std::norm(v);
        return std::sqrt(s);
    }

    /// Largest |û(k) - conj(û(-k))| over all components.
    double hermitian_defect() const {
        double worst = 0.0;
        const auto& d = grid_.dims();
        for (int c = 0; c < 3; ++c) {
            if (!has_component(c)) continue;
            const auto& v = data_[c];
            for (int i1 = 0; i1 < d[0]; ++i1)
                for (int i2 = 0; i2 < d[1]; ++i2)
                    for (int i3 = 0; i3 < d[2]; ++i3) {
                        const auto i = grid_.index(i1, i2, i3);
                        const auto j = grid_.conjugate_index(i1, i2, i3);
                        worst = std::max(worst, std::abs(v[i] - std::conj(v[j])));
                    }
        }
        return worst;
    }

    bool all_finite() const {
        for (const auto& d : data_)
            for (const auto& v : d)
                if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }

    /// Throws std::invalid_argument when a type invariant is violated.
    void validate(double rel_tol = 1e-12) const {
        if (!all_finite()) throw std::invalid_argument("field has non-finite amplitudes");
        const double scale = std::max(l2(), 1e-300);
        const double h = hermitian_defect();
        if (h > rel_tol * scale)
            throw std::invalid_argument("field violates Hermitian symmetry (defect " + std::to_string(h) + ")");
        if (mean_zero_) {
            for (int c = 0; c < 3; ++c)
                if (std::abs(at(c, {0, 0, 0})) > rel_tol * scale)
                    throw std::invalid_argument("field flagged mean-zero has a nonzero zero mode");
        }
    }

    friend bool operator==(const SpectralVectorField& a, const SpectralVectorField& b) {
        if (!(a.grid_ == b.grid_) || a.mean_zero_ != b.mean_zero_) return false;
        for (int c = 0; c < 3; ++c) {
            if (a.has_component(c) && b.has_component(c)) {
                if (a.data_[c] != b.data_[c]) return false;
            } else {
                const auto& nz = a.has_component(c) ? a.data_[c] : b.data_[c];
                for (const auto& v : nz)
                    if (v != cplx{}) return false;
            }
        }
        return true;
    }

private:
    FourierGrid grid_;
    bool mean_zero_ = true;
    std::array<std::vector<cplx>, 3> data_;
};

/// Per-axis largest |kₐ| carrying a coefficient with modulus above `floor`.
inline std::array<int, 3> content_max_modes(const FourierGrid& g, std::span<const cplx> c, double floor = 0.0) {
    std::array<int, 3> m{0, 0, 0};
    if (c.empty()) return m;
    for_each_mode(g, [&](std::size_t i, const Wavevector& k, bool) {
        if (std::abs(c[i]) > floor)
            for (int a = 0; a < 3; ++a) m[a] = std::max(m[a], std::abs(k[a]));
    });
    return m;
}

inline std::array<int, 3> content_max_modes(const SpectralVectorField& f, double floor = 0.0) {
    std::array<int, 3> m{0, 0, 0};
    for (int c = 0; c < 3; ++c) {
        auto mc = content_max_modes(f.grid(), f.component(c), floor);
        for (int a = 0; a < 3; ++a) m[a] = std::max(m[a], mc[a]);
    }
    return m;
}

/// Copies the representable content of `f` onto grid `g`, dropping modes that
/// do not fit. Use `require_fit` to turn a loss of nonzero content into an error.
inline SpectralVectorField regrid(const SpectralVectorField& f, const FourierGrid& g, bool require_fit = true) {
    SpectralVectorField out(g, f.mean_zero());
    if (f.grid() == g) return f;
    for (int c = 0; c < 3; ++c) {
        if (!f.has_component(c)) continue;
        auto src = f.component(c);
        auto dst = out.component_mut(c);
        for_each_mode(f.grid(), [&](std::size_t i, const Wavevector& k, bool nyq) {
            if (nyq || src[i] == cplx{}) return;
            auto j = g.index_of(k);
            if (j) dst[*j] = src[i];
            else if (require_fit)
                throw std::invalid_argument("field content does not fit grid " + g.describe());
        });
    }
    return out;
}

}  // namespace orthoflow::spectral
