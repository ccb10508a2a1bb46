/// @file snapshot.hpp
/// @brief ONSF binary snapshots of spectral vector fields.
///
/// Layout, all little-endian:
///   "ONSF" | version u8 = 1 | dims 3×u32 | component count u8 (= 3) | mean-zero u8
///   | per component, (re, im) f64 pairs in storage order (k₁ slowest)
///   | FNV-1a 64 over every preceding byte.
/// A component stored as all zeros loads as an empty (zero) component.
#pragma once

#include <bit>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "orthoflow/spectral/field.hpp"

namespace orthoflow::harness {

using spectral::FourierGrid;
using spectral::SpectralVectorField;

inline constexpr std::uint8_t kSnapshotVersion = 1;

inline std::uint64_t fnv1a64(const std::uint8_t* p, std::size_t n) {
    std::uint64_t h = 14695981039346656037ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

namespace detail {

inline void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint64_t get_le(const std::uint8_t* p, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= std::uint64_t(p[i]) << (8 * i);
    return v;
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_snapshot(const SpectralVectorField& f) {
    const auto& d = f.grid().dims();
    const std::size_t n = f.grid().size();
    std::vector<std::uint8_t> out;
    out.reserve(4 + 1 + 12 + 2 + 3 * n * 16 + 8);
    for (char c : {'O', 'N', 'S', 'F'}) out.push_back(static_cast<std::uint8_t>(c));
    out.push_back(kSnapshotVersion);
    for (int a = 0; a < 3; ++a) detail::put_le(out, static_cast<std::uint32_t>(d[a]), 4);
    out.push_back(3);
    out.push_back(f.mean_zero() ? 1 : 0);
    for (int c = 0; c < 3; ++c) {
        const auto v = f.component(c);
        for (std::size_t i = 0; i < n; ++i) {
            const cplx z = v.empty() ? cplx{} : v[i];
            detail::put_le(out, std::bit_cast<std::uint64_t>(z.real()), 8);
            detail::put_le(out, std::bit_cast<std::uint64_t>(z.imag()), 8);
        }
    }
    detail::put_le(out, fnv1a64(out.data(), out.size()), 8);
    return out;
}

inline SpectralVectorField decode_snapshot(const std::vector<std::uint8_t>& b) {
    constexpr std::size_t header = 4 + 1 + 12 + 2;
    if (b.size() < header + 8 || b[0] != 'O' || b[1] != 'N' || b[2] != 'S' || b[3] != 'F')
        throw std::runtime_error("snapshot: not an ONSF file");
    if (b[4] != kSnapshotVersion) throw std::runtime_error("snapshot: unsupported version " + std::to_string(b[4]));
    const std::uint64_t stored = detail::get_le(b.data() + b.size() - 8, 8);
    if (stored != fnv1a64(b.data(), b.size() - 8)) throw std::runtime_error("snapshot: checksum mismatch");
    std::array<int, 3> dims{};
    for (int a = 0; a < 3; ++a) {
        const auto v = detail::get_le(b.data() + 5 + 4 * a, 4);
        if (v > 1u << 20) throw std::runtime_error("snapshot: implausible grid dimension");
        dims[a] = static_cast<int>(v);
    }
    if (b[17] != 3) throw std::runtime_error("snapshot: expected 3 components, found " + std::to_string(b[17]));
    if (b[18] > 1) throw std::runtime_error("snapshot: bad mean-zero flag");
    FourierGrid g;
    try {
        g = spectral::make_grid(dims);
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("snapshot: ") + e.what());
    }
    const std::size_t n = g.size();
    if (b.size() != header + 3 * n * 16 + 8) throw std::runtime_error("snapshot: truncated or oversized payload");
    SpectralVectorField f(g, b[18] == 1);
    const std::uint8_t* p = b.data() + header;
    for (int c = 0; c < 3; ++c) {
        std::vector<cplx> v(n);
        bool any = false;
        for (std::size_t i = 0; i < n; ++i, p += 16) {
            v[i] = {std::bit_cast<double>(detail::get_le(p, 8)), std::bit_cast<double>(detail::get_le(p + 8, 8))};
            any = any || v[i] != cplx{};
        }
        if (any) f.set_component(c, std::move(v));
    }
    try {
        f.validate();
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("snapshot: ") + e.what());
    }
    return f;
}

inline void save_snapshot(const std::string& path, const SpectralVectorField& f) {
    const auto bytes = encode_snapshot(f);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("snapshot: cannot open " + path + " for writing");
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw std::runtime_error("snapshot: write failed for " + path);
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(is), {});
}

inline SpectralVectorField load_snapshot(const std::string& path) {
    try {
        return decode_snapshot(read_file_bytes(path));
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

}  // namespace orthoflow::harness
