#pragma once

#include "common.hpp"

namespace tubepw {

// In-place iterative radix-2 FFT, forward kernel e^{-2*pi*i*m*j/M}.
// Sizes are powers of two by QuadSpec construction; at desk scale (M <= 2^20)
// this needs no plan machinery and is bit-reproducible across runs.
inline void fft_radix2(cvec& a, bool inverse = false) {
    const std::size_t n = a.size();
    require(is_pow2(n), errc::bad_parameters, "fft size must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double ang = (inverse ? two_pi : -two_pi) / static_cast<double>(len);
        cplx wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                cplx u = a[i + k];
                cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse)
        for (cplx& x : a) x /= static_cast<double>(n);
}

// n-dimensional tensor FFT on a row-major grid with extents dims (each a power of two).
inline void fft_nd(cvec& a, const std::vector<std::size_t>& dims, bool inverse = false) {
    std::size_t total = 1;
    for (std::size_t d : dims) total *= d;
    require(a.size() == total, errc::bad_parameters, "fft_nd: size mismatch");
    std::size_t stride = 1;
    for (std::size_t axis = dims.size(); axis-- > 0;) {
        std::size_t m = dims[axis];
        std::size_t outer = total / (m * stride);
        cvec line(m);
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t s = 0; s < stride; ++s) {
                std::size_t base = o * m * stride + s;
                for (std::size_t k = 0; k < m; ++k) line[k] = a[base + k * stride];
                fft_radix2(line, inverse);
                for (std::size_t k = 0; k < m; ++k) a[base + k * stride] = line[k];
            }
        }
        stride *= m;
    }
}

}  // namespace tubepw
