#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "recon/grid.hpp"

namespace recon {

namespace detail {

// One orthonormal Haar step on `n` samples with the given stride:
// averages (a+b)/sqrt2 to the first half, details (a-b)/sqrt2 to the second.
inline void haar_step(double* line, std::size_t n, std::size_t stride, bool inverse,
                      std::vector<double>& scratch) {
    const std::size_t half = n / 2;
    scratch.resize(n);
    if (!inverse) {
        for (std::size_t i = 0; i < half; ++i) {
            const double a = line[(2 * i) * stride];
            const double b = line[(2 * i + 1) * stride];
            scratch[i] = (a + b) * std::numbers::sqrt2 * 0.5;
            scratch[half + i] = (a - b) * std::numbers::sqrt2 * 0.5;
        }
    } else {
        for (std::size_t i = 0; i < half; ++i) {
            const double s = line[i * stride];
            const double d = line[(half + i) * stride];
            scratch[2 * i] = (s + d) * std::numbers::sqrt2 * 0.5;
            scratch[2 * i + 1] = (s - d) * std::numbers::sqrt2 * 0.5;
        }
    }
    for (std::size_t i = 0; i < n; ++i) line[i * stride] = scratch[i];
}

inline const std::array<double, 64>& dct8_matrix() {
    static const std::array<double, 64> m = [] {
        std::array<double, 64> c{};
        for (std::size_t k = 0; k < 8; ++k)
            for (std::size_t n = 0; n < 8; ++n) {
                const double alpha = k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
                c[k * 8 + n] = alpha * std::cos(std::numbers::pi * static_cast<double>((2 * n + 1) * k) / 16.0);
            }
        return c;
    }();
    return m;
}

} // namespace detail

/// Orthonormal 2D Haar wavelet transform with `levels` decomposition levels.
/// Each level transforms rows then columns of the current approximation
/// band (top-left quadrant).
inline GridImage transform_haar(const GridImage& img, int levels, bool inverse = false) {
    require(levels >= 0, "transform_haar: levels must be >= 0");
    const std::size_t factor = std::size_t{1} << levels;
    require(img.width() % factor == 0 && img.height() % factor == 0,
            "transform_haar: dimensions must be divisible by 2^levels");
    GridImage out = img;
    double* base = out.data().data();
    const std::size_t w = img.width();
    std::vector<double> scratch;
    auto level_pass = [&](int level) {
        const std::size_t lw = img.width() >> level;
        const std::size_t lh = img.height() >> level;
        if (!inverse) {
            for (std::size_t y = 0; y < lh; ++y) detail::haar_step(base + y * w, lw, 1, false, scratch);
            for (std::size_t x = 0; x < lw; ++x) detail::haar_step(base + x, lh, w, false, scratch);
        } else {
            for (std::size_t x = 0; x < lw; ++x) detail::haar_step(base + x, lh, w, true, scratch);
            for (std::size_t y = 0; y < lh; ++y) detail::haar_step(base + y * w, lw, 1, true, scratch);
        }
    };
    if (!inverse)
        for (int l = 0; l < levels; ++l) level_pass(l);
    else
        for (int l = levels - 1; l >= 0; --l) level_pass(l);
    return out;
}

/// Orthonormal DCT-II on independent 8x8 blocks (inverse: DCT-III).
inline GridImage transform_dct8(const GridImage& img, bool inverse = false) {
    require(img.width() % 8 == 0 && img.height() % 8 == 0,
            "transform_dct8: dimensions must be divisible by 8");
    const auto& c = detail::dct8_matrix();
    GridImage out(img.width(), img.height(), img.pitch());
    std::array<double, 64> block{};
    std::array<double, 64> tmp{};
    for (std::size_t by = 0; by < img.height(); by += 8)
        for (std::size_t bx = 0; bx < img.width(); bx += 8) {
            for (std::size_t y = 0; y < 8; ++y)
                for (std::size_t x = 0; x < 8; ++x) block[y * 8 + x] = img(bx + x, by + y);
            // forward: C * B * C^T; inverse: C^T * B * C
            for (std::size_t i = 0; i < 8; ++i)
                for (std::size_t j = 0; j < 8; ++j) {
                    double acc = 0.0;
                    for (std::size_t k = 0; k < 8; ++k)
                        acc += (inverse ? c[k * 8 + i] : c[i * 8 + k]) * block[k * 8 + j];
                    tmp[i * 8 + j] = acc;
                }
            for (std::size_t i = 0; i < 8; ++i)
                for (std::size_t j = 0; j < 8; ++j) {
                    double acc = 0.0;
                    for (std::size_t k = 0; k < 8; ++k)
                        acc += tmp[i * 8 + k] * (inverse ? c[k * 8 + j] : c[j * 8 + k]);
                    out(bx + j, by + i) = acc;
                }
        }
    return out;
}

} // namespace recon
