#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "recon/fft.hpp"
#include "recon/grid.hpp"
#include "recon/operators.hpp"

namespace recon {

/// Compares the 1D DFT of the projection at angle `theta` with the radial
/// line of the image's 2D DFT through the origin at the same angle.
///
/// Both spectra are taken on grids zero-padded by `oversample` and
/// phase-referenced to the physical rotation center. The polar line is read
/// off the centered 2D spectrum by bilinear interpolation of its real and
/// imaginary parts (a discrete polar change of variables). Returns the
/// relative l2 error over |k| <= band * (P/2), where P is the padded length.
inline double fourier_slice_check(const GridImage& img, double theta, double band = 0.6,
                                  std::size_t oversample = 4) {
    require(img.width() == img.height() && img.width() >= 2, "fourier_slice_check: image must be square");
    require(band > 0.0 && band <= 1.0, "fourier_slice_check: band must be in (0, 1]");
    require(oversample >= 1, "fourier_slice_check: oversample must be >= 1");
    const std::size_t n = img.width();
    const std::size_t padded = n * oversample;
    const double pitch = img.pitch();
    const double center = 0.5 * static_cast<double>(n - 1);
    const double two_pi = 2.0 * std::numbers::pi;

    // 2D spectrum, centered, referenced to the physical origin.
    const ComplexGrid spec = dft2(zero_pad(img, padded, padded));
    GridImage re(padded, padded);
    GridImage im(padded, padded);
    const auto half = static_cast<long>(padded / 2);
    for (std::size_t iy = 0; iy < padded; ++iy) {
        const long l = static_cast<long>(iy) - half;
        const std::size_t sy = static_cast<std::size_t>((l + static_cast<long>(padded)) % static_cast<long>(padded));
        for (std::size_t ix = 0; ix < padded; ++ix) {
            const long k = static_cast<long>(ix) - half;
            const std::size_t sx = static_cast<std::size_t>((k + static_cast<long>(padded)) % static_cast<long>(padded));
            const double phase = two_pi * (static_cast<double>(k) + static_cast<double>(l)) * center /
                                 static_cast<double>(padded);
            const Complex v = spec(sx, sy) * std::polar(1.0, phase);
            re(ix, iy) = v.real();
            im(ix, iy) = v.imag();
        }
    }

    // 1D spectrum of the projection, same referencing.
    const std::vector<double> proj = radon_projection(img, theta, n, pitch);
    std::vector<Complex> row(padded, Complex{});
    std::copy(proj.begin(), proj.end(), row.begin());
    const std::vector<Complex> pspec = dft1(row);

    const double limit = band * 0.5 * static_cast<double>(padded);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    double err = 0.0;
    double ref = 0.0;
    for (long k = -half; k < half; ++k) {
        if (std::abs(static_cast<double>(k)) > limit) continue;
        const std::size_t idx = static_cast<std::size_t>((k + static_cast<long>(padded)) % static_cast<long>(padded));
        const Complex lhs = pspec[idx] * std::polar(1.0, two_pi * static_cast<double>(k) * center /
                                                             static_cast<double>(padded));
        // +y is up, so the row frequency runs opposite to the y frequency.
        const double fx = static_cast<double>(k) * c + static_cast<double>(half);
        const double fy = -static_cast<double>(k) * s + static_cast<double>(half);
        const Complex rhs = pitch * Complex(bilinear_sample(re, fx, fy), bilinear_sample(im, fx, fy));
        err += std::norm(lhs - rhs);
        ref += std::norm(rhs);
    }
    return ref == 0.0 ? 0.0 : std::sqrt(err / ref);
}

} // namespace recon
