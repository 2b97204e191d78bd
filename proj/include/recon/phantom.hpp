#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "recon/grid.hpp"
#include "recon/operators.hpp"

namespace recon {

struct Ellipse {
    double x0 = 0.0;       ///< center, phantom units ([-1, 1] spans the image)
    double y0 = 0.0;
    double a = 1.0;        ///< semi-axis along the ellipse's own x axis
    double b = 1.0;        ///< semi-axis along the ellipse's own y axis
    double phi = 0.0;      ///< counter-clockwise rotation, radians
    double intensity = 1.0;

    bool contains(double x, double y) const {
        const double dx = x - x0;
        const double dy = y - y0;
        const double c = std::cos(phi);
        const double s = std::sin(phi);
        const double u = (dx * c + dy * s) / a;
        const double v = (-dx * s + dy * c) / b;
        return u * u + v * v <= 1.0;
    }

    /// Length of the chord cut by the line {p : <p, (cos t, sin t)> = s}.
    double chord(double theta, double s) const {
        const double shifted = s - (x0 * std::cos(theta) + y0 * std::sin(theta));
        const double local = theta - phi;
        const double alpha2 = a * a * std::cos(local) * std::cos(local) +
                              b * b * std::sin(local) * std::sin(local);
        const double rest = alpha2 - shifted * shifted;
        if (rest <= 0.0) return 0.0;
        return 2.0 * a * b * std::sqrt(rest) / alpha2;
    }
};

struct EllipsePhantom {
    std::vector<Ellipse> ellipses;

    double value_at(double x, double y) const {
        double v = 0.0;
        for (const Ellipse& e : ellipses)
            if (e.contains(x, y)) v += e.intensity;
        return v;
    }

    void validate() const {
        for (const Ellipse& e : ellipses)
            require(e.a > 0.0 && e.b > 0.0, "EllipsePhantom: semi-axes must be positive");
    }
};

/// The original 10-ellipse Shepp-Logan head (Shepp & Logan, IEEE Trans.
/// Nucl. Sci. 21, 1974; table as reproduced in Kak & Slaney, "Principles of
/// Computerized Tomographic Imaging", 1988). Intensities add, giving values
/// in [0, 2].
inline EllipsePhantom shepp_logan_phantom() {
    constexpr double deg = std::numbers::pi / 180.0;
    return {{
        {0.0, 0.0, 0.69, 0.92, 0.0, 2.0},
        {0.0, -0.0184, 0.6624, 0.874, 0.0, -0.98},
        {0.22, 0.0, 0.11, 0.31, -18.0 * deg, -0.02},
        {-0.22, 0.0, 0.16, 0.41, 18.0 * deg, -0.02},
        {0.0, 0.35, 0.21, 0.25, 0.0, 0.01},
        {0.0, 0.1, 0.046, 0.046, 0.0, 0.01},
        {0.0, -0.1, 0.046, 0.046, 0.0, 0.01},
        {-0.08, -0.605, 0.046, 0.023, 0.0, 0.01},
        {0.0, -0.605, 0.023, 0.023, 0.0, 0.01},
        {0.06, -0.605, 0.023, 0.046, 0.0, 0.01},
    }};
}

/// Physical coordinates of pixel (col, row) on a size x size grid spanning
/// [-1, 1]^2 with +y up.
inline double pixel_x(std::size_t col, std::size_t size) {
    return (static_cast<double>(col) - 0.5 * static_cast<double>(size - 1)) * 2.0 / static_cast<double>(size);
}
inline double pixel_y(std::size_t row, std::size_t size) {
    return (0.5 * static_cast<double>(size - 1) - static_cast<double>(row)) * 2.0 / static_cast<double>(size);
}

/// Renders the phantom on a size x size grid spanning [-1, 1]^2 (pitch
/// 2 / size). Each pixel is the mean of a supersample x supersample grid of
/// point evaluations inside it, i.e. an approximate pixel-area average;
/// supersample = 1 gives point sampling at pixel centers.
inline GridImage render(const EllipsePhantom& phantom, std::size_t size, std::size_t supersample = 4) {
    phantom.validate();
    require(size >= 1, "render: size must be positive");
    require(supersample >= 1, "render: supersample must be positive");
    const double pitch = 2.0 / static_cast<double>(size);
    const double inv = 1.0 / static_cast<double>(supersample * supersample);
    std::vector<double> offsets(supersample);
    for (std::size_t i = 0; i < supersample; ++i)
        offsets[i] = pitch * ((static_cast<double>(i) + 0.5) / static_cast<double>(supersample) - 0.5);
    GridImage img(size, size, pitch);
    for (std::size_t row = 0; row < size; ++row)
        for (std::size_t col = 0; col < size; ++col) {
            const double x = pixel_x(col, size);
            const double y = pixel_y(row, size);
            double sum = 0.0;
            for (double dy : offsets)
                for (double dx : offsets) sum += phantom.value_at(x + dx, y - dy);
            img(col, row) = sum * inv;
        }
    return img;
}

inline GridImage shepp_logan(std::size_t size) {
    require(size >= 32, "shepp_logan: size must be at least 32");
    return render(shepp_logan_phantom(), size);
}

/// Exact line integrals of the phantom for a parallel-beam geometry, in the
/// same physical units as op_radon on a rendered image.
inline Sinogram analytic_sinogram(const EllipsePhantom& phantom, const RadonGeometry& geom) {
    phantom.validate();
    geom.validate();
    std::vector<double> values(geom.n_angles * geom.n_detectors, 0.0);
    const std::vector<double> angles = geom.angles();
    for (std::size_t a = 0; a < geom.n_angles; ++a)
        for (std::size_t d = 0; d < geom.n_detectors; ++d) {
            double sum = 0.0;
            for (const Ellipse& e : phantom.ellipses) sum += e.intensity * e.chord(angles[a], geom.offset(d));
            values[a * geom.n_detectors + d] = sum;
        }
    return Sinogram::from(geom, std::move(values));
}

/// Incoherent Airy pattern (2 J1(r) / r)^2 on a size x size grid centered on
/// pixel (size/2, size/2), normalized to unit sum. The radius is scaled so
/// that the optical transfer function (autocorrelation of a disk of radius
/// cutoff/2) first vanishes at `cutoff` cycles per pixel. J1 comes from
/// std::cyl_bessel_j.
inline GridImage airy_psf(std::size_t size, double cutoff) {
    require(size >= 1, "airy_psf: size must be positive");
    require(cutoff > 0.0 && cutoff <= 0.5, "airy_psf: cutoff must be in (0, 0.5]");
    GridImage out(size, size);
    const double c = static_cast<double>(size / 2);
    const double scale = std::numbers::pi * cutoff;
    double total = 0.0;
    for (std::size_t y = 0; y < size; ++y)
        for (std::size_t x = 0; x < size; ++x) {
            const double r = scale * std::hypot(static_cast<double>(x) - c, static_cast<double>(y) - c);
            const double amp = r < 1e-8 ? 1.0 - r * r / 8.0 : 2.0 * std::cyl_bessel_j(1.0, r) / r;
            out(x, y) = amp * amp;
            total += out(x, y);
        }
    for (double& v : out.data()) v /= total;
    return out;
}

/// Normalized 2D Gaussian-profile kernel of odd side `size`.
inline GridImage gaussian_kernel(std::size_t size, double sigma) {
    require(size % 2 == 1, "gaussian_kernel: size must be odd");
    require(sigma > 0.0, "gaussian_kernel: sigma must be positive");
    GridImage k(size, size);
    const double c = static_cast<double>(size / 2);
    double total = 0.0;
    for (std::size_t y = 0; y < size; ++y)
        for (std::size_t x = 0; x < size; ++x) {
            const double dx = static_cast<double>(x) - c;
            const double dy = static_cast<double>(y) - c;
            k(x, y) = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            total += k(x, y);
        }
    for (double& v : k.data()) v /= total;
    return k;
}

inline GridImage box_kernel(std::size_t size) {
    require(size >= 1, "box_kernel: size must be positive");
    return GridImage(size, size, std::vector<double>(size * size, 1.0 / static_cast<double>(size * size)));
}

} // namespace recon
