#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "recon/fft.hpp"
#include "recon/grid.hpp"
#include "recon/operators.hpp"

namespace recon {

enum class Apodization { none, cosine };

/// Ram-Lak ramp |nu| sampled on a zero-padded detector row. Frequencies are
/// in cycles per unit length, so the 1/(2 pi) of the inverse transform is
/// already folded in. DC is exactly zero.
struct RampFilter {
    std::size_t n_taps = 0; ///< padded row length, >= 2 * n_detectors
    double detector_pitch = 1.0;
    Apodization apodization = Apodization::none;
    std::vector<double> response;

    static RampFilter make(std::size_t n_detectors, double detector_pitch,
                           Apodization apodization = Apodization::none) {
        require(n_detectors >= 1, "RampFilter: need at least one detector");
        require(detector_pitch > 0.0, "RampFilter: detector pitch must be positive");
        RampFilter f{detail::next_pow2(2 * n_detectors), detector_pitch, apodization, {}};
        const std::size_t n = f.n_taps;
        f.response.resize(n);
        const double nyquist = 0.5 / detector_pitch;
        for (std::size_t k = 0; k < n; ++k) {
            const double nu = static_cast<double>(std::min(k, n - k)) /
                              (static_cast<double>(n) * detector_pitch);
            double weight = nu;
            if (apodization == Apodization::cosine) weight *= std::cos(0.5 * std::numbers::pi * nu / nyquist);
            f.response[k] = std::max(weight, 0.0);
        }
        return f;
    }
};

/// Filters one projection: zero-pad, multiply the spectrum by the ramp,
/// invert, crop back to the detector count.
inline std::vector<double> ramp_filter_row(std::span<const double> row, const RampFilter& filter) {
    require(filter.n_taps >= row.size(), "ramp_filter_row: filter shorter than projection");
    std::vector<Complex> padded(filter.n_taps, Complex{});
    std::copy(row.begin(), row.end(), padded.begin());
    std::vector<Complex> spec = dft1(padded);
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= filter.response[k];
    const std::vector<Complex> back = idft1(spec);
    std::vector<double> out(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) out[i] = back[i].real();
    return out;
}

/// Filtered back projection onto a (width x height) grid with the given
/// pixel pitch. Back projection interpolates the filtered rows linearly and
/// the angular integral is the sum times pi / n_angles.
inline GridImage fbp(const Sinogram& sino, const RampFilter& filter, std::size_t width,
                     std::size_t height, double pitch = 1.0) {
    require(sino.n_angles >= 1 && sino.n_detectors >= 1 && !sino.data.empty(),
            "fbp: empty sinogram");
    sino.validate();
    require(filter.n_taps >= sino.n_detectors, "fbp: filter too short for the detector count");
    GridImage out(width, height, pitch);
    const double cx = 0.5 * static_cast<double>(width - 1);
    const double cy = 0.5 * static_cast<double>(height - 1);
    const double center = 0.5 * static_cast<double>(sino.n_detectors - 1);
    const double last = static_cast<double>(sino.n_detectors - 1);
    for (std::size_t a = 0; a < sino.n_angles; ++a) {
        const std::vector<double> q = ramp_filter_row(sino.row(a), filter);
        const double c = std::cos(sino.angles[a]);
        const double s = std::sin(sino.angles[a]);
        for (std::size_t row = 0; row < height; ++row) {
            const double y = (cy - static_cast<double>(row)) * pitch;
            for (std::size_t col = 0; col < width; ++col) {
                const double x = (static_cast<double>(col) - cx) * pitch;
                const double u = (x * c + y * s) / sino.detector_pitch + center;
                if (!(u >= 0.0 && u <= last)) continue;
                const auto j = static_cast<std::size_t>(u);
                const std::size_t j1 = std::min(j + 1, sino.n_detectors - 1);
                const double frac = u - static_cast<double>(j);
                out(col, row) += (1.0 - frac) * q[j] + frac * q[j1];
            }
        }
    }
    const double dtheta = std::numbers::pi / static_cast<double>(sino.n_angles);
    for (double& v : out.data()) v *= dtheta;
    return out;
}

/// Linear MMSE (Wiener) estimate for g = h (*) f + n with circular
/// convolution, white noise of standard deviation `sigma`, and a stationary
/// Gaussian prior whose covariance has eigenvalues `prior_spectrum` in the
/// DFT basis (unshifted frequency layout). Per bin:
///   F = C conj(H) G / (|H|^2 C + sigma^2)
inline GridImage wiener_deconvolve(const GridImage& g, const GridImage& kernel, double sigma,
                                   const GridImage& prior_spectrum) {
    require(g.same_shape(kernel) && g.same_shape(prior_spectrum),
            "wiener_deconvolve: kernel and prior must be on the measurement grid");
    require(sigma >= 0.0 && std::isfinite(sigma), "wiener_deconvolve: sigma must be >= 0");
    for (double c : prior_spectrum.data())
        require(c > 0.0 && std::isfinite(c), "wiener_deconvolve: prior spectrum must be positive");
    const ComplexGrid hs = dft2(kernel);
    ComplexGrid gs = dft2(g);
    const double noise_var = sigma * sigma;
    double peak = 0.0;
    for (const Complex& v : hs.data()) peak = std::max(peak, std::abs(v));
    for (std::size_t i = 0; i < gs.size(); ++i) {
        const Complex h = hs.data()[i];
        const double c = prior_spectrum.data()[i];
        const double denom = std::norm(h) * c + noise_var;
        if (noise_var == 0.0 && std::abs(h) <= 1e-14 * peak)
            throw NumericalError("wiener_deconvolve: kernel spectrum vanishes at bin " +
                                 std::to_string(i) + " with sigma = 0 (ill-posed inverse)");
        gs.data()[i] = c * std::conj(h) * gs.data()[i] / denom;
    }
    return idft2(gs).real_part(g.pitch());
}

/// Scatters masked k-space samples (interleaved complex, one per kept index)
/// into a zero spectrum and returns the real part of its inverse DFT.
inline GridImage zerofill_ifft(std::span<const double> kspace, const Mask& mask) {
    mask.validate();
    require(kspace.size() == 2 * mask.kept(), "zerofill_ifft: expected one complex value per kept index");
    ComplexGrid spec(mask.width, mask.height);
    const auto values = as_complex(kspace);
    for (std::size_t m = 0; m < mask.kept(); ++m) spec.data()[mask.indices[m]] = values[m];
    return idft2(spec).real_part();
}

} // namespace recon
