#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "recon/fft.hpp"
#include "recon/grid.hpp"
#include "recon/linear_map.hpp"

namespace recon {

// ---------------------------------------------------------------------------
// Sampling

/// On-grid sampling locations, kept in increasing row-major index order.
struct Mask {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::size_t> indices;

    std::size_t kept() const noexcept { return indices.size(); }

    static Mask full(std::size_t width, std::size_t height) {
        Mask m{width, height, std::vector<std::size_t>(width * height)};
        for (std::size_t i = 0; i < m.indices.size(); ++i) m.indices[i] = i;
        return m;
    }

    static Mask from_keep(std::size_t width, std::size_t height, const std::vector<bool>& keep) {
        require(keep.size() == width * height, "Mask: keep raster must cover the grid");
        Mask m{width, height, {}};
        for (std::size_t i = 0; i < keep.size(); ++i)
            if (keep[i]) m.indices.push_back(i);
        m.validate();
        return m;
    }

    /// Keeps round(fraction * width * height) distinct pixels chosen by a
    /// partial Fisher-Yates shuffle driven by `seed`.
    static Mask random(std::size_t width, std::size_t height, double fraction, Seed seed) {
        require(fraction > 0.0 && fraction <= 1.0, "Mask::random: fraction must be in (0, 1]");
        const std::size_t n = width * height;
        const auto m = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        SplitMix64 rng(seed);
        for (std::size_t i = 0; i < m; ++i) std::swap(perm[i], perm[i + rng.below(n - i)]);
        Mask mask{width, height, std::vector<std::size_t>(perm.begin(), perm.begin() + m)};
        std::sort(mask.indices.begin(), mask.indices.end());
        return mask;
    }

    void validate() const {
        require(!indices.empty(), "Mask: must keep at least one entry");
        for (std::size_t i = 0; i < indices.size(); ++i) {
            require(indices[i] < width * height, "Mask: index out of range");
            require(i == 0 || indices[i] > indices[i - 1], "Mask: indices must be unique and sorted");
        }
    }
};

/// Gathers the kept entries of a (width x height) grid into a length-M
/// vector; the adjoint scatters them back with zeros elsewhere.
inline LinearMap op_mask(const Mask& mask, Field field = Field::real) {
    mask.validate();
    const std::size_t stride = field == Field::complex ? 2 : 1;
    auto gather = [idx = mask.indices, stride](std::span<const double> in, std::span<double> out) {
        for (std::size_t m = 0; m < idx.size(); ++m)
            for (std::size_t c = 0; c < stride; ++c) out[m * stride + c] = in[idx[m] * stride + c];
    };
    auto scatter = [idx = mask.indices, stride](std::span<const double> in, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t m = 0; m < idx.size(); ++m)
            for (std::size_t c = 0; c < stride; ++c) out[idx[m] * stride + c] = in[m * stride + c];
    };
    return {"mask", Space{mask.width, mask.height, 1, field}, Space{mask.kept(), 1, 1, field},
            gather, scatter};
}

// ---------------------------------------------------------------------------
// Pointwise multiplication

inline LinearMap op_multiply(const GridImage& h) {
    require(detail::all_finite(h.data()), "op_multiply: multiplier must be finite");
    auto mul = [w = h.values()](std::span<const double> in, std::span<double> out) {
        for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] * in[i];
    };
    const Space space = real_space(h.width(), h.height());
    return {"multiply", space, space, mul, mul};
}

/// Multiplication by a complex raster. A real domain yields a complex range
/// and the adjoint keeps the real part of conj(h) * y.
inline LinearMap op_multiply(const ComplexGrid& h, Field domain_field = Field::complex) {
    require(detail::all_finite(h.data()), "op_multiply: multiplier must be finite");
    std::vector<Complex> w(h.data().begin(), h.data().end());
    const bool real_in = domain_field == Field::real;
    auto forward = [w, real_in](std::span<const double> in, std::span<double> out) {
        auto o = as_complex(out);
        if (real_in) {
            for (std::size_t i = 0; i < w.size(); ++i) o[i] = w[i] * in[i];
        } else {
            auto x = as_complex(in);
            for (std::size_t i = 0; i < w.size(); ++i) o[i] = w[i] * x[i];
        }
    };
    auto adjoint = [w, real_in](std::span<const double> in, std::span<double> out) {
        auto y = as_complex(in);
        if (real_in) {
            for (std::size_t i = 0; i < w.size(); ++i) out[i] = (std::conj(w[i]) * y[i]).real();
        } else {
            auto o = as_complex(out);
            for (std::size_t i = 0; i < w.size(); ++i) o[i] = std::conj(w[i]) * y[i];
        }
    };
    return {"multiply", Space{h.width(), h.height(), 1, domain_field},
            complex_space(h.width(), h.height()), forward, adjoint};
}

// ---------------------------------------------------------------------------
// Fourier transform as an operator

/// Unnormalized 2D DFT. Adjoint is the conjugate transpose (N * idft2).
inline LinearMap op_dft2(std::size_t width, std::size_t height, Field domain_field = Field::real) {
    const bool real_in = domain_field == Field::real;
    auto forward = [width, height, real_in](std::span<const double> in, std::span<double> out) {
        ComplexGrid g(width, height);
        if (real_in)
            std::copy(in.begin(), in.end(), g.data().begin());
        else
            std::copy(as_complex(in).begin(), as_complex(in).end(), g.data().begin());
        detail::transform_2d(g, false);
        std::copy(g.data().begin(), g.data().end(), as_complex(out).begin());
    };
    auto adjoint = [width, height, real_in](std::span<const double> in, std::span<double> out) {
        ComplexGrid g(width, height, std::vector<Complex>(as_complex(in).begin(), as_complex(in).end()));
        detail::transform_2d(g, true);
        const auto n = static_cast<double>(width * height);
        if (real_in) {
            for (std::size_t i = 0; i < g.size(); ++i) out[i] = n * g.data()[i].real();
        } else {
            auto o = as_complex(out);
            for (std::size_t i = 0; i < g.size(); ++i) o[i] = n * g.data()[i];
        }
    };
    return {"dft2", Space{width, height, 1, domain_field}, complex_space(width, height), forward,
            adjoint};
}

// ---------------------------------------------------------------------------
// Convolution

enum class ConvolutionMode { circular, zeropad_linear };

/// Circularly shifts a small kernel so that its center pixel
/// (kw/2, kh/2) lands on index (0, 0) of a (width x height) grid.
inline GridImage wrap_kernel(const GridImage& kernel, std::size_t width, std::size_t height) {
    require(kernel.width() <= width && kernel.height() <= height,
            "wrap_kernel: kernel larger than grid");
    GridImage out(width, height);
    const std::size_t cx = kernel.width() / 2;
    const std::size_t cy = kernel.height() / 2;
    for (std::size_t y = 0; y < kernel.height(); ++y)
        for (std::size_t x = 0; x < kernel.width(); ++x)
            out((x + width - cx) % width, (y + height - cy) % height) += kernel(x, y);
    return out;
}

namespace detail {

inline void spectral_multiply(std::size_t width, std::size_t height, std::span<const double> in,
                              std::span<double> out, const std::vector<Complex>& spectrum,
                              bool conjugate) {
    ComplexGrid g(width, height);
    std::copy(in.begin(), in.end(), g.data().begin());
    transform_2d(g, false);
    for (std::size_t i = 0; i < g.size(); ++i)
        g.data()[i] *= conjugate ? std::conj(spectrum[i]) : spectrum[i];
    transform_2d(g, true);
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = g.data()[i].real();
}

} // namespace detail

/// Circular convolution over the kernel's own grid; index (0, 0) of the
/// kernel is the origin (see wrap_kernel). Implemented as
/// idft2(dft2(h) .* dft2(x)); the adjoint multiplies by conj(dft2(h)).
inline LinearMap op_convolve(const GridImage& kernel) {
    require(detail::all_finite(kernel.data()), "op_convolve: kernel must be finite");
    const std::size_t w = kernel.width();
    const std::size_t h = kernel.height();
    const ComplexGrid spec = dft2(kernel);
    auto s = std::make_shared<const std::vector<Complex>>(spec.data().begin(), spec.data().end());
    auto forward = [w, h, s](std::span<const double> in, std::span<double> out) {
        detail::spectral_multiply(w, h, in, out, *s, false);
    };
    auto adjoint = [w, h, s](std::span<const double> in, std::span<double> out) {
        detail::spectral_multiply(w, h, in, out, *s, true);
    };
    const Space space = real_space(w, h);
    return {"convolve", space, space, forward, adjoint};
}

/// Convolution of a (width x height) image with `kernel`.
///
/// circular: kernel must be on the image grid (origin at index 0).
/// zeropad_linear: full linear convolution, output
/// (width + kw - 1) x (height + kh - 1), computed on a zero-padded grid at
/// least twice the image size so no wrap-around occurs.
inline LinearMap op_convolve(const GridImage& kernel, ConvolutionMode mode, std::size_t width,
                             std::size_t height) {
    if (mode == ConvolutionMode::circular) {
        require(kernel.width() == width && kernel.height() == height,
                "op_convolve: circular kernel must match the image grid");
        return op_convolve(kernel);
    }
    require(detail::all_finite(kernel.data()), "op_convolve: kernel must be finite");
    require(width >= 1 && height >= 1, "op_convolve: empty image grid");
    const std::size_t out_w = width + kernel.width() - 1;
    const std::size_t out_h = height + kernel.height() - 1;
    const std::size_t pad_w = detail::next_pow2(std::max(out_w, 2 * width));
    const std::size_t pad_h = detail::next_pow2(std::max(out_h, 2 * height));
    const ComplexGrid spec = dft2(zero_pad(kernel, pad_w, pad_h));
    auto s = std::make_shared<const std::vector<Complex>>(spec.data().begin(), spec.data().end());

    auto forward = [=](std::span<const double> in, std::span<double> out) {
        Vec padded(pad_w * pad_h, 0.0);
        for (std::size_t y = 0; y < height; ++y)
            std::copy_n(in.begin() + static_cast<std::ptrdiff_t>(y * width), width,
                        padded.begin() + static_cast<std::ptrdiff_t>(y * pad_w));
        Vec result(pad_w * pad_h);
        detail::spectral_multiply(pad_w, pad_h, padded, result, *s, false);
        for (std::size_t y = 0; y < out_h; ++y)
            std::copy_n(result.begin() + static_cast<std::ptrdiff_t>(y * pad_w), out_w,
                        out.begin() + static_cast<std::ptrdiff_t>(y * out_w));
    };
    auto adjoint = [=](std::span<const double> in, std::span<double> out) {
        Vec padded(pad_w * pad_h, 0.0);
        for (std::size_t y = 0; y < out_h; ++y)
            std::copy_n(in.begin() + static_cast<std::ptrdiff_t>(y * out_w), out_w,
                        padded.begin() + static_cast<std::ptrdiff_t>(y * pad_w));
        Vec result(pad_w * pad_h);
        detail::spectral_multiply(pad_w, pad_h, padded, result, *s, true);
        for (std::size_t y = 0; y < height; ++y)
            std::copy_n(result.begin() + static_cast<std::ptrdiff_t>(y * pad_w), width,
                        out.begin() + static_cast<std::ptrdiff_t>(y * width));
    };
    return {"convolve_linear", real_space(width, height), real_space(out_w, out_h), forward, adjoint};
}

// ---------------------------------------------------------------------------
// Parallel-beam X-ray transform

struct RadonGeometry {
    std::size_t n_angles = 0;
    std::size_t n_detectors = 0;
    double detector_pitch = 1.0;

    /// Uniform angles k * pi / n_angles, k = 0 .. n_angles-1.
    std::vector<double> angles() const {
        std::vector<double> a(n_angles);
        for (std::size_t k = 0; k < n_angles; ++k)
            a[k] = std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_angles);
        return a;
    }

    /// Signed offset of detector j from the rotation center.
    double offset(std::size_t j) const {
        return (static_cast<double>(j) - 0.5 * static_cast<double>(n_detectors - 1)) * detector_pitch;
    }

    void validate() const {
        require(n_angles >= 1, "RadonGeometry: need at least one angle");
        require(n_detectors >= 1, "RadonGeometry: need at least one detector");
        require(detector_pitch > 0.0 && std::isfinite(detector_pitch),
                "RadonGeometry: detector pitch must be positive");
    }
};

/// Line integrals indexed (angle, detector), angle-major.
struct Sinogram {
    std::size_t n_angles = 0;
    std::size_t n_detectors = 0;
    std::vector<double> angles;
    double detector_pitch = 1.0;
    std::vector<double> data;

    double& operator()(std::size_t angle, std::size_t detector) {
        return data[angle * n_detectors + detector];
    }
    double operator()(std::size_t angle, std::size_t detector) const {
        return data[angle * n_detectors + detector];
    }

    std::span<const double> row(std::size_t angle) const {
        return std::span<const double>(data).subspan(angle * n_detectors, n_detectors);
    }

    static Sinogram from(const RadonGeometry& g, std::vector<double> values) {
        Sinogram s{g.n_angles, g.n_detectors, g.angles(), g.detector_pitch, std::move(values)};
        s.validate();
        return s;
    }

    void validate() const {
        require(n_angles >= 1 && n_detectors >= 1, "Sinogram: empty");
        require(angles.size() == n_angles, "Sinogram: angle count mismatch");
        require(data.size() == n_angles * n_detectors, "Sinogram: data length mismatch");
        for (std::size_t k = 0; k < angles.size(); ++k) {
            require(angles[k] >= 0.0 && angles[k] < std::numbers::pi, "Sinogram: angles must lie in [0, pi)");
            require(k == 0 || angles[k] > angles[k - 1], "Sinogram: angles must be strictly increasing");
        }
        require(detail::all_finite(data), "Sinogram: data must be finite");
    }
};

namespace detail {

// Visits every ray sample of the discrete X-ray transform. A ray at angle
// theta and detector offset s is the line s*(cos, sin) + t*(-sin, cos); t is
// sampled with a step of one pixel pitch, symmetric about t = 0, covering the
// image diagonal. World (x, y) maps to pixel column cx + x/pitch and row
// cy - y/pitch, so +y points up. `visit(ray, i00, i10, i01, i11, w00, w10,
// w01, w11)` receives the four bilinear neighbors; weights of out-of-range
// neighbors are zero.
template <class Visit>
void for_each_ray_sample(const RadonGeometry& geom, const std::vector<double>& angles,
                         std::size_t width, std::size_t height, double pitch, Visit&& visit) {
    const double cx = 0.5 * static_cast<double>(width - 1);
    const double cy = 0.5 * static_cast<double>(height - 1);
    const double half_diag =
        0.5 * std::hypot(static_cast<double>(width), static_cast<double>(height)) * pitch;
    const auto half_steps = static_cast<long>(std::ceil(half_diag / pitch));
    const double max_x = static_cast<double>(width - 1);
    const double max_y = static_cast<double>(height - 1);
    for (std::size_t a = 0; a < angles.size(); ++a) {
        const double c = std::cos(angles[a]);
        const double s = std::sin(angles[a]);
        for (std::size_t d = 0; d < geom.n_detectors; ++d) {
            const double offset = geom.offset(d);
            const std::size_t ray = a * geom.n_detectors + d;
            for (long k = -half_steps; k <= half_steps; ++k) {
                const double t = static_cast<double>(k) * pitch;
                const double wx = offset * c - t * s;
                const double wy = offset * s + t * c;
                const double px = cx + wx / pitch;
                const double py = cy - wy / pitch;
                if (!(px >= 0.0 && px <= max_x && py >= 0.0 && py <= max_y)) continue;
                const auto x0 = static_cast<std::size_t>(px);
                const auto y0 = static_cast<std::size_t>(py);
                const std::size_t x1 = std::min(x0 + 1, width - 1);
                const std::size_t y1 = std::min(y0 + 1, height - 1);
                const double fx = px - static_cast<double>(x0);
                const double fy = py - static_cast<double>(y0);
                visit(ray, y0 * width + x0, y0 * width + x1, y1 * width + x0, y1 * width + x1,
                      (1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy);
            }
        }
    }
}

} // namespace detail

/// Discrete parallel-beam X-ray transform of a (width x height) image with
/// pixel spacing `pitch`; output is a Sinogram-shaped vector
/// (n_detectors x n_angles). Each ray is a Riemann sum of bilinear samples
/// times the step. The adjoint is the exact transpose (back projection).
inline LinearMap op_radon(const RadonGeometry& geom, std::size_t width, std::size_t height,
                          double pitch = 1.0) {
    geom.validate();
    require(width >= 1 && height >= 1, "op_radon: empty image grid");
    require(pitch > 0.0, "op_radon: pitch must be positive");
    const std::vector<double> angles = geom.angles();
    auto forward = [=](std::span<const double> in, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        detail::for_each_ray_sample(geom, angles, width, height, pitch,
                                    [&](std::size_t ray, std::size_t i00, std::size_t i10,
                                        std::size_t i01, std::size_t i11, double w00, double w10,
                                        double w01, double w11) {
                                        out[ray] += w00 * in[i00] + w10 * in[i10] + w01 * in[i01] +
                                                    w11 * in[i11];
                                    });
        for (double& v : out) v *= pitch;
    };
    auto adjoint = [=](std::span<const double> in, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        detail::for_each_ray_sample(geom, angles, width, height, pitch,
                                    [&](std::size_t ray, std::size_t i00, std::size_t i10,
                                        std::size_t i01, std::size_t i11, double w00, double w10,
                                        double w01, double w11) {
                                        const double v = in[ray];
                                        out[i00] += w00 * v;
                                        out[i10] += w10 * v;
                                        out[i01] += w01 * v;
                                        out[i11] += w11 * v;
                                    });
        for (double& v : out) v *= pitch;
    };
    return {"radon", real_space(width, height), real_space(geom.n_detectors, geom.n_angles), forward,
            adjoint};
}

inline Sinogram radon(const GridImage& img, const RadonGeometry& geom) {
    const LinearMap op = op_radon(geom, img.width(), img.height(), img.pitch());
    return Sinogram::from(geom, op.apply(img.data()));
}

/// Single projection at an arbitrary angle, same discretization as op_radon.
inline std::vector<double> radon_projection(const GridImage& img, double theta,
                                            std::size_t n_detectors, double detector_pitch) {
    const RadonGeometry geom{1, n_detectors, detector_pitch};
    geom.validate();
    std::vector<double> out(n_detectors, 0.0);
    const std::span<const double> in = img.data();
    detail::for_each_ray_sample(geom, {theta}, img.width(), img.height(), img.pitch(),
                                [&](std::size_t ray, std::size_t i00, std::size_t i10,
                                    std::size_t i01, std::size_t i11, double w00, double w10,
                                    double w01, double w11) {
                                    out[ray] += w00 * in[i00] + w10 * in[i10] + w01 * in[i01] +
                                                w11 * in[i11];
                                });
    for (double& v : out) v *= img.pitch();
    return out;
}

// ---------------------------------------------------------------------------
// Finite differences

/// Forward differences; channel 0 horizontal, channel 1 vertical, with the
/// last column / row difference set to zero. Adjoint is minus the divergence.
inline LinearMap op_grad(std::size_t width, std::size_t height) {
    const std::size_t n = width * height;
    auto forward = [=](std::span<const double> in, std::span<double> out) {
        for (std::size_t y = 0; y < height; ++y)
            for (std::size_t x = 0; x < width; ++x) {
                const std::size_t i = y * width + x;
                out[i] = x + 1 < width ? in[i + 1] - in[i] : 0.0;
                out[n + i] = y + 1 < height ? in[i + width] - in[i] : 0.0;
            }
    };
    auto adjoint = [=](std::span<const double> in, std::span<double> out) {
        for (std::size_t y = 0; y < height; ++y)
            for (std::size_t x = 0; x < width; ++x) {
                const std::size_t i = y * width + x;
                double v = 0.0;
                if (x + 1 < width) v -= in[i];
                if (x > 0) v += in[i - 1];
                if (y + 1 < height) v -= in[n + i];
                if (y > 0) v += in[n + i - width];
                out[i] = v;
            }
    };
    return {"grad", real_space(width, height), real_space(width, height, 2), forward, adjoint};
}

// ---------------------------------------------------------------------------
// Dense matrices (small problems and test instances)

/// Row-major (rows x cols) matrix acting on length-cols vectors.
inline LinearMap op_dense(std::size_t rows, std::size_t cols, std::vector<double> matrix) {
    require(matrix.size() == rows * cols, "op_dense: matrix size mismatch");
    require(detail::all_finite(matrix), "op_dense: matrix must be finite");
    auto forward = [=](std::span<const double> in, std::span<double> out) {
        for (std::size_t r = 0; r < rows; ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < cols; ++c) acc += matrix[r * cols + c] * in[c];
            out[r] = acc;
        }
    };
    auto adjoint = [=](std::span<const double> in, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) out[c] += matrix[r * cols + c] * in[r];
    };
    return {"dense", real_space(cols), real_space(rows), forward, adjoint};
}

} // namespace recon
