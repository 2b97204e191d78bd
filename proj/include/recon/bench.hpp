#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "recon/fft.hpp"
#include "recon/grid.hpp"
#include "recon/linear_map.hpp"
#include "recon/operators.hpp"
#include "recon/transforms.hpp"

namespace recon {

/// 10 log10(|truth|^2 / |truth - estimate|^2); +inf when the estimate is exact.
inline double snr_db(std::span<const double> truth, std::span<const double> estimate) {
    require(truth.size() == estimate.size(), "snr_db: shape mismatch");
    double signal = 0.0;
    double error = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        signal += truth[i] * truth[i];
        const double d = truth[i] - estimate[i];
        error += d * d;
    }
    if (error == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(signal / error);
}

inline double snr_db(const GridImage& truth, const GridImage& estimate) {
    require(truth.same_shape(estimate), "snr_db: shape mismatch");
    return snr_db(truth.data(), estimate.data());
}

// ---------------------------------------------------------------------------
// Degradation pipeline

struct Degradation {
    LinearMap forward;        ///< mask after blur
    Vec clean;                ///< forward applied to the image
    Vec measurements;         ///< clean plus noise on kept entries
    double sigma = 0.0;
    Seed seed;
    bool noiseless = true;    ///< measurement SNR is infinite

    /// 10 log10(mean clean power / sigma^2).
    double measurement_snr_db() const {
        if (noiseless) return std::numeric_limits<double>::infinity();
        const double power = norm2_squared(clean) / static_cast<double>(clean.size());
        return 10.0 * std::log10(power / (sigma * sigma));
    }
};

/// Noise standard deviation giving the requested measurement SNR for `clean`.
inline double sigma_for_snr(std::span<const double> clean, double snr_db_target) {
    const double power = norm2_squared(clean) / static_cast<double>(clean.size());
    return std::sqrt(power / std::pow(10.0, snr_db_target / 10.0));
}

/// Blur (circular, kernel wrapped to the image grid), subsample with `mask`,
/// then add N(0, sigma^2) noise drawn on the full grid from `seed` and
/// restricted to the kept entries.
inline Degradation degrade(const GridImage& f, const GridImage& blur, const Mask& mask, double sigma,
                           Seed seed) {
    require(mask.width == f.width() && mask.height == f.height(), "degrade: mask must match the image grid");
    require(sigma >= 0.0, "degrade: sigma must be >= 0");
    const LinearMap conv = op_convolve(wrap_kernel(blur, f.width(), f.height()));
    const LinearMap sample = op_mask(mask);
    Degradation out{op_compose(sample, conv), {}, {}, sigma, seed, sigma == 0.0};
    out.clean = out.forward.apply(f.data());
    out.measurements = out.clean;
    if (sigma > 0.0) {
        const GridImage noise = gaussian_noise(f.width(), f.height(), sigma, seed);
        const Vec kept = sample.apply(noise.data());
        for (std::size_t i = 0; i < kept.size(); ++i) out.measurements[i] += kept[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sparse recovery instance

/// g = H f_true with Gaussian H (entries N(0, 1/rows)) and a `nonzeros`-sparse
/// f_true whose entries are +-(1 + U[0,1)). Support chosen without
/// replacement; everything derives from `seed`.
struct SparseInstance {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> matrix;
    Vec truth;
    Vec data;
    std::vector<std::size_t> support;

    LinearMap forward() const { return op_dense(rows, cols, matrix); }
};

inline SparseInstance sparse_recovery_instance(Seed seed = {2024}, std::size_t rows = 8, std::size_t cols = 32,
                                               std::size_t nonzeros = 2) {
    require(rows >= 1 && cols >= 1 && nonzeros <= cols, "sparse_recovery_instance: invalid sizes");
    SplitMix64 rng(seed);
    SparseInstance inst{rows, cols, std::vector<double>(rows * cols), Vec(cols, 0.0), {}, {}};
    const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
    for (double& v : inst.matrix) v = scale * rng.normal();
    std::vector<std::size_t> perm(cols);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = 0; i < nonzeros; ++i) std::swap(perm[i], perm[i + rng.below(cols - i)]);
    inst.support.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(nonzeros));
    std::sort(inst.support.begin(), inst.support.end());
    for (std::size_t idx : inst.support) inst.truth[idx] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (1.0 + rng.uniform());
    inst.data = inst.forward().apply(inst.truth);
    return inst;
}

// ---------------------------------------------------------------------------
// Compressibility

enum class SparsifyingTransform { haar, dct8, dft };

inline std::string to_string(SparsifyingTransform t) {
    switch (t) {
    case SparsifyingTransform::haar: return "haar";
    case SparsifyingTransform::dct8: return "dct8";
    case SparsifyingTransform::dft: return "dft";
    }
    return "?";
}

struct CompressionRow {
    double keep_fraction = 0.0;
    std::size_t kept = 0;
    double retained_energy = 0.0; ///< |kept coefficients|^2 / |all coefficients|^2
    double discarded_energy = 0.0; ///< |dropped coefficients|^2 / |all coefficients|^2
    double snr_db = 0.0;
    GridImage reconstruction;
};

/// Haar depth used by the study: as many levels as the image allows, up to 5.
inline int haar_levels_for(const GridImage& img) {
    int levels = 0;
    while (levels < 5 && img.width() % (std::size_t{2} << levels) == 0 &&
           img.height() % (std::size_t{2} << levels) == 0)
        ++levels;
    return levels;
}

/// Keeps the largest-magnitude fraction of transform coefficients (ties
/// broken by lower index), inverts, and reports the SNR against `img`.
inline std::vector<CompressionRow> compressibility_study(const GridImage& img, SparsifyingTransform transform,
                                                         const std::vector<double>& keep_fractions) {
    require(!keep_fractions.empty(), "compressibility_study: no keep fractions");
    const std::size_t n = img.size();
    std::vector<Complex> coeffs(n);
    const int levels = haar_levels_for(img);
    switch (transform) {
    case SparsifyingTransform::haar: {
        const GridImage t = transform_haar(img, levels);
        std::copy(t.data().begin(), t.data().end(), coeffs.begin());
        break;
    }
    case SparsifyingTransform::dct8: {
        const GridImage t = transform_dct8(img);
        std::copy(t.data().begin(), t.data().end(), coeffs.begin());
        break;
    }
    case SparsifyingTransform::dft: {
        const ComplexGrid t = dft2(img);
        std::copy(t.data().begin(), t.data().end(), coeffs.begin());
        break;
    }
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return std::abs(coeffs[i]) > std::abs(coeffs[j]); });
    double total = 0.0;
    for (const Complex& c : coeffs) total += std::norm(c);

    std::vector<CompressionRow> rows;
    for (double fraction : keep_fractions) {
        require(fraction >= 0.0 && fraction <= 1.0, "compressibility_study: keep fraction must be in [0, 1]");
        const auto kept = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
        std::vector<Complex> sparse(n, Complex{});
        double energy = 0.0;
        for (std::size_t r = 0; r < kept; ++r) {
            sparse[order[r]] = coeffs[order[r]];
            energy += std::norm(coeffs[order[r]]);
        }
        // summed separately so small tails keep their precision
        double dropped = 0.0;
        for (std::size_t r = kept; r < n; ++r) dropped += std::norm(coeffs[order[r]]);
        GridImage recon_img(img.width(), img.height(), img.pitch());
        if (transform == SparsifyingTransform::dft) {
            recon_img = idft2(ComplexGrid(img.width(), img.height(), sparse)).real_part(img.pitch());
        } else {
            GridImage t(img.width(), img.height(), img.pitch());
            for (std::size_t i = 0; i < n; ++i) t.data()[i] = sparse[i].real();
            recon_img = transform == SparsifyingTransform::haar ? transform_haar(t, levels, true)
                                                                : transform_dct8(t, true);
        }
        const double snr = kept == n ? std::numeric_limits<double>::infinity() : snr_db(img, recon_img);
        rows.push_back({fraction, kept, total > 0.0 ? energy / total : 1.0, total > 0.0 ? dropped / total : 0.0, snr,
                        std::move(recon_img)});
    }
    return rows;
}

} // namespace recon
