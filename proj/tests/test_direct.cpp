#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "recon/recon.hpp"

using namespace recon;

namespace {

GridImage random_image(std::size_t w, std::size_t h, std::uint64_t seed) {
    SplitMix64 rng(Seed{seed});
    return GridImage(w, h, random_vec(w * h, rng));
}

double rel_err(std::span<const double> a, std::span<const double> b) {
    Vec d(a.begin(), a.end());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= b[i];
    return norm2(d) / norm2(b);
}

Eigen::MatrixXd dense_of(const LinearMap& m) {
    const std::size_t n = m.domain().storage();
    Eigen::MatrixXd a(m.range().storage(), n);
    Vec e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        const Vec col = m.apply(e);
        for (std::size_t i = 0; i < col.size(); ++i) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
        e[j] = 0.0;
    }
    return a;
}

Eigen::VectorXd to_eigen(std::span<const double> v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Positive spectrum with c[k] = c[-k], so the covariance it defines is real.
GridImage symmetric_prior(std::size_t n) {
    GridImage c(n, n);
    for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x) {
            const double fx = static_cast<double>(std::min(x, n - x));
            const double fy = static_cast<double>(std::min(y, n - y));
            c(x, y) = 1.0 / (0.5 + fx * fx + fy * fy);
        }
    return c;
}

} // namespace

// ---------------------------------------------------------------------------
// Ramp filter and FBP

TEST(RampFilter, ShapeInvariants) {
    for (Apodization apod : {Apodization::none, Apodization::cosine}) {
        const RampFilter f = RampFilter::make(100, 0.5, apod);
        EXPECT_GE(f.n_taps, 200u);
        EXPECT_EQ(f.response[0], 0.0);
        for (std::size_t k = 1; k < f.n_taps; ++k) {
            EXPECT_GE(f.response[k], 0.0);
            EXPECT_DOUBLE_EQ(f.response[k], f.response[f.n_taps - k]);
        }
    }
    EXPECT_THROW(RampFilter::make(0, 1.0), ValidationError);
}

TEST(Fbp, ZeroSinogramGivesZeroImage) {
    const RadonGeometry geom{30, 64, 1.0};
    const GridImage out = fbp(Sinogram::from(geom, Vec(30 * 64, 0.0)), RampFilter::make(64, 1.0), 64, 64, 1.0);
    for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(Fbp, DiskAt360AnglesReaches20dB) {
    const std::size_t n = 256;
    const EllipsePhantom disk{{{0.0, 0.0, 0.5, 0.5, 0.0, 1.0}}};
    const RadonGeometry geom{360, n, 2.0 / n};
    const GridImage rec = fbp(analytic_sinogram(disk, geom), RampFilter::make(n, geom.detector_pitch), n, n, 2.0 / n);
    EXPECT_GE(snr_db(render(disk, n), rec), 20.0);
}

TEST(Fbp, MoreAnglesImproveSheppLogan) {
    const std::size_t n = 128;
    const EllipsePhantom sl = shepp_logan_phantom();
    const GridImage truth = render(sl, n);
    double previous = -INFINITY;
    for (std::size_t angles : {90, 180, 360}) {
        const RadonGeometry geom{angles, n, 2.0 / n};
        const GridImage rec = fbp(analytic_sinogram(sl, geom), RampFilter::make(n, geom.detector_pitch), n, n, 2.0 / n);
        const double snr = snr_db(truth, rec);
        EXPECT_GT(snr, previous) << angles;
        previous = snr;
    }
}

TEST(Fbp, Linearity) {
    const RadonGeometry geom{40, 48, 1.0};
    SplitMix64 rng(Seed{4});
    const Vec s1 = random_vec(40 * 48, rng), s2 = random_vec(40 * 48, rng);
    const double a = 1.7, b = -0.4;
    const RampFilter f = RampFilter::make(48, 1.0, Apodization::cosine);
    const GridImage lhs = fbp(Sinogram::from(geom, a * s1 + b * s2), f, 40, 40, 1.0);
    const GridImage r1 = fbp(Sinogram::from(geom, s1), f, 40, 40, 1.0);
    const GridImage r2 = fbp(Sinogram::from(geom, s2), f, 40, 40, 1.0);
    const Vec rhs = a * r1.values() + b * r2.values();
    EXPECT_LT(rel_err(lhs.data(), rhs), 1e-8);
}

// ---------------------------------------------------------------------------
// Wiener / MMSE

TEST(Wiener, NoiselessInvertibleKernelIsExactInverse) {
    const std::size_t n = 16;
    GridImage k(n, n);
    k(0, 0) = 1.0;
    k(1, 0) = 0.3;
    k(0, 1) = -0.2;
    const GridImage f = random_image(n, n, 1);
    const GridImage g(n, n, op_convolve(k).apply(f.data()));
    const GridImage rec = wiener_deconvolve(g, k, 0.0, GridImage(n, n, std::vector<double>(n * n, 1.0)));
    EXPECT_LT(rel_err(rec.data(), f.data()), 1e-8);
}

TEST(Wiener, HugeNoiseGivesPriorMean) {
    const std::size_t n = 16;
    const GridImage k = wrap_kernel(gaussian_kernel(5, 1.0), n, n);
    const GridImage g = random_image(n, n, 2);
    const GridImage rec = wiener_deconvolve(g, k, 1e8, symmetric_prior(n));
    EXPECT_LT(norm_inf(rec.data()), 1e-12);
}

TEST(Wiener, MatchesDenseMapFormula) {
    const std::size_t n = 16;
    const GridImage k = random_image(n, n, 3);
    const GridImage g = random_image(n, n, 4);
    const GridImage c = symmetric_prior(n);
    const double sigma = 0.3;
    const GridImage rec = wiener_deconvolve(g, k, sigma, c);

    const Eigen::MatrixXd h = dense_of(op_convolve(k));
    // covariance: circular convolution whose transfer function is c
    const GridImage c_kernel = idft2(ComplexGrid(c)).real_part();
    const Eigen::MatrixXd cov = dense_of(op_convolve(c_kernel));
    const Eigen::MatrixXd a = h.transpose() * h + sigma * sigma * cov.inverse();
    const Eigen::VectorXd map = a.ldlt().solve(h.transpose() * to_eigen(g.data()));
    const Eigen::VectorXd got = to_eigen(rec.data());
    EXPECT_LT((got - map).norm() / map.norm(), 1e-8);
    // and the normal equation
    const Eigen::VectorXd lhs = h.transpose() * to_eigen(g.data());
    EXPECT_LT((a * got - lhs).norm() / lhs.norm(), 1e-7);
}

TEST(Wiener, NoiselessZeroBinIsSingular) {
    const std::size_t n = 16;
    const GridImage box = wrap_kernel(box_kernel(2), n, n); // 2-tap box: zero at Nyquist
    EXPECT_THROW(wiener_deconvolve(random_image(n, n, 5), box, 0.0, symmetric_prior(n)), NumericalError);
    EXPECT_THROW(wiener_deconvolve(random_image(n, n, 5), box, -1.0, symmetric_prior(n)), ValidationError);
}

TEST(Wiener, NoiseAmplificationOfNearSingularBlur) {
    const std::size_t n = 64;
    const GridImage f = shepp_logan(n);
    const GridImage k = wrap_kernel(box_kernel(9), n, n);
    const Vec clean = op_convolve(k).apply(f.data());
    const GridImage noise = gaussian_noise(n, n, 1e-3, Seed{6});
    const GridImage g(n, n, clean + noise.values());
    const GridImage inv = wiener_deconvolve(g, k, 0.0, GridImage(n, n, std::vector<double>(n * n, 1.0)));
    const double amplification = norm2(inv.values() - f.values()) / norm2(noise.data());
    EXPECT_GT(amplification, 10.0);
}

// ---------------------------------------------------------------------------
// Zero-filled inverse DFT

namespace {

Vec sample_kspace(const GridImage& img, const Mask& mask) {
    const ComplexGrid spec = dft2(img);
    Vec out;
    for (std::size_t idx : mask.indices) {
        out.push_back(spec.data()[idx].real());
        out.push_back(spec.data()[idx].imag());
    }
    return out;
}

} // namespace

TEST(ZeroFill, FullMaskIsExactInverse) {
    const GridImage x = random_image(16, 12, 7);
    const Mask full = Mask::full(16, 12);
    const GridImage rec = zerofill_ifft(sample_kspace(x, full), full);
    double err = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) err = std::max(err, std::abs(rec.data()[i] - x.data()[i]));
    EXPECT_LT(err, 1e-10);
}

TEST(ZeroFill, BandLimitedImageRecoveredFromHalfBand) {
    const std::size_t n = 16;
    // spectrum supported on |kx| <= 3 (and its mirror) so the image is real
    ComplexGrid spec(n, n);
    SplitMix64 rng(Seed{8});
    for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x <= 3; ++x) {
            const Complex v{rng.normal(), rng.normal()};
            spec(x, y) += v;
            spec((n - x) % n, (n - y) % n) += std::conj(v);
        }
    const GridImage img = idft2(spec).real_part();
    std::vector<bool> keep(n * n, false);
    for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x) keep[y * n + x] = std::min(x, n - x) <= 4;
    const Mask band = Mask::from_keep(n, n, keep);
    EXPECT_LE(band.kept(), n * n / 2 + n);
    const GridImage rec = zerofill_ifft(sample_kspace(img, band), band);
    EXPECT_LT(rel_err(rec.data(), img.data()), 1e-10);
}

TEST(ZeroFill, RandomQuarterMaskLosesSnr) {
    const GridImage sl = shepp_logan(64);
    const Mask quarter = Mask::random(64, 64, 0.25, Seed{9});
    const Mask full = Mask::full(64, 64);
    const double partial = snr_db(sl, zerofill_ifft(sample_kspace(sl, quarter), quarter));
    const double complete = snr_db(sl, zerofill_ifft(sample_kspace(sl, full), full));
    EXPECT_LT(partial, complete);
    EXPECT_TRUE(std::isfinite(partial));
    EXPECT_THROW(zerofill_ifft(Vec(3), quarter), ValidationError);
}
