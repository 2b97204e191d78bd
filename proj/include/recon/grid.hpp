#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "recon/error.hpp"
#include "recon/random.hpp"

namespace recon {

using Complex = std::complex<double>;

namespace detail {

inline bool all_finite(std::span<const double> values) {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

inline bool all_finite(std::span<const Complex> values) {
    return std::all_of(values.begin(), values.end(), [](const Complex& v) {
        return std::isfinite(v.real()) && std::isfinite(v.imag());
    });
}

} // namespace detail

/// Real raster on a uniform grid, row-major. Row 0 is the top of the image.
class GridImage {
public:
    GridImage() = default;

    GridImage(std::size_t width, std::size_t height, double pitch = 1.0)
        : width_(width), height_(height), pitch_(pitch), data_(width * height, 0.0) {
        require(pitch > 0.0 && std::isfinite(pitch), "GridImage: pitch must be positive");
    }

    GridImage(std::size_t width, std::size_t height, std::vector<double> data, double pitch = 1.0)
        : width_(width), height_(height), pitch_(pitch), data_(std::move(data)) {
        require(data_.size() == width * height, "GridImage: data length must equal width*height");
        require(pitch > 0.0 && std::isfinite(pitch), "GridImage: pitch must be positive");
        require(detail::all_finite(data_), "GridImage: samples must be finite");
    }

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    double pitch() const noexcept { return pitch_; }

    double& operator()(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }
    double operator()(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    const std::vector<double>& values() const noexcept { return data_; }

    bool same_shape(const GridImage& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    double pitch_ = 1.0;
    std::vector<double> data_;
};

/// Complex raster, row-major; frequency-domain data and k-space samples.
class ComplexGrid {
public:
    ComplexGrid() = default;

    ComplexGrid(std::size_t width, std::size_t height)
        : width_(width), height_(height), data_(width * height, Complex{}) {}

    ComplexGrid(std::size_t width, std::size_t height, std::vector<Complex> data)
        : width_(width), height_(height), data_(std::move(data)) {
        require(data_.size() == width * height, "ComplexGrid: data length must equal width*height");
        require(detail::all_finite(data_), "ComplexGrid: samples must be finite");
    }

    explicit ComplexGrid(const GridImage& image) : ComplexGrid(image.width(), image.height()) {
        std::copy(image.data().begin(), image.data().end(), data_.begin());
    }

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }

    Complex& operator()(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }
    const Complex& operator()(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }

    std::span<Complex> data() noexcept { return data_; }
    std::span<const Complex> data() const noexcept { return data_; }

    GridImage real_part(double pitch = 1.0) const {
        GridImage out(width_, height_, pitch);
        std::transform(data_.begin(), data_.end(), out.data().begin(),
                       [](const Complex& c) { return c.real(); });
        return out;
    }

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<Complex> data_;
};

/// Bilinear interpolation in pixel coordinates; zero outside
/// [0, width-1] x [0, height-1].
inline double bilinear_sample(const GridImage& img, double x, double y) {
    if (img.size() == 0) return 0.0;
    const double max_x = static_cast<double>(img.width() - 1);
    const double max_y = static_cast<double>(img.height() - 1);
    if (!(x >= 0.0 && x <= max_x && y >= 0.0 && y <= max_y)) return 0.0;
    const auto x0 = static_cast<std::size_t>(std::floor(x));
    const auto y0 = static_cast<std::size_t>(std::floor(y));
    const std::size_t x1 = std::min(x0 + 1, img.width() - 1);
    const std::size_t y1 = std::min(y0 + 1, img.height() - 1);
    const double fx = x - static_cast<double>(x0);
    const double fy = y - static_cast<double>(y0);
    const double top = (1.0 - fx) * img(x0, y0) + fx * img(x1, y0);
    const double bottom = (1.0 - fx) * img(x0, y1) + fx * img(x1, y1);
    return (1.0 - fy) * top + fy * bottom;
}

/// Places `img` at offset (0,0) of a larger zero image.
inline GridImage zero_pad(const GridImage& img, std::size_t new_width, std::size_t new_height) {
    require(new_width >= img.width() && new_height >= img.height(),
            "zero_pad: new dimensions must not be smaller than the image");
    GridImage out(new_width, new_height, img.pitch());
    for (std::size_t y = 0; y < img.height(); ++y)
        std::copy_n(img.data().begin() + static_cast<std::ptrdiff_t>(y * img.width()), img.width(),
                    out.data().begin() + static_cast<std::ptrdiff_t>(y * new_width));
    return out;
}

inline GridImage crop(const GridImage& img, std::size_t width, std::size_t height,
                      std::size_t offset_x = 0, std::size_t offset_y = 0) {
    require(offset_x + width <= img.width() && offset_y + height <= img.height(),
            "crop: window must lie inside the image");
    GridImage out(width, height, img.pitch());
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) out(x, y) = img(x + offset_x, y + offset_y);
    return out;
}

/// I.i.d. N(0, sigma^2) samples drawn from SplitMix64 + Box-Muller in
/// row-major order.
inline GridImage gaussian_noise(std::size_t width, std::size_t height, double sigma, Seed seed) {
    require(sigma >= 0.0 && std::isfinite(sigma), "gaussian_noise: sigma must be >= 0");
    GridImage out(width, height);
    if (sigma == 0.0) return out;
    SplitMix64 rng(seed);
    for (double& v : out.data()) v = sigma * rng.normal();
    return out;
}

} // namespace recon
