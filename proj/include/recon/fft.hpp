#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <span>
#include <tuple>
#include <vector>

#include <fftw3.h>

#include "recon/error.hpp"
#include "recon/grid.hpp"

namespace recon {

// Conventions: forward kernel exp(-i 2 pi k n / N), unnormalized; inverse
// kernel exp(+i 2 pi k n / N) scaled by 1/N.

namespace detail {

constexpr bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// FFTW plans are cached per shape and direction. FFTW_ESTIMATE keeps plan
// choice (and so rounding) independent of timing; FFTW_UNALIGNED lets one
// plan run on any buffer through the new-array execute interface.
class FftwPlans {
public:
    ~FftwPlans() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(std::size_t w, std::size_t h, bool inverse) {
        const Key key{w, h, inverse};
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<Complex> scratch(w * h);
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        const int sign = inverse ? FFTW_BACKWARD : FFTW_FORWARD;
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        fftw_plan plan = h == 1 ? fftw_plan_dft_1d(static_cast<int>(w), buf, buf, sign, flags)
                                : fftw_plan_dft_2d(static_cast<int>(h), static_cast<int>(w), buf, buf, sign, flags);
        if (!plan) throw NumericalError("fftw: plan creation failed");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    struct Key {
        std::size_t w, h;
        bool inverse;
        bool operator<(const Key& o) const { return std::tie(w, h, inverse) < std::tie(o.w, o.h, o.inverse); }
    };
    std::map<Key, fftw_plan> plans_;
};

inline FftwPlans& fftw_plans() {
    static FftwPlans plans;
    return plans;
}

// In-place transform of a row-major w x h array; the inverse is unscaled.
inline void fftw_in_place(std::span<Complex> data, std::size_t w, std::size_t h, bool inverse) {
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(fftw_plans().get(w, h, inverse), buf, buf);
}

inline void transform_2d(ComplexGrid& grid, bool inverse) {
    const std::size_t w = grid.width();
    const std::size_t h = grid.height();
    fftw_in_place(grid.data(), w, h, inverse);
    if (inverse) {
        const double scale = 1.0 / static_cast<double>(w * h);
        for (auto& v : grid.data()) v *= scale;
    }
}

} // namespace detail

/// Unnormalized 1D forward DFT.
inline std::vector<Complex> dft1(std::span<const Complex> signal) {
    std::vector<Complex> out(signal.begin(), signal.end());
    if (!out.empty()) detail::fftw_in_place(out, out.size(), 1, false);
    return out;
}

/// 1D inverse DFT with 1/N normalization.
inline std::vector<Complex> idft1(std::span<const Complex> spectrum) {
    std::vector<Complex> out(spectrum.begin(), spectrum.end());
    if (!out.empty()) detail::fftw_in_place(out, out.size(), 1, true);
    const double scale = out.empty() ? 1.0 : 1.0 / static_cast<double>(out.size());
    for (auto& v : out) v *= scale;
    return out;
}

inline ComplexGrid dft2(const ComplexGrid& input) {
    require(input.width() >= 1 && input.height() >= 1, "dft2: grid must be non-empty");
    require(detail::all_finite(input.data()), "dft2: input must be finite");
    ComplexGrid out = input;
    detail::transform_2d(out, false);
    return out;
}

inline ComplexGrid dft2(const GridImage& input) {
    require(input.width() >= 1 && input.height() >= 1, "dft2: grid must be non-empty");
    require(detail::all_finite(input.data()), "dft2: input must be finite");
    ComplexGrid out(input);
    detail::transform_2d(out, false);
    return out;
}

inline ComplexGrid idft2(const ComplexGrid& spectrum) {
    require(spectrum.width() >= 1 && spectrum.height() >= 1, "idft2: grid must be non-empty");
    require(detail::all_finite(spectrum.data()), "idft2: input must be finite");
    ComplexGrid out = spectrum;
    detail::transform_2d(out, true);
    return out;
}

} // namespace recon
