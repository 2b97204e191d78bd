#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <span>
#include <vector>

#include "recon/error.hpp"
#include "recon/random.hpp"

namespace recon {

/// Flat real storage for operator inputs and outputs. Complex spaces store
/// interleaved (re, im) pairs, the layout of std::complex<double>[].
using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "dot: length mismatch");
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double norm2_squared(std::span<const double> a) { return dot(a, a); }
inline double norm2(std::span<const double> a) { return std::sqrt(norm2_squared(a)); }

inline double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    require(x.size() == y.size(), "axpy: length mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline Vec operator+(const Vec& a, const Vec& b) {
    require(a.size() == b.size(), "vector add: length mismatch");
    Vec out(a);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += b[i];
    return out;
}

inline Vec operator-(const Vec& a, const Vec& b) {
    require(a.size() == b.size(), "vector subtract: length mismatch");
    Vec out(a);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] -= b[i];
    return out;
}

inline Vec operator*(double s, const Vec& a) {
    Vec out(a);
    for (double& v : out) v *= s;
    return out;
}

inline Vec random_vec(std::size_t n, SplitMix64& rng) {
    Vec out(n);
    for (double& v : out) v = rng.normal();
    return out;
}

inline std::span<const std::complex<double>> as_complex(std::span<const double> v) {
    return {reinterpret_cast<const std::complex<double>*>(v.data()), v.size() / 2};
}

inline std::span<std::complex<double>> as_complex(std::span<double> v) {
    return {reinterpret_cast<std::complex<double>*>(v.data()), v.size() / 2};
}

} // namespace recon
