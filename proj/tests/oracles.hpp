#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance binary. Dense linear algebra goes through Eigen.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "recon/recon.hpp"

namespace oracle {

using recon::LinearMap;
using recon::Vec;

inline Eigen::MatrixXd dense_of(const LinearMap& m) {
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

inline Eigen::VectorXd to_eigen(std::span<const double> v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Vec from_eigen(const Eigen::VectorXd& v) { return Vec(v.data(), v.data() + v.size()); }

inline std::vector<double> random_matrix(std::size_t rows, std::size_t cols, recon::SplitMix64& rng) {
    std::vector<double> m(rows * cols);
    for (double& v : m) v = rng.normal() / std::sqrt(static_cast<double>(rows));
    return m;
}

inline Eigen::MatrixXd to_matrix(std::size_t rows, std::size_t cols, const std::vector<double>& m) {
    Eigen::MatrixXd a(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m[r * cols + c];
    return a;
}

/// Exact 1D total-variation denoising,
///   argmin_x 1/2 |y - x|^2 + lambda sum |x[i+1] - x[i]|,
/// by Condat's direct algorithm.
inline std::vector<double> tv1d(const std::vector<double>& y, double lambda) {
    const int n = static_cast<int>(y.size());
    std::vector<double> x(y.size());
    if (n == 0) return x;
    int k = 0, k0 = 0, kplus = 0, kminus = 0;
    double umin = lambda, umax = -lambda;
    double vmin = y[0] - lambda, vmax = y[0] + lambda;
    for (;;) {
        while (k == n - 1) {
            if (umin < 0.0) {
                do x[k0++] = vmin; while (k0 <= kminus);
                k = kminus = k0;
                vmin = y[k];
                umin = lambda;
                umax = vmin + umin - vmax;
            } else if (umax > 0.0) {
                do x[k0++] = vmax; while (k0 <= kplus);
                k = kplus = k0;
                vmax = y[k];
                umax = -lambda;
                umin = vmax + umax - vmin;
            } else {
                vmin += umin / (k - k0 + 1);
                do x[k0++] = vmin; while (k0 <= k);
                return x;
            }
        }
        if ((umin += y[k + 1] - vmin) < -lambda) {
            do x[k0++] = vmin; while (k0 <= kminus);
            k = kminus = kplus = k0;
            vmin = y[k];
            vmax = vmin + 2.0 * lambda;
            umin = lambda;
            umax = -lambda;
        } else if ((umax += y[k + 1] - vmax) > lambda) {
            do x[k0++] = vmax; while (k0 <= kplus);
            k = kminus = kplus = k0;
            vmax = y[k];
            vmin = vmax - 2.0 * lambda;
            umin = lambda;
            umax = -lambda;
        } else {
            ++k;
            if (umin >= lambda) {
                kminus = k;
                vmin += (umin - lambda) / (kminus - k0 + 1);
                umin = lambda;
            }
            if (umax <= -lambda) {
                kplus = k;
                vmax += (umax + lambda) / (kplus - k0 + 1);
                umax = -lambda;
            }
        }
    }
}

/// Largest violation of the 1D TV optimality conditions: the running sum
/// c_j of (y - x) must satisfy |c_j| <= lambda, c_{n-1} = 0, and
/// c_j = -lambda sign(x[j+1] - x[j]) wherever x jumps.
inline double tv1d_kkt_violation(const std::vector<double>& y, const std::vector<double>& x, double lambda) {
    double c = 0.0, worst = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
        c += y[j] - x[j];
        worst = std::max(worst, std::abs(c) - lambda);
        if (j + 1 < y.size()) {
            const double jump = x[j + 1] - x[j];
            if (std::abs(jump) > 1e-12) worst = std::max(worst, std::abs(c + lambda * (jump > 0 ? 1.0 : -1.0)));
        } else {
            worst = std::max(worst, std::abs(c));
        }
    }
    return worst;
}

/// Distance from f to range(A^T), relative to |f|.
inline double range_residual(const Eigen::MatrixXd& a, const Eigen::VectorXd& f) {
    const Eigen::MatrixXd at = a.transpose();
    const Eigen::VectorXd proj = at * (a * at).ldlt().solve(a * f);
    return (f - proj).norm() / f.norm();
}

} // namespace oracle
