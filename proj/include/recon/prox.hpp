#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "recon/error.hpp"
#include "recon/vec.hpp"

namespace recon {

/// Scalar potential functions Phi.
///   quadratic:        f^2 / (2 sigma2)
///   abs:              lambda |f|
///   student:          (r + 1/2) log(1 + f^2)
///   indicator_nonneg: 0 for f >= 0, +inf otherwise
enum class Penalty { quadratic, abs, student, indicator_nonneg };

inline std::string to_string(Penalty p) {
    switch (p) {
    case Penalty::quadratic: return "quadratic";
    case Penalty::abs: return "abs";
    case Penalty::student: return "student";
    case Penalty::indicator_nonneg: return "indicator_nonneg";
    }
    return "?";
}

struct ProxSpec {
    Penalty kind = Penalty::abs;
    double lambda = 1.0;
    double sigma2 = 1.0;
    double r = 1.0;

    double potential(double f) const {
        switch (kind) {
        case Penalty::quadratic: return f * f / (2.0 * sigma2);
        case Penalty::abs: return lambda * std::abs(f);
        case Penalty::student: return (r + 0.5) * std::log1p(f * f);
        case Penalty::indicator_nonneg: return f >= 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        }
        return 0.0;
    }

    void validate() const {
        require(std::isfinite(lambda) && lambda >= 0.0, "ProxSpec: lambda must be finite and >= 0");
        require(std::isfinite(sigma2) && sigma2 > 0.0, "ProxSpec: sigma2 must be positive");
        require(std::isfinite(r) && r > -0.5, "ProxSpec: r must exceed -1/2");
    }
};

struct ProxResult {
    Vec values;
    std::size_t fallbacks = 0; ///< elements resolved by grid search
};

inline double soft_threshold(double u, double threshold) {
    const double m = std::abs(u) - threshold;
    return m > 0.0 ? std::copysign(m, u) : 0.0;
}

namespace detail {

// Student-t prox for u > 0: minimizes q(f) = (u - f)^2 / 2 + c/2 log(1 + f^2)
// with c = step (2r + 1). Stationary points are the real roots of
//   p(f) = f^3 - u f^2 + (1 + c) f - u,
// all of which lie in (0, u). The cubic's critical points split [0, u] into
// monotone pieces; each sign change is resolved by Newton's method
// safeguarded with bisection. Returns false if any piece fails to converge
// in 100 steps.
inline bool student_prox_positive(double u, double c, double half_weight, double& result) {
    auto p = [&](double f) { return ((f - u) * f + (1.0 + c)) * f - u; };
    auto dp = [&](double f) { return (3.0 * f - 2.0 * u) * f + (1.0 + c); };
    auto q = [&](double f) { return 0.5 * (u - f) * (u - f) + half_weight * std::log1p(f * f); };

    std::vector<double> knots{0.0};
    const double disc = u * u - 3.0 * (1.0 + c);
    if (disc > 0.0) {
        const double root = std::sqrt(disc);
        for (double cp : {(u - root) / 3.0, (u + root) / 3.0})
            if (cp > 0.0 && cp < u) knots.push_back(cp);
    }
    knots.push_back(u);

    std::vector<double> roots;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        double lo = knots[i];
        double hi = knots[i + 1];
        double plo = p(lo);
        const double phi = p(hi);
        if (plo == 0.0) {
            roots.push_back(lo);
            continue;
        }
        if (phi == 0.0) {
            roots.push_back(hi);
            continue;
        }
        if ((plo < 0.0) == (phi < 0.0)) continue;
        double x = 0.5 * (lo + hi);
        bool converged = false;
        for (int it = 0; it < 100; ++it) {
            const double px = p(x);
            if (px == 0.0) {
                converged = true;
                break;
            }
            if ((px < 0.0) == (plo < 0.0)) {
                lo = x;
                plo = px;
            } else {
                hi = x;
            }
            const double d = dp(x);
            double next = d != 0.0 ? x - px / d : 0.5 * (lo + hi);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)) ||
                hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) {
                x = next;
                converged = true;
                break;
            }
            x = next;
        }
        if (!converged) return false;
        roots.push_back(x);
    }
    if (roots.empty()) return false;
    double best = roots.front();
    double best_q = q(best);
    for (double r : roots) {
        const double qr = q(r);
        if (qr < best_q || (qr == best_q && std::abs(r) < std::abs(best))) {
            best = r;
            best_q = qr;
        }
    }
    result = best;
    return true;
}

// Fallback: dense scan of [0, u] followed by golden-section refinement.
inline double student_prox_scan(double u, double half_weight) {
    auto q = [&](double f) { return 0.5 * (u - f) * (u - f) + half_weight * std::log1p(f * f); };
    constexpr int samples = 100000;
    double best = 0.0;
    double best_q = q(0.0);
    for (int i = 1; i <= samples; ++i) {
        const double f = u * static_cast<double>(i) / samples;
        const double v = q(f);
        if (v < best_q) {
            best = f;
            best_q = v;
        }
    }
    double lo = std::max(0.0, best - u / samples);
    double hi = std::min(u, best + u / samples);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 100; ++it) {
        const double a = hi - g * (hi - lo);
        const double b = lo + g * (hi - lo);
        if (q(a) < q(b))
            hi = b;
        else
            lo = a;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

/// argmin_f (u - f)^2 / 2 + step * Phi(f) for one element. `fallback` is
/// set when the Student root finder had to fall back to grid search.
inline double prox_scalar(const ProxSpec& spec, double u, double step, bool* fallback = nullptr) {
    if (fallback) *fallback = false;
    switch (spec.kind) {
    case Penalty::quadratic: return u / (1.0 + step / spec.sigma2);
    case Penalty::abs: return soft_threshold(u, step * spec.lambda);
    case Penalty::indicator_nonneg: return std::max(u, 0.0);
    case Penalty::student: {
        if (u == 0.0) return 0.0;
        const double mag = std::abs(u);
        const double half_weight = step * (spec.r + 0.5);
        double f = 0.0;
        if (!detail::student_prox_positive(mag, 2.0 * half_weight, half_weight, f)) {
            f = detail::student_prox_scan(mag, half_weight);
            if (fallback) *fallback = true;
        }
        return std::copysign(f, u);
    }
    }
    return u;
}

/// Elementwise proximal map of step * Phi.
inline ProxResult prox_apply(const ProxSpec& spec, std::span<const double> u, double step) {
    spec.validate();
    require(step > 0.0 && std::isfinite(step), "prox_apply: step must be positive");
    ProxResult out{Vec(u.size()), 0};
    for (std::size_t i = 0; i < u.size(); ++i) {
        require(std::isfinite(u[i]), "prox_apply: input must be finite");
        bool fell_back = false;
        out.values[i] = prox_scalar(spec, u[i], step, &fell_back);
        if (fell_back) ++out.fallbacks;
    }
    return out;
}

} // namespace recon
