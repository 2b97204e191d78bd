#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>

#include "recon/error.hpp"
#include "recon/vec.hpp"

namespace recon {

enum class Field { real, complex };

/// Shape of an operator's domain or range: a (width, height) raster with an
/// optional channel count. One-dimensional vectors use height = 1.
struct Space {
    std::size_t width = 0;
    std::size_t height = 1;
    std::size_t channels = 1;
    Field field = Field::real;

    /// Number of (possibly complex) entries.
    std::size_t count() const noexcept { return width * height * channels; }
    /// Length of the flat real storage.
    std::size_t storage() const noexcept { return count() * (field == Field::complex ? 2 : 1); }

    bool operator==(const Space&) const = default;

    std::string describe() const {
        return std::to_string(width) + "x" + std::to_string(height) +
               (channels > 1 ? "x" + std::to_string(channels) : "") +
               (field == Field::complex ? " complex" : " real");
    }
};

inline Space real_space(std::size_t width, std::size_t height = 1, std::size_t channels = 1) {
    return {width, height, channels, Field::real};
}

inline Space complex_space(std::size_t width, std::size_t height = 1) {
    return {width, height, 1, Field::complex};
}

/// Matrix-free linear operator with an exact adjoint.
///
/// Complex spaces are stored interleaved, so every map is a real-linear map
/// between real vector spaces and the adjoint is taken with respect to the
/// real inner product Re<x, y>. For complex-linear maps this coincides with
/// the usual conjugate-transpose.
class LinearMap {
public:
    using Kernel = std::function<void(std::span<const double>, std::span<double>)>;

    LinearMap(std::string name, Space domain, Space range, Kernel forward, Kernel adjoint)
        : name_(std::move(name)),
          domain_(domain),
          range_(range),
          forward_(std::move(forward)),
          adjoint_(std::move(adjoint)) {}

    const std::string& name() const noexcept { return name_; }
    const Space& domain() const noexcept { return domain_; }
    const Space& range() const noexcept { return range_; }

    Vec apply(std::span<const double> x) const {
        require(x.size() == domain_.storage(),
                name_ + ": apply expects " + std::to_string(domain_.storage()) + " values, got " +
                    std::to_string(x.size()));
        Vec out(range_.storage(), 0.0);
        forward_(x, out);
        return out;
    }

    Vec adjoint(std::span<const double> y) const {
        require(y.size() == range_.storage(),
                name_ + ": adjoint expects " + std::to_string(range_.storage()) + " values, got " +
                    std::to_string(y.size()));
        Vec out(domain_.storage(), 0.0);
        adjoint_(y, out);
        return out;
    }

    /// H*H x
    Vec normal(std::span<const double> x) const { return adjoint(apply(x)); }

private:
    std::string name_;
    Space domain_;
    Space range_;
    Kernel forward_;
    Kernel adjoint_;
};

inline LinearMap op_identity(const Space& space) {
    auto copy = [](std::span<const double> in, std::span<double> out) {
        std::copy(in.begin(), in.end(), out.begin());
    };
    return {"identity", space, space, copy, copy};
}

inline LinearMap op_scale(const Space& space, double factor) {
    auto scale = [factor](std::span<const double> in, std::span<double> out) {
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = factor * in[i];
    };
    return {"scale", space, space, scale, scale};
}

/// outer after inner.
inline LinearMap op_compose(const LinearMap& outer, const LinearMap& inner) {
    require(inner.range() == outer.domain(),
            "op_compose: range of " + inner.name() + " (" + inner.range().describe() +
                ") does not match domain of " + outer.name() + " (" + outer.domain().describe() + ")");
    auto forward = [outer, inner](std::span<const double> in, std::span<double> out) {
        const Vec mid = inner.apply(in);
        const Vec res = outer.apply(mid);
        std::copy(res.begin(), res.end(), out.begin());
    };
    auto adjoint = [outer, inner](std::span<const double> in, std::span<double> out) {
        const Vec mid = outer.adjoint(in);
        const Vec res = inner.adjoint(mid);
        std::copy(res.begin(), res.end(), out.begin());
    };
    return {outer.name() + "*" + inner.name(), inner.domain(), outer.range(), forward, adjoint};
}

/// Relative mismatch |<Ax, y> - <x, A*y>| / (|<Ax, y>| + |<x, A*y>|) for one
/// pair of random vectors.
inline double dot_test(const LinearMap& map, SplitMix64& rng) {
    const Vec x = random_vec(map.domain().storage(), rng);
    const Vec y = random_vec(map.range().storage(), rng);
    const double lhs = dot(map.apply(x), y);
    const double rhs = dot(x, map.adjoint(y));
    const double scale = std::abs(lhs) + std::abs(rhs);
    return scale == 0.0 ? 0.0 : std::abs(lhs - rhs) / scale;
}

} // namespace recon
