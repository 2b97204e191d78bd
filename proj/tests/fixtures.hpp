#pragma once

// Operator fixtures shared by the unit tests and the acceptance binary.

#include <string>
#include <vector>

#include "recon/recon.hpp"

namespace recon {

inline GridImage random_image(std::size_t w, std::size_t h, std::uint64_t seed) {
    SplitMix64 rng(Seed{seed});
    return GridImage(w, h, random_vec(w * h, rng));
}

inline double worst_dot_test(const LinearMap& m, std::uint64_t seed, int trials = 100) {
    SplitMix64 rng(Seed{seed});
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) worst = std::max(worst, dot_test(m, rng));
    return worst;
}

struct NamedMap {
    std::string label;
    LinearMap map;
    double tolerance;
};

/// Every operator kind the library ships, at small sizes.
inline std::vector<NamedMap> shipped_maps() {
    const std::size_t n = 16;
    SplitMix64 rng(Seed{77});
    ComplexGrid cmul(n, n);
    for (auto& v : cmul.data()) v = {rng.normal(), rng.normal()};
    const Mask half = Mask::random(n, n, 0.5, Seed{5});
    return {
        {"mask", op_mask(half), 1e-10},
        {"mask_complex", op_mask(half, Field::complex), 1e-10},
        {"multiply_real", op_multiply(random_image(n, n, 1)), 1e-10},
        {"multiply_complex", op_multiply(cmul), 1e-10},
        {"multiply_real_to_complex", op_multiply(cmul, Field::real), 1e-10},
        {"dft2_real", op_dft2(n, n), 1e-6},
        {"dft2_complex", op_dft2(n, 12, Field::complex), 1e-6},
        {"convolve_circular", op_convolve(random_image(n, n, 2)), 1e-6},
        {"convolve_linear", op_convolve(random_image(5, 3, 3), ConvolutionMode::zeropad_linear, n, 12), 1e-6},
        {"radon_square", op_radon({45, 24, 1.0}, n, n), 1e-6},
        {"radon_rect_fine", op_radon({10, 40, 0.5}, 24, 16, 0.75), 1e-6},
        {"radon_odd_single", op_radon({1, 17, 1.3}, 17, 17, 1.0), 1e-6},
        {"grad", op_grad(n, 12), 1e-10},
        {"mri", op_compose(op_mask(half, Field::complex), op_dft2(n, n)), 1e-10},
    };
}

/// Five seeded chains: three square maps followed by one head map.
inline std::vector<NamedMap> random_chains() {
    const std::size_t n = 16;
    SplitMix64 pick(Seed{2024});
    std::vector<NamedMap> out;
    for (int trial = 0; trial < 5; ++trial) {
        const std::uint64_t s = 1000 + static_cast<std::uint64_t>(trial) * 10;
        const std::vector<LinearMap> square{op_multiply(random_image(n, n, s)), op_convolve(random_image(n, n, s + 1)),
                                            op_scale(real_space(n, n), 2.5)};
        const std::vector<LinearMap> heads{op_mask(Mask::random(n, n, 0.3, Seed{s + 2})),
                                           op_radon({12, 20, 1.0}, n, n), op_grad(n, n), op_dft2(n, n)};
        LinearMap chain = square[pick.below(square.size())];
        for (int k = 0; k < 2; ++k) chain = op_compose(square[pick.below(square.size())], chain);
        chain = op_compose(heads[pick.below(heads.size())], chain);
        out.push_back({chain.name(), chain, 1e-6});
    }
    return out;
}

} // namespace recon
