// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "recon/cli.hpp"

using namespace recon;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
    char buf[192];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// -- 1 ----------------------------------------------------------------------

Outcome nullspace_reproduction() {
    const NullspaceDemo demo = nullspace_demo();
    const std::array<std::array<double, 3>, 3> expected{{{1.70, 0.37, 1.33}, {1.37, 0.70, 1.67}, {-2.30, 4.37, 5.33}}};
    bool ok = demo.rows.size() == 3;
    std::string detail;
    for (std::size_t r = 0; r < demo.rows.size() && r < 3; ++r) {
        const NullspaceRow& row = demo.rows[r];
        double worst = 0.0;
        for (std::size_t i = 0; i < 3; ++i) worst = std::max(worst, std::abs(row.solution[i] - expected[r][i]));
        const bool row_ok = std::abs(row.sse - 0.0033) <= 5e-4 && worst <= 0.02;
        ok = ok && row_ok;
        detail += fmt("row%.0f sse=%.5f ", static_cast<double>(r + 1), row.sse) +
                  fmt("f=(%.3f,%.3f,%.3f) ", row.solution[0], row.solution[1], row.solution[2]) +
                  fmt("max|dev|=%.3f; ", worst) + (row_ok ? "" : "[off] ");
    }
    const Eigen::Vector3d nv(1.0, -1.0, -1.0);
    double worst_cross = 0.0;
    for (std::size_t a = 0; a < demo.rows.size(); ++a)
        for (std::size_t b = a + 1; b < demo.rows.size(); ++b) {
            Eigen::Vector3d d;
            for (int i = 0; i < 3; ++i)
                d(i) = demo.rows[a].solution[static_cast<std::size_t>(i)] - demo.rows[b].solution[static_cast<std::size_t>(i)];
            worst_cross = std::max(worst_cross, d.cross(nv).norm() / nv.norm());
        }
    ok = ok && worst_cross <= 1e-4;
    return {ok, detail + fmt("parallel residual %.2e", worst_cross)};
}

// -- 2 ----------------------------------------------------------------------

Outcome dot_tests() {
    std::vector<NamedMap> maps = shipped_maps();
    for (NamedMap& m : random_chains()) maps.push_back(std::move(m));
    bool ok = true;
    std::string failed;
    double worst_ratio = 0.0;
    for (const NamedMap& m : maps) {
        const double w = worst_dot_test(m.map, 100);
        worst_ratio = std::max(worst_ratio, w / m.tolerance);
        if (w > m.tolerance) {
            ok = false;
            failed += " " + m.label;
        }
    }
    return {ok, std::to_string(maps.size()) + " maps x 100 trials, worst error/tolerance " + fmt("%.2e", worst_ratio) +
                    (failed.empty() ? "" : "; failed:" + failed)};
}

// -- 3 ----------------------------------------------------------------------

Outcome fourier_slice() {
    const GridImage img = shepp_logan(256);
    bool ok = true;
    std::string detail;
    for (double theta : {0.0, std::numbers::pi / 6, std::numbers::pi / 4, std::numbers::pi / 2}) {
        const double e = fourier_slice_check(img, theta);
        ok = ok && e < 3e-2;
        detail += fmt("theta=%.4f err=%.2e; ", theta, e);
    }
    return {ok, detail};
}

// -- 4 ----------------------------------------------------------------------

Outcome oracle_tomography() {
    const std::size_t n = 256;
    const double pitch = 2.0 / n;
    const EllipsePhantom sl = shepp_logan_phantom();
    const GridImage truth = render(sl, n);
    const RadonGeometry g180{180, n, pitch};
    const Sinogram analytic = analytic_sinogram(sl, g180);
    const Vec discrete = radon(truth, g180).data;
    const double rel = norm2(discrete - analytic.data) / norm2(analytic.data);
    const double snr180 = snr_db(truth, fbp(analytic, RampFilter::make(n, pitch), n, n, pitch));
    const RadonGeometry g360{360, n, pitch};
    const double snr360 = snr_db(truth, fbp(analytic_sinogram(sl, g360), RampFilter::make(n, pitch), n, n, pitch));
    const bool ok = rel < 0.02 && snr180 >= 15.0 && snr360 > snr180;
    return {ok, fmt("radon vs analytic %.3f%%; FBP 180 angles %.2f dB, 360 angles %.2f dB", 100.0 * rel, snr180,
                    snr360)};
}

// -- 5 ----------------------------------------------------------------------

Outcome map_equals_mmse() {
    SplitMix64 rng(Seed{555});
    const std::array<std::pair<std::size_t, std::size_t>, 6> shapes{{{4, 4}, {4, 8}, {8, 4}, {2, 16}, {5, 6}, {3, 7}}};
    double worst_agree = 0.0, worst_normal = 0.0;
    for (int t = 0; t < 20; ++t) {
        const auto [w, h] = shapes[rng.below(shapes.size())];
        const std::size_t n = w * h;
        const GridImage kernel = random_image(w, h, 600 + static_cast<std::uint64_t>(t));
        const GridImage g = random_image(w, h, 700 + static_cast<std::uint64_t>(t));
        GridImage prior(w, h);
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) prior(x, y) = 0.2 + rng.uniform();
        GridImage sym(w, h);
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) sym(x, y) = 0.5 * (prior(x, y) + prior((w - x) % w, (h - y) % h));
        const double sigma = 0.05 + rng.uniform();

        const Eigen::MatrixXd hm = oracle::dense_of(op_convolve(kernel));
        const Eigen::MatrixXd cov = oracle::dense_of(op_convolve(idft2(ComplexGrid(sym)).real_part()));
        const Eigen::VectorXd gv = oracle::to_eigen(g.data());
        const Eigen::MatrixXd a = hm.transpose() * hm + sigma * sigma * cov.inverse();
        const Eigen::VectorXd map = a.ldlt().solve(hm.transpose() * gv);
        const Eigen::MatrixXd s = hm * cov * hm.transpose() + sigma * sigma * Eigen::MatrixXd::Identity(n, n);
        const Eigen::VectorXd mmse = cov * hm.transpose() * s.ldlt().solve(gv);
        const Eigen::VectorXd wiener = oracle::to_eigen(wiener_deconvolve(g, kernel, sigma, sym).data());

        worst_agree = std::max({worst_agree, (map - mmse).norm() / map.norm(), (wiener - map).norm() / map.norm()});
        const Eigen::VectorXd rhs = hm.transpose() * gv;
        for (const Eigen::VectorXd* f : {&map, &mmse, &wiener})
            worst_normal = std::max(worst_normal, (a * *f - rhs).norm() / rhs.norm());
    }
    return {worst_agree <= 1e-7 && worst_normal <= 1e-7,
            fmt("20 instances: MAP/MMSE/Wiener disagreement %.2e, normal-equation residual %.2e", worst_agree,
                worst_normal)};
}

// -- 6 ----------------------------------------------------------------------

Outcome solver_agreement() {
    const SparseInstance inst = sparse_recovery_instance();
    const Objective obj{inst.forward(), inst.data, std::nullopt, Penalty::abs, 0.01};
    const SolveReport a = ista(obj, Vec(inst.cols, 0.0), false, 200000, 1e-15);
    const SolveReport f = ista(obj, Vec(inst.cols, 0.0), true, 200000, 1e-15);
    AdmmOptions opt;
    opt.max_iter = 20000;
    opt.tol_primal = 1e-8;
    opt.tol_dual = 1e-8;
    const SolveReport d = admm(obj, Vec(inst.cols, 0.0), opt);
    const double ja = objective_value(obj, a.solution());
    const double jf = objective_value(obj, f.solution());
    const double jd = objective_value(obj, d.solution());
    const double spread = (std::max({ja, jf, jd}) - std::min({ja, jf, jd})) / std::min({ja, jf, jd});
    bool monotone = true;
    for (std::size_t k = 1; k < a.objective_trace.size(); ++k)
        monotone = monotone && a.objective_trace[k] <= a.objective_trace[k - 1];
    return {spread <= 1e-5 && monotone && a.converged && f.converged && d.converged,
            fmt("J ista=%.10f fista=%.10f admm=%.10f", ja, jf, jd) + fmt(" spread %.2e", spread) +
                " ista monotone=" + (monotone ? "yes" : "no") + " iterations " + std::to_string(a.iterations) + "/" +
                std::to_string(f.iterations) + "/" + std::to_string(d.iterations)};
}

// -- 7 ----------------------------------------------------------------------

Outcome representer() {
    SplitMix64 rng(Seed{7007});
    const std::size_t m = 8, n = 20;
    double worst_range = 0.0;
    for (int t = 0; t < 50; ++t) {
        const std::vector<double> hm = oracle::random_matrix(m, n, rng);
        const Objective obj{op_dense(m, n, hm), random_vec(m, rng), std::nullopt, Penalty::quadratic, 0.0};
        const SolveReport rep = conjugate_gradient_normal(obj, Vec(n, 0.0), 200, 1e-13);
        worst_range = std::max(worst_range, oracle::range_residual(oracle::to_matrix(m, n, hm), oracle::to_eigen(rep.solution())));
    }
    std::size_t worst_nnz = 0;
    for (int t = 0; t < 50; ++t) {
        const LinearMap h = op_dense(m, n, oracle::random_matrix(m, n, rng));
        const Vec g = random_vec(m, rng);
        const Objective obj{h, g, std::nullopt, Penalty::abs, 0.1 * norm_inf(h.adjoint(g))};
        const SolveReport rep = ista(obj, Vec(n, 0.0), false, 100000, 1e-16);
        std::size_t nnz = 0;
        for (double v : rep.solution()) nnz += std::abs(v) > 1e-8;
        worst_nnz = std::max(worst_nnz, nnz);
    }
    return {worst_range <= 1e-6 && worst_nnz <= m,
            fmt("l2: worst range(H*) residual %.2e; ", worst_range) + "l1: max nonzeros " +
                std::to_string(worst_nnz) + " (M = " + std::to_string(m) + ")"};
}

// final ADMM primal residual and its tolerance for each shipped benchmark run
std::vector<std::pair<std::string, double>> primal_log;

void log_primal(const std::string& experiment, const cli::ExperimentConfig& c, const std::vector<double>& primal) {
    for (std::size_t i = 0; i < primal.size(); ++i)
        primal_log.emplace_back(experiment + " lambda " + fmt("%g", c.solver.lambdas[i]), primal[i] / c.solver.tol);
}

// -- 8 ----------------------------------------------------------------------

Outcome l1_beats_l2() {
    const cli::ExperimentConfig c = cli::default_config("compare_l2_l1");
    const cli::CompareResult r = cli::run_compare_l2_l1(c);
    log_primal("compare_l2_l1", c, r.tv_primal);
    const double gap = r.l1.best_metric() - r.l2.best_metric();
    return {gap >= 1.0, fmt("128^2, measurement SNR %.1f dB: TV-ADMM %.2f dB", r.measurement_snr, r.l1.best_metric()) +
                            fmt(" (lambda %g), ", r.l1.best_lambda()) +
                            fmt("Tikhonov-CG %.2f dB (lambda %g), gap %.2f dB", r.l2.best_metric(), r.l2.best_lambda(),
                                gap)};
}

// -- 9 ----------------------------------------------------------------------

Outcome compressibility() {
    const GridImage img = shepp_logan(256);
    const std::vector<double> fractions{0.0025, 0.005, 0.01, 0.02, 0.03, 0.05};
    bool ok = true;
    double worst_tie = 0.0;
    std::string detail;
    for (SparsifyingTransform t : {SparsifyingTransform::haar, SparsifyingTransform::dct8}) {
        const std::vector<CompressionRow> rows = compressibility_study(img, t, fractions);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i > 0 && !(rows[i].snr_db > rows[i - 1].snr_db)) ok = false;
            worst_tie = std::max(worst_tie, std::abs(rows[i].snr_db + 10.0 * std::log10(1.0 - rows[i].retained_energy)));
        }
        detail += to_string(t) + fmt(" 1%%=%.2f dB 5%%=%.2f dB; ", rows[2].snr_db, rows[5].snr_db);
    }
    return {ok && worst_tie <= 1e-6, detail + fmt("Parseval tie-out %.2e dB", worst_tie)};
}

// -- 10 ---------------------------------------------------------------------

Outcome fbp_below_tv() {
    const cli::ExperimentConfig c = cli::default_config("fbp_vs_tv");
    const cli::FbpTvResult r = cli::run_fbp_vs_tv(c);
    log_primal("fbp_vs_tv", c, r.tv_primal);
    return {r.fbp_snr < r.tv.best_metric(),
            fmt("%.0f views: FBP %.2f dB < TV-ADMM %.2f dB", static_cast<double>(c.geometry.n_angles), r.fbp_snr,
                r.tv.best_metric()) +
                "; reference values not reproduced: 5%-coefficient transform table on an undistributed image, "
                "learned-CNN column 28.5 dB with its 13.4 / 24.9 dB companions, effect-of-lambda figure "
                "(qualitative only)"};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 null-space reproduction", nullspace_reproduction},
        {"2 operator dot tests", dot_tests},
        {"3 Fourier slice theorem", fourier_slice},
        {"4 oracle tomography", oracle_tomography},
        {"5 MAP equals MMSE", map_equals_mmse},
        {"6 solver cross-agreement", solver_agreement},
        {"7 representer properties", representer},
        {"8 l1 beats l2", l1_beats_l2},
        {"9 compressibility", compressibility},
        {"10 FBP below TV", fbp_below_tv},
    };
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s  %-28s %8.2fs  %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), secs, o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    double worst = 0.0;
    std::string where;
    for (const auto& [label, ratio] : primal_log)
        if (ratio >= worst) worst = ratio, where = label;
    const bool primal_ok = !primal_log.empty() && worst <= 1.0;
    std::printf("%s  %-28s %8s   worst |Lf-u| / tol_primal = %.3f (%s) over %zu runs\n", primal_ok ? "PASS" : "FAIL",
                "ADMM primal residual", "", worst, where.c_str(), primal_log.size());
    if (!primal_ok) ++failures;
    std::printf("%d failing check(s) out of %zu\n", failures, criteria.size() + 1);
    return failures ? 1 : 0;
}
