#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "recon/bench.hpp"
#include "recon/error.hpp"
#include "recon/grid.hpp"
#include "recon/linear_map.hpp"
#include "recon/operators.hpp"
#include "recon/prox.hpp"
#include "recon/vec.hpp"

namespace recon {

/// Variational reconstruction problem.
///
/// quadratic (Tikhonov):  J(f) = |g - Hf|^2 + lambda |Lf|^2
/// abs / student:         J(f) = 1/2 |g - Hf|^2 + lambda sum_n Phi([Lf]_n)
/// indicator_nonneg:      J(f) = 1/2 |g - Hf|^2 subject to f >= 0
///
/// The sparse form is the MAP objective with Gaussian noise; lambda plays
/// the role of the noise variance. L defaults to the identity.
struct Objective {
    LinearMap forward;
    Vec data;
    std::optional<LinearMap> reg_op;
    Penalty penalty = Penalty::quadratic;
    double lambda = 0.0;
    double student_r = 1.0;

    LinearMap reg() const { return reg_op ? *reg_op : op_identity(forward.domain()); }
    const Space& domain() const { return forward.domain(); }

    void validate() const {
        require(data.size() == forward.range().storage(), "Objective: data does not match the forward range");
        require(std::isfinite(lambda) && lambda >= 0.0, "Objective: lambda must be finite and >= 0");
        require(forward.domain().field == Field::real, "Objective: reconstruction domain must be real");
        if (reg_op)
            require(reg_op->domain() == forward.domain(), "Objective: regularizer domain must match forward domain");
    }

    /// Unit-weight potential used inside proximal steps (weight applied via the step).
    ProxSpec unit_prox() const {
        switch (penalty) {
        case Penalty::quadratic: return {Penalty::quadratic, 1.0, 1.0, student_r};
        case Penalty::abs: return {Penalty::abs, 1.0, 1.0, student_r};
        case Penalty::student: return {Penalty::student, 1.0, 1.0, student_r};
        case Penalty::indicator_nonneg: return {Penalty::indicator_nonneg, 1.0, 1.0, student_r};
        }
        return {};
    }
};

inline double objective_value(const Objective& obj, std::span<const double> f) {
    const Vec residual = obj.forward.apply(f) - obj.data;
    const double data_term = norm2_squared(residual);
    if (obj.penalty == Penalty::indicator_nonneg) {
        for (double v : f)
            if (v < 0.0) return std::numeric_limits<double>::infinity();
        return 0.5 * data_term;
    }
    const Vec lf = obj.reg().apply(f);
    if (obj.penalty == Penalty::quadratic) return data_term + obj.lambda * norm2_squared(lf);
    const ProxSpec phi = obj.unit_prox();
    double reg = 0.0;
    for (double v : lf) reg += phi.potential(v);
    return 0.5 * data_term + obj.lambda * reg;
}

struct SolveReport {
    GridImage final;
    std::vector<double> objective_trace;
    std::vector<double> residual_trace;
    std::size_t iterations = 0;
    bool converged = false;
    std::size_t prox_fallbacks = 0;
    std::string config_echo;

    std::span<const double> solution() const { return final.data(); }
};

namespace detail {

inline GridImage as_image(const Space& space, Vec values) {
    return GridImage(space.width, space.height * space.channels, std::move(values));
}

/// Largest eigenvalue of a symmetric positive semidefinite operator by power
/// iteration from a seeded random start.
inline double power_iteration(const std::function<Vec(const Vec&)>& op, std::size_t n, int iterations,
                              Seed seed) {
    SplitMix64 rng(seed);
    Vec v = random_vec(n, rng);
    double nv = norm2(v);
    for (double& x : v) x /= nv;
    double estimate = 0.0;
    for (int k = 0; k < iterations; ++k) {
        Vec w = op(v);
        estimate = dot(v, w);
        const double nw = norm2(w);
        if (nw == 0.0) return 0.0;
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
    }
    return estimate;
}

/// (H*H + weight L*L) x
inline Vec regularized_normal(const LinearMap& h, const LinearMap& l, double weight, const Vec& x) {
    Vec out = h.normal(x);
    if (weight != 0.0) axpy(weight, l.normal(x), out);
    return out;
}

struct CgOutcome {
    std::size_t iterations = 0;
    bool converged = false;
};

/// Plain CG on A x = b for SPD (or consistent PSD) A, warm-started from x.
inline CgOutcome cg_solve(const std::function<Vec(const Vec&)>& apply_a, const Vec& b, Vec& x,
                          std::size_t max_iter, double rel_tol) {
    Vec r = b - apply_a(x);
    Vec p = r;
    double rr = norm2_squared(r);
    const double target = rel_tol * std::max(norm2(b), std::numeric_limits<double>::min());
    CgOutcome out;
    if (std::sqrt(rr) <= target) {
        out.converged = true;
        return out;
    }
    for (std::size_t k = 0; k < max_iter; ++k) {
        const Vec ap = apply_a(p);
        const double curvature = dot(p, ap);
        if (!(curvature > 0.0)) throw NumericalError("conjugate gradient breakdown: zero curvature direction");
        const double alpha = rr / curvature;
        axpy(alpha, p, x);
        axpy(-alpha, ap, r);
        const double rr_new = norm2_squared(r);
        out.iterations = k + 1;
        if (std::sqrt(rr_new) <= target) {
            out.converged = true;
            return out;
        }
        const double beta = rr_new / rr;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
        rr = rr_new;
    }
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Quadratic objectives

/// Gradient of the Tikhonov objective: -2 H*g + 2 (H*H + lambda L*L) f.
inline Vec grad_objective_quadratic(const Objective& obj, std::span<const double> f) {
    obj.validate();
    require(obj.penalty == Penalty::quadratic, "grad_objective_quadratic: penalty must be quadratic");
    require(f.size() == obj.domain().storage(), "grad_objective_quadratic: f does not match the domain");
    const Vec x(f.begin(), f.end());
    Vec grad = detail::regularized_normal(obj.forward, obj.reg(), obj.lambda, x);
    axpy(-1.0, obj.forward.adjoint(obj.data), grad);
    for (double& v : grad) v *= 2.0;
    return grad;
}

/// Lipschitz constant of the Tikhonov gradient, 2 * sigma_max^2([H; sqrt(lambda) L]).
inline double quadratic_lipschitz(const Objective& obj, int iterations = 50, Seed seed = {0x5eed}) {
    const LinearMap l = obj.reg();
    return 2.0 * detail::power_iteration(
                     [&](const Vec& v) { return detail::regularized_normal(obj.forward, l, obj.lambda, v); },
                     obj.domain().storage(), iterations, seed);
}

struct StepRule {
    bool automatic = true;
    double gamma = 0.0;

    static StepRule fixed(double gamma) { return {false, gamma}; }
    static StepRule automatic_rule() { return {true, 0.0}; }
};

/// f <- P(f - gamma grad J(f)); P projects onto f >= 0 when requested.
/// Stops when the relative objective change drops below `tol`.
inline SolveReport gradient_descent(const Objective& obj, std::span<const double> f0, StepRule step,
                                    std::size_t max_iter, double tol, bool project_nonneg = false) {
    obj.validate();
    require(obj.penalty == Penalty::quadratic, "gradient_descent: penalty must be quadratic");
    require(f0.size() == obj.domain().storage(), "gradient_descent: f0 does not match the domain");
    const double gamma = step.automatic ? 0.9 / quadratic_lipschitz(obj) : step.gamma;
    require(gamma > 0.0 && std::isfinite(gamma), "gradient_descent: step must be positive");

    Vec f(f0.begin(), f0.end());
    if (project_nonneg)
        for (double& v : f) v = std::max(v, 0.0);
    SolveReport report;
    double current = objective_value(obj, f);
    int rising = 0;
    for (std::size_t k = 0; k < max_iter; ++k) {
        const Vec grad = grad_objective_quadratic(obj, f);
        axpy(-gamma, grad, f);
        if (project_nonneg)
            for (double& v : f) v = std::max(v, 0.0);
        const double next = objective_value(obj, f);
        report.objective_trace.push_back(next);
        report.residual_trace.push_back(norm2(grad));
        report.iterations = k + 1;
        rising = next > current ? rising + 1 : 0;
        if (!step.automatic && rising >= 5)
            throw NumericalError("gradient_descent: objective increased for 5 consecutive iterations; "
                                 "step too large",
                                 report.objective_trace);
        const double change = std::abs(current - next);
        current = next;
        if (change <= tol * std::max(std::abs(next), std::numeric_limits<double>::min())) {
            report.converged = true;
            break;
        }
    }
    std::ostringstream echo;
    echo << "gradient_descent gamma=" << gamma << " max_iter=" << max_iter << " tol=" << tol
         << " nonneg=" << project_nonneg;
    report.config_echo = echo.str();
    report.final = detail::as_image(obj.domain(), std::move(f));
    return report;
}

/// CG on the normal equation (H*H + lambda L*L) f = H*g. The residual trace
/// records |H*g - (H*H + lambda L*L) f_k|.
inline SolveReport conjugate_gradient_normal(const Objective& obj, std::span<const double> f0,
                                             std::size_t max_iter, double tol) {
    obj.validate();
    require(obj.penalty == Penalty::quadratic, "conjugate_gradient_normal: penalty must be quadratic");
    require(f0.size() == obj.domain().storage(), "conjugate_gradient_normal: f0 does not match the domain");
    const LinearMap l = obj.reg();
    auto apply_a = [&](const Vec& v) { return detail::regularized_normal(obj.forward, l, obj.lambda, v); };
    const Vec b = obj.forward.adjoint(obj.data);
    const double g2 = norm2_squared(obj.data);
    const double target = tol * std::max(norm2(b), std::numeric_limits<double>::min());

    Vec f(f0.begin(), f0.end());
    Vec r = b - apply_a(f);
    Vec p = r;
    double rr = norm2_squared(r);
    SolveReport report;
    // J(f) = |g|^2 - <f, b + r> with r = b - A f
    auto objective = [&](const Vec& x, const Vec& res) { return g2 - dot(x, b + res); };
    bool done = std::sqrt(rr) <= target;
    for (std::size_t k = 0; k < max_iter && !done; ++k) {
        const Vec ap = apply_a(p);
        const double curvature = dot(p, ap);
        if (!(curvature > 0.0))
            throw NumericalError("conjugate_gradient_normal: breakdown (zero curvature); "
                                 "the normal matrix is singular for this right-hand side",
                                 report.objective_trace);
        const double alpha = rr / curvature;
        axpy(alpha, p, f);
        axpy(-alpha, ap, r);
        const double rr_new = norm2_squared(r);
        report.objective_trace.push_back(objective(f, r));
        report.residual_trace.push_back(std::sqrt(rr_new));
        report.iterations = k + 1;
        done = std::sqrt(rr_new) <= target;
        const double beta = rr_new / rr;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
        rr = rr_new;
    }
    report.converged = done;
    std::ostringstream echo;
    echo << "conjugate_gradient_normal lambda=" << obj.lambda << " max_iter=" << max_iter << " tol=" << tol;
    report.config_echo = echo.str();
    report.final = detail::as_image(obj.domain(), std::move(f));
    return report;
}

// ---------------------------------------------------------------------------
// Null-space example

struct NullspaceRow {
    std::array<double, 3> f0{};
    std::array<double, 3> solution{};
    double sse = 0.0;
    std::size_t iterations = 0;
};

struct NullspaceDemo {
    std::array<double, 9> matrix{1, 0, 1, 0, 1, -1, 1, 1, 0};
    std::array<double, 3> data{3, -1, 2.1};
    std::array<double, 3> null_vector{1, -1, -1};
    std::vector<NullspaceRow> rows;
};

/// Solves the normal equation of a 3x3 system with a one-dimensional null
/// space by CG from three starting points. CG never leaves
/// f0 + range(H*H), so each start keeps its null-space component and the
/// solutions differ by multiples of (1, -1, -1).
inline NullspaceDemo nullspace_demo() {
    NullspaceDemo demo;
    const Objective obj{op_dense(3, 3, {demo.matrix.begin(), demo.matrix.end()}),
                        Vec(demo.data.begin(), demo.data.end()),
                        std::nullopt,
                        Penalty::quadratic,
                        0.0};
    for (const std::array<double, 3>& start :
         {std::array<double, 3>{0, 0, 0}, std::array<double, 3>{0, 0, 1}, std::array<double, 3>{13, 8, 18}}) {
        const SolveReport rep = conjugate_gradient_normal(obj, start, 3, 1e-10);
        NullspaceRow row{start, {}, 0.0, rep.iterations};
        std::copy(rep.solution().begin(), rep.solution().end(), row.solution.begin());
        row.sse = norm2_squared(obj.forward.apply(rep.solution()) - obj.data);
        demo.rows.push_back(row);
    }
    return demo;
}

// ---------------------------------------------------------------------------
// Sparsity-promoting objectives

/// Lipschitz constant of grad 1/2 |g - Hf|^2, i.e. sigma_max(H)^2.
inline double data_lipschitz(const LinearMap& h, int iterations = 50, Seed seed = {0x5eed}) {
    return detail::power_iteration([&](const Vec& v) { return h.normal(v); }, h.domain().storage(),
                                   iterations, seed);
}

/// |f - prox(f - gamma grad)| / gamma: zero exactly at a minimizer of the
/// l1 objective with L = identity.
inline double ista_fixed_point_residual(const Objective& obj, std::span<const double> f, double gamma) {
    Vec x(f.begin(), f.end());
    Vec grad = obj.forward.adjoint(obj.forward.apply(x) - obj.data);
    Vec y = x;
    axpy(-gamma, grad, y);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - soft_threshold(y[i], gamma * obj.lambda);
        acc += d * d;
    }
    return std::sqrt(acc) / gamma;
}

/// Forward-backward splitting for 1/2 |g - Hf|^2 + lambda |f|_1 with step
/// 0.9 / sigma_max(H)^2. With `accelerate`, uses FISTA momentum
/// t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2. Stops when the relative objective
/// change falls below `tol`; the residual trace is |f_{k+1} - f_k| / step.
inline SolveReport ista(const Objective& obj, std::span<const double> f0, bool accelerate, std::size_t max_iter,
                        double tol) {
    obj.validate();
    require(obj.penalty == Penalty::abs, "ista: penalty must be abs");
    require(!obj.reg_op || obj.reg_op->name() == "identity", "ista: regularizer must be the identity");
    require(f0.size() == obj.domain().storage(), "ista: f0 does not match the domain");
    const double lip = data_lipschitz(obj.forward);
    const double gamma = lip > 0.0 ? 0.9 / lip : 1.0;
    const double threshold = gamma * obj.lambda;

    Vec f(f0.begin(), f0.end());
    Vec y = f;
    double t = 1.0;
    double current = objective_value(obj, f);
    int rising = 0;
    SolveReport report;
    for (std::size_t k = 0; k < max_iter; ++k) {
        Vec z = y;
        axpy(-gamma, obj.forward.adjoint(obj.forward.apply(y) - obj.data), z);
        Vec next(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) next[i] = soft_threshold(z[i], threshold);
        const double step_norm = norm2(next - f);
        if (accelerate) {
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            const double momentum = (t - 1.0) / t_next;
            for (std::size_t i = 0; i < y.size(); ++i) y[i] = next[i] + momentum * (next[i] - f[i]);
            t = t_next;
        } else {
            y = next;
        }
        f = std::move(next);
        const double value = objective_value(obj, f);
        report.objective_trace.push_back(value);
        report.residual_trace.push_back(step_norm / gamma);
        report.iterations = k + 1;
        rising = value > current ? rising + 1 : 0;
        if (!accelerate && rising >= 5)
            throw NumericalError("ista: objective increased for 5 consecutive iterations", report.objective_trace);
        const double change = std::abs(current - value);
        current = value;
        if (change <= tol * std::max(std::abs(value), std::numeric_limits<double>::min())) {
            report.converged = true;
            break;
        }
    }
    std::ostringstream echo;
    echo << (accelerate ? "fista" : "ista") << " lambda=" << obj.lambda << " step=" << gamma
         << " max_iter=" << max_iter << " tol=" << tol;
    report.config_echo = echo.str();
    report.final = detail::as_image(obj.domain(), std::move(f));
    return report;
}

struct AdmmOptions {
    double rho = 1.0;
    std::size_t max_iter = 500;
    double tol_primal = 1e-6;
    double tol_dual = 1e-6;
    std::size_t inner_max_iter = 30;
    double inner_tol = 1e-8;
};

/// Scaled-form ADMM for 1/2 |g - Hf|^2 + lambda sum Phi(u) s.t. u = Lf:
///   f <- argmin 1/2 |g - Hf|^2 + rho/2 |Lf - u + a|^2   (inner CG)
///   u <- prox_{(lambda/rho) Phi}(Lf + a)
///   a <- a + Lf - u
/// A quadratic penalty solves the Tikhonov problem with the same lambda.
/// Converged when |Lf - u| <= tol_primal and rho |L*(u - u_prev)| <= tol_dual.
inline SolveReport admm(const Objective& obj, std::span<const double> f0, const AdmmOptions& opt) {
    obj.validate();
    require(obj.penalty == Penalty::abs || obj.penalty == Penalty::quadratic || obj.penalty == Penalty::student,
            "admm: penalty must be abs, quadratic or student");
    require(opt.rho > 0.0 && std::isfinite(opt.rho), "admm: rho must be positive");
    require(f0.size() == obj.domain().storage(), "admm: f0 does not match the domain");
    const LinearMap l = obj.reg();
    const ProxSpec phi = obj.unit_prox();
    const double prox_step = obj.lambda / opt.rho;

    Vec f(f0.begin(), f0.end());
    Vec lf = l.apply(f);
    Vec u = lf;
    Vec alpha(u.size(), 0.0);
    const Vec htg = obj.forward.adjoint(obj.data);
    auto apply_a = [&](const Vec& v) { return detail::regularized_normal(obj.forward, l, opt.rho, v); };

    SolveReport report;
    for (std::size_t k = 0; k < opt.max_iter; ++k) {
        Vec rhs = htg;
        axpy(opt.rho, l.adjoint(u - alpha), rhs);
        detail::cg_solve(apply_a, rhs, f, opt.inner_max_iter, opt.inner_tol);
        lf = l.apply(f);

        Vec v = lf + alpha;
        Vec u_next;
        if (prox_step > 0.0) {
            ProxResult pr = prox_apply(phi, v, prox_step);
            report.prox_fallbacks += pr.fallbacks;
            u_next = std::move(pr.values);
        } else {
            u_next = v;
        }
        const double dual = opt.rho * norm2(l.adjoint(u_next - u));
        u = std::move(u_next);
        const Vec gap = lf - u;
        axpy(1.0, gap, alpha);
        const double primal = norm2(gap);

        report.objective_trace.push_back(objective_value(obj, f));
        report.residual_trace.push_back(primal);
        report.iterations = k + 1;
        if (!std::isfinite(report.objective_trace.back()))
            throw NumericalError("admm: objective is not finite", report.objective_trace);
        if (primal <= opt.tol_primal && dual <= opt.tol_dual) {
            report.converged = true;
            break;
        }
    }
    std::ostringstream echo;
    echo << "admm penalty=" << to_string(obj.penalty) << " lambda=" << obj.lambda << " rho=" << opt.rho
         << " max_iter=" << opt.max_iter << " tol_primal=" << opt.tol_primal << " tol_dual=" << opt.tol_dual;
    report.config_echo = echo.str();
    report.final = detail::as_image(obj.domain(), std::move(f));
    return report;
}

// ---------------------------------------------------------------------------
// Regularization-parameter sweep

struct SweepRow {
    double lambda = 0.0;
    double metric = 0.0;
};

struct SweepTable {
    std::vector<SweepRow> rows;
    std::size_t best = 0;

    double best_lambda() const { return rows.at(best).lambda; }
    double best_metric() const { return rows.at(best).metric; }
};

/// Runs `solve` for every lambda and scores the result with snr_db against
/// `truth`. The first maximum wins ties.
inline SweepTable lambda_sweep(const std::vector<double>& lambdas,
                               const std::function<GridImage(double)>& solve, const GridImage& truth) {
    require(!lambdas.empty(), "lambda_sweep: lambda list must be non-empty");
    SweepTable table;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        const GridImage estimate = solve(lambdas[i]);
        table.rows.push_back({lambdas[i], snr_db(truth, estimate)});
        if (table.rows[i].metric > table.rows[table.best].metric) table.best = i;
    }
    return table;
}

} // namespace recon
