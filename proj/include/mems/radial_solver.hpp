#pragma once

// Radially symmetric solves of Delta u = lambda r^alpha / u^2 + P on the unit
// N-ball with u = 1 on the boundary, plus lambda-continuation to bracket the
// pull-in threshold and the closed-form existence bounds.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mems {

struct ProblemSpec {
    double lambda = 0.0;  // voltage
    double P = 0.0;       // external pressure
    double alpha = 0.0;   // permittivity exponent, f = r^alpha
    int N = 2;            // space dimension
    int n_grid = 256;

    void validate() const {
        if (lambda < 0.0) throw std::invalid_argument("ProblemSpec: lambda must be >= 0");
        if (P < 0.0) throw std::invalid_argument("ProblemSpec: P must be >= 0");
        if (alpha < 0.0)
            throw std::invalid_argument(
                "ProblemSpec: alpha must be >= 0 for the radial problem");
        if (N < 1) throw std::invalid_argument("ProblemSpec: N must be >= 1");
        if (n_grid < 64) throw std::invalid_argument("ProblemSpec: n_grid must be >= 64");
    }
};

struct RadialSolution {
    std::vector<double> r_grid;  // 0..1 inclusive
    std::vector<double> u;       // u[n] == 1
    bool converged = false;
    bool admissible = true;      // false if the iterate hit the positivity clamp
    int newton_iters = 0;
    double residual_norm = 0.0;
};

struct ContinuationStep {
    double lambda;
    double min_u;
    int newton_iters;
    bool converged;
};

struct ContinuationTrace {
    std::vector<ContinuationStep> steps;
    double lambda_star_estimate = 0.0;
    double lambda_ok = 0.0;    // largest lambda with a converged solution
    double lambda_fail = 0.0;  // smallest lambda where the branch was lost
};

struct TorsionConstants {
    double P_star;
    double integral_phi;
    double integral_phi_f;
    double volume;
};

struct TheoremOneBounds {
    double P_star;
    double lower;
    double upper;
};

struct NonexistenceRegime : std::domain_error {
    using std::domain_error::domain_error;
};

struct NoAdmissibleSolution : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Unit-ball torsion function Phi = (1-r^2)/(2N); P* = 2N. The moments of Phi
// and Phi*r^alpha are closed-form.
inline TorsionConstants torsion_constants(int N, double alpha) {
    if (N < 1) throw std::invalid_argument("torsion_constants: N must be >= 1");
    if (alpha < 0.0) throw std::invalid_argument("torsion_constants: alpha must be >= 0");
    const double volume = std::pow(M_PI, 0.5 * N) / std::tgamma(0.5 * N + 1.0);
    const double surface = N * volume;  // area of the unit sphere S^{N-1}
    TorsionConstants tc;
    tc.P_star = 2.0 * N;
    tc.volume = volume;
    tc.integral_phi = surface / (N * N * (N + 2.0));
    tc.integral_phi_f = surface / (N * (alpha + N) * (alpha + N + 2.0));
    return tc;
}

inline TheoremOneBounds theorem1_bounds(const ProblemSpec& spec) {
    spec.validate();
    const TorsionConstants tc = torsion_constants(spec.N, spec.alpha);
    if (spec.P >= tc.P_star)
        throw NonexistenceRegime("no positive solution exists for P >= P* = " +
                                 std::to_string(tc.P_star));
    TheoremOneBounds b;
    b.P_star = tc.P_star;
    const double sup_f = 1.0;  // max of r^alpha on the unit ball, alpha >= 0
    const double d = tc.P_star - spec.P;
    b.lower = 4.0 * d * d * d / (27.0 * tc.P_star * tc.P_star * sup_f);
    b.upper = (tc.volume - spec.P * tc.integral_phi) / tc.integral_phi_f;
    return b;
}

namespace detail {

// Discrete radial operator in conservative form, (r^{N-1} u')'/r^{N-1} with
// half-node coefficients; ghost-node symmetry closure at r = 0.
struct RadialOperator {
    int n;          // grid intervals; nodes 0..n, u[n] = 1 fixed
    int N;
    double h;
    std::vector<double> r;
    std::vector<double> cm, cp;  // r_{i-1/2}^{N-1}, r_{i+1/2}^{N-1} over h^2 r_i^{N-1}

    RadialOperator(int n_grid, int dim) : n(n_grid), N(dim), h(1.0 / n_grid) {
        r.resize(n + 1);
        cm.resize(n + 1, 0.0);
        cp.resize(n + 1, 0.0);
        for (int i = 0; i <= n; ++i) r[i] = i * h;
        for (int i = 1; i < n; ++i) {
            const double w = std::pow(r[i], N - 1) * h * h;
            cm[i] = std::pow(r[i] - 0.5 * h, N - 1) / w;
            cp[i] = std::pow(r[i] + 0.5 * h, N - 1) / w;
        }
    }

};

inline void solve_tridiagonal(std::vector<double>& sub, std::vector<double>& diag,
                              std::vector<double>& sup, std::vector<double>& rhs) {
    const int n = static_cast<int>(diag.size());
    for (int i = 1; i < n; ++i) {
        const double m = sub[i] / diag[i - 1];
        diag[i] -= m * sup[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (int i = n - 2; i >= 0; --i) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

}  // namespace detail

// Residual of the discrete equation at interior nodes 1..n-1, for a given
// profile (used for exact-solution order checks).
inline std::vector<double> radial_residual(const ProblemSpec& spec, double lambda,
                                           const std::vector<double>& u) {
    const int n = spec.n_grid;
    if (static_cast<int>(u.size()) != n + 1)
        throw std::invalid_argument("radial_residual: u must have n_grid+1 samples");
    detail::RadialOperator op(n, spec.N);
    std::vector<double> res(n + 1, 0.0);
    for (int i = 1; i < n; ++i) {
        const double lap = op.cp[i] * (u[i + 1] - u[i]) - op.cm[i] * (u[i] - u[i - 1]);
        res[i] = lap - lambda * std::pow(op.r[i], spec.alpha) / (u[i] * u[i]) - spec.P;
    }
    return res;
}

inline RadialSolution solve_radial(const ProblemSpec& spec, double lambda,
                                   const std::optional<RadialSolution>& init = std::nullopt,
                                   double tol = 1e-10, int max_iters = 100) {
    spec.validate();
    if (lambda < 0.0) throw std::invalid_argument("solve_radial: lambda must be >= 0");
    const int n = spec.n_grid;
    const double h = 1.0 / n;
    const double u_floor = 1e-8;
    detail::RadialOperator op(n, spec.N);

    RadialSolution sol;
    sol.r_grid = op.r;
    sol.u.assign(n + 1, 1.0);
    if (init) {
        if (static_cast<int>(init->u.size()) != n + 1)
            throw std::invalid_argument("solve_radial: init grid mismatch");
        sol.u = init->u;
        for (double& x : sol.u)
            if (!(x > 0.0)) throw std::invalid_argument("solve_radial: init must be positive");
    }
    sol.u[n] = 1.0;

    auto residual = [&](const std::vector<double>& u, std::vector<double>& G) {
        double norm = 0.0;
        for (int i = 0; i < n; ++i) {
            double lap;
            if (i == 0)
                lap = 2.0 * spec.N * (u[1] - u[0]) / (h * h);
            else
                lap = op.cp[i] * (u[i + 1] - u[i]) - op.cm[i] * (u[i] - u[i - 1]);
            G[i] = lap - lambda * std::pow(op.r[i], spec.alpha) / (u[i] * u[i]) - spec.P;
            norm = std::max(norm, std::abs(G[i]));
        }
        return norm;
    };

    std::vector<double> G(n), du(n);
    std::vector<double> sub(n), diag(n), sup(n);
    double norm = residual(sol.u, G);
    bool clamped = false;

    int it = 0;
    for (; it < max_iters && norm > tol; ++it) {
        // Tridiagonal Jacobian of the residual with respect to u[0..n-1].
        for (int i = 0; i < n; ++i) {
            if (i == 0) {
                diag[0] = -2.0 * spec.N / (h * h);
                sup[0] = 2.0 * spec.N / (h * h);
                sub[0] = 0.0;
            } else {
                sub[i] = op.cm[i];
                diag[i] = -(op.cp[i] + op.cm[i]);
                sup[i] = (i + 1 <= n - 1) ? op.cp[i] : 0.0;
            }
            diag[i] += 2.0 * lambda * std::pow(op.r[i], spec.alpha) /
                       (sol.u[i] * sol.u[i] * sol.u[i]);
        }
        for (int i = 0; i < n; ++i) du[i] = -G[i];
        detail::solve_tridiagonal(sub, diag, sup, du);

        // Damped step: halve until the residual decreases.
        double step = 1.0;
        std::vector<double> trial(n + 1);
        double new_norm = norm;
        for (int half = 0; half < 40; ++half) {
            for (int i = 0; i < n; ++i) {
                trial[i] = sol.u[i] + step * du[i];
                if (trial[i] < u_floor) {
                    trial[i] = u_floor;
                    clamped = true;
                }
            }
            trial[n] = 1.0;
            std::vector<double> Gt(n);
            new_norm = residual(trial, Gt);
            if (new_norm < norm) {
                G = Gt;
                break;
            }
            step *= 0.5;
        }
        if (!(new_norm < norm)) break;  // stagnated
        sol.u = trial;
        norm = new_norm;
    }

    sol.newton_iters = it;
    sol.residual_norm = norm;
    sol.converged = norm <= tol;
    double min_u = 1.0;
    for (int i = 0; i <= n; ++i) min_u = std::min(min_u, sol.u[i]);
    if (sol.converged && (min_u <= u_floor * (1.0 + 1e-6))) {
        sol.admissible = false;
        sol.converged = false;
    } else if (clamped && min_u <= u_floor * (1.0 + 1e-6)) {
        sol.admissible = false;
    }
    return sol;
}

// Failure-bracketing continuation from lambda = 0 along the minimal branch.
inline ContinuationTrace continue_in_lambda(const ProblemSpec& spec,
                                            double bracket_width = 1e-4) {
    spec.validate();
    const TheoremOneBounds bounds = theorem1_bounds(spec);

    ContinuationTrace trace;
    RadialSolution current = solve_radial(spec, 0.0);
    if (!current.converged)
        throw std::runtime_error("continue_in_lambda: failed at lambda = 0");
    double lambda = 0.0;
    trace.steps.push_back({0.0, 1.0, current.newton_iters, true});

    double step = bounds.upper / 64.0;
    const double step_floor = 0.25 * bracket_width;
    double lambda_fail = -1.0;

    while (true) {
        const double lambda_try = lambda + step;
        if (lambda_try > bounds.upper * 1.05)
            throw std::runtime_error(
                "continue_in_lambda: no fold found below the analytic upper bound");
        RadialSolution next = solve_radial(spec, lambda_try, current);
        double min_u = 1.0;
        for (double x : next.u) min_u = std::min(min_u, x);
        trace.steps.push_back({lambda_try, min_u, next.newton_iters, next.converged});
        if (next.converged && next.admissible) {
            lambda = lambda_try;
            current = next;
            if (lambda_fail > 0.0 && lambda_fail - lambda <= bracket_width) break;
            if (lambda_fail > 0.0)
                step = std::min(step, 0.5 * (lambda_fail - lambda));
            else
                step *= 1.3;
            if (step < step_floor) step = step_floor;
        } else {
            lambda_fail = lambda_try;
            if (lambda_fail - lambda <= bracket_width) break;
            step *= 0.5;
            if (step < step_floor) step = step_floor;
        }
    }

    trace.lambda_ok = lambda;
    trace.lambda_fail = lambda_fail;
    trace.lambda_star_estimate = 0.5 * (lambda + lambda_fail);
    return trace;
}

struct PullinRow {
    double P;
    double lambda_star;
    double lower;
    double upper;
};

inline std::vector<PullinRow> pullin_sweep(ProblemSpec spec,
                                           const std::vector<double>& P_grid) {
    std::vector<PullinRow> rows;
    for (double P : P_grid) {
        spec.P = P;
        const TheoremOneBounds b = theorem1_bounds(spec);
        const ContinuationTrace t = continue_in_lambda(spec);
        rows.push_back({P, t.lambda_star_estimate, b.lower, b.upper});
    }
    return rows;
}

}  // namespace mems
