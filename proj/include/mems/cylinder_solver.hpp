#pragma once

// Nonlinear elliptic solve of the transformed equation
//   -v_tt + 2 mu v_t = v_thth + mu^2 v - lambda/v^2 - P e^{-beta t}
// on a finite cylinder [t0,T] x S^1 with Dirichlet data at both ends.
// Fourier collocation in theta (2K+1 nodes, dealiased nonlinearity) and
// second-order differences in t; damped Newton with a block-tridiagonal
// Jacobian solve.

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mems/fourier.hpp"
#include "mems/phase_plane.hpp"

namespace mems {

struct CylinderConfig {
    double alpha;
    double lambda;
    double P = 0.0;
    double t0 = 0.0;
    double T = 30.0;
    int n_t = 256;
    int K = 16;
    std::vector<double> boundary_t0;  // theta-profile on the 2K+1 collocation nodes
    std::vector<double> boundary_T;

    int n_theta() const { return 2 * K + 1; }
    double mu() const { return (2.0 + alpha) / 3.0; }
    double beta() const { return (4.0 - alpha) / 3.0; }
    double m() const { return std::cbrt(9.0 * lambda / ((2.0 + alpha) * (2.0 + alpha))); }

    void validate() const {
        if (!(alpha > -2.0)) throw std::invalid_argument("CylinderConfig: alpha must exceed -2");
        if (P > 0.0 && !(alpha < 4.0))
            throw std::invalid_argument("CylinderConfig: alpha must be below 4 when P > 0");
        if (!(lambda > 0.0)) throw std::invalid_argument("CylinderConfig: lambda must be positive");
        if (P < 0.0) throw std::invalid_argument("CylinderConfig: P must be >= 0");
        if (!(T > t0)) throw std::invalid_argument("CylinderConfig: T must exceed t0");
        if (K < 8) throw std::invalid_argument("CylinderConfig: K must be >= 8");
        if (n_t < 128) throw std::invalid_argument("CylinderConfig: n_t must be >= 128");
        auto check_profile = [&](const std::vector<double>& prof, const char* name) {
            if (static_cast<int>(prof.size()) != n_theta())
                throw std::invalid_argument(std::string("CylinderConfig: ") + name +
                                            " must have 2K+1 samples");
            for (double x : prof)
                if (!(x > 0.0))
                    throw std::invalid_argument(std::string("CylinderConfig: ") + name +
                                                " must be positive");
        };
        check_profile(boundary_t0, "boundary_t0");
        check_profile(boundary_T, "boundary_T");
    }
};

struct CylinderField {
    CylinderConfig config;
    std::vector<double> t_grid;            // n_t nodes, inclusive of both ends
    std::vector<std::vector<double>> v;    // v[i][m], i over t, m over theta
    bool converged = false;
    int newton_iters = 0;
    double residual_norm = 0.0;

    int n_t() const { return static_cast<int>(t_grid.size()); }
    int n_theta() const { return config.n_theta(); }

    // Fourier coefficient a_k(t_i) in the (2*pi)^{-1/2} convention.
    cplx mode_coefficient(int i, int k) const {
        const int K = config.K;
        const std::vector<cplx> c = dft(v[i]);
        return c[k + K] * std::sqrt(2.0 * M_PI);
    }

    std::vector<double> mode_amplitude_series(int k) const {
        std::vector<double> out(n_t());
        for (int i = 0; i < n_t(); ++i) out[i] = std::abs(mode_coefficient(i, k));
        return out;
    }
};

struct SolutionEscapedBounds : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Convenience boundary profiles on the collocation grid.
inline std::vector<double> constant_profile(const CylinderConfig& cfg, double value) {
    return std::vector<double>(cfg.n_theta(), value);
}

inline std::vector<double> perturbed_profile(const CylinderConfig& cfg, double base,
                                             int k, double amplitude) {
    std::vector<double> prof(cfg.n_theta());
    const std::vector<double> th = fourier_nodes(cfg.n_theta());
    for (int m = 0; m < cfg.n_theta(); ++m)
        prof[m] = base + amplitude * std::sin(k * th[m]);
    return prof;
}

inline std::vector<double> orbit_profile(const CylinderConfig& cfg, int j,
                                         double shift = 0.0) {
    PhaseParams params(cfg.mu(), cfg.lambda);
    const int n = std::max(256, 2 * j * ((cfg.n_theta() + 2 * j - 1) / (2 * j)));
    const PeriodicOrbit orbit = construct_orbit(params, j, n);
    const std::vector<cplx> c = dft(orbit.w);
    std::vector<double> prof(cfg.n_theta());
    const std::vector<double> th = fourier_nodes(cfg.n_theta());
    for (int m = 0; m < cfg.n_theta(); ++m) prof[m] = trig_eval(c, th[m] + shift);
    return prof;
}

namespace detail {

// Dense spectral second-derivative matrix on the collocation grid.
inline Eigen::MatrixXd spectral_d2_matrix(int M) {
    const int K = (M - 1) / 2;
    Eigen::MatrixXd D2(M, M);
    for (int m = 0; m < M; ++m) {
        std::vector<double> e(M, 0.0);
        e[m] = 1.0;
        std::vector<cplx> c = dft(e);
        for (int k = -K; k <= K; ++k) c[k + K] *= -static_cast<double>(k) * k;
        const std::vector<double> col = idft(c, M);
        for (int r = 0; r < M; ++r) D2(r, m) = col[r];
    }
    return D2;
}

// Precomputed collocation operators: spectral d2, and the padded-grid
// up/down sampling pair used for dealiased evaluation of lambda/v^2.
struct CylinderWorkspace {
    int M;
    int Mp;
    Eigen::MatrixXd D2;
    Eigen::MatrixXd up;    // Mp x M, evaluate interpolant on the fine grid
    Eigen::MatrixXd down;  // M x Mp, truncate back to the collocation grid

    explicit CylinderWorkspace(int M_) : M(M_) {
        const int K = (M - 1) / 2;
        Mp = 3 * K + 2;
        if (Mp % 2 == 0) ++Mp;
        const int Kp = (Mp - 1) / 2;
        D2 = spectral_d2_matrix(M);
        up.resize(Mp, M);
        down.resize(M, Mp);
        for (int m = 0; m < M; ++m) {
            std::vector<double> e(M, 0.0);
            e[m] = 1.0;
            std::vector<cplx> c = dft(e);
            std::vector<cplx> padded(Mp, 0.0);
            for (int k = -K; k <= K; ++k) padded[k + Kp] = c[k + K];
            const std::vector<double> fine = idft(padded, Mp);
            for (int r = 0; r < Mp; ++r) up(r, m) = fine[r];
        }
        for (int m = 0; m < Mp; ++m) {
            std::vector<double> e(Mp, 0.0);
            e[m] = 1.0;
            std::vector<cplx> c = dft(e);
            const std::vector<double> coarse = idft(truncate_modes(c, K), M);
            for (int r = 0; r < M; ++r) down(r, m) = coarse[r];
        }
    }

    // Dealiased 1/v^2 on the collocation grid.
    Eigen::VectorXd recip_sq(const Eigen::VectorXd& v) const {
        Eigen::VectorXd fine = up * v;
        for (int r = 0; r < Mp; ++r) fine(r) = 1.0 / (fine(r) * fine(r));
        return down * fine;
    }

    // Exact Jacobian of the dealiased 1/v^2: down * diag(-2/fine^3) * up.
    Eigen::MatrixXd recip_sq_jacobian(const Eigen::VectorXd& v) const {
        Eigen::VectorXd fine = up * v;
        for (int r = 0; r < Mp; ++r) fine(r) = -2.0 / (fine(r) * fine(r) * fine(r));
        return down * fine.asDiagonal() * up;
    }
};

// Residual of the discrete equation on interior t-rows; boundary rows fixed.
inline void cylinder_residual(const CylinderConfig& cfg, const CylinderWorkspace& ws,
                              const std::vector<std::vector<double>>& v,
                              const std::vector<double>& t_grid,
                              std::vector<std::vector<double>>& R) {
    const int n_t = static_cast<int>(t_grid.size());
    const int M = cfg.n_theta();
    const double dt = t_grid[1] - t_grid[0];
    const double mu = cfg.mu();
    const double beta = cfg.beta();
    Eigen::VectorXd vi(M);
    for (int i = 1; i + 1 < n_t; ++i) {
        for (int m = 0; m < M; ++m) vi(m) = v[i][m];
        const Eigen::VectorXd vthth = ws.D2 * vi;
        const Eigen::VectorXd recip_sq = ws.recip_sq(vi);
        const double forcing = cfg.P * std::exp(-beta * t_grid[i]);
        for (int m = 0; m < M; ++m) {
            const double vtt = (v[i + 1][m] - 2.0 * v[i][m] + v[i - 1][m]) / (dt * dt);
            const double vt = (v[i + 1][m] - v[i - 1][m]) / (2.0 * dt);
            R[i][m] = -vtt + 2.0 * mu * vt - vthth(m) - mu * mu * v[i][m] +
                      cfg.lambda * recip_sq(m) + forcing;
        }
    }
}

}  // namespace detail

inline CylinderField solve_cylinder(const CylinderConfig& cfg, double tol = 1e-11,
                                    int max_iters = 60) {
    cfg.validate();
    const int n_t = cfg.n_t;
    const int M = cfg.n_theta();
    const double dt = (cfg.T - cfg.t0) / (n_t - 1);
    const double mu = cfg.mu();

    CylinderField field;
    field.config = cfg;
    field.t_grid.resize(n_t);
    for (int i = 0; i < n_t; ++i) field.t_grid[i] = cfg.t0 + i * dt;

    // Initial guess: linear blend of the boundary profiles.
    field.v.assign(n_t, std::vector<double>(M));
    for (int i = 0; i < n_t; ++i) {
        const double s = static_cast<double>(i) / (n_t - 1);
        for (int m = 0; m < M; ++m)
            field.v[i][m] = (1.0 - s) * cfg.boundary_t0[m] + s * cfg.boundary_T[m];
    }

    const detail::CylinderWorkspace ws(M);
    const double sub_coef = -1.0 / (dt * dt) - mu / dt;    // coefficient of v[i-1]
    const double sup_coef = -1.0 / (dt * dt) + mu / dt;    // coefficient of v[i+1]

    std::vector<std::vector<double>> R(n_t, std::vector<double>(M, 0.0));
    auto residual_norm = [&](const std::vector<std::vector<double>>& v) {
        detail::cylinder_residual(cfg, ws, v, field.t_grid, R);
        double norm = 0.0;
        for (int i = 1; i + 1 < n_t; ++i)
            for (int m = 0; m < M; ++m) norm = std::max(norm, std::abs(R[i][m]));
        return norm;
    };

    double norm = residual_norm(field.v);
    int it = 0;
    const int n_int = n_t - 2;
    std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu(n_int);
    std::vector<Eigen::VectorXd> rhs(n_int);
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(M, M);
    for (; it < max_iters && norm > tol; ++it) {
        // Block-tridiagonal Newton system; sub/super blocks are scalar
        // multiples of the identity, so elimination stays cheap.
        for (int b = 0; b < n_int; ++b) {
            const int i = b + 1;
            Eigen::VectorXd vi(M);
            for (int m = 0; m < M; ++m) vi(m) = field.v[i][m];
            Eigen::MatrixXd Di = -ws.D2 + cfg.lambda * ws.recip_sq_jacobian(vi);
            for (int m = 0; m < M; ++m) Di(m, m) += 2.0 / (dt * dt) - mu * mu;
            Eigen::VectorXd r(M);
            for (int m = 0; m < M; ++m) r(m) = -R[i][m];
            if (b > 0) {
                Di -= (sub_coef * sup_coef) * lu[b - 1].solve(identity);
                r -= sub_coef * lu[b - 1].solve(rhs[b - 1]);
            }
            lu[b] = Di.partialPivLu();
            rhs[b] = r;
        }
        std::vector<Eigen::VectorXd> delta(n_int);
        delta[n_int - 1] = lu[n_int - 1].solve(rhs[n_int - 1]);
        for (int b = n_int - 2; b >= 0; --b)
            delta[b] = lu[b].solve((rhs[b] - sup_coef * delta[b + 1]).eval());

        // Damped update.
        double step = 1.0;
        double new_norm = norm;
        std::vector<std::vector<double>> trial = field.v;
        for (int half = 0; half < 30; ++half) {
            bool positive = true;
            for (int b = 0; b < n_int; ++b)
                for (int m = 0; m < M; ++m) {
                    trial[b + 1][m] = field.v[b + 1][m] + step * delta[b](m);
                    if (!(trial[b + 1][m] > 0.0)) positive = false;
                }
            if (positive) {
                new_norm = residual_norm(trial);
                if (new_norm < norm) break;
            }
            step *= 0.5;
        }
        if (!(new_norm < norm)) break;
        field.v = trial;
        norm = new_norm;
    }

    field.newton_iters = it;
    field.residual_norm = residual_norm(field.v);
    field.converged = field.residual_norm <= std::max(tol, 1e-9);
    if (field.converged) {
        for (const auto& row : field.v)
            for (double x : row)
                if (!(x > 0.0))
                    throw SolutionEscapedBounds("solve_cylinder: field lost positivity");
    }
    return field;
}

struct EnergyReport {
    double t;
    double E;
    double H;
    double H_tilde;
    double epsilon_used;
};

namespace detail {

inline double field_energy(const CylinderField& f, int i) {
    const double A = f.config.mu();
    const double lambda = f.config.lambda;
    const std::vector<double> vth = spectral_derivative(f.v[i], 1);
    std::vector<double> dens(f.n_theta());
    for (int m = 0; m < f.n_theta(); ++m) {
        const double v = f.v[i][m];
        dens[m] = 0.5 * vth[m] * vth[m] - 0.5 * A * A * v * v - lambda / v;
    }
    return periodic_integral(dens);
}

}  // namespace detail

// Epsilon per the inequality -2A + eps*sup|j'(v)| + eps < 0 on the field range.
inline double lyapunov_epsilon(const CylinderField& f) {
    const double A = f.config.mu();
    const double lambda = f.config.lambda;
    double vmin = f.v[0][0];
    for (const auto& row : f.v)
        for (double x : row) vmin = std::min(vmin, x);
    const double sup_jprime = A * A + 2.0 * lambda / (vmin * vmin * vmin);
    const double eps0 = 2.0 * A / (sup_jprime + 1.0);
    return std::min(0.5 * eps0, 0.01);
}

inline EnergyReport energy(const CylinderField& f, int i, double epsilon,
                           double K_forcing) {
    if (i < 1 || i + 1 >= f.n_t())
        throw std::invalid_argument("energy: t index must be interior");
    const double A = f.config.mu();
    const double lambda = f.config.lambda;
    const double beta = f.config.beta();
    const double dt = f.t_grid[1] - f.t_grid[0];
    const int M = f.n_theta();

    EnergyReport rep;
    rep.t = f.t_grid[i];
    rep.epsilon_used = epsilon;
    rep.E = detail::field_energy(f, i);

    std::vector<double> vt(M), vt_sq(M), cross(M);
    const std::vector<double> vthth = spectral_derivative(f.v[i], 2);
    for (int m = 0; m < M; ++m) {
        vt[m] = (f.v[i + 1][m] - f.v[i - 1][m]) / (2.0 * dt);
        vt_sq[m] = vt[m] * vt[m];
        const double v = f.v[i][m];
        const double jv = A * A * v - lambda / (v * v);
        cross[m] = (vthth[m] + jv) * vt[m];
    }
    rep.H = -0.5 * periodic_integral(vt_sq) + (1.0 + 2.0 * A * epsilon) * rep.E +
            epsilon * periodic_integral(cross);

    // K * int_t^inf ||z||^2 with z = P e^{-beta s}: closed form.
    const double tail = (f.config.P > 0.0)
                            ? 2.0 * M_PI * f.config.P * f.config.P *
                                  std::exp(-2.0 * beta * rep.t) / (2.0 * beta)
                            : 0.0;
    rep.H_tilde = rep.H + K_forcing * tail;
    return rep;
}

inline std::vector<EnergyReport> lyapunov_series(const CylinderField& f, double epsilon,
                                                 double K_forcing) {
    std::vector<EnergyReport> out;
    for (int i = 1; i + 1 < f.n_t(); ++i) out.push_back(energy(f, i, epsilon, K_forcing));
    return out;
}

// Smallest constant making dH/dt <= K ||z||^2 hold discretely on the field.
inline double calibrate_lyapunov_constant(const CylinderField& f, double epsilon) {
    if (!(f.config.P > 0.0)) return 0.0;
    const double beta = f.config.beta();
    const double dt = f.t_grid[1] - f.t_grid[0];
    double K = 0.5 + 0.5 * epsilon;
    std::vector<EnergyReport> H;
    for (int i = 1; i + 1 < f.n_t(); ++i) H.push_back(energy(f, i, epsilon, 0.0));
    for (std::size_t i = 0; i + 1 < H.size(); ++i) {
        const double dHdt = (H[i + 1].H - H[i].H) / dt;
        const double z_sq = 2.0 * M_PI * f.config.P * f.config.P *
                            std::exp(-2.0 * beta * 0.5 * (H[i].t + H[i + 1].t));
        if (dHdt > K * z_sq) K = dHdt / z_sq;
    }
    return K;
}

struct ConvergenceProfile {
    bool converged = false;
    std::string limit_name;              // "equilibrium" or "orbit-j"
    int limit_mode = 0;                  // j for orbits, 0 for the equilibrium
    double best_shift = 0.0;
    std::vector<double> distance;        // sup-norm distance per t-slice
};

// Distance of each t-slice to the nearest stationary profile (equilibrium or
// any admissible orbit, minimized over rotation).
inline ConvergenceProfile convergence_profile(const CylinderField& f) {
    const double A = f.config.mu();
    PhaseParams params(A, f.config.lambda);
    const double m_eq = f.config.m();
    const int M = f.n_theta();
    const std::vector<double> th = fourier_nodes(M);

    struct Candidate {
        std::string name;
        int j;
        double shift;
        std::vector<cplx> coeffs;  // empty for the constant
    };
    std::vector<Candidate> candidates;
    candidates.push_back({"equilibrium", 0, 0.0, {}});
    const Classification cls = classify_alpha(f.config.alpha, f.config.P > 0.0);
    for (int j : cls.modes) {
        const int n = std::max(256, 2 * j * 64);
        const PeriodicOrbit orbit = construct_orbit(params, j, n);
        candidates.push_back({"orbit-" + std::to_string(j), j, 0.0, dft(orbit.w)});
    }

    // Pick the candidate nearest to the final interior slice.
    const int i_last = f.n_t() - 2;
    double best = 1e300;
    Candidate chosen = candidates.front();
    for (auto& cand : candidates) {
        double local_best = 1e300, local_shift = 0.0;
        const int n_shift = cand.coeffs.empty() ? 1 : 720;
        for (int s = 0; s < n_shift; ++s) {
            const double shift = 2.0 * M_PI * s / n_shift;
            double d = 0.0;
            for (int m = 0; m < M; ++m) {
                const double w = cand.coeffs.empty() ? m_eq : trig_eval(cand.coeffs, th[m] + shift);
                d = std::max(d, std::abs(f.v[i_last][m] - w));
            }
            if (d < local_best) {
                local_best = d;
                local_shift = shift;
            }
        }
        if (local_best < best) {
            best = local_best;
            chosen = cand;
            chosen.shift = local_shift;
        }
    }

    ConvergenceProfile prof;
    prof.limit_name = chosen.name;
    prof.limit_mode = chosen.j;
    prof.best_shift = chosen.shift;
    prof.distance.resize(f.n_t());
    for (int i = 0; i < f.n_t(); ++i) {
        double d = 0.0;
        for (int m = 0; m < M; ++m) {
            const double w =
                chosen.coeffs.empty() ? m_eq : trig_eval(chosen.coeffs, th[m] + chosen.shift);
            d = std::max(d, std::abs(f.v[i][m] - w));
        }
        prof.distance[i] = d;
    }
    prof.converged = best <= 0.1;
    return prof;
}

// Emden transformation v(t,theta) = r^{-mu} u(r,theta), t = -ln r.
struct EmdenGrid {
    std::vector<double> t_grid;
    std::vector<double> theta_grid;
    std::vector<std::vector<double>> values;  // [t][theta]
};

inline EmdenGrid emden_forward(const std::vector<double>& r_grid,
                               const std::vector<double>& theta_grid,
                               const std::vector<std::vector<double>>& u, double alpha) {
    const double mu = (2.0 + alpha) / 3.0;
    EmdenGrid out;
    out.theta_grid = theta_grid;
    out.t_grid.resize(r_grid.size());
    out.values.resize(r_grid.size());
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        const double r = r_grid[i];
        if (!(r > 0.0)) throw std::invalid_argument("emden_forward: r must be positive");
        out.t_grid[i] = -std::log(r);
        out.values[i].resize(theta_grid.size());
        for (std::size_t m = 0; m < theta_grid.size(); ++m) {
            if (!(u[i][m] > 0.0))
                throw std::invalid_argument("emden_forward: u must be positive");
            out.values[i][m] = std::pow(r, -mu) * u[i][m];
        }
    }
    return out;
}

inline std::vector<std::vector<double>> emden_inverse(const EmdenGrid& grid, double alpha) {
    const double mu = (2.0 + alpha) / 3.0;
    std::vector<std::vector<double>> u(grid.t_grid.size());
    for (std::size_t i = 0; i < grid.t_grid.size(); ++i) {
        const double r = std::exp(-grid.t_grid[i]);
        u[i].resize(grid.theta_grid.size());
        for (std::size_t m = 0; m < grid.theta_grid.size(); ++m)
            u[i][m] = std::pow(r, mu) * grid.values[i][m];
    }
    return u;
}

}  // namespace mems
