#pragma once

// Post-processing: log-linear decay fits of Fourier mode amplitudes, the
// forced-response limit coefficient, the near-origin growth-slope check, and
// an empirical estimate of the gradient-inequality exponent near stationary
// profiles.

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "mems/cylinder_solver.hpp"
#include "mems/fourier.hpp"
#include "mems/mode_dynamics.hpp"
#include "mems/phase_plane.hpp"

namespace mems {

struct WindowTooLate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientRange : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

inline LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("least_squares: bad input");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    LinearFit f;
    const double denom = n * sxx - sx * sx;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    const double ss_tot = syy - sy * sy / n;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (f.slope * x[i] + f.intercept);
        ss_res += e * e;
    }
    f.r_squared = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

struct DecayFit {
    int k;
    double t_lo;
    double t_hi;
    double fitted_exponent;  // positive for decay
    double r_squared;
};

// Least-squares slope of log|a_k| on [t_lo, t_hi].
inline DecayFit fit_mode_decay(const CylinderField& field, int k, double t_lo,
                               double t_hi, double amplitude_floor = 1e-13) {
    std::vector<double> ts, logs;
    for (int i = 0; i < field.n_t(); ++i) {
        const double t = field.t_grid[i];
        if (t < t_lo || t > t_hi) continue;
        const double amp = std::abs(field.mode_coefficient(i, k));
        if (amp <= amplitude_floor)
            throw WindowTooLate("fit_mode_decay: |a_k| below the noise floor inside window");
        ts.push_back(t);
        logs.push_back(std::log(amp));
    }
    if (ts.size() < 4) throw WindowTooLate("fit_mode_decay: too few samples in window");
    const LinearFit lf = least_squares(ts, logs);
    return {k, t_lo, t_hi, -lf.slope, lf.r_squared};
}

// Starts from the interior third and shrinks the window from the late side
// until the r^2 gate passes.
inline DecayFit fit_mode_decay_auto(const CylinderField& field, int k,
                                    double r2_gate = 0.99) {
    const double t0 = field.t_grid.front();
    const double T = field.t_grid.back();
    double lo = t0 + (T - t0) / 3.0;
    double hi = t0 + 2.0 * (T - t0) / 3.0;
    for (int attempt = 0; attempt < 12; ++attempt) {
        try {
            const DecayFit f = fit_mode_decay(field, k, lo, hi);
            if (f.r_squared >= r2_gate) return f;
        } catch (const WindowTooLate&) {
        }
        hi = lo + 0.85 * (hi - lo);
        if (hi - lo < 5.0 * (field.t_grid[1] - field.t_grid[0]))
            throw WindowTooLate("fit_mode_decay_auto: window shrank below resolution");
    }
    throw WindowTooLate("fit_mode_decay_auto: r^2 gate not reached");
}

struct LimitCoefficient {
    double value;
    double error_bar;
};

// lim e^{(2-mu)t} * mean_theta(v - m) via Aitken extrapolation. The window
// sits near the t0 end: on a truncated cylinder the oscillatory mean mode
// admits homogeneous components growing like e^{mu t}, so the far end is the
// least trustworthy part of the field.
inline LimitCoefficient limit_coefficient(const CylinderField& field,
                                          const RefinedParams& params) {
    const DecayPrediction pred = predicted_decay(params);
    if (pred.limit_shape != LimitShape::Constant)
        throw std::invalid_argument("limit_coefficient: parameters are not in the forced regime");
    const double mu = params.mu();
    const double m_eq = params.m();
    const double T = field.t_grid.back();
    const double t0 = field.t_grid.front();
    const double span = T - t0;

    auto scaled_mean = [&](double t_target) {
        // nearest grid slice
        int best = 0;
        for (int i = 0; i < field.n_t(); ++i)
            if (std::abs(field.t_grid[i] - t_target) <
                std::abs(field.t_grid[best] - t_target))
                best = i;
        double mean = 0.0;
        for (double x : field.v[best]) mean += x;
        mean = mean / field.n_theta() - m_eq;
        return std::exp((2.0 - mu) * field.t_grid[best]) * mean;
    };

    const double t_lo = t0 + 0.1 * span;
    const double step = 0.1 * span;
    const double c0 = scaled_mean(t_lo);
    const double c1 = scaled_mean(t_lo + step);
    const double c2 = scaled_mean(t_lo + 2.0 * step);
    const double denom = c0 + c2 - 2.0 * c1;
    const double spread = std::abs(c1 - c0) + std::abs(c2 - c1);
    LimitCoefficient out;
    if (spread > 1e-10 * (std::abs(c0) + std::abs(c2)) && std::abs(denom) > 0.0) {
        out.value = (c0 * c2 - c1 * c1) / denom;  // Aitken delta-squared
    } else {
        out.value = c2;  // already converged; second difference is roundoff
    }
    out.error_bar = std::abs(out.value - c2);
    return out;
}

struct SlopeCheck {
    double fitted_slope;
    double target;  // (2+alpha)/3
    double C1_hat;
    double C2_hat;
    bool pass;
};

// Log-log slope of u(r) near the origin against the predicted power.
inline SlopeCheck slope_check(const std::vector<double>& r, const std::vector<double>& u,
                              double alpha, double tolerance = 0.02) {
    if (r.size() != u.size() || r.size() < 4)
        throw std::invalid_argument("slope_check: bad input");
    double rmin = r[0], rmax = r[0];
    for (double x : r) {
        if (!(x > 0.0)) throw std::invalid_argument("slope_check: r must be positive");
        rmin = std::min(rmin, x);
        rmax = std::max(rmax, x);
    }
    if (rmax / rmin < 100.0)
        throw InsufficientRange("slope_check: samples must span at least two decades");
    std::vector<double> lx(r.size()), ly(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        lx[i] = std::log(r[i]);
        ly[i] = std::log(u[i]);
    }
    const LinearFit lf = least_squares(lx, ly);
    SlopeCheck sc;
    sc.fitted_slope = lf.slope;
    sc.target = (2.0 + alpha) / 3.0;
    double c1 = 1e300, c2 = -1e300;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double ratio = u[i] / std::pow(r[i], sc.target);
        c1 = std::min(c1, ratio);
        c2 = std::max(c2, ratio);
    }
    sc.C1_hat = c1;
    sc.C2_hat = c2;
    sc.pass = std::abs(sc.fitted_slope - sc.target) <= tolerance;
    return sc;
}

struct LojEstimate {
    int sample_count;
    double sigma;
    double theta_hat;   // largest exponent on the grid satisfied by all samples
    double min_ratio;   // min over samples of grad-norm / gap^{1-theta_hat}
};

namespace detail {

// Scales random low-mode coefficients to an exact H^2 norm; returns the
// perturbation on the collocation grid of size M.
inline std::vector<double> random_h2_perturbation(std::mt19937_64& rng, double sigma,
                                                  int M, int max_mode = 8) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> ck(max_mode + 1), sk(max_mode + 1, 0.0);
    for (int k = 0; k <= max_mode; ++k) {
        ck[k] = gauss(rng);
        if (k > 0) sk[k] = gauss(rng);
    }
    // ||d||_H2^2 = int d^2 + d'^2 + d''^2 over the circle
    double norm_sq = 2.0 * M_PI * ck[0] * ck[0];
    for (int k = 1; k <= max_mode; ++k) {
        const double w = 1.0 + k * k + static_cast<double>(k) * k * k * k;
        norm_sq += M_PI * w * (ck[k] * ck[k] + sk[k] * sk[k]);
    }
    const double scale = sigma / std::sqrt(norm_sq);
    std::vector<double> d(M, 0.0);
    for (int m = 0; m < M; ++m) {
        const double th = 2.0 * M_PI * m / M;
        double s = ck[0];
        for (int k = 1; k <= max_mode; ++k)
            s += ck[k] * std::cos(k * th) + sk[k] * std::sin(k * th);
        d[m] = scale * s;
    }
    return d;
}

inline double circle_energy(const PhaseParams& p, const std::vector<double>& v) {
    const std::vector<double> vth = spectral_derivative(v, 1);
    std::vector<double> dens(v.size());
    for (std::size_t m = 0; m < v.size(); ++m)
        dens[m] = 0.5 * vth[m] * vth[m] - 0.5 * p.A * p.A * v[m] * v[m] - p.lambda / v[m];
    return periodic_integral(dens);
}

inline double gradient_norm(const PhaseParams& p, const std::vector<double>& v) {
    const std::vector<double> vthth = spectral_derivative(v, 2);
    std::vector<double> dens(v.size());
    for (std::size_t m = 0; m < v.size(); ++m) {
        const double g = -vthth[m] - p.A * p.A * v[m] + p.lambda / (v[m] * v[m]);
        dens[m] = g * g;
    }
    return std::sqrt(periodic_integral(dens));
}

}  // namespace detail

// Empirical exponent of ||grad E|| >= |E(v)-E(w)|^{1-theta} on random smooth
// perturbations of a stationary profile w (given on a collocation grid).
inline LojEstimate loj_estimate(const PhaseParams& params, const std::vector<double>& w,
                                double sigma, int n_samples, std::uint64_t seed = 0) {
    const int M = static_cast<int>(w.size());
    if (M < 17 || M % 2 == 0)
        throw std::invalid_argument("loj_estimate: w must be sampled on an odd grid >= 17");
    double wmin = w[0];
    for (double x : w) wmin = std::min(wmin, x);
    if (!(sigma > 0.0) || sigma > 0.05 * wmin)
        throw std::invalid_argument("loj_estimate: sigma must be in (0, 0.05*min w]");

    const double Ew = detail::circle_energy(params, w);
    std::mt19937_64 rng(seed);
    std::vector<double> grads(n_samples), gaps(n_samples);
    for (int s = 0; s < n_samples; ++s) {
        const std::vector<double> d = detail::random_h2_perturbation(rng, sigma, M);
        std::vector<double> v(M);
        for (int m = 0; m < M; ++m) v[m] = w[m] + d[m];
        grads[s] = detail::gradient_norm(params, v);
        gaps[s] = std::abs(detail::circle_energy(params, v) - Ew);
    }

    LojEstimate est;
    est.sample_count = n_samples;
    est.sigma = sigma;
    est.theta_hat = 0.0;
    for (double theta = 0.5; theta > 0.0; theta -= 0.005) {
        bool ok = true;
        for (int s = 0; s < n_samples && ok; ++s)
            if (grads[s] < std::pow(gaps[s], 1.0 - theta)) ok = false;
        if (ok) {
            est.theta_hat = theta;
            break;
        }
    }
    est.min_ratio = 1e300;
    for (int s = 0; s < n_samples; ++s) {
        const double rhs = std::pow(gaps[s], 1.0 - est.theta_hat);
        if (rhs > 0.0) est.min_ratio = std::min(est.min_ratio, grads[s] / rhs);
    }
    return est;
}

}  // namespace mems
