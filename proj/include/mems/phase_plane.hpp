#pragma once

// Positive solutions of w'' + A^2 w - lambda/w^2 = 0 on the circle:
// classification of the stationary set, period function, and explicit
// construction of the 2*pi/j periodic profiles.

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mems/quadrature.hpp"

namespace mems {

inline constexpr double kPi = 3.14159265358979323846;

struct PhaseParams {
    double A;       // frequency parameter, (2+alpha)/3 when derived from alpha
    double lambda;  // voltage parameter

    PhaseParams(double A_, double lambda_) : A(A_), lambda(lambda_) {
        if (!(A > 0.0)) throw std::invalid_argument("PhaseParams: A must be positive");
        if (!(lambda > 0.0)) throw std::invalid_argument("PhaseParams: lambda must be positive");
    }

    double equilibrium() const { return std::cbrt(lambda / (A * A)); }
    double ground_energy() const { return 3.0 * std::cbrt(lambda * lambda) * std::cbrt(A * A); }
};

struct EnergyLevel {
    double E;    // first-integral value
    double tau;  // amplitude ratio w2/w1
    double w1;   // orbit minimum
    double w2;   // orbit maximum
};

struct PeriodicOrbit {
    int j;  // number of minima on the circle
    EnergyLevel level;
    std::vector<double> theta;   // uniform grid on [0, 2*pi)
    std::vector<double> w;       // positive profile, minimum at theta = 0
    std::vector<double> wprime;
};

enum class Regime { IsotropicOnly, Anisotropic };

struct Classification {
    double alpha;
    bool P_positive;
    double A;  // (2+alpha)/3
    Regime regime;
    int N0;                  // number of integers strictly inside (sqrt(3)A, 2A)
    std::vector<int> modes;  // j_i = floor(sqrt(3)A) + i
    bool endpoint_hit;       // sqrt(3)A or 2A within round-off of an integer
};

struct NoSuchMode : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double equilibrium(const PhaseParams& p) { return p.equilibrium(); }

// g(w) = A^2 w^2 + 2 lambda / w, minimized at the equilibrium.
inline double energy_at(const PhaseParams& p, double w) {
    if (!(w > 0.0)) throw std::invalid_argument("energy_at: w must be positive");
    return p.A * p.A * w * w + 2.0 * p.lambda / w;
}

inline EnergyLevel level_from_tau(const PhaseParams& p, double tau) {
    if (!(tau > 1.0)) throw std::invalid_argument("level_from_tau: tau must exceed 1");
    EnergyLevel lv;
    lv.tau = tau;
    lv.w1 = std::cbrt(2.0 * p.lambda / (p.A * p.A * tau * (1.0 + tau)));
    lv.w2 = tau * lv.w1;
    lv.E = energy_at(p, lv.w1);
    return lv;
}

namespace detail {

// The half-period radicand 1 + tau(1+tau) - y^2 - tau(1+tau)/y factors as
// (y-1)(tau-y)(y+1+tau)/y. Checked once at random points before first use.
inline void check_radicand_factorization() {
    static const bool checked = [] {
        std::mt19937_64 rng(20240811u);
        std::uniform_real_distribution<double> utau(1.0 + 1e-3, 10.0);
        for (int trial = 0; trial < 32; ++trial) {
            const double tau = utau(rng);
            std::uniform_real_distribution<double> uy(1.0 + 1e-6, tau - 1e-6);
            const double y = uy(rng);
            const double s = tau * (1.0 + tau);
            const double direct = 1.0 + s - y * y - s / y;
            const double factored = (y - 1.0) * (tau - y) * (y + 1.0 + tau) / y;
            if (std::abs(direct - factored) > 1e-11 * (1.0 + std::abs(direct)))
                throw std::logic_error("half_period: radicand factorization check failed");
        }
        return true;
    }();
    (void)checked;
}

}  // namespace detail

// Half-period L(tau) of the orbit with amplitude ratio tau. The substitution
// y = (1+tau)/2 + ((tau-1)/2) sin(phi) absorbs both endpoint square roots,
// leaving L = (1/A) * int_{-pi/2}^{pi/2} sqrt(y/(y+1+tau)) dphi.
inline double half_period(const PhaseParams& p, double tau, double abs_tol = 1e-11) {
    if (!(tau > 1.0)) throw std::invalid_argument("half_period: tau must exceed 1");
    detail::check_radicand_factorization();
    const double mid = 0.5 * (1.0 + tau);
    const double half = 0.5 * (tau - 1.0);
    auto integrand = [&](double phi) {
        const double y = mid + half * std::sin(phi);
        return std::sqrt(y / (y + 1.0 + tau));
    };
    const QuadratureResult q =
        integrate_adaptive(integrand, -0.5 * kPi, 0.5 * kPi, abs_tol * p.A);
    if (!q.converged)
        throw std::runtime_error("half_period: quadrature did not reach tolerance, error ~" +
                                 std::to_string(q.error_estimate));
    return q.value / p.A;
}

// True iff A lies in (0,1/2] U U_{k=1..6} [k/sqrt(3),(k+1)/2], i.e. the open
// interval (sqrt(3)A, 2A) contains no integer.
inline bool classify_A(double A) {
    if (!(A > 0.0)) throw std::invalid_argument("classify_A: A must be positive");
    const double lo = std::sqrt(3.0) * A;
    const double hi = 2.0 * A;
    for (int j = static_cast<int>(std::floor(lo)) + 1; j < hi; ++j)
        if (j > lo) return false;
    return true;
}

namespace detail {

inline int count_modes(double A, int& first_mode, bool& endpoint_hit) {
    const double lo = std::sqrt(3.0) * A;
    const double hi = 2.0 * A;
    endpoint_hit = std::abs(lo - std::round(lo)) < 1e-12 * std::max(1.0, lo) ||
                   std::abs(hi - std::round(hi)) < 1e-12 * std::max(1.0, hi);
    first_mode = static_cast<int>(std::floor(lo)) + 1;
    int n0 = 0;
    for (int j = first_mode; j < hi; ++j)
        if (j > lo) ++n0;
    return n0;
}

}  // namespace detail

inline Classification classify_alpha(double alpha, bool P_positive) {
    if (!(alpha > -2.0))
        throw std::invalid_argument("classify_alpha: alpha must exceed -2");
    if (P_positive && !(alpha < 4.0))
        throw std::invalid_argument("classify_alpha: alpha must be below 4 when P > 0");
    Classification c;
    c.alpha = alpha;
    c.P_positive = P_positive;
    c.A = (2.0 + alpha) / 3.0;
    int first_mode = 0;
    c.N0 = detail::count_modes(c.A, first_mode, c.endpoint_hit);
    c.regime = (c.N0 == 0) ? Regime::IsotropicOnly : Regime::Anisotropic;
    for (int i = 0; i < c.N0; ++i) c.modes.push_back(first_mode + i);
    return c;
}

// Finds the level whose half-period equals pi/j by bisection; L is strictly
// decreasing in tau so the root is unique.
inline EnergyLevel solve_tau_for_mode(const PhaseParams& p, int j) {
    if (j < 1) throw NoSuchMode("solve_tau_for_mode: mode index must be positive");
    const double lo = std::sqrt(3.0) * p.A;
    const double hi = 2.0 * p.A;
    if (!(lo < j && j < hi))
        throw NoSuchMode("solve_tau_for_mode: j=" + std::to_string(j) +
                         " is outside the admissible interval (" + std::to_string(lo) +
                         ", " + std::to_string(hi) + ")");
    const double target = kPi / j;
    double tau_lo = 1.0 + 1e-8;   // L large here
    double tau_hi = 1e8;          // L small here
    double L_lo = half_period(p, tau_lo);
    double L_hi = half_period(p, tau_hi);
    int guard = 0;
    while (!(L_hi <= target && target <= L_lo)) {
        if (target > L_lo) tau_lo = 1.0 + 0.1 * (tau_lo - 1.0);
        if (target < L_hi) tau_hi *= 10.0;
        L_lo = half_period(p, tau_lo);
        L_hi = half_period(p, tau_hi);
        if (++guard > 16)
            throw std::runtime_error("solve_tau_for_mode: failed to bracket pi/j");
    }
    // Bisection in log(tau-1) keeps resolution uniform across the huge bracket.
    double a = std::log(tau_lo - 1.0);
    double b = std::log(tau_hi - 1.0);
    double tau = tau_lo;
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        tau = 1.0 + std::exp(m);
        const double L = half_period(p, tau);
        if (L > target)
            a = m;
        else
            b = m;
        if (std::abs(b - a) * tau < 1e-12 * tau && std::abs(L - target) < 1e-10) break;
    }
    return level_from_tau(p, tau);
}

// Builds the 2*pi/j periodic profile by quadrature of the first integral on
// the quarter orbit and reflection; no time-integration drift.
inline PeriodicOrbit construct_orbit(const PhaseParams& p, int j, int n_samples) {
    if (n_samples < 64 || n_samples % (2 * j) != 0)
        throw std::invalid_argument(
            "construct_orbit: n_samples must be >= 64 and divisible by 2j");
    const EnergyLevel lv = solve_tau_for_mode(p, j);
    const double w1 = lv.w1, w2 = lv.w2, E = lv.E;
    const double mid = 0.5 * (w1 + w2);
    const double half = 0.5 * (w2 - w1);
    const double L = kPi / j;  // half of the minimal period

    // theta(phi) with w = mid + half*sin(phi); dtheta/dphi is smooth.
    auto dtheta_dphi = [&](double phi) {
        const double w = mid + half * std::sin(phi);
        return std::sqrt(w / (w + w1 + w2)) / p.A;
    };

    const int half_n = n_samples / (2 * j);  // samples across [0, L]
    std::vector<double> phi_at(half_n + 1);
    phi_at[0] = -0.5 * kPi;
    phi_at[half_n] = 0.5 * kPi;

    // March the targets theta_i = i * L / half_n, inverting theta(phi) by
    // safeguarded Newton with cumulative quadrature.
    double phi_ref = -0.5 * kPi;
    double theta_ref = 0.0;
    for (int i = 1; i < half_n; ++i) {
        const double theta_i = (2.0 * kPi / n_samples) * i;
        double lo_phi = phi_ref, hi_phi = 0.5 * kPi;
        double phi = std::min(phi_ref + (hi_phi - phi_ref) * 0.25, 0.5 * (lo_phi + hi_phi));
        for (int it = 0; it < 100; ++it) {
            const double theta =
                theta_ref + integrate_adaptive([&](double x) { return dtheta_dphi(x); },
                                               phi_ref, phi, 1e-14)
                                .value;
            const double err = theta - theta_i;
            if (std::abs(err) < 1e-13) break;
            if (err > 0)
                hi_phi = phi;
            else
                lo_phi = phi;
            const double step = -err / dtheta_dphi(phi);
            double next = phi + step;
            if (!(next > lo_phi && next < hi_phi)) next = 0.5 * (lo_phi + hi_phi);
            phi = next;
        }
        phi_at[i] = phi;
        phi_ref = phi;
        theta_ref = theta_i;
    }

    PeriodicOrbit orbit;
    orbit.j = j;
    orbit.level = lv;
    orbit.theta.resize(n_samples);
    orbit.w.resize(n_samples);
    orbit.wprime.resize(n_samples);
    const int period_n = n_samples / j;  // samples per minimal period
    for (int idx = 0; idx < n_samples; ++idx) {
        orbit.theta[idx] = 2.0 * kPi * idx / n_samples;
        int m = idx % period_n;
        bool descending = false;
        if (m > half_n) {
            m = period_n - m;
            descending = true;
        }
        const double w = mid + half * std::sin(phi_at[m]);
        const double rad = std::max(0.0, E - energy_at(p, w));
        orbit.w[idx] = w;
        orbit.wprime[idx] = (m == 0 || m == half_n) ? 0.0
                                                    : (descending ? -std::sqrt(rad)
                                                                  : std::sqrt(rad));
    }
    return orbit;
}

}  // namespace mems
