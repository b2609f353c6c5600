#pragma once

// Explicit bounded solutions of the Fourier-mode ODE
//   a'' - 2 mu a' + (3 mu^2 - k^2) a = g(t)
// with exponentially decaying forcing, and the predicted leading decay rates
// of the deviation from the isotropic profile.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mems/quadrature.hpp"

namespace mems {

struct ResonanceExcluded : std::domain_error {
    using std::domain_error::domain_error;
};

struct RefinedParams {
    double alpha;
    double lambda;
    double P;

    RefinedParams(double alpha_, double lambda_, double P_)
        : alpha(alpha_), lambda(lambda_), P(P_) {
        if (!(alpha > -2.0)) throw std::invalid_argument("RefinedParams: alpha must exceed -2");
        if (P > 0.0 && !(alpha < 4.0))
            throw std::invalid_argument("RefinedParams: alpha must be below 4 when P > 0");
        if (!(lambda > 0.0)) throw std::invalid_argument("RefinedParams: lambda must be positive");
        if (P < 0.0) throw std::invalid_argument("RefinedParams: P must be >= 0");
        const double s = std::sqrt(3.0) * mu();
        if (std::abs(s - std::round(s)) < 1e-9 && std::round(s) >= 1.0)
            throw ResonanceExcluded("alpha = " + std::to_string(alpha) +
                                    " lies on the resonance set (k-1)*sqrt(3)-2");
    }

    double mu() const { return (2.0 + alpha) / 3.0; }
    double m() const { return std::cbrt(9.0 * lambda / ((2.0 + alpha) * (2.0 + alpha))); }
};

enum class ModeRegime { Oscillatory, Critical, Subcritical, Supercritical };

struct ModeSolution {
    int k;
    double d;  // k^2 - 2 mu^2
    ModeRegime regime;
    std::vector<double> t;
    std::vector<double> a;
};

// Forcing with a known exponential decay envelope |g(t)| <~ e^{-decay_rate t}.
struct Forcing {
    std::function<double(double)> g;
    double decay_rate;
};

namespace detail {

// int_t^{T_cut} f(s) ds where f decays at least like e^{-rate s}; the cut is
// placed where the envelope has dropped by 1e-16.
template <class F>
double improper_integral(F&& f, double t, double rate) {
    if (!(rate > 0.0))
        throw std::invalid_argument("improper_integral: integrand must decay");
    const double T_cut = t + 37.0 / rate;  // e^{-37} < 1e-16
    const int panels = std::max(64, static_cast<int>(std::ceil((T_cut - t) * 4.0)));
    return integrate_panels(f, t, T_cut, panels);
}

}  // namespace detail

inline ModeRegime mode_regime(int k, double mu, double degeneracy_tol = 1e-6) {
    const double ak = std::abs(static_cast<double>(k));
    const double s2 = std::sqrt(2.0) * mu;
    const double s3 = std::sqrt(3.0) * mu;
    if (std::abs(ak - s2) < degeneracy_tol) return ModeRegime::Critical;
    if (ak < s2) return ModeRegime::Oscillatory;
    if (ak <= s3) return ModeRegime::Subcritical;
    return ModeRegime::Supercritical;
}

// Bounded solution of the mode ODE on the given grid. a0_at_t0 feeds the
// homogeneous part in the supercritical case; it is ignored otherwise (the
// bounded solution is unique there).
inline ModeSolution bounded_mode_solution(int k, double mu, const Forcing& forcing,
                                          const std::vector<double>& t_grid,
                                          double a0_at_t0 = 0.0) {
    if (!(mu > 0.0)) throw std::invalid_argument("bounded_mode_solution: mu must be positive");
    if (t_grid.size() < 2)
        throw std::invalid_argument("bounded_mode_solution: need at least two grid points");
    if (!(forcing.decay_rate > 0.0))
        throw std::invalid_argument("bounded_mode_solution: forcing must decay");

    ModeSolution sol;
    sol.k = k;
    sol.d = static_cast<double>(k) * k - 2.0 * mu * mu;
    sol.regime = mode_regime(k, mu);
    sol.t = t_grid;
    sol.a.resize(t_grid.size());

    const auto& g = forcing.g;
    const double rate = forcing.decay_rate;
    const double t0 = t_grid.front();

    switch (sol.regime) {
        case ModeRegime::Oscillatory: {
            const double nu = std::sqrt(-sol.d);
            for (std::size_t i = 0; i < t_grid.size(); ++i) {
                const double t = t_grid[i];
                // combined kernel: (1/nu) e^{mu t} int_t^inf e^{-mu s} g sin(nu(s-t)) ds
                const double I = detail::improper_integral(
                    [&](double s) {
                        return std::exp(-mu * (s - t)) * g(s) * std::sin(nu * (s - t));
                    },
                    t, rate + mu);
                sol.a[i] = I / nu;
            }
            break;
        }
        case ModeRegime::Critical: {
            for (std::size_t i = 0; i < t_grid.size(); ++i) {
                const double t = t_grid[i];
                sol.a[i] = detail::improper_integral(
                    [&](double s) { return (s - t) * std::exp(-mu * (s - t)) * g(s); }, t,
                    rate + mu);
            }
            break;
        }
        case ModeRegime::Subcritical: {
            const double sd = std::sqrt(sol.d);
            for (std::size_t i = 0; i < t_grid.size(); ++i) {
                const double t = t_grid[i];
                const double I1 = detail::improper_integral(
                    [&](double s) { return g(s) * std::exp(-(mu - sd) * (s - t)); }, t,
                    rate + (mu - sd));
                const double I2 = detail::improper_integral(
                    [&](double s) { return g(s) * std::exp(-(mu + sd) * (s - t)); }, t,
                    rate + (mu + sd));
                sol.a[i] = (I1 - I2) / (2.0 * sd);
            }
            break;
        }
        case ModeRegime::Supercritical: {
            const double sd = std::sqrt(sol.d);
            const double I_all = detail::improper_integral(
                [&](double s) { return g(s) * std::exp(-(mu + sd) * (s - t0)); }, t0,
                rate + (mu + sd));
            for (std::size_t i = 0; i < t_grid.size(); ++i) {
                const double t = t_grid[i];
                const double e_minus = std::exp((mu - sd) * (t - t0));
                const double I_past = (t > t0)
                                          ? integrate_panels(
                                                [&](double s) {
                                                    return g(s) *
                                                           std::exp(-(mu - sd) * (s - t0));
                                                },
                                                t0, t,
                                                std::max(16, static_cast<int>((t - t0) * 4)))
                                          : 0.0;
                const double I_future = detail::improper_integral(
                    [&](double s) { return g(s) * std::exp(-(mu + sd) * (s - t)); }, t,
                    rate + (mu + sd));
                sol.a[i] = a0_at_t0 * e_minus + e_minus * I_all / (2.0 * sd) -
                           e_minus * I_past / (2.0 * sd) - I_future / (2.0 * sd);
            }
            break;
        }
    }
    return sol;
}

enum class LimitShape { PureMode, Constant, MixedMode3 };

struct DecayPrediction {
    double alpha;
    double P;
    int k;              // mode index of the leading correction (0 for Constant)
    int case_id;        // 1..4, case of the refined-behavior classification
    double t_exponent;  // decay rate of the deviation in the cylinder variable
    double r_exponent;  // power of r carried by the correction in u-space
    LimitShape limit_shape;
    std::optional<double> limit_coefficient;  // 9P/(36+2(2+alpha)^2) in case 3
};

// Free decay rate of mode k about the isotropic profile.
inline double mode_decay_rate(int k, double mu) {
    const double d = static_cast<double>(k) * k - 2.0 * mu * mu;
    if (d <= 0.0)
        throw std::invalid_argument("mode_decay_rate: mode does not decay monotonically");
    return std::sqrt(d) - mu;
}

inline DecayPrediction predicted_decay(const RefinedParams& p) {
    const double mu = p.mu();
    const double a = p.alpha;
    const double sqrt3 = std::sqrt(3.0);
    const double b_case3_lo = 2.0 * sqrt3 - 2.0;         // 2sqrt(3)-2
    const double b_tie = 1.5 * std::sqrt(10.0) - 2.0;    // (3/2)sqrt(10)-2
    const double b_case3_hi = 3.0 * sqrt3 - 2.0;         // 3sqrt(3)-2

    DecayPrediction pred;
    pred.alpha = a;
    pred.P = p.P;

    const bool forced_band =
        (a > b_case3_lo && a < b_tie) || (a > b_case3_hi && a < 4.0);
    const bool tie = std::abs(a - b_tie) < 1e-12;

    if (p.P > 0.0 && tie) {
        pred.case_id = 4;
        pred.k = 3;
        pred.t_exponent = 2.0 - mu;  // equals sqrt(9 - 2 mu^2) - mu here
        pred.r_exponent = 2.0;
        pred.limit_shape = LimitShape::MixedMode3;
        return pred;
    }
    if (p.P > 0.0 && forced_band) {
        pred.case_id = 3;
        pred.k = 0;
        pred.t_exponent = 2.0 - mu;
        pred.r_exponent = 2.0;
        pred.limit_shape = LimitShape::Constant;
        pred.limit_coefficient = 9.0 * p.P / (36.0 + 2.0 * (2.0 + a) * (2.0 + a));
        return pred;
    }

    // Pure-mode cases: k with alpha in ((k-1)sqrt(3)-2, k sqrt(3)-2).
    const int k = static_cast<int>(std::floor((a + 2.0) / sqrt3)) + 1;
    if (p.P > 0.0 && k > 3)
        throw std::domain_error(
            "predicted_decay: pure-mode decay is only stated for k <= 3 when P > 0");
    // exceptional band: mode 3 outlives the forced response there
    const bool exceptional_band = (a > b_tie && a < b_case3_hi);
    pred.case_id = exceptional_band ? 2 : 1;
    pred.k = k;
    pred.t_exponent = mode_decay_rate(k, mu);
    pred.r_exponent =
        std::sqrt(9.0 * k * k - 2.0 * (2.0 + a) * (2.0 + a)) / 3.0;
    pred.limit_shape = LimitShape::PureMode;
    return pred;
}

struct RateEntry {
    std::string source;  // "mode-k" or "forced"
    double t_exponent;
};

// Competing decay rates, ascending; the smallest identifies the leading
// correction.
inline std::vector<RateEntry> exponent_dominance(const RefinedParams& p) {
    const double mu = p.mu();
    std::vector<RateEntry> rates;
    const int k_min = static_cast<int>(std::floor(std::sqrt(3.0) * mu)) + 1;
    for (int k = k_min; k < k_min + 3; ++k)
        rates.push_back({"mode-" + std::to_string(k), mode_decay_rate(k, mu)});
    if (p.P > 0.0) rates.push_back({"forced", 2.0 - mu});
    std::stable_sort(rates.begin(), rates.end(),
                     [](const RateEntry& a, const RateEntry& b) {
                         return a.t_exponent < b.t_exponent;
                     });
    return rates;
}

}  // namespace mems
