#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mems/analyzer.hpp"

using namespace mems;

namespace {

// Synthetic field whose mode-k amplitude decays exactly exponentially.
CylinderField synthetic_field(double rate, int k, double T, int n_t, int K) {
    CylinderConfig cfg;
    cfg.alpha = 0.0;
    cfg.lambda = 1.0;
    cfg.t0 = 0.0;
    cfg.T = T;
    cfg.n_t = n_t;
    cfg.K = K;
    cfg.boundary_t0 = constant_profile(cfg, cfg.m());
    cfg.boundary_T = constant_profile(cfg, cfg.m());

    CylinderField f;
    f.config = cfg;
    f.converged = true;
    const double dt = T / (n_t - 1);
    const std::vector<double> th = fourier_nodes(cfg.n_theta());
    f.t_grid.resize(n_t);
    f.v.assign(n_t, std::vector<double>(cfg.n_theta()));
    for (int i = 0; i < n_t; ++i) {
        f.t_grid[i] = i * dt;
        for (int m = 0; m < cfg.n_theta(); ++m)
            f.v[i][m] = cfg.m() + 0.01 * std::exp(-rate * f.t_grid[i]) * std::cos(k * th[m]);
    }
    return f;
}

}  // namespace

TEST_CASE("least squares recovers an exact line") {
    std::vector<double> x, y;
    for (int i = 0; i < 40; ++i) {
        x.push_back(0.3 * i);
        y.push_back(2.5 - 1.25 * 0.3 * i);
    }
    const LinearFit f = least_squares(x, y);
    CHECK(f.slope == doctest::Approx(-1.25).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mode decay fit on a synthetic field") {
    const CylinderField f = synthetic_field(1.3, 2, 10.0, 201, 8);
    const DecayFit fit = fit_mode_decay(f, 2, 2.0, 8.0);
    CHECK(fit.fitted_exponent == doctest::Approx(1.3).epsilon(1e-10));
    CHECK(fit.r_squared > 1.0 - 1e-12);

    const DecayFit auto_fit = fit_mode_decay_auto(f, 2);
    CHECK(auto_fit.fitted_exponent == doctest::Approx(1.3).epsilon(1e-9));
}

TEST_CASE("window rejection when the mode is below the floor") {
    const CylinderField f = synthetic_field(5.0, 2, 10.0, 201, 8);
    CHECK_THROWS_AS(fit_mode_decay(f, 2, 8.0, 10.0), WindowTooLate);
}

TEST_CASE("slope check against the predicted near-origin power") {
    const double alpha = 0.0;
    std::vector<double> r, u;
    for (int i = 0; i < 200; ++i) {
        const double x = std::pow(10.0, -3.0 + 3.0 * i / 199.0);
        r.push_back(x);
        u.push_back(1.7 * std::pow(x, 2.0 / 3.0));
    }
    const SlopeCheck sc = slope_check(r, u, alpha);
    CHECK(sc.pass);
    CHECK(sc.fitted_slope == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
    CHECK(sc.C1_hat == doctest::Approx(1.7).epsilon(1e-12));
    CHECK(sc.C2_hat == doctest::Approx(1.7).epsilon(1e-12));

    std::vector<double> r_narrow(r.begin(), r.begin() + 20);
    std::vector<double> u_narrow(u.begin(), u.begin() + 20);
    CHECK_THROWS_AS(slope_check(r_narrow, u_narrow, alpha), InsufficientRange);
}

TEST_CASE("gradient inequality estimate at the constant equilibrium") {
    PhaseParams p(2.0 / 3.0, 1.0);
    const std::vector<double> w(65, p.equilibrium());
    const LojEstimate est = loj_estimate(p, w, 0.01, 60, 7);
    CHECK(est.sample_count == 60);
    CHECK(est.theta_hat >= 0.4);
    CHECK(est.min_ratio >= 1.0);

    CHECK_THROWS_AS(loj_estimate(p, w, 0.5, 10, 0), std::invalid_argument);
    const std::vector<double> even_grid(64, p.equilibrium());
    CHECK_THROWS_AS(loj_estimate(p, even_grid, 0.01, 10, 0), std::invalid_argument);
}

TEST_CASE("limit coefficient on a synthetic forced field") {
    CylinderConfig cfg;
    cfg.alpha = 2.0;
    cfg.lambda = 1.0;
    cfg.P = 0.5;
    cfg.t0 = 0.0;
    cfg.T = 12.0;
    cfg.n_t = 241;
    cfg.K = 8;
    cfg.boundary_t0 = constant_profile(cfg, cfg.m());
    cfg.boundary_T = constant_profile(cfg, cfg.m());
    CylinderField f;
    f.config = cfg;
    f.converged = true;
    const double c_true = 9.0 * cfg.P / (36.0 + 2.0 * 16.0);
    const double sigma = 2.0 - cfg.mu();
    f.t_grid.resize(cfg.n_t);
    f.v.assign(cfg.n_t, std::vector<double>(cfg.n_theta()));
    for (int i = 0; i < cfg.n_t; ++i) {
        f.t_grid[i] = 12.0 * i / (cfg.n_t - 1);
        const double dev = c_true * std::exp(-sigma * f.t_grid[i]);
        for (int m = 0; m < cfg.n_theta(); ++m) f.v[i][m] = cfg.m() + dev;
    }
    RefinedParams params(cfg.alpha, cfg.lambda, cfg.P);
    const LimitCoefficient lc = limit_coefficient(f, params);
    CHECK(lc.value == doctest::Approx(c_true).epsilon(1e-6));
}
