#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mems/fourier.hpp"
#include "mems/phase_plane.hpp"

using namespace mems;

namespace {

// Independent half-period oracle: RK4 time integration of
// w'' = lambda/w^2 - A^2 w from the orbit minimum until w' crosses zero.
double shooting_half_period(const PhaseParams& p, double tau) {
    const EnergyLevel lv = level_from_tau(p, tau);
    double w = lv.w1, wp = 0.0, theta = 0.0;
    const double h = 1e-5;
    auto acc = [&](double w_) { return p.lambda / (w_ * w_) - p.A * p.A * w_; };
    // leave the stationary endpoint before watching for the sign change
    double prev_wp = 0.0;
    for (long step = 0; step < 100000000L; ++step) {
        const double k1w = wp, k1p = acc(w);
        const double k2w = wp + 0.5 * h * k1p, k2p = acc(w + 0.5 * h * k1w);
        const double k3w = wp + 0.5 * h * k2p, k3p = acc(w + 0.5 * h * k2w);
        const double k4w = wp + h * k3p, k4p = acc(w + h * k3w);
        prev_wp = wp;
        w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        wp += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        theta += h;
        if (theta > h * 10 && prev_wp > 0.0 && wp <= 0.0) {
            // linear interpolation of the crossing inside the last step
            return theta - h * wp / (wp - prev_wp) * 1.0;
        }
    }
    FAIL("shooting oracle never returned");
    return 0.0;
}

}  // namespace

TEST_CASE("equilibrium and ground energy") {
    PhaseParams p(1.5, 2.0);
    const double w0 = p.equilibrium();
    CHECK(w0 == doctest::Approx(std::cbrt(2.0 / 2.25)).epsilon(1e-14));
    // g'(w0) = 0 and g(w0) = ground energy
    const double eps = 1e-6;
    CHECK(energy_at(p, w0) < energy_at(p, w0 + eps));
    CHECK(energy_at(p, w0) < energy_at(p, w0 - eps));
    CHECK(energy_at(p, w0) == doctest::Approx(p.ground_energy()).epsilon(1e-12));
}

TEST_CASE("half period agrees with shooting integration") {
    for (double A : {0.8, 1.0, 1.4}) {
        PhaseParams p(A, 1.0);
        for (double tau : {1.5, 2.0, 5.0}) {
            const double L = half_period(p, tau);
            const double L_shot = shooting_half_period(p, tau);
            CHECK(L == doctest::Approx(L_shot).epsilon(2e-6));
        }
    }
}

TEST_CASE("half period is independent of lambda at fixed tau") {
    PhaseParams a(1.2, 1.0), b(1.2, 50.0);
    CHECK(half_period(a, 3.0) == doctest::Approx(half_period(b, 3.0)).epsilon(1e-12));
}

TEST_CASE("half period limits and monotonicity") {
    PhaseParams p(1.0, 1.0);
    CHECK(half_period(p, 1.0 + 1e-9) == doctest::Approx(kPi / std::sqrt(3.0)).epsilon(1e-4));
    CHECK(half_period(p, 1e10) == doctest::Approx(kPi / 2.0).epsilon(1e-4));
    double prev = half_period(p, 1.01);
    for (double tau = 1.2; tau < 2000.0; tau *= 1.7) {
        const double L = half_period(p, tau);
        CHECK(L < prev);
        prev = L;
    }
}

TEST_CASE("classification matches interval-membership oracle") {
    // A is isotropic-only iff A is in (0,1/2] or in [k/sqrt(3),(k+1)/2] for
    // some k = 1..6, written directly from the union of closed intervals.
    auto oracle = [](double A) {
        if (A <= 0.5) return true;
        for (int k = 1; k <= 6; ++k)
            if (A >= k / std::sqrt(3.0) && A <= (k + 1) / 2.0) return true;
        return false;
    };
    for (double A = 0.05; A < 4.0; A += 0.0137) CHECK(classify_A(A) == oracle(A));
}

TEST_CASE("classification mode lists") {
    const Classification c = classify_alpha(1.2, false);
    CHECK(c.regime == Regime::Anisotropic);
    REQUIRE(c.N0 == 1);
    CHECK(c.modes[0] == 2);

    const Classification iso = classify_alpha(0.0, true);
    CHECK(iso.regime == Regime::IsotropicOnly);
    CHECK(iso.modes.empty());

    CHECK_THROWS_AS(classify_alpha(-2.5, false), std::invalid_argument);
    CHECK_THROWS_AS(classify_alpha(4.0, true), std::invalid_argument);
}

TEST_CASE("solve_tau_for_mode hits the target period") {
    PhaseParams p((2.0 + 1.2) / 3.0, 1.0);
    const EnergyLevel lv = solve_tau_for_mode(p, 2);
    CHECK(half_period(p, lv.tau) == doctest::Approx(kPi / 2.0).epsilon(1e-9));
    CHECK_THROWS_AS(solve_tau_for_mode(p, 5), NoSuchMode);
}

TEST_CASE("orbit satisfies the ODE spectrally") {
    PhaseParams p((2.0 + 1.2) / 3.0, 1.0);
    const PeriodicOrbit orbit = construct_orbit(p, 2, 512);
    const std::vector<double> wpp = spectral_derivative(orbit.w, 2);
    double max_res = 0.0;
    for (std::size_t i = 0; i < orbit.w.size(); ++i) {
        const double res = wpp[i] + p.A * p.A * orbit.w[i] -
                           p.lambda / (orbit.w[i] * orbit.w[i]);
        max_res = std::max(max_res, std::abs(res));
    }
    CHECK(max_res < 1e-8);

    // first integral with spectrally differentiated w'
    const std::vector<double> wp = spectral_derivative(orbit.w, 1);
    const double E = orbit.level.E;
    for (std::size_t i = 0; i < orbit.w.size(); ++i)
        CHECK(wp[i] * wp[i] + energy_at(p, orbit.w[i]) == doctest::Approx(E).epsilon(1e-9));
}

TEST_CASE("orbit periodicity and endpoint values") {
    PhaseParams p((2.0 + 1.2) / 3.0, 1.0);
    const int n = 480;
    const PeriodicOrbit orbit = construct_orbit(p, 2, n);
    const int period_n = n / 2;
    for (int i = 0; i < period_n; ++i)
        CHECK(orbit.w[i] == doctest::Approx(orbit.w[i + period_n]).epsilon(1e-14));
    CHECK(orbit.w[0] == doctest::Approx(orbit.level.w1).epsilon(1e-12));
    CHECK(orbit.w[period_n / 2] == doctest::Approx(orbit.level.w2).epsilon(1e-12));
}

TEST_CASE("orbit scaling law w -> s*w under lambda -> s^3*lambda") {
    const double A = (2.0 + 1.2) / 3.0;
    PhaseParams p1(A, 1.0), p8(A, 8.0);
    const PeriodicOrbit o1 = construct_orbit(p1, 2, 256);
    const PeriodicOrbit o8 = construct_orbit(p8, 2, 256);
    for (std::size_t i = 0; i < o1.w.size(); ++i)
        CHECK(o8.w[i] == doctest::Approx(2.0 * o1.w[i]).epsilon(1e-9));
}
