#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mems/mode_dynamics.hpp"
#include "mems/radial_solver.hpp"  // reuses the tridiagonal solve

using namespace mems;

namespace {

// Generic second-order BVP oracle for a'' - 2 mu a' + (3 mu^2 - k^2) a = g on
// [0,T], Dirichlet values taken from the candidate solution. Agreement in the
// middle of the interval validates the closed-form formulas independently.
std::vector<double> fd_bvp(int k, double mu, const std::function<double(double)>& g,
                           double T, int n, double a_left, double a_right) {
    const double h = T / n;
    const double c = 3.0 * mu * mu - static_cast<double>(k) * k;
    std::vector<double> sub(n - 1), diag(n - 1), sup(n - 1), rhs(n - 1);
    for (int i = 1; i < n; ++i) {
        sub[i - 1] = 1.0 / (h * h) + mu / h;
        diag[i - 1] = -2.0 / (h * h) + c;
        sup[i - 1] = 1.0 / (h * h) - mu / h;
        rhs[i - 1] = g(i * h);
    }
    rhs[0] -= (1.0 / (h * h) + mu / h) * a_left;
    rhs[n - 2] -= (1.0 / (h * h) - mu / h) * a_right;
    sub[0] = 0.0;
    sup[n - 2] = 0.0;
    detail::solve_tridiagonal(sub, diag, sup, rhs);
    std::vector<double> a(n + 1);
    a[0] = a_left;
    a[n] = a_right;
    for (int i = 1; i < n; ++i) a[i] = rhs[i - 1];
    return a;
}

std::vector<double> uniform_grid(double T, int n) {
    std::vector<double> t(n + 1);
    for (int i = 0; i <= n; ++i) t[i] = T * i / n;
    return t;
}

void check_against_bvp(int k, double mu, const Forcing& forcing, double T, int n,
                       double a0_at_t0 = 0.0) {
    const std::vector<double> t = uniform_grid(T, n);
    const ModeSolution sol = bounded_mode_solution(k, mu, forcing, t, a0_at_t0);
    const std::vector<double> fd =
        fd_bvp(k, mu, forcing.g, T, n, sol.a.front(), sol.a.back());
    double scale = 0.0;
    for (double x : sol.a) scale = std::max(scale, std::abs(x));
    for (int i = n / 3; i <= 2 * n / 3; ++i)
        CHECK(std::abs(sol.a[i] - fd[i]) < 1e-6 * std::max(1.0, scale));
}

}  // namespace

TEST_CASE("regime selection") {
    const double mu = 2.0 / 3.0;
    CHECK(mode_regime(0, mu) == ModeRegime::Oscillatory);
    CHECK(mode_regime(1, mu) == ModeRegime::Subcritical);  // sqrt(2)*2/3 = 0.943 < 1
    CHECK(mode_regime(2, mu) == ModeRegime::Supercritical);
    CHECK(mode_regime(2, 2.0 / std::sqrt(2.0)) == ModeRegime::Critical);
}

TEST_CASE("oscillatory formula matches FD solve") {
    Forcing f{[](double t) { return std::exp(-t); }, 1.0};
    check_against_bvp(0, 2.0 / 3.0, f, 6.0, 24000);
}

TEST_CASE("critical formula matches FD solve") {
    const double mu = 2.0 / std::sqrt(2.0);
    Forcing f{[](double t) { return std::exp(-1.5 * t); }, 1.5};
    // both homogeneous solutions grow like e^{mu t}; keep the window short so
    // the FD truncation error is not amplified past the comparison tolerance
    check_against_bvp(2, mu, f, 3.0, 48000);
}

TEST_CASE("subcritical formula matches FD solve") {
    Forcing f{[](double t) { return std::exp(-t) * std::cos(t); }, 1.0};
    check_against_bvp(1, 2.0 / 3.0, f, 6.0, 24000);
}

TEST_CASE("supercritical formula matches FD solve, with homogeneous part") {
    Forcing f{[](double t) { return std::exp(-2.0 * t); }, 2.0};
    check_against_bvp(3, 2.0 / 3.0, f, 6.0, 24000, 0.7);
}

TEST_CASE("supercritical homogeneous decay is exact") {
    Forcing zero{[](double) { return 0.0; }, 1.0};
    const double mu = 2.0 / 3.0;
    const std::vector<double> t = uniform_grid(5.0, 50);
    const ModeSolution sol = bounded_mode_solution(3, mu, zero, t, 1.0);
    const double rate = mu - std::sqrt(9.0 - 2.0 * mu * mu);
    for (std::size_t i = 0; i < t.size(); ++i)
        CHECK(sol.a[i] == doctest::Approx(std::exp(rate * t[i])).epsilon(1e-10));
}

TEST_CASE("constant-forcing response coefficient is analytic") {
    // forcing sqrt(2*pi) P e^{-(2-mu)t} gives a0 with coefficient
    // sqrt(2*pi) * 9P/(36+2(2+alpha)^2)
    for (double alpha : {0.0, 2.0, 3.0}) {
        const double mu = (2.0 + alpha) / 3.0;
        const double P = 0.5;
        const double sigma = 2.0 - mu;
        Forcing f{[&](double t) { return std::sqrt(2.0 * M_PI) * P * std::exp(-sigma * t); },
                  sigma};
        const std::vector<double> t = uniform_grid(4.0, 16);
        const ModeSolution sol = bounded_mode_solution(0, mu, f, t);
        const double expected = 9.0 * P / (36.0 + 2.0 * (2.0 + alpha) * (2.0 + alpha));
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double coef = sol.a[i] / (std::sqrt(2.0 * M_PI) * std::exp(-sigma * t[i]));
            CHECK(coef == doctest::Approx(expected).epsilon(1e-9));
        }
    }
}

TEST_CASE("predicted decay cases") {
    // case 1: pure mode 2
    RefinedParams p1(0.0, 1.0, 0.0);
    const DecayPrediction d1 = predicted_decay(p1);
    CHECK(d1.case_id == 1);
    CHECK(d1.k == 2);
    CHECK(d1.t_exponent ==
          doctest::Approx((2.0 * std::sqrt(7.0) - 2.0) / 3.0).epsilon(1e-13));
    CHECK(d1.r_exponent == doctest::Approx(std::sqrt(36.0 - 8.0) / 3.0).epsilon(1e-13));
    CHECK(d1.limit_shape == LimitShape::PureMode);

    // case 3: forced constant
    RefinedParams p3(2.0, 1.0, 0.5);
    const DecayPrediction d3 = predicted_decay(p3);
    CHECK(d3.case_id == 3);
    CHECK(d3.limit_shape == LimitShape::Constant);
    CHECK(d3.t_exponent == doctest::Approx(2.0 - 4.0 / 3.0).epsilon(1e-13));
    REQUIRE(d3.limit_coefficient.has_value());
    CHECK(*d3.limit_coefficient == doctest::Approx(4.5 / 68.0).epsilon(1e-13));

    // case 4: tie
    const double alpha_tie = 1.5 * std::sqrt(10.0) - 2.0;
    RefinedParams p4(alpha_tie, 1.0, 1.0);
    const DecayPrediction d4 = predicted_decay(p4);
    CHECK(d4.case_id == 4);
    CHECK(d4.limit_shape == LimitShape::MixedMode3);
    const double mu = (2.0 + alpha_tie) / 3.0;
    CHECK(d4.t_exponent == doctest::Approx(std::sqrt(9.0 - 2.0 * mu * mu) - mu).epsilon(1e-12));

    // case 2: pure mode in the exceptional band with P = 0
    RefinedParams p2(3.0, 1.0, 0.0);
    const DecayPrediction d2 = predicted_decay(p2);
    CHECK(d2.case_id == 2);
    CHECK(d2.k == 3);
}

TEST_CASE("resonance values are rejected") {
    CHECK_THROWS_AS(RefinedParams(std::sqrt(3.0) - 2.0, 1.0, 0.0), ResonanceExcluded);
    CHECK_THROWS_AS(RefinedParams(2.0 * std::sqrt(3.0) - 2.0, 1.0, 0.0), ResonanceExcluded);
}

TEST_CASE("dominant mode increments across an interval boundary") {
    const double b = 2.0 * std::sqrt(3.0) - 2.0;
    const DecayPrediction below = predicted_decay(RefinedParams(b - 1e-6, 1.0, 0.0));
    const DecayPrediction above = predicted_decay(RefinedParams(b + 1e-6, 1.0, 0.0));
    CHECK(below.k == 2);
    CHECK(above.k == 3);
}

TEST_CASE("exponent dominance ordering") {
    RefinedParams p(0.0, 1.0, 0.5);
    const std::vector<RateEntry> rates = exponent_dominance(p);
    REQUIRE(rates.size() == 4);
    CHECK(rates.front().source == "mode-2");
    for (std::size_t i = 0; i + 1 < rates.size(); ++i)
        CHECK(rates[i].t_exponent <= rates[i + 1].t_exponent);
}
