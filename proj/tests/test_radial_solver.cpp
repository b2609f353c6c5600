#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mems/radial_solver.hpp"

using namespace mems;

namespace {

// Midpoint-rule oracle for the radial moments of the torsion function.
double moment_oracle(int N, double alpha) {
    const double volume = std::pow(M_PI, 0.5 * N) / std::tgamma(0.5 * N + 1.0);
    const double surface = N * volume;
    const int n = 200000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = (i + 0.5) / n;
        sum += std::pow(r, alpha) * (1.0 - r * r) / (2.0 * N) * std::pow(r, N - 1);
    }
    return surface * sum / n;
}

std::vector<double> sample_power(int n_grid, double p) {
    std::vector<double> u(n_grid + 1);
    for (int i = 0; i <= n_grid; ++i) u[i] = std::pow(static_cast<double>(i) / n_grid, p);
    return u;
}

double window_residual(const ProblemSpec& spec, double lambda, const std::vector<double>& u) {
    const std::vector<double> res = radial_residual(spec, lambda, u);
    double worst = 0.0;
    for (int i = 0; i <= spec.n_grid; ++i) {
        const double r = static_cast<double>(i) / spec.n_grid;
        if (r < 0.25 || r > 0.75) continue;
        worst = std::max(worst, std::abs(res[i]));
    }
    return worst;
}

}  // namespace

TEST_CASE("torsion constants match quadrature oracle") {
    for (int N : {1, 2, 3}) {
        for (double alpha : {0.0, 1.0, 2.5}) {
            const TorsionConstants tc = torsion_constants(N, alpha);
            CHECK(tc.P_star == doctest::Approx(2.0 * N));
            CHECK(tc.integral_phi_f ==
                  doctest::Approx(moment_oracle(N, alpha)).epsilon(1e-8));
        }
    }
    const TorsionConstants disk = torsion_constants(2, 0.0);
    CHECK(disk.volume == doctest::Approx(M_PI).epsilon(1e-14));
    CHECK(disk.integral_phi == doctest::Approx(M_PI / 8.0).epsilon(1e-14));
}

TEST_CASE("existence bounds for the unit disk") {
    ProblemSpec spec;
    spec.N = 2;
    spec.alpha = 0.0;
    spec.P = 1.0;
    const TheoremOneBounds b = theorem1_bounds(spec);
    CHECK(b.lower == doctest::Approx(4.0 * 27.0 / 432.0).epsilon(1e-13));
    CHECK(b.upper == doctest::Approx(7.0).epsilon(1e-13));
    CHECK(b.lower < b.upper);

    spec.P = 4.0;
    CHECK_THROWS_AS(theorem1_bounds(spec), NonexistenceRegime);
}

TEST_CASE("u = r^2 is an exact discrete solution") {
    ProblemSpec spec;
    spec.alpha = 4.0;
    spec.P = 1.0;
    spec.n_grid = 128;
    const std::vector<double> u = sample_power(spec.n_grid, 2.0);
    CHECK(window_residual(spec, 3.0, u) < 1e-11);
}

TEST_CASE("singular profile residual is second order") {
    ProblemSpec spec;
    spec.alpha = 0.0;
    const double lambda = 4.0 / 9.0;
    double prev = 0.0;
    for (int n : {128, 256, 512}) {
        spec.n_grid = n;
        const double res = window_residual(spec, lambda, sample_power(n, 2.0 / 3.0));
        if (prev > 0.0) {
            const double order = std::log2(prev / res);
            CHECK(order > 1.8);
            CHECK(order < 2.2);
        }
        prev = res;
    }
}

TEST_CASE("small-lambda solve converges and is monotone in r") {
    ProblemSpec spec;
    spec.alpha = 0.0;
    spec.n_grid = 256;
    const RadialSolution sol = solve_radial(spec, 0.2);
    REQUIRE(sol.converged);
    CHECK(sol.admissible);
    CHECK(sol.residual_norm < 1e-10);
    for (int i = 0; i < spec.n_grid; ++i) {
        CHECK(sol.u[i] > 0.0);
        CHECK(sol.u[i] <= sol.u[i + 1] + 1e-12);
    }
    CHECK(sol.u[spec.n_grid] == 1.0);
}

TEST_CASE("solve refines under grid doubling") {
    ProblemSpec coarse, fine;
    coarse.n_grid = 128;
    fine.n_grid = 256;
    const RadialSolution a = solve_radial(coarse, 0.5);
    const RadialSolution b = solve_radial(fine, 0.5);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    // centre value agrees to a few times the coarse truncation error
    CHECK(a.u[0] == doctest::Approx(b.u[0]).epsilon(1e-4));
}

TEST_CASE("continuation brackets the fold") {
    ProblemSpec spec;
    spec.n_grid = 128;
    const ContinuationTrace trace = continue_in_lambda(spec);
    CHECK(trace.lambda_fail - trace.lambda_ok <= 1e-4 + 1e-12);
    const TheoremOneBounds b = theorem1_bounds(spec);
    CHECK(trace.lambda_star_estimate > b.lower);
    CHECK(trace.lambda_star_estimate < b.upper);
}

TEST_CASE("no admissible solution beyond the pressure threshold") {
    ProblemSpec spec;
    spec.P = 4.1;  // above P* = 4 on the disk
    spec.n_grid = 128;
    for (double lambda : {0.01, 0.1, 1.0}) {
        const RadialSolution sol = solve_radial(spec, lambda);
        CHECK_FALSE((sol.converged && sol.admissible));
    }
}

TEST_CASE("input validation") {
    ProblemSpec spec;
    spec.alpha = -1.0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.alpha = 0.0;
    spec.P = -0.5;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}
