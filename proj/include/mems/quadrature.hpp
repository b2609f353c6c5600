#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>

namespace mems {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = false;
};

namespace detail {

// 15-point Gauss-Legendre nodes/weights on [-1,1].
inline constexpr double kGL15Nodes[15] = {
    -0.9879925180204854, -0.9372733924007060, -0.8482065834104272,
    -0.7244177313601701, -0.5709721726085388, -0.3941513470775634,
    -0.2011940939974345,  0.0,                 0.2011940939974345,
     0.3941513470775634,  0.5709721726085388,  0.7244177313601701,
     0.8482065834104272,  0.9372733924007060,  0.9879925180204854};

inline constexpr double kGL15Weights[15] = {
    0.0307532419961173, 0.0703660474881081, 0.1071592204671719,
    0.1395706779261543, 0.1662692058169939, 0.1861610000155622,
    0.1984314853271116, 0.2025782419255613, 0.1984314853271116,
    0.1861610000155622, 0.1662692058169939, 0.1395706779261543,
    0.1071592204671719, 0.0703660474881081, 0.0307532419961173};

template <class F>
double gauss15(F&& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 15; ++i) s += kGL15Weights[i] * f(c + h * kGL15Nodes[i]);
    return h * s;
}

template <class F>
void adapt(F& f, double a, double b, double whole, double tol, int depth,
           double& sum, double& err, bool& ok) {
    const double m = 0.5 * (a + b);
    const double left = gauss15(f, a, m);
    const double right = gauss15(f, m, b);
    const double delta = left + right - whole;
    if (std::abs(delta) <= tol || depth <= 0) {
        sum += left + right;
        err += std::abs(delta);
        if (std::abs(delta) > tol && depth <= 0) ok = false;
        return;
    }
    adapt(f, a, m, left, 0.5 * tol, depth - 1, sum, err, ok);
    adapt(f, m, b, right, 0.5 * tol, depth - 1, sum, err, ok);
}

}  // namespace detail

// Adaptive Gauss-Legendre on [a,b] with absolute tolerance.
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b,
                                    double abs_tol = 1e-12, int max_depth = 48) {
    QuadratureResult r;
    if (a == b) {
        r.converged = true;
        return r;
    }
    const double whole = detail::gauss15(f, a, b);
    bool ok = true;
    detail::adapt(f, a, b, whole, abs_tol, max_depth, r.value, r.error_estimate, ok);
    r.converged = ok;
    return r;
}

// Non-adaptive panel rule: n panels of 15-point Gauss each.
template <class F>
double integrate_panels(F&& f, double a, double b, int n_panels) {
    const double h = (b - a) / n_panels;
    double s = 0.0;
    for (int i = 0; i < n_panels; ++i)
        s += detail::gauss15(f, a + i * h, a + (i + 1) * h);
    return s;
}

}  // namespace mems
