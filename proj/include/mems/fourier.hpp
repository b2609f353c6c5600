#pragma once

// Small dense Fourier helpers for periodic collocation on an odd number of
// equispaced nodes. Sizes here are tiny (<= a few hundred), so direct DFTs
// are used throughout.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace mems {

using cplx = std::complex<double>;

// Collocation nodes theta_m = 2*pi*m/M, m = 0..M-1.
inline std::vector<double> fourier_nodes(int M) {
    std::vector<double> th(M);
    for (int m = 0; m < M; ++m) th[m] = 2.0 * M_PI * m / M;
    return th;
}

// Coefficients c_k, k = -K..K (M = 2K+1), with v(theta) = sum c_k e^{i k theta}.
// Index k is stored at position k+K.
inline std::vector<cplx> dft(const std::vector<double>& v) {
    const int M = static_cast<int>(v.size());
    const int K = (M - 1) / 2;
    std::vector<cplx> c(M);
    for (int k = -K; k <= K; ++k) {
        cplx s = 0.0;
        for (int m = 0; m < M; ++m) {
            const double ang = -2.0 * M_PI * k * m / M;
            s += v[m] * cplx(std::cos(ang), std::sin(ang));
        }
        c[k + K] = s / static_cast<double>(M);
    }
    return c;
}

// Evaluates sum c_k e^{i k theta} on M_out equispaced nodes (M_out >= 2K+1).
inline std::vector<double> idft(const std::vector<cplx>& c, int M_out) {
    const int K = (static_cast<int>(c.size()) - 1) / 2;
    std::vector<double> v(M_out, 0.0);
    for (int m = 0; m < M_out; ++m) {
        const double theta = 2.0 * M_PI * m / M_out;
        cplx s = 0.0;
        for (int k = -K; k <= K; ++k) s += c[k + K] * cplx(std::cos(k * theta), std::sin(k * theta));
        v[m] = s.real();
    }
    return v;
}

inline std::vector<cplx> truncate_modes(const std::vector<cplx>& c, int K_out) {
    const int K = (static_cast<int>(c.size()) - 1) / 2;
    if (K_out > K) throw std::invalid_argument("truncate_modes: K_out exceeds input");
    std::vector<cplx> out(2 * K_out + 1);
    for (int k = -K_out; k <= K_out; ++k) out[k + K_out] = c[k + K];
    return out;
}

// Spectral derivative of given order on the collocation grid.
inline std::vector<double> spectral_derivative(const std::vector<double>& v, int order) {
    const int M = static_cast<int>(v.size());
    const int K = (M - 1) / 2;
    std::vector<cplx> c = dft(v);
    for (int k = -K; k <= K; ++k) {
        cplx f = 1.0;
        for (int o = 0; o < order; ++o) f *= cplx(0.0, static_cast<double>(k));
        c[k + K] *= f;
    }
    return idft(c, M);
}

// Pointwise f(v) evaluated on a 3/2-padded grid, then truncated back to the
// collocation resolution (dealiased evaluation of smooth nonlinearities).
template <class F>
std::vector<double> dealiased_pointwise(const std::vector<double>& v, F&& f) {
    const int M = static_cast<int>(v.size());
    const int K = (M - 1) / 2;
    int Mp = 3 * K + 2;
    if (Mp % 2 == 0) ++Mp;
    std::vector<cplx> c = dft(v);
    std::vector<cplx> padded(Mp, 0.0);
    const int Kp = (Mp - 1) / 2;
    for (int k = -K; k <= K; ++k) padded[k + Kp] = c[k + K];
    std::vector<double> fine = idft(padded, Mp);
    for (double& x : fine) x = f(x);
    std::vector<cplx> cf = dft(fine);
    return idft(truncate_modes(cf, K), M);
}

// Trapezoid rule on the periodic grid (spectrally accurate).
inline double periodic_integral(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s * 2.0 * M_PI / static_cast<double>(v.size());
}

// Evaluates the trigonometric interpolant of samples at an arbitrary angle.
inline double trig_eval(const std::vector<cplx>& c, double theta) {
    const int K = (static_cast<int>(c.size()) - 1) / 2;
    cplx s = 0.0;
    for (int k = -K; k <= K; ++k) s += c[k + K] * cplx(std::cos(k * theta), std::sin(k * theta));
    return s.real();
}

}  // namespace mems
