#pragma once

#include "fluxon/common.hpp"

#include <cmath>

namespace fluxon {

// Bessel functions J0, J1, J2 to ~1e-13 absolute accuracy: ascending series
// in long double below the crossover, Hankel asymptotic expansion with
// optimal truncation above it.

namespace detail {

inline constexpr double kBesselCrossover = 16.0;

inline double bessel_series(int nu, double x) {
    const long double half = 0.5L * static_cast<long double>(x);
    long double term = 1.0L;
    for (int k = 1; k <= nu; ++k) term *= half / k;  // (x/2)^nu / nu!
    long double sum = term;
    const long double q = half * half;
    for (int m = 1; m <= 120; ++m) {
        term *= -q / (static_cast<long double>(m) * (m + nu));
        sum += term;
        if (std::abs(static_cast<double>(term)) < 1e-25) break;
    }
    return static_cast<double>(sum);
}

inline double bessel_asymptotic(int nu, double x) {
    const double mu = 4.0 * nu * nu;
    // Hankel symbol ratios: s_k = (nu,k) / (2x)^k.
    double s = 1.0;
    double P = 1.0, Q = 0.0;
    double prev = std::abs(s);
    for (int k = 1; k < 40; ++k) {
        const double odd = 2.0 * k - 1.0;
        s *= (mu - odd * odd) / (8.0 * k * x);
        if (std::abs(s) >= prev) break;  // optimal truncation
        prev = std::abs(s);
        const int m = k / 2;
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        if (k % 2 == 0)
            P += sign * s;
        else
            Q += sign * s;
        if (std::abs(s) < 1e-19) break;
    }
    const double chi = x - (2 * nu + 1) * kPi / 4.0;
    return std::sqrt(2.0 / (kPi * x)) * (std::cos(chi) * P - std::sin(chi) * Q);
}

inline double bessel_j(int nu, double x) {
    const double ax = std::abs(x);
    double v = (ax <= kBesselCrossover) ? bessel_series(nu, ax) : bessel_asymptotic(nu, ax);
    if (x < 0 && (nu % 2 != 0)) v = -v;
    return v;
}

}  // namespace detail

inline double bessel_j0(double x) { return detail::bessel_j(0, x); }
inline double bessel_j1(double x) { return detail::bessel_j(1, x); }
inline double bessel_j2(double x) { return detail::bessel_j(2, x); }

}  // namespace fluxon
