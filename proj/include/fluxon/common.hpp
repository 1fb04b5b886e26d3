#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fluxon {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kPi = 3.14159265358979323846;

// Exact 2019 SI definitions of h and e; the flux quantum is h/2e.
inline constexpr double kPlanckSI = 6.62607015e-34;
inline constexpr double kElementaryChargeSI = 1.602176634e-19;
inline constexpr double kFluxQuantumSI = kPlanckSI / (2.0 * kElementaryChargeSI);

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

// ---------------------------------------------------------------------------
// Errors. Every named failure mode is its own type so callers can discriminate.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegeneratePatch : Error { using Error::Error; };
struct NonFiniteDerivative : Error { using Error::Error; };
struct OutsidePatch : Error { using Error::Error; };
struct OriginUndefinedAngle : Error { using Error::Error; };
struct AtCharge : Error { using Error::Error; };
struct OnSingularAxis : Error { using Error::Error; };
struct NearSingularAxis : Error { using Error::Error; };
struct QuadratureNonConvergence : Error { using Error::Error; };
struct GridContainsOrigin : Error { using Error::Error; };
struct IllConditionedFit : Error { using Error::Error; };
struct StencilLeavesDomain : Error { using Error::Error; };
struct NonNormalizedDensity : Error { using Error::Error; };
struct ClosedFormNotValidated : Error { using Error::Error; };

// ---------------------------------------------------------------------------
// Deterministic reduction helpers.
// ---------------------------------------------------------------------------

// Pairwise summation over a fixed-order sequence. Result depends only on the
// element order, never on chunking or thread count.
inline double pairwise_sum(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum(std::span<const double>(v));
}

// Thread cap: FLUXON_THREADS env var, else 1. Results are written into
// per-index slots so the thread count never changes any output.
inline unsigned thread_cap() {
    if (const char* s = std::getenv("FLUXON_THREADS")) {
        const long n = std::strtol(s, nullptr, 10);
        if (n >= 1) return static_cast<unsigned>(n);
    }
    return 1;
}

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned threads = thread_cap()) {
    if (threads <= 1 || n < 2 * threads) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += threads) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------------------
// Small numeric utilities shared across modules.
// ---------------------------------------------------------------------------

inline std::vector<double> log_spaced(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    if (n == 1) { v[0] = lo; return v; }
    const double l0 = std::log(lo), l1 = std::log(hi);
    for (int i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] = std::exp(l0 + (l1 - l0) * i / (n - 1));
    return v;
}

inline std::vector<double> lin_spaced(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    if (n == 1) { v[0] = lo; return v; }
    for (int i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return v;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

// Least-squares straight line through (x_i, y_i).
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i]; sy += y[i]; sxx += x[i] * x[i]; sxy += x[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    LineFit f;
    f.slope = (n * sxy - sx * sy) / det;
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

// Fitted convergence order from a step-halving sequence of residual
// magnitudes: log2(e_i / e_{i+1}) averaged by a log-log line fit.
inline double fitted_order(std::span<const double> steps, std::span<const double> errors) {
    std::vector<double> lx(steps.size()), ly(errors.size());
    for (std::size_t i = 0; i < steps.size(); ++i) {
        lx[i] = std::log(steps[i]);
        ly[i] = std::log(std::abs(errors[i]));
    }
    return fit_line(lx, ly).slope;
}

}  // namespace fluxon
