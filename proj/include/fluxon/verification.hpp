#pragma once

#include "fluxon/expansion.hpp"
#include "fluxon/quadrature.hpp"

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace fluxon {

using ScalarField = std::function<double(const Vec3&)>;
using VectorField = std::function<FieldVector(const LocalPoint&)>;

// ---------------------------------------------------------------------------
// GridSpec: the standard evaluation grid. Log-spaced radii, theta strictly
// inside (pi/2, pi], full phi circle; every node lies in the open domain
// z < 0 and respects the singular-axis guard.
// ---------------------------------------------------------------------------

struct GridSpec {
    double r_lo = 1e-2, r_hi = 1.0;
    int n_r = 8;
    double theta_lo = 0.6 * kPi, theta_hi = 0.98 * kPi;
    int n_theta = 6;
    int n_phi = 8;

    void validate() const {
        if (!(r_lo > 0 && r_hi > r_lo)) throw Error("grid radii must be positive and increasing");
        if (!(theta_lo > 0.5 * kPi) || !(theta_hi <= kPi) || !(theta_hi > theta_lo))
            throw Error("grid theta range must lie within (pi/2, pi]");
        if (n_r < 1 || n_theta < 1 || n_phi < 1) throw Error("grid counts must be positive");
    }

    std::vector<LocalPoint> points() const {
        validate();
        std::vector<LocalPoint> pts;
        pts.reserve(static_cast<std::size_t>(n_r * n_theta * n_phi));
        for (double r : log_spaced(r_lo, r_hi, n_r))
            for (double th : lin_spaced(theta_lo, theta_hi, n_theta))
                for (int j = 0; j < n_phi; ++j)
                    pts.push_back(LocalPoint::from_spherical(r, th, 2 * kPi * j / n_phi));
        return pts;
    }
};

// ---------------------------------------------------------------------------
// Finite-difference probes.
// ---------------------------------------------------------------------------

namespace detail {

inline void require_in_domain(const Vec3& p) {
    if (!(p.z() < 0.0)) throw StencilLeavesDomain("stencil point left the open domain z < 0");
}

}  // namespace detail

// Default steps: balance truncation against rounding near the singularity.
inline double gradient_step(double r, double scale = 1.0) {
    return std::max(1e-4 * r, 1e-8 * scale);
}

inline double laplacian_step(double r) { return r * std::pow(kEps, 0.25); }

// Standard second-order 7-point Laplacian estimate.
inline double fd_laplacian(const ScalarField& f, const Vec3& p, double h) {
    double acc = -6.0 * f(p);
    for (int axis = 0; axis < 3; ++axis) {
        Vec3 e = Vec3::Zero();
        e[axis] = h;
        detail::require_in_domain(p + e);
        detail::require_in_domain(p - e);
        acc += f(p + e) + f(p - e);
    }
    detail::require_in_domain(p);
    return acc / (h * h);
}

// 4th-order central gradient.
inline Vec3 fd_gradient(const ScalarField& f, const Vec3& p, double h) {
    Vec3 g;
    for (int axis = 0; axis < 3; ++axis) {
        Vec3 e = Vec3::Zero();
        e[axis] = h;
        detail::require_in_domain(p + 2 * e);
        detail::require_in_domain(p - 2 * e);
        g[axis] = (f(p - 2 * e) - 8 * f(p - e) + 8 * f(p + e) - f(p + 2 * e)) / (12 * h);
    }
    return g;
}

// Directional derivative along `dir` (normalized internally), 4th order.
inline double fd_directional(const ScalarField& f, const Vec3& p, const Vec3& dir, double h) {
    const Vec3 e = dir.normalized() * h;
    detail::require_in_domain(p + 2 * e);
    detail::require_in_domain(p - 2 * e);
    return (f(p - 2 * e) - 8 * f(p - e) + 8 * f(p + e) - f(p + 2 * e)) / (12 * h);
}

// ---------------------------------------------------------------------------
// Hemisphere flux of B through r = epsilon, z <= 0: Gauss-Legendre in
// cos(theta), trapezoid in phi, deterministic pairwise reduction, with a
// refinement consistency check.
// ---------------------------------------------------------------------------

struct FluxQuadrature {
    int n_theta = 32;
    int n_phi = 64;
    double check_tol = 1e-7;  // relative disagreement allowed vs refined rule
};

namespace detail {

inline double hemisphere_flux_once(const VectorField& field, double epsilon, int n_theta,
                                   int n_phi) {
    const GaussLegendreRule rule = gauss_legendre(n_theta);
    std::vector<double> contributions;
    contributions.reserve(static_cast<std::size_t>(n_theta * n_phi));
    for (int i = 0; i < n_theta; ++i) {
        // map [-1,1] -> u = cos(theta) in [-1, 0]
        const double u = 0.5 * (rule.nodes[static_cast<std::size_t>(i)] - 1.0);
        const double w_u = 0.5 * rule.weights[static_cast<std::size_t>(i)];
        const double theta = std::acos(u);
        for (int j = 0; j < n_phi; ++j) {
            const double phi = 2 * kPi * j / n_phi;
            const LocalPoint p = LocalPoint::from_spherical(epsilon, theta, phi);
            const double B_r = field(p).B_r;
            contributions.push_back(B_r * epsilon * epsilon * w_u * (2 * kPi / n_phi));
        }
    }
    return pairwise_sum(contributions);
}

}  // namespace detail

inline double flux_through_hemisphere(const VectorField& field, double epsilon,
                                      const FluxQuadrature& q = {}) {
    if (!(epsilon > 0)) throw Error("hemisphere radius must be positive");
    const double coarse = detail::hemisphere_flux_once(field, epsilon, q.n_theta, q.n_phi);
    const double fine = detail::hemisphere_flux_once(field, epsilon, 2 * q.n_theta, 2 * q.n_phi);
    const double scale = std::max(std::abs(fine), std::abs(coarse));
    if (scale > 0 && std::abs(fine - coarse) > q.check_tol * scale)
        throw QuadratureNonConvergence("hemisphere flux did not settle under refinement");
    return fine;
}

// ---------------------------------------------------------------------------
// Boundary-condition residual of the split half-space problems at z = -delta.
// ---------------------------------------------------------------------------

enum class SplitTerm { psi1s, psi1r };

inline double boundary_residual(SplitTerm term, const ExpansionParams& params, double rho,
                                double phi, double delta) {
    if (!(delta > 0) || !(rho > 0)) throw Error("boundary_residual requires rho, delta > 0");
    const Vec3 p(rho * std::cos(phi), rho * std::sin(phi), -delta);
    const double h = delta / 8.0;

    ScalarField f;
    double target;
    if (term == SplitTerm::psi1s) {
        f = [&params](const Vec3& q) { return psi1s(LocalPoint(q), params); };
        target = -params.K_plus / rho;
    } else {
        f = [&params](const Vec3& q) { return psi1r(LocalPoint(q), params); };
        target = -params.K_minus / rho * std::cos(2 * phi);
    }
    const double dpsi_dz = fd_directional(f, p, Vec3::UnitZ(), h);
    return dpsi_dz - target;
}

// ---------------------------------------------------------------------------
// Finite-size fluxon smearing: the potential of a radially symmetric surface
// density on the tangent plane, each area element acting as a fractional
// point charge with the singular-kernel potential.
// ---------------------------------------------------------------------------

struct SmearDensity {
    std::function<double(double)> profile;  // mu(s), flux per area
    double width = 0.0;                     // core width w
    Charge charge;

    static SmearDensity gaussian(const Charge& c, double w) {
        if (!(w > 0)) throw Error("smear core width must be positive");
        SmearDensity d;
        d.width = w;
        d.charge = c;
        d.profile = [c, w](double s) {
            return c.signed_flux() * std::exp(-0.5 * s * s / (w * w)) / (2 * kPi * w * w);
        };
        return d;
    }
};

struct SmearQuadrature {
    int n_radial = 160;
    int n_angular = 64;
    double truncation_factor = 8.0;  // integrate s in [0, factor * w]
    double norm_tol = 1e-10;         // |integral(mu) - nu phi0| per phi0
};

// Total flux carried by the density, by the same quadrature the convolution
// uses.
inline double smear_total_flux(const SmearDensity& density, const SmearQuadrature& q = {}) {
    const GaussLegendreRule rule = gauss_legendre(q.n_radial);
    const double s_max = q.truncation_factor * density.width;
    std::vector<double> vals(static_cast<std::size_t>(q.n_radial));
    for (int i = 0; i < q.n_radial; ++i) {
        const double s = 0.5 * s_max * (rule.nodes[static_cast<std::size_t>(i)] + 1.0);
        const double w = 0.5 * s_max * rule.weights[static_cast<std::size_t>(i)];
        vals[static_cast<std::size_t>(i)] = 2 * kPi * s * density.profile(s) * w;
    }
    return pairwise_sum(vals);
}

inline double smeared_potential(const SmearDensity& density, const ExpansionParams& params,
                                const LocalPoint& point, const SmearQuadrature& q = {}) {
    if (!density.profile) throw Error("smear density has no profile");
    const Charge& c = density.charge;
    const double flux = smear_total_flux(density, q);
    if (std::abs(flux - c.signed_flux()) > q.norm_tol * c.phi0)
        throw NonNormalizedDensity("density flux does not integrate to nu Phi0");
    if (c.nu == +1) {
        for (double s : {0.0, 0.5 * density.width, density.width, 3 * density.width})
            if (density.profile(s) < 0)
                throw NonNormalizedDensity("density must be nonnegative for nu = +1");
    }

    const GaussLegendreRule rule = gauss_legendre(q.n_radial);
    const double s_max = q.truncation_factor * density.width;
    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>(q.n_radial * q.n_angular));
    for (int i = 0; i < q.n_radial; ++i) {
        const double s = 0.5 * s_max * (rule.nodes[static_cast<std::size_t>(i)] + 1.0);
        const double w_s = 0.5 * s_max * rule.weights[static_cast<std::size_t>(i)];
        const double mu_s = density.profile(s);
        for (int j = 0; j < q.n_angular; ++j) {
            const double alpha = 2 * kPi * j / q.n_angular;
            const LocalPoint shifted(point.x() - s * std::cos(alpha),
                                     point.y() - s * std::sin(alpha), point.z());
            // potential of a unit-flux point charge at the area element
            const PotentialBreakdown b = psi_singular(shifted, c, params);
            vals.push_back(mu_s * (b.total / c.signed_flux()) * s * w_s * (2 * kPi / q.n_angular));
        }
    }
    return pairwise_sum(vals);
}

}  // namespace fluxon
