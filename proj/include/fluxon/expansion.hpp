#pragma once

#include "fluxon/geometry.hpp"

#include <cmath>
#include <vector>

namespace fluxon {

// Relative tolerance below which a point counts as lying on the singular
// semi-axis {x = y = 0, z >= 0}.
inline constexpr double kSingularAxisTol = 1e-12;

// Guard angle around the positive z-axis for field evaluations. The physical
// domain is z < 0, so the guard only affects extended evaluations.
inline constexpr double kThetaMin = 1e-6;

// ---------------------------------------------------------------------------
// Charge: a fluxon of sign nu carrying one flux quantum.
// ---------------------------------------------------------------------------

struct Charge {
    int nu = +1;          // +1: field line enters the domain, -1: exits
    double phi0 = 1.0;    // flux quantum; tests run dimensionless phi0 = 1

    Charge() = default;
    Charge(int nu_, double phi0_) : nu(nu_), phi0(phi0_) {
        if (nu * nu != 1) throw Error("charge sign nu must be +1 or -1");
        if (!(phi0 > 0)) throw Error("flux quantum must be positive");
    }

    double signed_flux() const { return nu * phi0; }
};

// ---------------------------------------------------------------------------
// ExpansionParams: curvatures, gauge length and the derived constants
//   K_pm = nu phi0 (k_x +- k_y) / (8 pi).
// ---------------------------------------------------------------------------

struct ExpansionParams {
    double k_x = 0.0;
    double k_y = 0.0;
    double d = 1.0;       // gauge length of the logarithm, d > 0
    double K_plus = 0.0;
    double K_minus = 0.0;
    Charge charge;

    ExpansionParams() = default;
    ExpansionParams(const Charge& c, double kx, double ky, double gauge)
        : k_x(kx), k_y(ky), d(gauge),
          K_plus(k_coefficient(c, kx + ky)),
          K_minus(k_coefficient(c, kx - ky)),
          charge(c) {
        if (!(d > 0)) throw Error("gauge length d must be positive");
    }

    static ExpansionParams from_frame(const Charge& c, const LocalFrame& frame, double gauge) {
        return ExpansionParams(c, frame.k_x, frame.k_y, gauge);
    }

    // Canonical expression for K_pm; kept in one place so stored and
    // recomputed values agree bit-for-bit.
    static double k_coefficient(const Charge& c, double k_sum_or_diff) {
        return c.nu * c.phi0 * k_sum_or_diff / (8 * kPi);
    }
};

// ---------------------------------------------------------------------------
// PotentialBreakdown and FieldVector.
// ---------------------------------------------------------------------------

struct PotentialBreakdown {
    double psi0 = 0.0;
    double psi1s = 0.0;
    double psi1r = 0.0;
    double total = 0.0;
};

// Magnetic field in the local spherical basis (r, theta, phi).
struct FieldVector {
    double B_r = 0.0;
    double B_theta = 0.0;
    double B_phi = 0.0;

    double norm() const { return std::sqrt(B_r * B_r + B_theta * B_theta + B_phi * B_phi); }

    // Cartesian components in the local frame, given the evaluation point.
    Vec3 to_cartesian(const LocalPoint& p) const {
        const Spherical s = to_spherical(p);
        const double st = std::sin(s.theta), ct = std::cos(s.theta);
        const double cp = std::cos(s.phi), sp = std::sin(s.phi);
        const Vec3 er(st * cp, st * sp, ct);
        const Vec3 et(ct * cp, ct * sp, -st);
        const Vec3 ep(-sp, cp, 0);
        return B_r * er + B_theta * et + B_phi * ep;
    }
};

namespace detail {

inline void require_off_axis(const LocalPoint& p) {
    const double r = p.r();
    if (r == 0.0) throw AtCharge("potential is singular at r = 0");
    if (p.r_minus_z() <= kSingularAxisTol * r)
        throw OnSingularAxis("point lies on the singular semi-axis z > 0");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// The three singular terms.
// ---------------------------------------------------------------------------

// Zero-order term nu phi0 / (2 pi r): twice the free-space monopole, since
// the flux emanates into a half-space only.
inline double psi0(const LocalPoint& p, const Charge& charge) {
    const double r = p.r();
    if (r == 0.0) throw AtCharge("psi0 is singular at r = 0");
    return charge.signed_flux() / (2 * kPi * r);
}

// Symmetric logarithmic term K_plus ln((r - z)/d).
inline double psi1s(const LocalPoint& p, const ExpansionParams& params) {
    detail::require_off_axis(p);
    return params.K_plus * std::log(p.r_minus_z() / params.d);
}

// Asymmetric term -(K_minus/2) (x^2 - y^2)/(r - z)^2. Depends on the angles
// only: it is homogeneous of degree zero in the distance to the charge.
inline double psi1r(const LocalPoint& p, const ExpansionParams& params) {
    detail::require_off_axis(p);
    const double rmz = p.r_minus_z();
    return -0.5 * params.K_minus * (p.x() * p.x() - p.y() * p.y()) / (rmz * rmz);
}

// Full singular part of the potential, term by term.
inline PotentialBreakdown psi_singular(const LocalPoint& p, const Charge& charge,
                                       const ExpansionParams& params) {
    PotentialBreakdown b;
    b.psi0 = psi0(p, charge);
    b.psi1s = psi1s(p, params);
    b.psi1r = psi1r(p, params);
    b.total = b.psi0 + b.psi1s + b.psi1r;
    return b;
}

// Singular part of B = -grad psi in the local spherical basis. The angular
// factors are formed from Cartesian data, so sin(theta) is exactly zero on
// the negative z-axis and 1 - cos(theta) never cancels.
inline FieldVector b_field_singular(const LocalPoint& p, const Charge& charge,
                                    const ExpansionParams& params) {
    const double r = p.r();
    if (r == 0.0) throw AtCharge("field is singular at r = 0");
    const double rho = p.rho();
    const double st = rho / r;              // sin(theta)
    const double omc = p.r_minus_z() / r;   // 1 - cos(theta)
    static const double omc_min = 2 * std::sin(0.5 * kThetaMin) * std::sin(0.5 * kThetaMin);
    if (omc < omc_min)
        throw NearSingularAxis("field evaluation too close to the singular semi-axis");

    const double prefactor = charge.signed_flux() / (2 * kPi);
    const double k_sum = params.k_x + params.k_y;
    const double k_diff = params.k_x - params.k_y;

    FieldVector B;
    B.B_r = prefactor * (1.0 / (r * r) - 0.25 * k_sum / r);
    B.B_theta = -prefactor * 0.25 * k_sum / r * (st / omc);
    if (rho > 0.0) {
        const double c2 = (p.x() * p.x() - p.y() * p.y()) / (rho * rho);  // cos(2 phi)
        const double s2 = 2 * p.x() * p.y() / (rho * rho);               // sin(2 phi)
        const double asym = prefactor * 0.25 * k_diff / r * st / (omc * omc);
        B.B_theta -= asym * c2;
        B.B_phi = -asym * s2;
    }
    return B;
}

// Sphere specialization: k_x = k_y = 1/a with the gauge fixed at d = 2a.
inline PotentialBreakdown sphere_singular_potential(double a, const LocalPoint& p,
                                                    const Charge& charge) {
    if (!(a > 0)) throw Error("sphere radius must be positive");
    const ExpansionParams params(charge, 1.0 / a, 1.0 / a, 2 * a);
    return psi_singular(p, charge, params);
}

// ---------------------------------------------------------------------------
// Multi-charge helpers. On a bounded domain every vortex line enters and
// exits through the boundary, so the signed fluxes must cancel for the
// Neumann problem to be solvable; on an infinite domain lines may end at
// infinity and no condition applies.
// ---------------------------------------------------------------------------

inline bool charges_solvable(const std::vector<Charge>& charges, bool bounded_domain,
                             double tol = 1e-12) {
    if (!bounded_domain) return true;
    double net = 0.0, scale = 0.0;
    for (const Charge& c : charges) {
        net += c.signed_flux();
        scale += c.phi0;
    }
    return std::abs(net) <= tol * std::max(scale, 1.0);
}

// One charge's view of an evaluation point: its own local frame coordinates
// and expansion constants.
struct ChargeTerm {
    LocalPoint point;  // evaluation point in this charge's frame
    Charge charge;
    ExpansionParams params;
};

// Simple superposition: each charge contributes its local singular part.
inline double psi_superposition(const std::vector<ChargeTerm>& terms) {
    double sum = 0.0;
    for (const ChargeTerm& t : terms) sum += psi_singular(t.point, t.charge, t.params).total;
    return sum;
}

}  // namespace fluxon
