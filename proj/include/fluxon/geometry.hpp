#pragma once

#include "fluxon/common.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>

namespace fluxon {

// ---------------------------------------------------------------------------
// SurfacePatch: a parametric boundary patch P(u,v) with derivative access.
// Derivatives may be supplied analytically; missing ones are filled by
// central differences with step h = scale * eps^(1/3).
// ---------------------------------------------------------------------------

class SurfacePatch {
  public:
    using PositionFn = std::function<Vec3(double, double)>;
    using DerivativeFn = std::function<Vec3(double, double)>;
    using BulkPredicate = std::function<bool(const Vec3&)>;

    explicit SurfacePatch(PositionFn position, double scale = 1.0)
        : position_(std::move(position)), scale_(scale) {}

    SurfacePatch& with_first_derivatives(DerivativeFn pu, DerivativeFn pv) {
        pu_ = std::move(pu);
        pv_ = std::move(pv);
        return *this;
    }

    SurfacePatch& with_second_derivatives(DerivativeFn puu, DerivativeFn puv, DerivativeFn pvv) {
        puu_ = std::move(puu);
        puv_ = std::move(puv);
        pvv_ = std::move(pvv);
        return *this;
    }

    // Side of the surface occupied by the superconducting bulk. Used for the
    // mandatory sign check at frame construction.
    SurfacePatch& with_bulk_predicate(BulkPredicate p) {
        in_bulk_ = std::move(p);
        return *this;
    }

    Vec3 position(double u, double v) const { return checked(position_(u, v)); }

    Vec3 d_u(double u, double v) const {
        if (pu_) return checked(pu_(u, v));
        const double h = fd_step();
        return checked((position_(u + h, v) - position_(u - h, v)) / (2 * h));
    }

    Vec3 d_v(double u, double v) const {
        if (pv_) return checked(pv_(u, v));
        const double h = fd_step();
        return checked((position_(u, v + h) - position_(u, v - h)) / (2 * h));
    }

    Vec3 d_uu(double u, double v) const {
        if (puu_) return checked(puu_(u, v));
        const double h = fd_step();
        return checked((position_(u + h, v) - 2 * position_(u, v) + position_(u - h, v)) / (h * h));
    }

    Vec3 d_vv(double u, double v) const {
        if (pvv_) return checked(pvv_(u, v));
        const double h = fd_step();
        return checked((position_(u, v + h) - 2 * position_(u, v) + position_(u, v - h)) / (h * h));
    }

    Vec3 d_uv(double u, double v) const {
        if (puv_) return checked(puv_(u, v));
        const double h = fd_step();
        return checked((position_(u + h, v + h) - position_(u + h, v - h) -
                        position_(u - h, v + h) + position_(u - h, v - h)) /
                       (4 * h * h));
    }

    double scale() const { return scale_; }
    bool has_bulk_predicate() const { return static_cast<bool>(in_bulk_); }
    bool in_bulk(const Vec3& p) const { return in_bulk_ ? in_bulk_(p) : false; }

    // Derivative consistency: FD-recomputed P_u, P_v must agree with the
    // supplied ones to relative 1e-6 at the probe point.
    void validate_derivatives(double u, double v, double rel_tol = 1e-6) const {
        if (!pu_ && !pv_) return;
        const double h = fd_step();
        const Vec3 fd_u = (position_(u + h, v) - position_(u - h, v)) / (2 * h);
        const Vec3 fd_v = (position_(u, v + h) - position_(u, v - h)) / (2 * h);
        const double nu = std::max(d_u(u, v).norm(), 1e-300);
        const double nv = std::max(d_v(u, v).norm(), 1e-300);
        if ((d_u(u, v) - fd_u).norm() / nu > rel_tol || (d_v(u, v) - fd_v).norm() / nv > rel_tol)
            throw NonFiniteDerivative("supplied patch derivatives disagree with finite differences");
    }

  private:
    double fd_step() const { return scale_ * std::cbrt(kEps); }

    static Vec3 checked(const Vec3& x) {
        if (!x.allFinite()) throw NonFiniteDerivative("patch derivative evaluation is not finite");
        return x;
    }

    PositionFn position_;
    DerivativeFn pu_, pv_, puu_, puv_, pvv_;
    BulkPredicate in_bulk_;
    double scale_;
};

// ---------------------------------------------------------------------------
// LocalFrame: charge-centered orthonormal frame. z points along the outward
// surface normal into the superconducting bulk; the tangent axes are rotated
// so the mixed second derivative of the height function vanishes. k_x, k_y
// are the principal curvatures, ordered k_x >= k_y.
// ---------------------------------------------------------------------------

struct LocalFrame {
    Vec3 origin = Vec3::Zero();
    Vec3 x_axis = Vec3::UnitX();
    Vec3 y_axis = Vec3::UnitY();
    Vec3 z_axis = Vec3::UnitZ();
    double k_x = 0.0;
    double k_y = 0.0;
    double rotation_angle = 0.0;  // principal x-axis relative to the initial tangent basis
    double u0 = 0.0, v0 = 0.0;    // charge location in patch parameters

    Vec3 to_local(const Vec3& world) const {
        const Vec3 d = world - origin;
        return {d.dot(x_axis), d.dot(y_axis), d.dot(z_axis)};
    }

    Vec3 to_world(const Vec3& local) const {
        return origin + local.x() * x_axis + local.y() * y_axis + local.z() * z_axis;
    }
};

// ---------------------------------------------------------------------------
// LocalPoint: a point in frame coordinates with derived spherical and
// cylindrical views. theta is measured from +z; the empty-space domain is
// z < 0.
// ---------------------------------------------------------------------------

struct Spherical {
    double r, theta, phi;
};

struct Cylindrical {
    double rho, phi, z;
};

class LocalPoint {
  public:
    LocalPoint(double x, double y, double z) : xyz_(x, y, z) {}
    explicit LocalPoint(const Vec3& v) : xyz_(v) {}

    static LocalPoint from_spherical(double r, double theta, double phi) {
        return LocalPoint(r * std::sin(theta) * std::cos(phi),
                          r * std::sin(theta) * std::sin(phi),
                          r * std::cos(theta));
    }

    double x() const { return xyz_.x(); }
    double y() const { return xyz_.y(); }
    double z() const { return xyz_.z(); }
    const Vec3& vec() const { return xyz_; }

    double r() const { return xyz_.norm(); }
    double rho() const { return std::hypot(xyz_.x(), xyz_.y()); }

    bool at_origin() const { return r() == 0.0; }
    bool in_domain() const { return xyz_.z() < 0.0; }
    bool on_boundary() const { return xyz_.z() == 0.0; }

    // r - z, the quantity controlling both curvature corrections. Evaluated
    // cancellation-free on the z > 0 side via rho^2 / (r + z).
    double r_minus_z() const {
        const double rr = r(), zz = xyz_.z();
        if (zz <= 0.0) return rr - zz;
        const double rh = rho();
        return rh * rh / (rr + zz);
    }

  private:
    Vec3 xyz_;
};

inline Spherical to_spherical(const LocalPoint& p) {
    const double r = p.r();
    if (r == 0.0)
        throw OriginUndefinedAngle("theta and phi are indeterminate at r = 0");
    const double theta = std::acos(std::clamp(p.z() / r, -1.0, 1.0));
    const double phi = std::atan2(p.y(), p.x());
    return {r, theta, phi};
}

inline Cylindrical to_cylindrical(const LocalPoint& p) {
    if (p.at_origin())
        throw OriginUndefinedAngle("phi is indeterminate at r = 0");
    return {p.rho(), std::atan2(p.y(), p.x()), p.z()};
}

// ---------------------------------------------------------------------------
// Frame construction.
// ---------------------------------------------------------------------------

enum class NormalOrientation { IntoBulk };

namespace detail {

// Second fundamental form of the patch at (u,v) in the orthonormal tangent
// basis {e1, e2} with unit normal n. Equals the Hessian of the height
// function measured along n.
inline Mat2 height_hessian(const SurfacePatch& patch, double u, double v,
                           const Vec3& e1, const Vec3& e2, const Vec3& n) {
    const Vec3 pu = patch.d_u(u, v), pv = patch.d_v(u, v);
    const double L = patch.d_uu(u, v).dot(n);
    const double M = patch.d_uv(u, v).dot(n);
    const double N = patch.d_vv(u, v).dot(n);

    // Coordinates of e1, e2 in the (P_u, P_v) basis via the Gram matrix.
    Mat2 G;
    G << pu.dot(pu), pu.dot(pv), pu.dot(pv), pv.dot(pv);
    const Vec2 c1 = G.ldlt().solve(Vec2(pu.dot(e1), pv.dot(e1)));
    const Vec2 c2 = G.ldlt().solve(Vec2(pu.dot(e2), pv.dot(e2)));

    Mat2 II;
    II << L, M, M, N;
    Mat2 H;
    H << c1.dot(II * c1), c1.dot(II * c2), c1.dot(II * c2), c2.dot(II * c2);
    return H;
}

}  // namespace detail

inline LocalFrame build_local_frame(const SurfacePatch& patch, double u0, double v0,
                                    NormalOrientation orientation = NormalOrientation::IntoBulk) {
    (void)orientation;  // single convention: z into the bulk
    patch.validate_derivatives(u0, v0);

    const Vec3 origin = patch.position(u0, v0);
    const Vec3 pu = patch.d_u(u0, v0);
    const Vec3 pv = patch.d_v(u0, v0);
    const Vec3 cross = pu.cross(pv);
    const double cross_tol = 1e-12 * patch.scale() * patch.scale();
    if (cross.norm() <= cross_tol)
        throw DegeneratePatch("P_u x P_v vanishes at the charge point");

    Vec3 n = cross.normalized();
    Vec3 e1 = (pu - pu.dot(n) * n).normalized();
    Vec3 e2 = n.cross(e1);

    // Mandatory sign check: a probe displaced along +z must land in the bulk.
    if (patch.has_bulk_predicate()) {
        const double delta = 1e-4 * patch.scale();
        if (!patch.in_bulk(origin + delta * n)) {
            n = -n;
            e2 = -e2;  // keep the triplet right-handed
            if (!patch.in_bulk(origin + delta * n))
                throw DegeneratePatch("bulk predicate rejects both normal orientations");
        }
    }

    const Mat2 H = detail::height_hessian(patch, u0, v0, e1, e2, n);

    // Principal directions: eigenvectors of the symmetric 2x2 Hessian.
    // Umbilic tie-break: keep the initial tangent basis (angle 0).
    LocalFrame frame;
    frame.origin = origin;
    frame.z_axis = n;
    frame.u0 = u0;
    frame.v0 = v0;

    const double a = H(0, 0), b = H(0, 1), c = H(1, 1);
    const double disc = std::hypot(a - c, 2 * b);
    double k1 = 0.5 * (a + c + disc);
    double k2 = 0.5 * (a + c - disc);
    double angle = 0.0;
    const double umbilic_tol = 1e-12 * std::max({std::abs(a), std::abs(c), 1.0 / patch.scale()});
    if (disc > umbilic_tol) angle = 0.5 * std::atan2(2 * b, a - c);

    frame.k_x = k1;
    frame.k_y = k2;
    frame.rotation_angle = angle;
    frame.x_axis = std::cos(angle) * e1 + std::sin(angle) * e2;
    frame.y_axis = n.cross(frame.x_axis);
    return frame;
}

// ---------------------------------------------------------------------------
// Height function: z = F(x,y) of the patch over the tangent plane of a frame.
// ---------------------------------------------------------------------------

struct HeightSample {
    double F;    // height along +z (into the bulk)
    double F_x;  // dF/dx
    double F_y;  // dF/dy
    double u, v; // parameter point found by the projection
};

// Projects the tangent coordinates (x, y) back onto the patch by a Newton
// iteration in (u, v) and returns the height and its tangent-plane gradient.
inline HeightSample height_function(const LocalFrame& frame, const SurfacePatch& patch,
                                    double x, double y) {
    double u = frame.u0, v = frame.v0;
    bool converged = false;
    const double tol = 1e-14 * std::max(patch.scale(), std::hypot(x, y));
    for (int it = 0; it < 50; ++it) {
        const Vec3 d = patch.position(u, v) - frame.origin;
        const Vec2 res(d.dot(frame.x_axis) - x, d.dot(frame.y_axis) - y);
        if (res.norm() < tol) { converged = true; break; }
        const Vec3 pu = patch.d_u(u, v), pv = patch.d_v(u, v);
        Mat2 J;
        J << pu.dot(frame.x_axis), pv.dot(frame.x_axis),
             pu.dot(frame.y_axis), pv.dot(frame.y_axis);
        if (std::abs(J.determinant()) < 1e-300)
            throw OutsidePatch("tangent projection Jacobian is singular");
        const Vec2 step = J.inverse() * res;
        u -= step.x();
        v -= step.y();
        if (!std::isfinite(u) || !std::isfinite(v))
            throw OutsidePatch("tangent projection diverged");
    }
    if (!converged)
        throw OutsidePatch("tangent point cannot be projected onto the patch");

    const Vec3 d = patch.position(u, v) - frame.origin;
    const Vec3 pu = patch.d_u(u, v), pv = patch.d_v(u, v);
    Mat2 J;
    J << pu.dot(frame.x_axis), pv.dot(frame.x_axis),
         pu.dot(frame.y_axis), pv.dot(frame.y_axis);
    const Vec2 dFduv(pu.dot(frame.z_axis), pv.dot(frame.z_axis));
    const Vec2 grad = J.transpose().inverse() * dFduv;

    HeightSample s;
    s.F = d.dot(frame.z_axis);
    s.F_x = grad.x();
    s.F_y = grad.y();
    s.u = u;
    s.v = v;
    return s;
}

// Quadratic model f(x,y) = (k_x x^2 + k_y y^2)/2 of the height function.
inline double quadratic_height(const LocalFrame& frame, double x, double y) {
    return 0.5 * (frame.k_x * x * x + frame.k_y * y * y);
}

// Fitted bound |F - f| <= C rho^3 of the cubic remainder, sampled over a
// disk of radius rho_max. Reported for diagnostics; no accuracy claim is
// derived from it.
inline double cubic_remainder_bound(const LocalFrame& frame, const SurfacePatch& patch,
                                    double rho_max, int n_radial = 8, int n_angular = 16) {
    double worst = 0.0;
    for (int i = 1; i <= n_radial; ++i) {
        const double rho = rho_max * i / n_radial;
        for (int j = 0; j < n_angular; ++j) {
            const double phi = 2 * kPi * j / n_angular;
            const double x = rho * std::cos(phi), y = rho * std::sin(phi);
            const HeightSample s = height_function(frame, patch, x, y);
            const double rem = std::abs(s.F - quadratic_height(frame, x, y));
            worst = std::max(worst, rem / (rho * rho * rho));
        }
    }
    return worst;
}

}  // namespace fluxon
