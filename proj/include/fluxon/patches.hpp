#pragma once

#include "fluxon/geometry.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>

namespace fluxon {

// Built-in parametric patches. All are oriented so that P_u x P_v at the
// charge point (u,v) = (0,0) points into the superconducting bulk, and all
// carry a bulk predicate for the sign check at frame construction.

// Exterior-domain sphere of radius a, charge at the origin, center at
// (0,0,a). Valid for |v| < pi/2.
inline SurfacePatch make_sphere_patch(double a) {
    if (!(a > 0)) throw Error("sphere radius must be positive");
    const Vec3 center(0, 0, a);
    auto dir = [](double u, double v) {
        return Vec3(std::sin(u) * std::cos(v), std::sin(v), -std::cos(u) * std::cos(v));
    };
    SurfacePatch patch([=](double u, double v) -> Vec3 { return center + a * dir(u, v); }, a);
    patch
        .with_first_derivatives(
            [=](double u, double v) {
                return Vec3(a * std::cos(u) * std::cos(v), 0, a * std::sin(u) * std::cos(v));
            },
            [=](double u, double v) {
                return Vec3(-a * std::sin(u) * std::sin(v), a * std::cos(v),
                            a * std::cos(u) * std::sin(v));
            })
        .with_second_derivatives(
            [=](double u, double v) {
                return Vec3(-a * std::sin(u) * std::cos(v), 0, a * std::cos(u) * std::cos(v));
            },
            [=](double u, double v) {
                return Vec3(-a * std::cos(u) * std::sin(v), 0, -a * std::sin(u) * std::sin(v));
            },
            [=](double u, double v) {
                return Vec3(-a * std::sin(u) * std::cos(v), -a * std::sin(v),
                            a * std::cos(u) * std::cos(v));
            })
        .with_bulk_predicate([=](const Vec3& p) { return (p - center).norm() < a; });
    return patch;
}

// Exterior-domain circular cylinder of radius a with axis along the second
// tangent direction; the first tangent direction is circumferential.
inline SurfacePatch make_cylinder_patch(double a) {
    if (!(a > 0)) throw Error("cylinder radius must be positive");
    SurfacePatch patch(
        [=](double u, double v) { return Vec3(a * std::sin(u), v, a * (1 - std::cos(u))); }, a);
    patch
        .with_first_derivatives(
            [=](double u, double) { return Vec3(a * std::cos(u), 0, a * std::sin(u)); },
            [=](double, double) { return Vec3(0, 1, 0); })
        .with_second_derivatives(
            [=](double u, double) { return Vec3(-a * std::sin(u), 0, a * std::cos(u)); },
            [=](double, double) { return Vec3(0, 0, 0); },
            [=](double, double) { return Vec3(0, 0, 0); })
        .with_bulk_predicate([=](const Vec3& p) {
            return std::hypot(p.x(), p.z() - a) < a;
        });
    return patch;
}

inline SurfacePatch make_plane_patch() {
    SurfacePatch patch([](double u, double v) { return Vec3(u, v, 0); }, 1.0);
    patch
        .with_first_derivatives([](double, double) { return Vec3(1, 0, 0); },
                                [](double, double) { return Vec3(0, 1, 0); })
        .with_second_derivatives([](double, double) { return Vec3(0, 0, 0); },
                                 [](double, double) { return Vec3(0, 0, 0); },
                                 [](double, double) { return Vec3(0, 0, 0); })
        .with_bulk_predicate([](const Vec3& p) { return p.z() > 0; });
    return patch;
}

struct CubicCoefficients {
    double c30 = 0, c21 = 0, c12 = 0, c03 = 0;
};

// Graph patch z = (k_x x^2 + k_y y^2)/2 + cubic terms, bulk above the graph.
inline SurfacePatch make_biquadratic_patch(double kx, double ky, CubicCoefficients c = {}) {
    auto F = [=](double x, double y) {
        return 0.5 * (kx * x * x + ky * y * y) + c.c30 * x * x * x + c.c21 * x * x * y +
               c.c12 * x * y * y + c.c03 * y * y * y;
    };
    SurfacePatch patch([=](double u, double v) { return Vec3(u, v, F(u, v)); }, 1.0);
    patch
        .with_first_derivatives(
            [=](double u, double v) {
                return Vec3(1, 0, kx * u + 3 * c.c30 * u * u + 2 * c.c21 * u * v + c.c12 * v * v);
            },
            [=](double u, double v) {
                return Vec3(0, 1, ky * v + c.c21 * u * u + 2 * c.c12 * u * v + 3 * c.c03 * v * v);
            })
        .with_second_derivatives(
            [=](double u, double v) { return Vec3(0, 0, kx + 6 * c.c30 * u + 2 * c.c21 * v); },
            [=](double u, double v) { return Vec3(0, 0, 2 * c.c21 * u + 2 * c.c12 * v); },
            [=](double u, double v) { return Vec3(0, 0, ky + 2 * c.c12 * u + 6 * c.c03 * v); })
        .with_bulk_predicate([=](const Vec3& p) { return p.z() > F(p.x(), p.y()); });
    return patch;
}

inline SurfacePatch make_paraboloid_patch(double kx, double ky) {
    return make_biquadratic_patch(kx, ky);
}

// ---------------------------------------------------------------------------
// Named surface specs of the form "sphere:a=1" or
// "biquadratic:kx=1,ky=-0.4,c30=0.3". Used by the CLI.
// ---------------------------------------------------------------------------

struct NamedSurface {
    std::string name;
    SurfacePatch patch;
    std::optional<double> default_gauge_length;  // sphere forces d = 2a
};

inline NamedSurface parse_surface_spec(const std::string& spec) {
    std::string name = spec;
    std::map<std::string, double> kv;
    if (const auto colon = spec.find(':'); colon != std::string::npos) {
        name = spec.substr(0, colon);
        std::stringstream ss(spec.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos)
                throw Error("bad surface parameter '" + item + "' (expected key=value)");
            try {
                kv[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
            } catch (const std::exception&) {
                throw Error("bad numeric value in surface parameter '" + item + "'");
            }
        }
    }
    auto get = [&](const std::string& key, std::optional<double> fallback = {}) {
        if (auto it = kv.find(key); it != kv.end()) return it->second;
        if (fallback) return *fallback;
        throw Error("surface '" + name + "' requires parameter '" + key + "'");
    };

    if (name == "sphere") {
        const double a = get("a");
        return {name, make_sphere_patch(a), 2 * a};
    }
    if (name == "cylinder") return {name, make_cylinder_patch(get("a")), {}};
    if (name == "plane") return {name, make_plane_patch(), {}};
    if (name == "paraboloid")
        return {name, make_paraboloid_patch(get("kx"), get("ky")), {}};
    if (name == "biquadratic") {
        CubicCoefficients c{get("c30", 0.0), get("c21", 0.0), get("c12", 0.0), get("c03", 0.0)};
        return {name, make_biquadratic_patch(get("kx"), get("ky"), c), {}};
    }
    throw Error("unknown surface '" + name +
                "' (expected sphere, cylinder, plane, paraboloid, biquadratic)");
}

}  // namespace fluxon
