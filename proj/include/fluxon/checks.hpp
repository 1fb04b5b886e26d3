#pragma once

#include "fluxon/halfspace.hpp"
#include "fluxon/patches.hpp"
#include "fluxon/sphere_oracle.hpp"
#include "fluxon/verification.hpp"

#include <json.hpp>

#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace fluxon {

// Verification suites with pinned grids and thresholds. The CLI `check`
// subcommand and the acceptance runner both dispatch here, so a check means
// the same thing everywhere.

struct CheckReport {
    std::string name;
    std::string grid;
    bool pass = false;
    std::map<std::string, double> metrics;
    std::string worst_point;  // worst-offending grid point, for failures

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["check"] = name;
        j["grid"] = grid;
        j["pass"] = pass;
        j["metrics"] = metrics;
        j["worst_point"] = worst_point;
        return j;
    }
};

namespace checks {

// --- Dual-path Hankel identity -------------------------------------------
// Quadrature of the Bessel integral against (1/2)(rho/(r-z))^2 on the
// 64-point log grid; max relative deviation must stay below 1e-8.
inline CheckReport hankel(const QuadratureSpec& spec = {}) {
    CheckReport rep;
    rep.name = "hankel";
    rep.grid = "rho in [0.1,10] x z in [-5,-0.1], 8x8 log-spaced";

    const auto rhos = log_spaced(0.1, 10.0, 8);
    const auto zs = log_spaced(0.1, 5.0, 8);
    double worst = 0.0;
    for (double rho : rhos) {
        for (double az : zs) {
            const double z = -az;
            const double quad = hankel_psi1r(rho, z, spec);
            const double closed = hankel_psi1r_closed(rho, z);
            const double rel = std::abs(quad - closed) / std::abs(closed);
            if (rel > worst) {
                worst = rel;
                rep.worst_point = "rho=" + std::to_string(rho) + " z=" + std::to_string(z);
            }
        }
    }
    rep.metrics["max_rel_deviation"] = worst;
    rep.metrics["threshold"] = 1e-8;
    rep.pass = worst < 1e-8;
    return rep;
}

// --- Harmonicity of the three singular terms ------------------------------
// Scaled 7-point Laplacian residual |lap psi| r^3 / (nu phi0) on the
// standard grid, plus the h-halving convergence order at probe points.
inline CheckReport harmonicity(const Charge& charge = Charge(1, 1.0),
                               double k_x = 1.0, double k_y = 0.4, double d = 1.0) {
    CheckReport rep;
    rep.name = "harmonicity";
    const GridSpec grid;
    rep.grid = "standard grid r in [1e-2,1] x theta in [0.6pi,0.98pi] x 8 phi";
    const ExpansionParams params(charge, k_x, k_y, d);

    const ScalarField fields[3] = {
        [&](const Vec3& q) { return psi0(LocalPoint(q), charge); },
        [&](const Vec3& q) { return psi1s(LocalPoint(q), params); },
        [&](const Vec3& q) { return psi1r(LocalPoint(q), params); },
    };
    const char* names[3] = {"psi0", "psi1s", "psi1r"};

    double worst = 0.0;
    for (int t = 0; t < 3; ++t) {
        for (const LocalPoint& p : grid.points()) {
            const double r = p.r();
            const double resid = std::abs(fd_laplacian(fields[t], p.vec(), laplacian_step(r))) *
                                 r * r * r / charge.phi0;
            if (resid > worst) {
                worst = resid;
                rep.worst_point = std::string(names[t]) + " at r=" + std::to_string(r);
            }
        }
    }

    // Order fit with a coarser step so truncation dominates rounding.
    double order_lo = 10.0, order_hi = 0.0;
    const LocalPoint probes[] = {LocalPoint::from_spherical(0.3, 0.75 * kPi, 0.9),
                                 LocalPoint::from_spherical(0.05, 0.9 * kPi, 2.1)};
    for (int t = 0; t < 3; ++t) {
        for (const LocalPoint& p : probes) {
            std::vector<double> hs, errs;
            for (double h = 1e-2 * p.r(); hs.size() < 4; h *= 0.5) {
                hs.push_back(h);
                errs.push_back(std::abs(fd_laplacian(fields[t], p.vec(), h)));
            }
            const double order = fitted_order(hs, errs);
            order_lo = std::min(order_lo, order);
            order_hi = std::max(order_hi, order);
        }
    }

    rep.metrics["max_scaled_residual"] = worst;
    rep.metrics["residual_threshold"] = 1e-5;
    rep.metrics["order_min"] = order_lo;
    rep.metrics["order_max"] = order_hi;
    rep.pass = worst < 1e-5 && std::abs(order_lo - 2.0) <= 0.3 && std::abs(order_hi - 2.0) <= 0.3;
    return rep;
}

// --- Boundary data of the split problems ----------------------------------
// d(psi)/dz at z = -delta against the Neumann datum of each split problem;
// the report carries the fitted decay order in delta for both terms.
inline CheckReport boundary(const Charge& charge = Charge(1, 1.0),
                            double k_x = 1.0, double k_y = 0.4, double d = 1.0) {
    CheckReport rep;
    rep.name = "boundary";
    rep.grid = "rho=1, phi=pi/3, delta halving 1e-2 .. 1e-2/2^6";
    const ExpansionParams params(charge, k_x, k_y, d);

    for (SplitTerm term : {SplitTerm::psi1s, SplitTerm::psi1r}) {
        std::vector<double> deltas, resids;
        for (double delta = 1e-2; deltas.size() < 7; delta *= 0.5) {
            deltas.push_back(delta);
            resids.push_back(std::abs(boundary_residual(term, params, 1.0, kPi / 3.0, delta)));
        }
        const double order = fitted_order(deltas, resids);
        const char* key = (term == SplitTerm::psi1s) ? "order_psi1s" : "order_psi1r";
        rep.metrics[key] = order;
        const char* rkey = (term == SplitTerm::psi1s) ? "residual_psi1s_at_1e-2"
                                                      : "residual_psi1r_at_1e-2";
        rep.metrics[rkey] = resids.front();
    }
    rep.metrics["order_target"] = 1.0;
    rep.metrics["order_band"] = 0.3;
    const bool ok_s = std::abs(rep.metrics["order_psi1s"] - 1.0) <= 0.3;
    const bool ok_r = std::abs(rep.metrics["order_psi1r"] - 1.0) <= 0.3;
    if (!ok_s) rep.worst_point = "psi1s fitted order " + std::to_string(rep.metrics["order_psi1s"]);
    rep.pass = ok_s && ok_r;
    return rep;
}

// --- Derivation consistency of the boundary transfer ----------------------
// perturb_rhs applied to psi0 over the curved patch; the angular-mode fit
// must reproduce (-K_plus, -K_minus) within 1% at rho <= 1e-2 of the
// curvature radius.
inline CheckReport rhs(const Charge& charge = Charge(1, 1.0)) {
    CheckReport rep;
    rep.name = "rhs";
    rep.grid = "rho in [1e-4,1e-2] (9 log) x 16 phi, full surface height";

    const auto rhos = log_spaced(1e-4, 1e-2, 9);
    const auto phis = lin_spaced(0.0, 2 * kPi * 15.0 / 16.0, 16);
    const PotentialFn psi_prev = [&charge](const Vec3& q) {
        return psi0(LocalPoint(q), charge);
    };

    struct Case {
        const char* label;
        SurfacePatch patch;
    };
    Case cases[] = {
        {"sphere_a1", make_sphere_patch(1.0)},
        {"biquadratic", make_biquadratic_patch(1.0, -0.4, {0.3, -0.2, 0.15, 0.1})},
    };

    bool all_ok = true;
    for (auto& c : cases) {
        const LocalFrame frame = build_local_frame(c.patch, 0.0, 0.0);
        const ExpansionParams params(charge, frame.k_x, frame.k_y, 1.0);
        const BoundaryRHS datum =
            perturb_rhs(patch_height_fn(frame, c.patch), psi_prev, rhos, phis, params);
        const RhsFit fit = fit_rhs_coefficients(datum);

        const double scale = std::max(std::abs(params.K_plus), std::abs(params.K_minus));
        const double err_sym = std::abs(fit.c_sym + params.K_plus) / scale;
        const double err_asym = std::abs(fit.c_asym + params.K_minus) / scale;
        rep.metrics[std::string(c.label) + "_err_sym"] = err_sym;
        rep.metrics[std::string(c.label) + "_err_asym"] = err_asym;
        if (err_sym > 1e-2 || err_asym > 1e-2) {
            all_ok = false;
            rep.worst_point = c.label;
        }
    }
    rep.metrics["threshold"] = 1e-2;
    rep.pass = all_ok;
    return rep;
}

// --- Flux recovery through a vanishing hemisphere --------------------------
inline CheckReport flux(const Charge& charge = Charge(1, 1.0)) {
    CheckReport rep;
    rep.name = "flux";
    rep.grid = "hemisphere r = epsilon, GL(32) x trapezoid(64)";

    const double phi0 = charge.phi0;
    const VectorField monopole = [&](const LocalPoint& p) {
        FieldVector B;
        B.B_r = charge.signed_flux() / (2 * kPi * p.r() * p.r());
        return B;
    };
    double worst_monopole = 0.0;
    for (double eps : {1e-5, 1e-3, 1e-1}) {
        const double dev = std::abs(flux_through_hemisphere(monopole, eps) - charge.signed_flux());
        worst_monopole = std::max(worst_monopole, dev / phi0);
    }
    rep.metrics["monopole_max_dev"] = worst_monopole;

    const ExpansionParams params(charge, 1.0, 1.0, 1.0);
    const VectorField full = [&](const LocalPoint& p) {
        return b_field_singular(p, charge, params);
    };
    std::vector<double> devs;
    for (double eps : {1e-2, 1e-3, 1e-4, 1e-5})
        devs.push_back(std::abs(flux_through_hemisphere(full, eps) - charge.signed_flux()) / phi0);
    bool monotone = true;
    for (std::size_t i = 1; i < devs.size(); ++i) monotone = monotone && devs[i] <= devs[i - 1];
    rep.metrics["full_dev_at_1e-4"] = devs[2];
    rep.metrics["monotone_decreasing"] = monotone ? 1.0 : 0.0;

    const Charge negative(-1, phi0);
    const VectorField mono_neg = [&](const LocalPoint& p) {
        FieldVector B;
        B.B_r = negative.signed_flux() / (2 * kPi * p.r() * p.r());
        return B;
    };
    const double neg_dev = std::abs(flux_through_hemisphere(mono_neg, 1e-3) + phi0) / phi0;
    rep.metrics["nu_minus_dev"] = neg_dev;

    rep.pass = worst_monopole < 1e-10 && devs[2] < 1e-3 && monotone && neg_dev < 1e-10;
    if (!rep.pass) rep.worst_point = "epsilon=1e-4 deviation " + std::to_string(devs[2]);
    return rep;
}

}  // namespace checks

inline CheckReport run_check(const std::string& name) {
    if (name == "hankel") return checks::hankel();
    if (name == "harmonicity") return checks::harmonicity();
    if (name == "boundary") return checks::boundary();
    if (name == "rhs") return checks::rhs();
    if (name == "flux") return checks::flux();
    throw Error("unknown check '" + name +
                "' (expected harmonicity, boundary, hankel, flux, rhs)");
}

}  // namespace fluxon
