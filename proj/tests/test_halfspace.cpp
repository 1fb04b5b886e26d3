#include "fluxon/halfspace.hpp"
#include "fluxon/patches.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace fluxon;

namespace {
const Charge plain(1, 1.0);
}

// ---------------------------------------------------------------------------
// Bessel J2.
// ---------------------------------------------------------------------------

TEST_CASE("bessel small-argument behavior") {
    CHECK(bessel_j2(0.0) == 0.0);
    // leading series term x^2/8
    for (double x : {1e-6, 1e-4, 1e-3})
        CHECK(bessel_j2(x) == Catch::Approx(x * x / 8).epsilon(1e-6));
    // 30-term power series oracle value at x = 1
    CHECK(bessel_j2(1.0) == Catch::Approx(0.11490348493190048).margin(1e-14));
}

namespace {

// reference values computed with 40-digit arithmetic
constexpr struct { double x, j2; } kJ2Table[] = {
    {0.050000000000000003, 0.0003124349009193844667},
    {0.5, 0.03060402345868264131},
    {3, 0.4860912605858910769},
    {7.9000000000000004, -0.1388733891648855325},
    {12, -0.08493049487860480535},
    {15.999000000000001, 0.1861315048725766211},
    {16.001000000000001, 0.1862657495255115384},
    {19, -0.157755906095694285},
    {25, -0.1062948032423813085},
    {60, 0.09302508354766741346},
    {123.40000000000001, 0.07141449944396591827},
    {266.06971756740279, -0.008430518250606689602},
    {400, 0.03877907123864102396},
    {619.89753348693307, 0.03126426548061644404},
    {857.60958631134019, 0.01841911471415418006},
    {1106.7378069393665, -0.0238295147963558846},
    {1584.2390098602978, -0.01996114354449015051},
    {1999.5, -0.01406758490152327351},
    {2507.9061398964964, -0.01579693813175124906},
    {2927.5815165677832, -0.005785975064745681214},
    {3226.6113202858269, 0.01167839474644811085},
    {3671.8209928004449, 0.001119055029395424261},
    {4000, 0.0126090514384624338},
};

}  // namespace

TEST_CASE("bessel J2 against high-precision reference values") {
    for (const auto& e : kJ2Table)
        CHECK(bessel_j2(e.x) == Catch::Approx(e.j2).margin(1e-12));
}

TEST_CASE("bessel recurrence identity J2 = 2 J1/x - J0 across both regimes") {
    for (double x = 0.25; x < 60.0; x += 0.5) {
        const double lhs = bessel_j2(x);
        const double rhs = 2 * bessel_j1(x) / x - bessel_j0(x);
        CHECK(lhs == Catch::Approx(rhs).margin(2e-13));
    }
}

TEST_CASE("bessel parity and crossover continuity") {
    CHECK(bessel_j2(-3.7) == bessel_j2(3.7));
    CHECK(bessel_j1(-3.7) == -bessel_j1(3.7));
    CHECK(bessel_j0(-3.7) == bessel_j0(3.7));
    // series and asymptotic branches must agree where they meet
    CHECK(bessel_j2(15.999999) == Catch::Approx(bessel_j2(16.000001)).margin(1e-11));
}

// ---------------------------------------------------------------------------
// Hankel integral.
// ---------------------------------------------------------------------------

TEST_CASE("hankel integral dual-path values") {
    CHECK(hankel_psi1r(0.0, -1.0) == 0.0);

    // (3 - 2 sqrt 2)/2 at rho = 1, z = -1
    CHECK(hankel_psi1r(1.0, -1.0) == Catch::Approx(0.085786437626904951).margin(1e-10));
    CHECK(hankel_psi1r_closed(1.0, -1.0) ==
          Catch::Approx((3 - 2 * std::sqrt(2.0)) / 2).epsilon(1e-13));

    // (1/2) (2 / (sqrt(4.25) + 0.5))^2 at rho = 2, z = -0.5
    const double closed = hankel_psi1r_closed(2.0, -0.5);
    CHECK(closed == Catch::Approx(0.30480589839889622).epsilon(1e-14));
    CHECK(hankel_psi1r(2.0, -0.5) == Catch::Approx(closed).epsilon(1e-8));
}

TEST_CASE("hankel preconditions") {
    CHECK_THROWS_AS(hankel_psi1r(-1.0, -1.0), Error);
    CHECK_THROWS_AS(hankel_psi1r(1.0, 0.0), Error);
    CHECK_THROWS_AS(hankel_psi1r(1.0, 1.0), Error);
    QuadratureSpec bad;
    bad.rel_tol = 0.5;
    CHECK_THROWS_AS(hankel_psi1r(1.0, -1.0, bad), Error);
}

TEST_CASE("psi1r reconstruction from the Hankel route") {
    const ExpansionParams params(plain, 1.0, -0.4, 1.0);
    for (double rho : {0.3, 1.0, 2.5}) {
        for (double z : {-0.2, -1.0, -3.0}) {
            for (double phi : {0.0, 0.5, 2.2}) {
                const LocalPoint p(rho * std::cos(phi), rho * std::sin(phi), z);
                const double via_hankel =
                    -params.K_minus * std::cos(2 * phi) * hankel_psi1r(rho, z);
                CHECK(psi1r(p, params) == Catch::Approx(via_hankel).margin(1e-9));
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Boundary transfer.
// ---------------------------------------------------------------------------

TEST_CASE("perturb_rhs is identically zero for the plane") {
    const PotentialFn zero_order = [](const Vec3& q) { return psi0(LocalPoint(q), plain); };
    const BoundaryRHS rhs = perturb_rhs(quadratic_height_fn(0.0, 0.0), zero_order,
                                        log_spaced(1e-3, 1e-1, 5), lin_spaced(0.0, 5.5, 8));
    for (double v : rhs.values) CHECK(std::abs(v) < 1e-11);
}

TEST_CASE("perturb_rhs matches the symbolic datum for the spherical point") {
    // symbolic oracle: datum = -(nu phi0 / 8 pi) (k_x + k_y)/rho for k_x = k_y,
    // phi-independent; at k = 1, rho = 0.01 this is -2/(8 pi 0.01)
    const PotentialFn zero_order = [](const Vec3& q) { return psi0(LocalPoint(q), plain); };
    const BoundaryRHS rhs =
        perturb_rhs(quadratic_height_fn(1.0, 1.0), zero_order, {0.01},
                    lin_spaced(0.0, 2 * kPi * 7 / 8, 8));
    const double expected = -7.9577471545947668;  // -1/(8 pi 0.01) * 2
    for (std::size_t j = 0; j < rhs.phis.size(); ++j)
        CHECK(rhs.at(0, j) == Catch::Approx(expected).epsilon(2e-8));
}

TEST_CASE("perturb_rhs for the symmetric saddle is a pure cos(2phi) mode") {
    const PotentialFn zero_order = [](const Vec3& q) { return psi0(LocalPoint(q), plain); };
    const auto phis = lin_spaced(0.0, 2 * kPi * 15 / 16, 16);
    const BoundaryRHS rhs =
        perturb_rhs(quadratic_height_fn(1.0, -1.0), zero_order, {0.02}, phis);
    const double K_minus = ExpansionParams(plain, 1.0, -1.0, 1.0).K_minus;
    for (std::size_t j = 0; j < phis.size(); ++j) {
        const double expected = -K_minus / 0.02 * std::cos(2 * phis[j]);
        CHECK(rhs.at(0, j) == Catch::Approx(expected).margin(1e-8 / 0.02));
    }
}

TEST_CASE("perturb_rhs rejects grids containing the origin") {
    const PotentialFn zero_order = [](const Vec3& q) { return psi0(LocalPoint(q), plain); };
    CHECK_THROWS_AS(perturb_rhs(quadratic_height_fn(1.0, 1.0), zero_order, {0.0, 0.1},
                                lin_spaced(0.0, 5.5, 8)),
                    GridContainsOrigin);
}

TEST_CASE("fit recovers exact model coefficients with zero residual") {
    BoundaryRHS rhs;
    rhs.rhos = log_spaced(1e-3, 1e-1, 6);
    rhs.phis = lin_spaced(0.0, 2 * kPi * 11 / 12, 12);
    const double c_sym = -0.35, c_asym = 0.2;
    for (double rho : rhs.rhos)
        for (double phi : rhs.phis)
            rhs.values.push_back((c_sym + c_asym * std::cos(2 * phi)) / rho);
    const RhsFit fit = fit_rhs_coefficients(rhs);
    CHECK(fit.c_sym == Catch::Approx(c_sym).margin(1e-12));
    CHECK(fit.c_asym == Catch::Approx(c_asym).margin(1e-12));
    CHECK(fit.max_residual < 1e-12);
}

TEST_CASE("fit ignores orthogonal cos(4phi) contamination") {
    BoundaryRHS rhs;
    rhs.rhos = log_spaced(1e-3, 1e-1, 6);
    rhs.phis = lin_spaced(0.0, 2 * kPi * 15 / 16, 16);
    const double c_sym = -0.35, c_asym = 0.2;
    for (double rho : rhs.rhos)
        for (double phi : rhs.phis)
            rhs.values.push_back(
                (c_sym + c_asym * std::cos(2 * phi) + 0.8 * std::cos(4 * phi)) / rho);
    const RhsFit fit = fit_rhs_coefficients(rhs);
    CHECK(fit.c_sym == Catch::Approx(c_sym).margin(1e-10));
    CHECK(fit.c_asym == Catch::Approx(c_asym).margin(1e-10));
}

TEST_CASE("fit preconditions") {
    BoundaryRHS rhs;
    rhs.rhos = log_spaced(1e-3, 1e-1, 6);
    rhs.phis = lin_spaced(0.0, 2.0, 4);  // too few angular nodes
    rhs.values.assign(24, 1.0);
    CHECK_THROWS_AS(fit_rhs_coefficients(rhs), IllConditionedFit);

    BoundaryRHS narrow;
    narrow.rhos = log_spaced(1e-2, 2e-2, 4);  // less than two decades
    narrow.phis = lin_spaced(0.0, 2 * kPi * 11 / 12, 12);
    narrow.values.assign(48, 1.0);
    CHECK_THROWS_AS(fit_rhs_coefficients(narrow), IllConditionedFit);
}

TEST_CASE("sphere datum fit converges to -K_plus as rho -> 0") {
    const SurfacePatch patch = make_sphere_patch(1.0);
    const LocalFrame frame = build_local_frame(patch, 0.0, 0.0);
    const ExpansionParams params(plain, frame.k_x, frame.k_y, 1.0);
    const PotentialFn zero_order = [](const Vec3& q) { return psi0(LocalPoint(q), plain); };

    const BoundaryRHS rhs =
        perturb_rhs(patch_height_fn(frame, patch), zero_order, log_spaced(1e-4, 1e-2, 7),
                    lin_spaced(0.0, 2 * kPi * 15 / 16, 16), params);
    const RhsFit fit = fit_rhs_coefficients(rhs);
    CHECK(fit.c_sym == Catch::Approx(-params.K_plus).epsilon(1e-2));
    CHECK(std::abs(fit.c_asym) < 1e-2 * std::abs(params.K_plus));
    CHECK(rhs.model_c_sym == -params.K_plus);
}

TEST_CASE("datum of the corrected potential stays bounded as rho -> 0") {
    // the next-order Neumann datum is the transfer of psi0 + psi1 minus the
    // normal derivative psi1 already absorbs (the analytic model): it no
    // longer carries the 1/rho singularity, so its sup over [1e-4, 1e-2]
    // grows slower than rho^{-1/2}
    const ExpansionParams params(plain, 1.0, 0.4, 1.0);
    const PotentialFn corrected = [&](const Vec3& q) {
        const LocalPoint p(q);
        return psi0(p, plain) + psi1s(p, params) + psi1r(p, params);
    };

    const auto rhos = log_spaced(1e-4, 1e-2, 5);
    const BoundaryRHS rhs = perturb_rhs(quadratic_height_fn(1.0, 0.4), corrected, rhos,
                                        lin_spaced(0.0, 2 * kPi * 7 / 8, 8), params);
    std::vector<double> sup(rhs.rhos.size(), 0.0);
    for (std::size_t i = 0; i < rhs.rhos.size(); ++i)
        for (std::size_t j = 0; j < rhs.phis.size(); ++j) {
            const double absorbed =
                (rhs.model_c_sym + rhs.model_c_asym * std::cos(2 * rhs.phis[j])) / rhs.rhos[i];
            sup[i] = std::max(sup[i], std::abs(rhs.at(i, j) - absorbed));
        }

    // compare growth against C rho^{-1/2}
    for (std::size_t i = 1; i < sup.size(); ++i) {
        const double growth = sup[i - 1] / sup[i];  // sup at smaller rho over larger
        const double forbidden = std::sqrt(rhos[i] / rhos[i - 1]);
        CHECK(growth < forbidden);
    }
}
