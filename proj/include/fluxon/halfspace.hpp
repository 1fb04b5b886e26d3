#pragma once

#include "fluxon/bessel.hpp"
#include "fluxon/expansion.hpp"
#include "fluxon/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

namespace fluxon {

// ---------------------------------------------------------------------------
// QuadratureSpec for the semi-infinite Hankel integral.
// ---------------------------------------------------------------------------

struct QuadratureSpec {
    double lambda_max = 0.0;  // truncation point; 0 selects the automatic rule
    double rel_tol = 1e-10;
    double abs_tol = 1e-13;
    int max_subdivisions = 4000;

    void validate() const {
        if (lambda_max < 0) throw Error("lambda_max must be positive (or 0 for automatic)");
        if (!(rel_tol > 0 && rel_tol <= 1e-2) || !(abs_tol > 0 && abs_tol <= 1e-2))
            throw Error("quadrature tolerances must lie in (0, 1e-2]");
        if (max_subdivisions < 1) throw Error("max_subdivisions must be positive");
    }
};

// ---------------------------------------------------------------------------
// The Hankel integral int_0^inf J2(lambda rho) exp(-lambda |z|) dlambda/lambda
// and its closed form (1/2) (rho/(r - z))^2. The pair forms the dual-route
// identity checked by the suite.
// ---------------------------------------------------------------------------

inline double hankel_psi1r_closed(double rho, double z) {
    const double r = std::hypot(rho, z);
    const double ratio = rho / (r - z);
    return 0.5 * ratio * ratio;
}

inline double hankel_psi1r(double rho, double z, const QuadratureSpec& spec = {}) {
    spec.validate();
    if (rho < 0) throw Error("hankel_psi1r requires rho >= 0");
    if (!(z < 0)) throw Error("hankel_psi1r requires z < 0");
    if (rho == 0.0) return 0.0;  // J2(0) = 0

    const double az = -z;
    // Truncation keeps the tail below e^{-lambda_max |z|} / (lambda_max |z|);
    // the 200/rho term guards the oscillation period.
    const double lambda_max =
        spec.lambda_max > 0 ? spec.lambda_max : std::max(40.0 / az, 200.0 / rho);

    auto integrand = [=](double lam) {
        if (lam <= 0.0) return 0.0;
        return bessel_j2(lam * rho) * std::exp(-lam * az) / lam;
    };
    // Geometric edge ladder down to the damping scale 1/|z|, so the peak of
    // the integrand cannot fall between the nodes of one huge first panel.
    std::vector<double> edges = {0.0, lambda_max};
    for (double e = 0.5 * lambda_max; e > 2.0 / az && edges.size() < 44; e *= 0.5)
        edges.push_back(e);
    const QuadratureResult q = adaptive_integrate(integrand, std::move(edges), spec.rel_tol,
                                                  spec.abs_tol, spec.max_subdivisions);
    return q.value;
}

// ---------------------------------------------------------------------------
// Boundary transfer: the Neumann datum that the next expansion order must
// absorb, sampled on a polar grid of the plane z = 0.
// ---------------------------------------------------------------------------

struct BoundaryRHS {
    std::vector<double> rhos;
    std::vector<double> phis;
    std::vector<double> values;  // row-major, index = i_rho * phis.size() + j_phi
    // Analytic small-rho model: datum = (c_sym + c_asym cos 2phi)/rho.
    double model_c_sym = 0.0;
    double model_c_asym = 0.0;

    double at(std::size_t i, std::size_t j) const { return values[i * phis.size() + j]; }
};

// Height data on the tangent plane: F, F_x, F_y at (x, y).
struct HeightData {
    double F, F_x, F_y;
};
using HeightFn = std::function<HeightData(double, double)>;

// Quadratic-model height (the main-term transfer of the derivation).
inline HeightFn quadratic_height_fn(double k_x, double k_y) {
    return [=](double x, double y) {
        return HeightData{0.5 * (k_x * x * x + k_y * y * y), k_x * x, k_y * y};
    };
}

// Full-surface height via the patch projection, for convergence studies.
inline HeightFn patch_height_fn(const LocalFrame& frame, const SurfacePatch& patch) {
    return [&frame, &patch](double x, double y) {
        const HeightSample s = height_function(frame, patch, x, y);
        return HeightData{s.F, s.F_x, s.F_y};
    };
}

using PotentialFn = std::function<double(const Vec3&)>;

namespace detail {

// One-sided z-derivatives from inside the domain (z <= 0), 4th order.
inline double one_sided_dzz(const PotentialFn& psi, double x, double y, double h) {
    static constexpr double c[6] = {15.0 / 4.0,  -77.0 / 6.0, 107.0 / 6.0,
                                    -13.0,       61.0 / 12.0, -5.0 / 6.0};
    double acc = 0.0;
    for (int k = 0; k < 6; ++k) acc += c[k] * psi(Vec3(x, y, -k * h));
    return acc / (h * h);
}

inline double central_dx(const PotentialFn& psi, const Vec3& p, const Vec3& dir, double h) {
    return (psi(p - 2 * h * dir) - 8 * psi(p - h * dir) + 8 * psi(p + h * dir) -
            psi(p + 2 * h * dir)) /
           (12 * h);
}

}  // namespace detail

// Boundary-transfer datum
//   F_x dpsi/dx + F_y dpsi/dy - F d2psi/dz2   at z = 0,
// sampled on the polar grid. With psi_prev the zero-order potential this is
// the Neumann datum of the first correction; for partial sums the datum of
// the next order is this minus the normal derivative the corrections
// already absorb (available analytically as the model coefficients).
inline BoundaryRHS perturb_rhs(const HeightFn& height, const PotentialFn& psi_prev,
                               std::vector<double> rhos, std::vector<double> phis,
                               std::optional<ExpansionParams> model = {},
                               double fd_step_factor = 2e-3) {
    for (double rho : rhos)
        if (!(rho > 0)) throw GridContainsOrigin("rho grid must exclude the origin");

    BoundaryRHS rhs;
    rhs.rhos = std::move(rhos);
    rhs.phis = std::move(phis);
    rhs.values.assign(rhs.rhos.size() * rhs.phis.size(), 0.0);
    if (model) {
        rhs.model_c_sym = -model->K_plus;
        rhs.model_c_asym = -model->K_minus;
    }

    parallel_for(rhs.values.size(), [&](std::size_t idx) {
        const std::size_t i = idx / rhs.phis.size();
        const std::size_t j = idx % rhs.phis.size();
        const double rho = rhs.rhos[i];
        const double x = rho * std::cos(rhs.phis[j]);
        const double y = rho * std::sin(rhs.phis[j]);
        const double h = fd_step_factor * rho;

        const HeightData hd = height(x, y);
        const double psi_x = detail::central_dx(psi_prev, Vec3(x, y, 0), Vec3::UnitX(), h);
        const double psi_y = detail::central_dx(psi_prev, Vec3(x, y, 0), Vec3::UnitY(), h);
        const double psi_zz = detail::one_sided_dzz(psi_prev, x, y, h);
        rhs.values[idx] = hd.F_x * psi_x + hd.F_y * psi_y - hd.F * psi_zz;
    });
    return rhs;
}

// ---------------------------------------------------------------------------
// Angular-mode fit of the datum: datum * rho against {1, cos 2phi}.
// ---------------------------------------------------------------------------

struct RhsFit {
    double c_sym = 0.0;
    double c_asym = 0.0;
    double se_sym = 0.0;
    double se_asym = 0.0;
    double max_residual = 0.0;
};

inline RhsFit fit_rhs_coefficients(const BoundaryRHS& rhs) {
    if (rhs.phis.size() < 8)
        throw IllConditionedFit("angular sampling must have at least 8 nodes");
    if (rhs.rhos.empty())
        throw IllConditionedFit("rho grid is empty");
    const auto [rho_min, rho_max] = std::minmax_element(rhs.rhos.begin(), rhs.rhos.end());
    if (*rho_max / *rho_min < 100.0 * (1.0 - 1e-12))
        throw IllConditionedFit("rho grid must span at least two decades");

    // Normal equations for y = c_sym + c_asym cos(2 phi).
    double s11 = 0, s1c = 0, scc = 0, sy = 0, syc = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < rhs.rhos.size(); ++i) {
        for (std::size_t j = 0; j < rhs.phis.size(); ++j) {
            const double c2 = std::cos(2 * rhs.phis[j]);
            const double y = rhs.at(i, j) * rhs.rhos[i];
            s11 += 1;
            s1c += c2;
            scc += c2 * c2;
            sy += y;
            syc += y * c2;
            ++n;
        }
    }
    const double det = s11 * scc - s1c * s1c;
    if (std::abs(det) < 1e-12 * s11 * s11)
        throw IllConditionedFit("angular design matrix is singular");

    RhsFit fit;
    fit.c_sym = (scc * sy - s1c * syc) / det;
    fit.c_asym = (s11 * syc - s1c * sy) / det;

    double rss = 0.0;
    for (std::size_t i = 0; i < rhs.rhos.size(); ++i) {
        for (std::size_t j = 0; j < rhs.phis.size(); ++j) {
            const double c2 = std::cos(2 * rhs.phis[j]);
            const double res = rhs.at(i, j) * rhs.rhos[i] - fit.c_sym - fit.c_asym * c2;
            rss += res * res;
            fit.max_residual = std::max(fit.max_residual, std::abs(res));
        }
    }
    const double sigma2 = rss / std::max<std::size_t>(n - 2, 1);
    fit.se_sym = std::sqrt(sigma2 * scc / det);
    fit.se_asym = std::sqrt(sigma2 * s11 / det);
    return fit;
}

}  // namespace fluxon
