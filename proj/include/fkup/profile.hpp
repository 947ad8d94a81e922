#pragma once

#include <json.hpp>

#include "fkup/energies.hpp"
#include "fkup/functions.hpp"
#include "fkup/potential.hpp"

namespace fkup {

// Heteroclinic wall profile: the solution of xi' = sqrt(w(xi)) through
// xi(0) = 1/2, tabulated by quadrature inversion for xi in [eta, 1-eta] and
// continued beyond the table by the matched exponential tails
// xi ~ eta*e^{kappa(x - x_front)} and 1 - xi ~ eta*e^{-kappa(x - x_back)},
// kappa = sqrt(w''(0)/2). `increasing` = false evaluates the mirror image
// (the solution of xi' = -sqrt(w(xi)), running 1 -> 0).
struct HeteroclinicProfile {
    std::vector<double> x;       // strictly increasing sample positions
    std::vector<double> xi;      // sampled values, increasing in [eta, 1-eta]
    std::vector<double> slopes;  // sqrt(w(xi)) at the samples
    double eta = 0.0;
    double kappa = 0.0;
    bool increasing = true;

    double x_front() const { return x.front(); }
    double x_back() const { return x.back(); }

    double value(double pos) const;
    double slope(double pos) const;

    // Table-based integrals of xi'^2 and w(xi) over the tabulated range
    // (piecewise-affine reading; the equipartition checks compare them).
    double dirichlet_integral() const;
    double weak_integral(const WeakPotential& pot) const;
};

// Builds the profile by quadrature inversion of x(xi) = int dt/sqrt(w) on a
// grid of roughly uniform x-spacing (n_samples is an approximate budget).
// Requires 0 < eta < 0.4 and a potential that passes validate_potential.
HeteroclinicProfile heteroclinic_profile(const WeakPotential& pot, double eta = 1e-4,
                                         bool increasing = true, int n_samples = 20001);

// One recovery construction: a chain-scale sampling of the profile dilated to
// wall width eps, closed off by the tangent lines at +-sqrt(eps) and constant
// integer levels beyond +-beta.
struct RecoveryBuild {
    double epsilon = 0.0;
    double delta = 0.0;
    double beta = 0.0;           // half-width of the non-constant region
    double tangent_point = 0.0;  // sqrt(eps)
    PiecewiseAffine result;
    nlohmann::json metadata;
};

nlohmann::json to_json(const RecoveryBuild& rb);

// Unit step between adjacent levels, sampled on the grid of spacing
// eps*delta with the jump location snapped to the nearest node. Requires an
// increasing profile (down steps mirror it internally).
RecoveryBuild recovery_step(const WeakPotential& pot, const HeteroclinicProfile& prof,
                            double eps, double delta, double x0, int level_from, int level_to);

// |jump| unit copies separated by the smallest grid-aligned t > 2*beta +
// eps*delta, vertically stacked on base_level; decreasing for jump < 0.
RecoveryBuild recovery_multijump(const WeakPotential& pot, const HeteroclinicProfile& prof,
                                 double eps, double delta, double x0, int jump, int base_level);

// Recovery for a whole step function: one multijump cluster per breakpoint,
// spliced with exact integer plateaus. Breakpoints must be separated by more
// than 2*(beta + |jump|*t). Metadata carries per-jump zone energies.
RecoveryBuild recovery_bv(const WeakPotential& pot, const HeteroclinicProfile& prof,
                          double eps, double delta, const StepFunction& target);

} // namespace fkup
