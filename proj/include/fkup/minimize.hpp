#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fkup/energies.hpp"
#include "fkup/functions.hpp"
#include "fkup/potential.hpp"

namespace fkup {

enum class StepRule { fixed, backtracking };
enum class InitKind { reference_profile, linear_ramp, provided };

struct MinimizeConfig {
    double grad_tol = 1e-5; // sup-norm of the interior (projected) gradient
    int max_iters = 50000;
    StepRule step_rule = StepRule::backtracking;
    InitKind init = InitKind::reference_profile;
    bool record_trace = false;
    std::vector<double> provided_init; // node values, used when init == provided
};

struct MinimizeResult {
    ChainState state;
    double energy = 0.0;
    int iterations = 0;
    bool converged = false;
    double grad_norm = 0.0;
    int wall_count = 0;
    std::vector<std::pair<double, double>> trace; // (energy, grad_norm) per accepted step
};

nlohmann::json diagnostics_json(const MinimizeResult& r, const std::string& kind,
                                const nlohmann::json& params);
void write_trace_csv(const MinimizeResult& r, std::ostream& os); // iter,energy,grad_norm

// Gradient descent on the discrete energy with the chain ends clamped to the
// boundary levels. Backtracking uses Armijo constant 1e-4 with step doubling
// between iterations; the fixed rule uses 1/(4/delta + delta*max|w''|).
// Non-convergence is reported through the flags, not an exception; a
// non-finite energy raises the numeric error type.
MinimizeResult minimize_energy(const WeakPotential& pot, const MesoscaleParams& mp,
                               const BoundaryData& boundary, const UniformPartition& window,
                               const MinimizeConfig& cfg = {});
MinimizeResult minimize_energy(const WeakPotential& pot, const TwoScaleParams& tp,
                               const BoundaryData& boundary, const UniformPartition& window,
                               const MinimizeConfig& cfg = {});

// Crossings of half-integer levels, counted per segment with multiplicity.
int wall_count(const ChainState& c);

struct NormalizationConfig {
    double alpha = 0.1; // half-width of the mismatch bands; must lie in (0, 1/2)
};

struct NormalizeResult {
    double shift = 0.0; // a, with normalized(x) = g(x + a)
    PiecewiseAffine normalized;
    double v_measure = 0.0; // |V_a0| + |V_a1| at the chosen shift
};

// Picks the grid shift a in delta*Z minimizing the exact mismatch measure
// |{x > x1 : |g(x+a)| < alpha}| + |{x < -x1 : |g(x+a)-1| < alpha}| where x1 is
// where the reference crosses 1 - alpha. Argmin plateaus resolve to their
// median shift (lower median, then smaller |a|), which keeps the result
// translation-equivariant.
NormalizeResult translation_normalize(const PiecewiseAffine& g, const ReferenceProfile& vbar,
                                      const NormalizationConfig& ncfg, double delta);

// I_alpha = p(1-alpha) - p(alpha), reported so callers can check the
// normalization hypothesis p_bar < C < (3/2)*I_alpha.
double i_alpha(const WeakPotential& pot, double alpha);

} // namespace fkup
