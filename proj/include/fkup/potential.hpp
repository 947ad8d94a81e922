#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace fkup {

// Parameters of the substrate interaction. The pair potential is a 12-6
// Lennard-Jones well of depth `well_depth` at distance `r_min`; a chain atom
// sits at vertical offset `standoff` above the substrate line, and `sigma` is
// the substrate period expressed in chain-spacing units. The lattice sum over
// substrate atoms is truncated at |j| <= truncation_radius; the first omitted
// term must fall below `quadrature_tol`, which is also the absolute tolerance
// of all adaptive quadratures derived from this potential.
struct PairPotentialSpec {
    double well_depth = 1.0;
    double r_min = 1.2;
    double standoff = 1.0;
    double sigma = 1.0;
    int truncation_radius = 45;
    double quadrature_tol = 1e-9;
};

nlohmann::json to_json(const PairPotentialSpec& spec);
// Strict parse: missing or unknown keys are rejected (std::invalid_argument).
PairPotentialSpec potential_spec_from_json(const nlohmann::json& j);

// Lennard-Jones pair potential V(r); throws std::domain_error for r <= 0.
double eval_pair_potential(double r, const PairPotentialSpec& spec);

// Interaction with one substrate atom as a function of scaled horizontal
// offset d: h(d) = V(sqrt(d^2 + standoff^2)). Even in d.
double eval_h(double d, const PairPotentialSpec& spec);

// Substrate energy landscape with cached derived quantities. Construction
// validates positivity of all parameters, truncation_radius >= 8, and the
// truncation criterion |h((J+1/2)/sigma)| < quadrature_tol.
class WeakPotential {
public:
    explicit WeakPotential(const PairPotentialSpec& spec);

    const PairPotentialSpec& spec() const { return spec_; }

    // Cost of moving one full well spacing: transition_cost(1), cached.
    double p_bar() const { return p_bar_; }
    // w''(0), cached. Sets the wall decay rate sqrt(curvature/2).
    double curvature_at_well() const { return curvature_; }

    // Periodic landscape w and its first two derivatives. w vanishes on the
    // integers up to truncation noise and is even about every half-integer.
    double w(double xi) const;
    double w1(double xi) const;
    double w2(double xi) const;

private:
    PairPotentialSpec spec_;
    std::vector<double> base_;  // (j + 1/2) / sigma for |j| <= J
    double ref_sum_ = 0.0;      // sum of h at the reference offsets
    double inv_sigma_ = 0.0;
    double sb2_ = 0.0;  // standoff^2
    double rm2_ = 0.0;  // r_min^2
    double p_bar_ = 0.0;
    double curvature_ = 0.0;
};

// w and derivatives; order must be 0, 1 or 2 (std::invalid_argument otherwise).
double eval_w(double xi, int order, const WeakPotential& pot);

// p(z) = 2 * integral_0^z sqrt(max(w,0)). Monotone, odd, p(z+1) = p(z) + p(1).
// Integrates the whole interval adaptively (no periodic reduction), tolerance
// spec().quadrature_tol; throws NumericError if the quadrature stalls.
double transition_cost(double z, const WeakPotential& pot);

// Structural checks on w. Failures are reported, never thrown.
struct ValidationReport {
    bool passed = false;
    double integer_defect = 0.0;      // max |w(m)|, m in {-1,0,1,2}
    double min_w_off_wells = 0.0;     // min w at distance >= 1e-3 from integers
    double curvature = 0.0;           // w''(0)
    double periodicity_defect = 0.0;  // max |w(x+1) - w(x)|
    double symmetry_defect = 0.0;     // max |w(1/2+t) - w(1/2-t)|
    std::vector<std::string> diagnostics;
};

nlohmann::json to_json(const ValidationReport& report);

// Samples w on [-0.5, 1.5] (10^4 points) and checks: wells at the integers
// (|w(m)| <= 10*tol), strict positivity off the wells above the truncation
// noise floor, positive curvature at the wells, periodicity and half-integer
// symmetry within 10*tol.
ValidationReport validate_potential(const WeakPotential& pot);

} // namespace fkup
