#pragma once

#include <json.hpp>

#include "fkup/functions.hpp"
#include "fkup/potential.hpp"

namespace fkup {

// Mesoscale lattice spacing delta in (0, 1].
struct MesoscaleParams {
    double delta;
    explicit MesoscaleParams(double delta);
};

// Two-scale parameters: wall width epsilon, lattice spacing epsilon*delta.
struct TwoScaleParams {
    double epsilon;
    double delta;
    TwoScaleParams(double epsilon, double delta);
};

// Integer far-field levels; the two sides must differ.
struct BoundaryData {
    int m_left;
    int m_right;
    BoundaryData(int m_left, int m_right);
    int jump() const { return m_right - m_left; }
};

nlohmann::json to_json(const BoundaryData& b);
BoundaryData boundary_from_json(const nlohmann::json& j);

// Smooth reference transition (m_r - m_l) * (tanh(x)+1)/2 + m_l. Strictly
// monotone with exponentially settled tails.
class ReferenceProfile {
public:
    explicit ReferenceProfile(BoundaryData boundary) : b_(boundary) {}
    const BoundaryData& boundary() const { return b_; }
    double operator()(double x) const;
    double derivative(double x) const;

private:
    BoundaryData b_;
};

// Mesoscale chain energy: sum dv^2/delta + delta * sum w(v_i). The weak sum
// runs over every window node including the two clamps (for integer clamps
// their w is truncation noise).
double discrete_energy_meso(const ChainState& c, const WeakPotential& pot,
                            const MesoscaleParams& mp);

// Dirichlet energy plus the weak term integrated per cell (8-point Gauss).
double continuum_energy_meso(const PiecewiseAffine& g, const WeakPotential& pot,
                             const MesoscaleParams& mp);

// |continuum energy of the lift - discrete energy|.
double energy_gap(const ChainState& c, const WeakPotential& pot, const MesoscaleParams& mp);

// Two-scale versions. The discrete two-scale energy equals the mesoscale
// expression in the node values (the epsilon factors cancel); epsilon enters
// through the grid spacing epsilon*delta and the continuum rescaling.
double discrete_energy_twoscale(const ChainState& c, const WeakPotential& pot,
                                const TwoScaleParams& tp);
double continuum_energy_twoscale(const PiecewiseAffine& g, const WeakPotential& pot,
                                 const TwoScaleParams& tp);

// Weak term alone: integral of w(g) over the window.
double weak_energy(const PiecewiseAffine& g, const WeakPotential& pot);

// F[g] = dirichlet + weak; F_eps[g] = eps*dirichlet + weak/eps.
double continuum_F(const PiecewiseAffine& g, const WeakPotential& pot);
double continuum_F_eps(const PiecewiseAffine& g, const WeakPotential& pot, double eps);

// Sharp-interface energy: total variation times the per-wall cost p_bar.
double bv_energy(const StepFunction& s, const WeakPotential& pot);

// Gradient of the discrete energy in the node values; zero at the clamped
// ends. Both scales share the same expression (see discrete_energy_twoscale).
std::vector<double> grad_discrete(const ChainState& c, const WeakPotential& pot,
                                  const MesoscaleParams& mp);
std::vector<double> grad_discrete(const ChainState& c, const WeakPotential& pot,
                                  const TwoScaleParams& tp);

// Raw node-vector forms of the same energy and gradient, shared with the
// minimizer loops (no ChainState wrapping, gradient written in place).
double chain_energy(const std::vector<double>& values, const WeakPotential& pot, double delta);
void chain_gradient(const std::vector<double>& values, const WeakPotential& pot, double delta,
                    std::vector<double>& out);

// Per-unit-length bound on the weak energy carried by the constant tails.
double weak_tail_bound(const PiecewiseAffine& g, const WeakPotential& pot);

// Loggable record for an energy evaluation.
nlohmann::json energy_record(const std::string& functional, const nlohmann::json& params,
                             double value, double tail_bound);

} // namespace fkup
