#include "fkup/energies.hpp"

#include <cmath>
#include <stdexcept>

#include "fkup/quadrature.hpp"

namespace fkup {

namespace {

void check_spacing(double have, double want, const char* who) {
    if (std::abs(have - want) > 1e-12 * std::max(std::abs(want), 1.0))
        throw std::invalid_argument(std::string(who) + ": grid spacing does not match the scale parameters");
}

// Shared discrete form: sum dv^2/delta + delta * sum w(v_i).
double discrete_energy(const std::vector<double>& v, const WeakPotential& pot, double delta) {
    double elastic = 0.0, weak = 0.0;
    double prev = v.front();
    weak += pot.w(prev);
    for (size_t k = 1; k < v.size(); ++k) {
        const double d = v[k] - prev;
        elastic += d * d;
        prev = v[k];
        weak += pot.w(prev);
    }
    return elastic / delta + delta * weak;
}

} // namespace

double chain_energy(const std::vector<double>& values, const WeakPotential& pot, double delta) {
    return discrete_energy(values, pot, delta);
}

void chain_gradient(const std::vector<double>& values, const WeakPotential& pot, double delta,
                    std::vector<double>& out) {
    out.assign(values.size(), 0.0);
    for (size_t k = 1; k + 1 < values.size(); ++k)
        out[k] = -2.0 * (values[k + 1] - 2.0 * values[k] + values[k - 1]) / delta +
                 delta * pot.w1(values[k]);
}

MesoscaleParams::MesoscaleParams(double delta_) : delta(delta_) {
    if (!(delta > 0.0 && delta <= 1.0))
        throw std::invalid_argument("MesoscaleParams: delta must lie in (0, 1]");
}

TwoScaleParams::TwoScaleParams(double epsilon_, double delta_)
    : epsilon(epsilon_), delta(delta_) {
    if (!(epsilon > 0.0) || !(delta > 0.0) || !(epsilon * delta <= 1.0))
        throw std::invalid_argument(
            "TwoScaleParams: need epsilon, delta > 0 with epsilon*delta <= 1");
}

BoundaryData::BoundaryData(int m_left_, int m_right_) : m_left(m_left_), m_right(m_right_) {
    if (m_left == m_right)
        throw std::invalid_argument("BoundaryData: far-field levels must differ");
}

nlohmann::json to_json(const BoundaryData& b) {
    return {{"m_left", b.m_left}, {"m_right", b.m_right}};
}

BoundaryData boundary_from_json(const nlohmann::json& j) {
    try {
        return BoundaryData(j.at("m_left").get<int>(), j.at("m_right").get<int>());
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("boundary: ") + e.what());
    }
}

double ReferenceProfile::operator()(double x) const {
    return b_.jump() * 0.5 * (std::tanh(x) + 1.0) + b_.m_left;
}

double ReferenceProfile::derivative(double x) const {
    const double c = std::cosh(x);
    return b_.jump() * 0.5 / (c * c);
}

double discrete_energy_meso(const ChainState& c, const WeakPotential& pot,
                            const MesoscaleParams& mp) {
    check_spacing(c.delta_eff, mp.delta, "discrete_energy_meso");
    return discrete_energy(c.values, pot, mp.delta);
}

double weak_energy(const PiecewiseAffine& g, const WeakPotential& pot) {
    const auto& v = g.node_values();
    const double rho = g.partition().spacing;
    auto w = [&pot](double t) { return pot.w(t); };
    double acc = 0.0;
    double cached_v = 0.0, cached_w = 0.0;
    bool have_cache = false;
    for (size_t k = 0; k + 1 < v.size(); ++k) {
        if (v[k] == v[k + 1]) {
            // plateau cells: the chord integrand is constant; reuse runs
            if (!have_cache || v[k] != cached_v) {
                cached_v = v[k];
                cached_w = pot.w(cached_v);
                have_cache = true;
            }
            acc += cached_w * rho;
        } else {
            acc += chord_integral(w, v[k], v[k + 1], rho);
        }
    }
    return acc;
}

double continuum_F(const PiecewiseAffine& g, const WeakPotential& pot) {
    return dirichlet_energy(g) + weak_energy(g, pot);
}

double continuum_F_eps(const PiecewiseAffine& g, const WeakPotential& pot, double eps) {
    if (!(eps > 0.0))
        throw std::invalid_argument("continuum_F_eps: eps must be positive");
    return eps * dirichlet_energy(g) + weak_energy(g, pot) / eps;
}

double continuum_energy_meso(const PiecewiseAffine& g, const WeakPotential& pot,
                             const MesoscaleParams& mp) {
    check_spacing(g.partition().spacing, mp.delta, "continuum_energy_meso");
    return continuum_F(g, pot);
}

double energy_gap(const ChainState& c, const WeakPotential& pot, const MesoscaleParams& mp) {
    return std::abs(continuum_energy_meso(lift(c), pot, mp) - discrete_energy_meso(c, pot, mp));
}

double discrete_energy_twoscale(const ChainState& c, const WeakPotential& pot,
                                const TwoScaleParams& tp) {
    check_spacing(c.delta_eff, tp.epsilon * tp.delta, "discrete_energy_twoscale");
    return discrete_energy(c.values, pot, tp.delta);
}

double continuum_energy_twoscale(const PiecewiseAffine& g, const WeakPotential& pot,
                                 const TwoScaleParams& tp) {
    check_spacing(g.partition().spacing, tp.epsilon * tp.delta, "continuum_energy_twoscale");
    return continuum_F_eps(g, pot, tp.epsilon);
}

double bv_energy(const StepFunction& s, const WeakPotential& pot) {
    return step_variation(s) * pot.p_bar();
}

std::vector<double> grad_discrete(const ChainState& c, const WeakPotential& pot,
                                  const MesoscaleParams& mp) {
    check_spacing(c.delta_eff, mp.delta, "grad_discrete");
    std::vector<double> g;
    chain_gradient(c.values, pot, mp.delta, g);
    return g;
}

std::vector<double> grad_discrete(const ChainState& c, const WeakPotential& pot,
                                  const TwoScaleParams& tp) {
    check_spacing(c.delta_eff, tp.epsilon * tp.delta, "grad_discrete");
    std::vector<double> g;
    chain_gradient(c.values, pot, tp.delta, g);
    return g;
}

double weak_tail_bound(const PiecewiseAffine& g, const WeakPotential& pot) {
    return std::abs(pot.w(g.left_tail())) + std::abs(pot.w(g.right_tail()));
}

nlohmann::json energy_record(const std::string& functional, const nlohmann::json& params,
                             double value, double tail_bound) {
    return {{"functional", functional}, {"params", params}, {"value", value},
            {"tail_bound", tail_bound}};
}

} // namespace fkup
