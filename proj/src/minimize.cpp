#include "fkup/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "fkup/quadrature.hpp"

namespace fkup {

namespace {

void check_window_spacing(double have, double want) {
    if (std::abs(have - want) > 1e-12 * std::max(std::abs(want), 1.0))
        throw std::invalid_argument("minimize_energy: window spacing does not match the params");
}

std::vector<double> build_init(const BoundaryData& b, const UniformPartition& win,
                               const MinimizeConfig& cfg, double wall_width) {
    const int n = win.n_nodes();
    std::vector<double> v(static_cast<std::size_t>(n));
    if (cfg.init == InitKind::provided) {
        if (static_cast<int>(cfg.provided_init.size()) != n)
            throw std::invalid_argument("minimize_energy: provided_init size must match window");
        v = cfg.provided_init;
    } else if (wall_width <= 0.0) {
        // Mesoscale: one transition of unit width.
        if (cfg.init == InitKind::reference_profile) {
            const ReferenceProfile rp(b);
            for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = rp(win.node(win.i_min + i));
        } else {
            for (int i = 0; i < n; ++i) {
                const double t = std::clamp((win.node(win.i_min + i) + 1.0) / 2.0, 0.0, 1.0);
                v[static_cast<std::size_t>(i)] = b.m_left + b.jump() * t;
            }
        }
    } else {
        // Two-scale: |jump| separated walls of width wall_width, spaced 1 apart.
        const int copies = std::abs(b.jump());
        const double sign = b.jump() > 0 ? 1.0 : -1.0;
        for (int i = 0; i < n; ++i) {
            const double x = win.node(win.i_min + i);
            double acc = b.m_left;
            for (int j = 0; j < copies; ++j) {
                const double c = (j - (copies - 1) / 2.0);
                if (cfg.init == InitKind::reference_profile)
                    acc += sign * 0.5 * (std::tanh((x - c) / wall_width) + 1.0);
                else
                    acc += sign * std::clamp((x - (c - wall_width)) / (2.0 * wall_width), 0.0, 1.0);
            }
            v[static_cast<std::size_t>(i)] = acc;
        }
    }
    v.front() = b.m_left;
    v.back() = b.m_right;
    return v;
}

struct LoopStats {
    double energy = 0.0;
    int iterations = 0;
    bool converged = false;
    double grad_norm = 0.0;
    std::vector<std::pair<double, double>> trace;
};

LoopStats descend(std::vector<double>& v, const WeakPotential& pot, double delta,
                  const MinimizeConfig& cfg) {
    if (!(cfg.grad_tol > 0.0)) throw std::invalid_argument("grad_tol must be positive");
    if (cfg.max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
    LoopStats out;
    std::vector<double> g(v.size(), 0.0), trial(v.size());
    double energy = chain_energy(v, pot, delta);
    if (!std::isfinite(energy)) throw NumericError("minimize_energy: initial energy not finite");

    double fixed_step = 0.0;
    if (cfg.step_rule == StepRule::fixed) {
        double m2 = 0.0;
        for (int i = 0; i <= 2000; ++i)
            m2 = std::max(m2, std::abs(pot.w2(static_cast<double>(i) / 2000.0)));
        fixed_step = 1.0 / (4.0 / delta + delta * m2);
    }

    double step = 1.0;
    out.energy = energy;
    for (int it = 0; it < cfg.max_iters; ++it) {
        chain_gradient(v, pot, delta, g);
        double gn = 0.0, g2 = 0.0;
        for (const double gi : g) {
            gn = std::max(gn, std::abs(gi));
            g2 += gi * gi;
        }
        out.grad_norm = gn;
        out.iterations = it;
        if (gn <= cfg.grad_tol) {
            out.converged = true;
            out.energy = energy;
            return out;
        }
        if (cfg.step_rule == StepRule::fixed) {
            for (std::size_t k = 0; k < v.size(); ++k) v[k] -= fixed_step * g[k];
            energy = chain_energy(v, pot, delta);
            if (!std::isfinite(energy)) throw NumericError("minimize_energy: energy not finite");
        } else {
            step *= 2.0;
            for (;;) {
                for (std::size_t k = 0; k < v.size(); ++k) trial[k] = v[k] - step * g[k];
                const double et = chain_energy(trial, pot, delta);
                if (!std::isfinite(et)) throw NumericError("minimize_energy: energy not finite");
                if (et <= energy - 1e-4 * step * g2) {
                    v.swap(trial);
                    energy = et;
                    break;
                }
                step *= 0.5;
                if (step < 1e-18) { // line search exhausted below representable progress
                    out.energy = energy;
                    return out;
                }
            }
        }
        out.energy = energy;
        if (cfg.record_trace) out.trace.emplace_back(energy, gn);
    }
    chain_gradient(v, pot, delta, g);
    double gn = 0.0;
    for (const double gi : g) gn = std::max(gn, std::abs(gi));
    out.grad_norm = gn;
    out.iterations = cfg.max_iters;
    out.converged = gn <= cfg.grad_tol;
    out.energy = energy;
    return out;
}

MinimizeResult run(const WeakPotential& pot, const BoundaryData& boundary,
                   const UniformPartition& window, const MinimizeConfig& cfg, double energy_delta,
                   double wall_width) {
    std::vector<double> v = build_init(boundary, window, cfg, wall_width);
    LoopStats st = descend(v, pot, energy_delta, cfg);
    ChainState state(window.spacing, window.i_min, std::move(v));
    const int walls = wall_count(state);
    return MinimizeResult{std::move(state), st.energy,     st.iterations, st.converged,
                          st.grad_norm,     walls,         std::move(st.trace)};
}

} // namespace

MinimizeResult minimize_energy(const WeakPotential& pot, const MesoscaleParams& mp,
                               const BoundaryData& boundary, const UniformPartition& window,
                               const MinimizeConfig& cfg) {
    check_window_spacing(window.spacing, mp.delta);
    return run(pot, boundary, window, cfg, mp.delta, 0.0);
}

MinimizeResult minimize_energy(const WeakPotential& pot, const TwoScaleParams& tp,
                               const BoundaryData& boundary, const UniformPartition& window,
                               const MinimizeConfig& cfg) {
    check_window_spacing(window.spacing, tp.epsilon * tp.delta);
    return run(pot, boundary, window, cfg, tp.delta, tp.epsilon);
}

int wall_count(const ChainState& c) {
    long long total = 0;
    for (std::size_t k = 0; k + 1 < c.values.size(); ++k) {
        const double lo = std::min(c.values[k], c.values[k + 1]);
        const double hi = std::max(c.values[k], c.values[k + 1]);
        // number of half-integer levels in [lo, hi)
        total += std::llround(std::ceil(hi - 0.5) - std::ceil(lo - 0.5));
    }
    return static_cast<int>(total);
}

nlohmann::json diagnostics_json(const MinimizeResult& r, const std::string& kind,
                                const nlohmann::json& params) {
    return nlohmann::json{{"kind", kind},
                          {"params", params},
                          {"iterations", r.iterations},
                          {"converged", r.converged},
                          {"energy", r.energy},
                          {"wall_count", r.wall_count},
                          {"grad_norm", r.grad_norm}};
}

void write_trace_csv(const MinimizeResult& r, std::ostream& os) {
    os << "iter,energy,grad_norm\n";
    char buf[96];
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g\n", i, r.trace[i].first,
                      r.trace[i].second);
        os << buf;
    }
}

namespace {

struct Interval {
    double a, b;
};

// Maximal intervals where lo < g < hi, with +-1e300 standing in for the
// unbounded tails.
std::vector<Interval> band_intervals(const PiecewiseAffine& g, double lo, double hi) {
    const double inf = 1e300;
    const UniformPartition& part = g.partition();
    const std::vector<double>& v = g.node_values();
    std::vector<Interval> out;
    const auto push = [&out](double a, double b) {
        if (!(b > a)) return;
        if (!out.empty() && a <= out.back().b) {
            out.back().b = std::max(out.back().b, b);
            return;
        }
        out.push_back(Interval{a, b});
    };
    if (v.front() > lo && v.front() < hi) push(-inf, part.x_min());
    for (int i = part.i_min; i < part.i_max; ++i) {
        const double x0 = part.node(i);
        const double h = part.spacing;
        const double v0 = v[static_cast<std::size_t>(i - part.i_min)];
        const double v1 = v[static_cast<std::size_t>(i - part.i_min + 1)];
        if (v0 == v1) {
            if (v0 > lo && v0 < hi) push(x0, x0 + h);
            continue;
        }
        const double tin = ((v1 > v0 ? lo : hi) - v0) / (v1 - v0);
        const double tout = ((v1 > v0 ? hi : lo) - v0) / (v1 - v0);
        const double ta = std::clamp(tin, 0.0, 1.0);
        const double tb = std::clamp(tout, 0.0, 1.0);
        if (tb > ta) push(x0 + ta * h, x0 + tb * h);
    }
    if (v.back() > lo && v.back() < hi) push(part.x_max(), inf);
    return out;
}

} // namespace

NormalizeResult translation_normalize(const PiecewiseAffine& g, const ReferenceProfile& vbar,
                                      const NormalizationConfig& ncfg, double delta) {
    if (!(ncfg.alpha > 0.0 && ncfg.alpha < 0.5))
        throw std::invalid_argument("translation_normalize: alpha must lie in (0, 1/2)");
    if (vbar.boundary().m_left != 0 || vbar.boundary().m_right != 1)
        throw std::invalid_argument(
            "translation_normalize: reference profile must run from 0 to 1");
    if (g.left_tail() != 0.0 || g.right_tail() != 1.0)
        throw std::domain_error("translation_normalize: function tails must be exactly (0, 1)");
    const UniformPartition& part = g.partition();
    if (std::abs(part.spacing - delta) > 1e-12 * std::max(delta, 1.0))
        throw std::invalid_argument("translation_normalize: delta does not match grid spacing");

    const double alpha = ncfg.alpha;
    const double x1 = std::atanh(1.0 - 2.0 * alpha); // reference crosses 1-alpha at x1

    const std::vector<Interval> low_band = band_intervals(g, -alpha, alpha);
    const std::vector<Interval> high_band = band_intervals(g, 1.0 - alpha, 1.0 + alpha);

    const auto measure_of = [&](double a) {
        const double c0 = x1 + a;  // V0 lives on (c0, +inf)
        const double c1 = -x1 + a; // V1 lives on (-inf, c1)
        double msr = 0.0;
        for (const Interval& iv : low_band) msr += std::max(0.0, iv.b - std::max(iv.a, c0));
        for (const Interval& iv : high_band) msr += std::max(0.0, std::min(iv.b, c1) - iv.a);
        return msr;
    };

    std::vector<double> measures(static_cast<std::size_t>(part.n_nodes()));
    double best = std::numeric_limits<double>::infinity();
    for (int k = part.i_min; k <= part.i_max; ++k) {
        const double msr = measure_of(static_cast<double>(k) * delta);
        measures[static_cast<std::size_t>(k - part.i_min)] = msr;
        best = std::min(best, msr);
    }
    std::vector<int> argmin;
    for (int k = part.i_min; k <= part.i_max; ++k)
        if (measures[static_cast<std::size_t>(k - part.i_min)] == best) argmin.push_back(k);

    int pick;
    const std::size_t sz = argmin.size();
    if (sz % 2 == 1) {
        pick = argmin[sz / 2];
    } else {
        const int k1 = argmin[sz / 2 - 1], k2 = argmin[sz / 2];
        pick = std::abs(k1) <= std::abs(k2) ? k1 : k2;
    }

    std::vector<double> shifted(g.node_values().size());
    const std::vector<double>& v = g.node_values();
    for (int i = part.i_min; i <= part.i_max; ++i) {
        const int j = i + pick;
        double val;
        if (j < part.i_min)
            val = v.front();
        else if (j > part.i_max)
            val = v.back();
        else
            val = v[static_cast<std::size_t>(j - part.i_min)];
        shifted[static_cast<std::size_t>(i - part.i_min)] = val;
    }
    PiecewiseAffine normalized(part, std::move(shifted));
    return NormalizeResult{static_cast<double>(pick) * delta, std::move(normalized), best};
}

double i_alpha(const WeakPotential& pot, double alpha) {
    if (!(alpha > 0.0 && alpha < 0.5))
        throw std::invalid_argument("i_alpha: alpha must lie in (0, 1/2)");
    return transition_cost(1.0 - alpha, pot) - transition_cost(alpha, pot);
}

} // namespace fkup
