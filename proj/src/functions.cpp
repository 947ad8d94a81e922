#include "fkup/functions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "fkup/quadrature.hpp"

namespace fkup {

UniformPartition::UniformPartition(double spacing_, int i_min_, int i_max_)
    : spacing(spacing_), i_min(i_min_), i_max(i_max_) {
    if (!(spacing > 0.0))
        throw std::invalid_argument("UniformPartition: spacing must be positive");
    if (!(i_min < 0 && 0 < i_max))
        throw std::invalid_argument("UniformPartition: window must straddle the origin");
}

bool operator==(const UniformPartition& a, const UniformPartition& b) {
    return a.spacing == b.spacing && a.i_min == b.i_min && a.i_max == b.i_max;
}

PiecewiseAffine::PiecewiseAffine(UniformPartition partition, std::vector<double> node_values)
    : part_(partition), values_(std::move(node_values)) {
    if (values_.size() != static_cast<size_t>(part_.n_nodes()))
        throw std::invalid_argument("PiecewiseAffine: node_values size does not match partition");
}

double PiecewiseAffine::operator()(double x) const {
    const double t = x / part_.spacing;
    if (t <= part_.i_min) return values_.front();
    if (t >= part_.i_max) return values_.back();
    const double fi = std::floor(t);
    int i = static_cast<int>(fi);
    if (i >= part_.i_max) i = part_.i_max - 1;
    const size_t k = static_cast<size_t>(i - part_.i_min);
    return values_[k] + (t - i) * (values_[k + 1] - values_[k]);
}

nlohmann::json to_json(const PiecewiseAffine& g) {
    return {{"partition",
             {{"spacing", g.partition().spacing},
              {"i_min", g.partition().i_min},
              {"i_max", g.partition().i_max}}},
            {"node_values", g.node_values()},
            {"left_tail", g.left_tail()},
            {"right_tail", g.right_tail()}};
}

PiecewiseAffine piecewise_affine_from_json(const nlohmann::json& j) {
    try {
        const auto& p = j.at("partition");
        UniformPartition part(p.at("spacing").get<double>(), p.at("i_min").get<int>(),
                              p.at("i_max").get<int>());
        PiecewiseAffine g(part, j.at("node_values").get<std::vector<double>>());
        if (g.left_tail() != j.at("left_tail").get<double>() ||
            g.right_tail() != j.at("right_tail").get<double>())
            throw std::invalid_argument(
                "piecewise affine: declared tails disagree with edge node values");
        return g;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("piecewise affine: ") + e.what());
    }
}

PiecewiseAffine interpolate(const std::function<double(double)>& f, const UniformPartition& p,
                            double left_tail, double right_tail) {
    std::vector<double> values(p.n_nodes());
    for (int i = p.i_min; i <= p.i_max; ++i)
        values[static_cast<size_t>(i - p.i_min)] = f(p.node(i));
    if (std::abs(values.front() - left_tail) > 1e-8 ||
        std::abs(values.back() - right_tail) > 1e-8)
        throw std::invalid_argument(
            "interpolate: declared tails do not match f at the window edges");
    values.front() = left_tail;
    values.back() = right_tail;
    return PiecewiseAffine(p, std::move(values));
}

double eval_pa(const PiecewiseAffine& g, double x) { return g(x); }

double dirichlet_energy(const PiecewiseAffine& g) {
    const auto& v = g.node_values();
    double acc = 0.0;
    for (size_t k = 0; k + 1 < v.size(); ++k) {
        const double d = v[k + 1] - v[k];
        acc += d * d;
    }
    return acc / g.partition().spacing;
}

namespace {

// Node positions of both windows, sorted and deduplicated.
std::vector<double> merged_nodes(const PiecewiseAffine& g1, const PiecewiseAffine& g2) {
    std::vector<double> xs;
    xs.reserve(static_cast<size_t>(g1.partition().n_nodes() + g2.partition().n_nodes()));
    for (int i = g1.partition().i_min; i <= g1.partition().i_max; ++i)
        xs.push_back(g1.partition().node(i));
    for (int i = g2.partition().i_min; i <= g2.partition().i_max; ++i)
        xs.push_back(g2.partition().node(i));
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

// Integral of |d0 + t*(d1-d0)| for t in [0,1], times len.
double abs_affine_integral(double d0, double d1, double len) {
    if (d0 * d1 >= 0.0)
        return 0.5 * len * (std::abs(d0) + std::abs(d1));
    return 0.5 * len * (d0 * d0 + d1 * d1) / std::abs(d1 - d0);
}

} // namespace

double l2_distance(const PiecewiseAffine& g1, const PiecewiseAffine& g2) {
    if (g1.left_tail() != g2.left_tail() || g1.right_tail() != g2.right_tail())
        throw std::invalid_argument("l2_distance: tails differ, distance is infinite");
    const auto xs = merged_nodes(g1, g2);
    double acc = 0.0;
    double d0 = g1(xs.front()) - g2(xs.front());
    for (size_t k = 0; k + 1 < xs.size(); ++k) {
        const double d1 = g1(xs[k + 1]) - g2(xs[k + 1]);
        acc += (xs[k + 1] - xs[k]) * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
        d0 = d1;
    }
    return std::sqrt(acc);
}

double l1_distance_window(const PiecewiseAffine& g1, const PiecewiseAffine& g2,
                          double a, double b) {
    if (!(a < b))
        throw std::invalid_argument("l1_distance_window: need a < b");
    auto xs = merged_nodes(g1, g2);
    xs.erase(std::remove_if(xs.begin(), xs.end(), [&](double x) { return x <= a || x >= b; }),
             xs.end());
    xs.insert(xs.begin(), a);
    xs.push_back(b);
    double acc = 0.0;
    double d0 = g1(a) - g2(a);
    for (size_t k = 0; k + 1 < xs.size(); ++k) {
        const double d1 = g1(xs[k + 1]) - g2(xs[k + 1]);
        acc += abs_affine_integral(d0, d1, xs[k + 1] - xs[k]);
        d0 = d1;
    }
    return acc;
}

StepFunction::StepFunction(std::vector<double> breakpoints_, std::vector<int> levels_)
    : breakpoints(std::move(breakpoints_)), levels(std::move(levels_)) {
    if (breakpoints.empty())
        throw std::invalid_argument("StepFunction: need at least one breakpoint");
    if (levels.size() != breakpoints.size() + 1)
        throw std::invalid_argument("StepFunction: levels size must be breakpoints size + 1");
    for (size_t k = 0; k + 1 < breakpoints.size(); ++k)
        if (!(breakpoints[k] < breakpoints[k + 1]))
            throw std::invalid_argument("StepFunction: breakpoints must strictly increase");
    for (size_t k = 0; k + 1 < levels.size(); ++k)
        if (levels[k] == levels[k + 1])
            throw std::invalid_argument("StepFunction: consecutive levels must differ");
}

int StepFunction::value_at(double x) const {
    const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
    return levels[static_cast<size_t>(it - breakpoints.begin())];
}

nlohmann::json to_json(const StepFunction& s) {
    return {{"breakpoints", s.breakpoints}, {"levels", s.levels}};
}

StepFunction step_function_from_json(const nlohmann::json& j) {
    try {
        return StepFunction(j.at("breakpoints").get<std::vector<double>>(),
                            j.at("levels").get<std::vector<int>>());
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("step function: ") + e.what());
    }
}

double l1_distance_step_window(const PiecewiseAffine& g, const StepFunction& s,
                               double a, double b) {
    if (!(a < b))
        throw std::invalid_argument("l1_distance_step_window: need a < b");
    std::vector<double> xs;
    for (int i = g.partition().i_min; i <= g.partition().i_max; ++i)
        xs.push_back(g.partition().node(i));
    xs.insert(xs.end(), s.breakpoints.begin(), s.breakpoints.end());
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    xs.erase(std::remove_if(xs.begin(), xs.end(), [&](double x) { return x <= a || x >= b; }),
             xs.end());
    xs.insert(xs.begin(), a);
    xs.push_back(b);
    double acc = 0.0;
    for (size_t k = 0; k + 1 < xs.size(); ++k) {
        const double mid = 0.5 * (xs[k] + xs[k + 1]);
        const double lvl = s.value_at(mid);
        acc += abs_affine_integral(g(xs[k]) - lvl, g(xs[k + 1]) - lvl, xs[k + 1] - xs[k]);
    }
    return acc;
}

double var_of_p_composed(const PiecewiseAffine& g, const WeakPotential& pot) {
    const auto& v = g.node_values();
    auto f = [&pot](double t) { return 2.0 * std::sqrt(std::max(pot.w(t), 0.0)); };
    double acc = 0.0;
    for (size_t k = 0; k + 1 < v.size(); ++k) {
        if (v[k] == v[k + 1]) continue;
        const double lo = std::min(v[k], v[k + 1]);
        const double hi = std::max(v[k], v[k + 1]);
        acc += adaptive_simpson(f, lo, hi, pot.spec().quadrature_tol);
    }
    return acc;
}

double step_variation(const StepFunction& s) {
    double acc = 0.0;
    for (size_t k = 0; k + 1 < s.levels.size(); ++k)
        acc += std::abs(s.levels[k + 1] - s.levels[k]);
    return acc;
}

ChainState::ChainState(double delta_eff_, int i_min_, std::vector<double> values_)
    : delta_eff(delta_eff_), i_min(i_min_), values(std::move(values_)) {
    if (!(delta_eff > 0.0))
        throw std::invalid_argument("ChainState: delta_eff must be positive");
    if (values.size() < 3)
        throw std::invalid_argument("ChainState: need at least three nodes");
    if (!(i_min < 0 && 0 < i_max()))
        throw std::invalid_argument("ChainState: window must straddle the origin");
}

PiecewiseAffine lift(const ChainState& c) {
    return PiecewiseAffine(UniformPartition(c.delta_eff, c.i_min, c.i_max()), c.values);
}

ChainState sample_chain(const PiecewiseAffine& g) {
    return ChainState(g.partition().spacing, g.partition().i_min, g.node_values());
}

void write_csv(const PiecewiseAffine& g, std::ostream& os, int stride) {
    if (stride < 1) stride = 1;
    os << "x,value\n";
    char buf[64];
    const auto& v = g.node_values();
    const int n = g.partition().n_nodes();
    for (int k = 0; k < n; k += stride) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g\n",
                      g.partition().node(g.partition().i_min + k), v[static_cast<size_t>(k)]);
        os << buf;
    }
    if ((n - 1) % stride != 0) {  // keep the right window edge
        std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", g.partition().x_max(), v.back());
        os << buf;
    }
}

} // namespace fkup
