#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "fkup/potential.hpp"

namespace fkup {

// Nodes i*spacing for i in [i_min, i_max]. The window always straddles the
// origin and spans at least two cells.
struct UniformPartition {
    double spacing;
    int i_min;
    int i_max;

    UniformPartition(double spacing, int i_min, int i_max);

    double node(int i) const { return i * spacing; }
    int n_nodes() const { return i_max - i_min + 1; }
    double x_min() const { return node(i_min); }
    double x_max() const { return node(i_max); }
};

bool operator==(const UniformPartition& a, const UniformPartition& b);

// Continuous piecewise-affine function: affine on each cell of the partition,
// constant outside the window. The tails are the first and last node values.
class PiecewiseAffine {
public:
    PiecewiseAffine(UniformPartition partition, std::vector<double> node_values);

    const UniformPartition& partition() const { return part_; }
    const std::vector<double>& node_values() const { return values_; }
    double left_tail() const { return values_.front(); }
    double right_tail() const { return values_.back(); }

    double operator()(double x) const;

private:
    UniformPartition part_;
    std::vector<double> values_;
};

nlohmann::json to_json(const PiecewiseAffine& g);
PiecewiseAffine piecewise_affine_from_json(const nlohmann::json& j);

// Samples f at the nodes. The declared tails must agree with f at the window
// edges within 1e-8; the edge nodes take the declared tail values, interior
// nodes match f exactly.
PiecewiseAffine interpolate(const std::function<double(double)>& f, const UniformPartition& p,
                            double left_tail, double right_tail);

double eval_pa(const PiecewiseAffine& g, double x);

// Integral of g'^2 over the window (exact: slopes are constant per cell).
double dirichlet_energy(const PiecewiseAffine& g);

// Exact L^2(R) distance. Finite only when the tails agree on each side;
// otherwise throws std::invalid_argument.
double l2_distance(const PiecewiseAffine& g1, const PiecewiseAffine& g2);

// Exact integral of |g1 - g2| over [a, b].
double l1_distance_window(const PiecewiseAffine& g1, const PiecewiseAffine& g2,
                          double a, double b);

// Right-continuous integer step function with strictly increasing breakpoints;
// consecutive levels differ.
struct StepFunction {
    std::vector<double> breakpoints;
    std::vector<int> levels;  // size breakpoints.size() + 1

    StepFunction(std::vector<double> breakpoints, std::vector<int> levels);

    int value_at(double x) const;
};

nlohmann::json to_json(const StepFunction& s);
StepFunction step_function_from_json(const nlohmann::json& j);

// Exact integral of |g - s| over [a, b].
double l1_distance_step_window(const PiecewiseAffine& g, const StepFunction& s,
                               double a, double b);

// Total variation of p composed with g: sum over cells of 2*int sqrt(max(w,0))
// across the traversed value range. Constant tails contribute nothing.
double var_of_p_composed(const PiecewiseAffine& g, const WeakPotential& pot);

double step_variation(const StepFunction& s);

// Discrete chain over the index window [i_min, i_min + values.size() - 1]
// with lattice spacing delta_eff. The end values act as clamps.
struct ChainState {
    double delta_eff;
    int i_min;
    std::vector<double> values;

    ChainState(double delta_eff, int i_min, std::vector<double> values);

    int i_max() const { return i_min + static_cast<int>(values.size()) - 1; }
    double left_clamp() const { return values.front(); }
    double right_clamp() const { return values.back(); }
};

// Piecewise-affine lift sharing the chain's nodes, and its inverse.
PiecewiseAffine lift(const ChainState& c);
ChainState sample_chain(const PiecewiseAffine& g);

// CSV export "x,value" rows. stride > 1 thins the output.
void write_csv(const PiecewiseAffine& g, std::ostream& os, int stride = 1);

} // namespace fkup
