#include "fkup/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fkup/quadrature.hpp"

namespace fkup {

namespace {

// V(sqrt(q)) and q-derivatives, with q = r^2. Writing the 12-6 well in terms
// of A = r_min^2/q avoids square roots in the lattice-sum hot loop.
inline double lj_of_q(double q, double rm2, double depth) {
    const double a = rm2 / q;
    const double a3 = a * a * a;
    return depth * (a3 * a3 - 2.0 * a3);
}

inline double lj_of_q_d1(double q, double rm2, double depth) {
    const double a = rm2 / q;
    const double a3 = a * a * a;
    return -(6.0 * depth / q) * (a3 * a3 - a3);
}

inline double lj_of_q_d2(double q, double rm2, double depth) {
    const double a = rm2 / q;
    const double a3 = a * a * a;
    return (6.0 * depth / (q * q)) * (7.0 * a3 * a3 - 4.0 * a3);
}

} // namespace

nlohmann::json to_json(const PairPotentialSpec& spec) {
    return {{"well_depth", spec.well_depth}, {"r_min", spec.r_min},
            {"standoff", spec.standoff},     {"sigma", spec.sigma},
            {"truncation_radius", spec.truncation_radius},
            {"quadrature_tol", spec.quadrature_tol}};
}

PairPotentialSpec potential_spec_from_json(const nlohmann::json& j) {
    static const char* keys[] = {"well_depth", "r_min",             "standoff",
                                 "sigma",      "truncation_radius", "quadrature_tol"};
    if (!j.is_object())
        throw std::invalid_argument("potential spec: expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find_if(std::begin(keys), std::end(keys),
                         [&](const char* k) { return it.key() == k; }) == std::end(keys))
            throw std::invalid_argument("potential spec: unknown key '" + it.key() + "'");
    }
    PairPotentialSpec spec;
    try {
        spec.well_depth = j.at("well_depth").get<double>();
        spec.r_min = j.at("r_min").get<double>();
        spec.standoff = j.at("standoff").get<double>();
        spec.sigma = j.at("sigma").get<double>();
        spec.truncation_radius = j.at("truncation_radius").get<int>();
        spec.quadrature_tol = j.at("quadrature_tol").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("potential spec: ") + e.what());
    }
    return spec;
}

double eval_pair_potential(double r, const PairPotentialSpec& spec) {
    if (!(r > 0.0))
        throw std::domain_error("eval_pair_potential: r must be positive");
    return lj_of_q(r * r, spec.r_min * spec.r_min, spec.well_depth);
}

double eval_h(double d, const PairPotentialSpec& spec) {
    const double q = d * d + spec.standoff * spec.standoff;
    return lj_of_q(q, spec.r_min * spec.r_min, spec.well_depth);
}

WeakPotential::WeakPotential(const PairPotentialSpec& spec) : spec_(spec) {
    if (!(spec.well_depth > 0.0) || !(spec.r_min > 0.0) || !(spec.standoff > 0.0) ||
        !(spec.sigma > 0.0) || !(spec.quadrature_tol > 0.0))
        throw std::invalid_argument("WeakPotential: all scalar parameters must be positive");
    if (spec.truncation_radius < 8)
        throw std::invalid_argument("WeakPotential: truncation_radius must be >= 8");
    const int J = spec.truncation_radius;
    if (std::abs(eval_h((J + 0.5) / spec.sigma, spec)) >= spec.quadrature_tol)
        throw std::invalid_argument(
            "WeakPotential: first omitted lattice term exceeds quadrature_tol; "
            "increase truncation_radius");

    inv_sigma_ = 1.0 / spec.sigma;
    sb2_ = spec.standoff * spec.standoff;
    rm2_ = spec.r_min * spec.r_min;
    base_.reserve(2 * J + 1);
    for (int j = -J; j <= J; ++j) base_.push_back((j + 0.5) * inv_sigma_);
    for (double b : base_) ref_sum_ += lj_of_q(b * b + sb2_, rm2_, spec.well_depth);

    curvature_ = w2(0.0);
    p_bar_ = transition_cost(1.0, *this);
}

double WeakPotential::w(double xi) const {
    const double off = xi * inv_sigma_;
    double acc = 0.0;
    for (double b : base_) {
        const double d = b + off;
        acc += lj_of_q(d * d + sb2_, rm2_, spec_.well_depth);
    }
    return acc - ref_sum_;
}

double WeakPotential::w1(double xi) const {
    const double off = xi * inv_sigma_;
    double acc = 0.0;
    for (double b : base_) {
        const double d = b + off;
        acc += 2.0 * d * lj_of_q_d1(d * d + sb2_, rm2_, spec_.well_depth);
    }
    return acc * inv_sigma_;
}

double WeakPotential::w2(double xi) const {
    const double off = xi * inv_sigma_;
    double acc = 0.0;
    for (double b : base_) {
        const double d = b + off;
        const double q = d * d + sb2_;
        acc += 2.0 * lj_of_q_d1(q, rm2_, spec_.well_depth) +
               4.0 * d * d * lj_of_q_d2(q, rm2_, spec_.well_depth);
    }
    return acc * inv_sigma_ * inv_sigma_;
}

double eval_w(double xi, int order, const WeakPotential& pot) {
    switch (order) {
        case 0: return pot.w(xi);
        case 1: return pot.w1(xi);
        case 2: return pot.w2(xi);
        default: throw std::invalid_argument("eval_w: order must be 0, 1 or 2");
    }
}

double transition_cost(double z, const WeakPotential& pot) {
    if (z == 0.0) return 0.0;
    if (z < 0.0) return -transition_cost(-z, pot);  // w is even, p is odd
    auto f = [&pot](double t) { return 2.0 * std::sqrt(std::max(pot.w(t), 0.0)); };
    return adaptive_simpson(f, 0.0, z, pot.spec().quadrature_tol);
}

nlohmann::json to_json(const ValidationReport& report) {
    return {{"passed", report.passed},
            {"integer_defect", report.integer_defect},
            {"min_w_off_wells", report.min_w_off_wells},
            {"curvature", report.curvature},
            {"periodicity_defect", report.periodicity_defect},
            {"symmetry_defect", report.symmetry_defect},
            {"diagnostics", report.diagnostics}};
}

ValidationReport validate_potential(const WeakPotential& pot) {
    ValidationReport rep;
    const double tol = 10.0 * pot.spec().quadrature_tol;

    for (int m = -1; m <= 2; ++m)
        rep.integer_defect = std::max(rep.integer_defect, std::abs(pot.w(m)));

    const int n = 10000;
    double min_w = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= n; ++k) {
        const double x = -0.5 + 2.0 * k / n;
        if (std::abs(x - std::round(x)) >= 1e-3)
            min_w = std::min(min_w, pot.w(x));
    }
    rep.min_w_off_wells = min_w;

    rep.curvature = pot.curvature_at_well();

    for (int k = 0; k <= 1000; ++k) {
        const double x = -0.5 + k / 1000.0;
        rep.periodicity_defect = std::max(rep.periodicity_defect,
                                          std::abs(pot.w(x + 1.0) - pot.w(x)));
        const double t = k / 1000.0;
        rep.symmetry_defect = std::max(rep.symmetry_defect,
                                       std::abs(pot.w(0.5 + t) - pot.w(0.5 - t)));
    }

    if (rep.integer_defect > tol)
        rep.diagnostics.push_back("wells off the integers: |w(m)| exceeds 10x quadrature_tol");
    if (!(rep.min_w_off_wells > tol))
        rep.diagnostics.push_back(
            "degenerate well: w is not positive above the truncation noise floor "
            "away from the integers");
    if (!(rep.curvature > 0.0))
        rep.diagnostics.push_back("degenerate well: nonpositive curvature at the wells");
    if (rep.periodicity_defect > tol)
        rep.diagnostics.push_back("periodicity defect exceeds 10x quadrature_tol");
    if (rep.symmetry_defect > tol)
        rep.diagnostics.push_back("half-integer symmetry defect exceeds 10x quadrature_tol");

    rep.passed = rep.diagnostics.empty();
    return rep;
}

} // namespace fkup
