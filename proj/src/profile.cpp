#include "fkup/profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "fkup/quadrature.hpp"

namespace fkup {

namespace {

// Evaluation against the increasing table, exponential tails outside it.
double table_value(const HeteroclinicProfile& p, double pos) {
    if (pos <= p.x.front()) return p.eta * std::exp(p.kappa * (pos - p.x.front()));
    if (pos >= p.x.back()) return 1.0 - p.eta * std::exp(-p.kappa * (pos - p.x.back()));
    const auto it = std::upper_bound(p.x.begin(), p.x.end(), pos);
    const std::size_t hi = static_cast<std::size_t>(it - p.x.begin());
    const double t = (pos - p.x[hi - 1]) / (p.x[hi] - p.x[hi - 1]);
    return p.xi[hi - 1] + t * (p.xi[hi] - p.xi[hi - 1]);
}

double table_slope(const HeteroclinicProfile& p, double pos) {
    if (pos <= p.x.front()) return p.kappa * p.eta * std::exp(p.kappa * (pos - p.x.front()));
    if (pos >= p.x.back()) return p.kappa * p.eta * std::exp(-p.kappa * (pos - p.x.back()));
    const auto it = std::upper_bound(p.x.begin(), p.x.end(), pos);
    const std::size_t hi = static_cast<std::size_t>(it - p.x.begin());
    const double t = (pos - p.x[hi - 1]) / (p.x[hi] - p.x[hi - 1]);
    return p.slopes[hi - 1] + t * (p.slopes[hi] - p.slopes[hi - 1]);
}

} // namespace

double HeteroclinicProfile::value(double pos) const {
    return increasing ? table_value(*this, pos) : table_value(*this, -pos);
}

double HeteroclinicProfile::slope(double pos) const {
    return increasing ? table_slope(*this, pos) : -table_slope(*this, -pos);
}

double HeteroclinicProfile::dirichlet_integral() const {
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        const double dx = x[k + 1] - x[k];
        const double dv = xi[k + 1] - xi[k];
        acc += dv * dv / dx;
    }
    return acc;
}

double HeteroclinicProfile::weak_integral(const WeakPotential& pot) const {
    const auto w = [&pot](double v) { return pot.w(v); };
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < x.size(); ++k)
        acc += chord_integral(w, xi[k], xi[k + 1], x[k + 1] - x[k]);
    return acc;
}

HeteroclinicProfile heteroclinic_profile(const WeakPotential& pot, double eta, bool increasing,
                                         int n_samples) {
    if (!(eta > 0.0) || !(eta < 0.4))
        throw std::invalid_argument("profile eta must lie in (0, 0.4)");
    if (n_samples < 200)
        throw std::invalid_argument("profile n_samples must be at least 200");
    {
        const ValidationReport rep = validate_potential(pot);
        if (!rep.passed)
            throw std::invalid_argument("potential failed validation; wall profile undefined: " +
                                        (rep.diagnostics.empty() ? std::string("unknown defect")
                                                                 : rep.diagnostics.front()));
    }

    const double kappa = std::sqrt(pot.curvature_at_well() / 2.0);
    // Target step in x: uniform spacing keeps centered-difference slopes on the
    // table accurate everywhere, including the logarithmic approach to the
    // wells. The range estimate pads the linearized tail extent.
    const double range_est = 2.0 * (std::log(0.5 / eta) / kappa + 1.0);
    const double dx_target = range_est / static_cast<double>(n_samples);

    const auto inv_speed = [&pot](double v) {
        return 1.0 / std::sqrt(std::max(pot.w(v), 1e-300));
    };
    const double seg_tol = 1e-12;

    // Right half: march xi from 1/2 toward 1 - eta with dxi ~ sqrt(w)*dx, so
    // consecutive x-values advance by ~dx_target; x itself comes from the
    // quadrature inversion over each segment. The left half is the exact
    // mirror (w is symmetric about 1/2), which anchors xi(0) = 1/2.
    std::vector<double> xr, vr;
    xr.reserve(static_cast<std::size_t>(n_samples));
    vr.reserve(static_cast<std::size_t>(n_samples));
    double cur_xi = 0.5;
    double cur_x = 0.0;
    const long long step_cap = 50LL * n_samples;
    long long steps = 0;
    while (true) {
        const double wv = pot.w(cur_xi);
        if (!(wv > 0.0))
            throw std::invalid_argument(
                "potential is not positive between its wells; wall profile undefined");
        const double dxi = std::sqrt(wv) * dx_target;
        double next = cur_xi + dxi;
        bool last = false;
        if ((1.0 - eta) - next < 0.5 * dxi) {
            next = 1.0 - eta;
            last = true;
        }
        cur_x += adaptive_simpson(inv_speed, cur_xi, next, seg_tol);
        cur_xi = next;
        xr.push_back(cur_x);
        vr.push_back(cur_xi);
        if (last) break;
        if (++steps > step_cap)
            throw NumericError(
                "profile tabulation stalled before reaching 1 - eta (degenerate potential)");
    }

    HeteroclinicProfile p;
    p.eta = eta;
    p.increasing = increasing;
    p.kappa = kappa;
    const std::size_t nr = xr.size();
    const std::size_t n = 2 * nr + 1;
    p.x.resize(n);
    p.xi.resize(n);
    p.x[nr] = 0.0;
    p.xi[nr] = 0.5;
    for (std::size_t k = 0; k < nr; ++k) {
        p.x[nr + 1 + k] = xr[k];
        p.xi[nr + 1 + k] = vr[k];
        p.x[nr - 1 - k] = -xr[k];
        p.xi[nr - 1 - k] = 1.0 - vr[k];
    }
    p.slopes.resize(n);
    for (std::size_t k = 0; k < n; ++k)
        p.slopes[k] = std::sqrt(std::max(pot.w(p.xi[k]), 0.0));
    return p;
}

namespace {

// Unit increasing step 0 -> 1: profile dilated to width eps on |x| <= sqrt(eps),
// tangent lines out to +-beta, constant beyond. Odd-symmetric about (0, 1/2)
// by construction.
struct UnitShape {
    const HeteroclinicProfile* prof;
    double eps;
    double root_eps;  // tangent point
    double amp;       // 1 - xi(1/sqrt(eps)): height still missing at the tangent point
    double slope_tan; // profile slope at the tangent point (outer variable)
    double ratio;     // amp / slope_tan, the tangent run to reach the level
    double beta;      // sqrt(eps) + eps*ratio

    double pos_branch(double rel) const { // rel >= 0
        if (rel >= beta) return 1.0;
        if (rel <= root_eps) return prof->value(rel / eps);
        const double v = (1.0 - amp) + (slope_tan / eps) * (rel - root_eps);
        return v > 1.0 ? 1.0 : v;
    }
    double operator()(double rel) const {
        return rel < 0.0 ? 1.0 - pos_branch(-rel) : pos_branch(rel);
    }
};

UnitShape make_unit_shape(const HeteroclinicProfile& prof, double eps) {
    if (!prof.increasing)
        throw std::invalid_argument(
            "recovery constructions require an increasing profile (down jumps are mirrored "
            "internally)");
    if (!(eps > 0.0)) throw std::invalid_argument("epsilon must be positive");
    UnitShape s;
    s.prof = &prof;
    s.eps = eps;
    s.root_eps = std::sqrt(eps);
    const double arg = 1.0 / s.root_eps;
    if (arg > prof.x_back() && prof.eta > 0.01)
        throw std::invalid_argument(
            "profile tail weight eta too large to place the tangent point at 1/sqrt(eps); "
            "rebuild the profile with eta <= 0.01");
    s.amp = 1.0 - prof.value(arg);
    s.slope_tan = prof.slope(arg);
    s.ratio = (s.amp > 0.0 && s.slope_tan > 0.0) ? s.amp / s.slope_tan : 1.0 / prof.kappa;
    s.beta = s.root_eps + eps * s.ratio;
    return s;
}

// Smallest T with T*rho strictly greater than 2*beta + rho.
long long min_copy_stride(double beta, double rho) {
    long long T = static_cast<long long>(std::floor((2.0 * beta + rho) / rho)) + 1;
    while (T > 1 && (static_cast<double>(T) - 1.0) * rho > 2.0 * beta + rho) --T;
    while (static_cast<double>(T) * rho <= 2.0 * beta + rho) ++T;
    return T;
}

void check_cell_resolution(double beta, double rho) {
    if (2.0 * beta / rho < 8.0)
        throw std::invalid_argument(
            "recovery grid too coarse: fewer than 8 cells across one wall (shrink delta or "
            "grow epsilon)");
}

int narrow_index(long long i) {
    if (i < std::numeric_limits<int>::min() / 2 || i > std::numeric_limits<int>::max() / 2)
        throw std::invalid_argument("recovery window index out of range");
    return static_cast<int>(i);
}

} // namespace

nlohmann::json to_json(const RecoveryBuild& rb) {
    return nlohmann::json{{"epsilon", rb.epsilon},
                          {"delta", rb.delta},
                          {"beta", rb.beta},
                          {"tangent_point", rb.tangent_point},
                          {"result", to_json(rb.result)},
                          {"metadata", rb.metadata}};
}

RecoveryBuild recovery_multijump(const WeakPotential& /*pot*/, const HeteroclinicProfile& prof,
                                 double eps, double delta, double x0, int jump, int base_level) {
    if (jump == 0) throw std::invalid_argument("jump must be nonzero");
    const TwoScaleParams tp(eps, delta);
    (void)tp;
    const UnitShape sh = make_unit_shape(prof, eps);
    const double rho = eps * delta;
    check_cell_resolution(sh.beta, rho);

    const long long i0 = std::llround(x0 / rho);
    const long long stride = min_copy_stride(sh.beta, rho);
    const int copies = std::abs(jump);
    const long long padb = static_cast<long long>(std::ceil(sh.beta / rho)) + 2;

    long long lo = i0 - padb;
    long long hi = i0 + static_cast<long long>(copies - 1) * stride + padb;
    if (lo > -1) lo = -1;
    if (hi < 1) hi = 1;

    std::vector<double> vals(static_cast<std::size_t>(hi - lo + 1));
    for (long long i = lo; i <= hi; ++i) {
        double v = static_cast<double>(base_level);
        for (int k = 0; k < copies; ++k) {
            const double rel = static_cast<double>(i - i0 - k * stride) * rho;
            v += (jump > 0) ? sh(rel) : sh(-rel) - 1.0;
        }
        vals[static_cast<std::size_t>(i - lo)] = v;
    }

    UniformPartition part(rho, narrow_index(lo), narrow_index(hi));
    PiecewiseAffine pa(part, std::move(vals));

    nlohmann::json copy_pos = nlohmann::json::array();
    for (int k = 0; k < copies; ++k)
        copy_pos.push_back(static_cast<double>(i0 + k * stride) * rho);
    nlohmann::json md{{"kind", "multijump"},
                      {"x0_snapped", static_cast<double>(i0) * rho},
                      {"base_level", base_level},
                      {"jump", jump},
                      {"t_spacing", static_cast<double>(stride) * rho},
                      {"copy_positions", copy_pos},
                      {"tangent_ratio", sh.ratio},
                      {"cells_per_wall", 2.0 * sh.beta / rho},
                      {"window", {part.x_min(), part.x_max()}}};
    return RecoveryBuild{eps, delta, sh.beta, sh.root_eps, std::move(pa), std::move(md)};
}

RecoveryBuild recovery_step(const WeakPotential& pot, const HeteroclinicProfile& prof, double eps,
                            double delta, double x0, int level_from, int level_to) {
    if (std::abs(level_to - level_from) != 1)
        throw std::invalid_argument("step levels must be adjacent integers");
    RecoveryBuild rb =
        recovery_multijump(pot, prof, eps, delta, x0, level_to - level_from, level_from);
    rb.metadata["kind"] = "step";
    rb.metadata["level_from"] = level_from;
    rb.metadata["level_to"] = level_to;
    return rb;
}

RecoveryBuild recovery_bv(const WeakPotential& pot, const HeteroclinicProfile& prof, double eps,
                          double delta, const StepFunction& target) {
    const TwoScaleParams tp(eps, delta);
    (void)tp;
    const UnitShape sh = make_unit_shape(prof, eps);
    const double rho = eps * delta;
    check_cell_resolution(sh.beta, rho);

    const std::size_t m = target.breakpoints.size();
    const long long stride = min_copy_stride(sh.beta, rho);
    const double t_spacing = static_cast<double>(stride) * rho;
    const long long padb = static_cast<long long>(std::ceil(sh.beta / rho)) + 2;

    std::vector<long long> anchor(m), start(m), end(m);
    std::vector<int> dk(m);
    for (std::size_t j = 0; j < m; ++j) {
        anchor[j] = std::llround(target.breakpoints[j] / rho);
        dk[j] = target.levels[j + 1] - target.levels[j];
        start[j] = anchor[j] - padb;
        end[j] = anchor[j] + static_cast<long long>(std::abs(dk[j]) - 1) * stride + padb;
    }
    for (std::size_t j = 0; j + 1 < m; ++j) {
        const double gap = static_cast<double>(anchor[j + 1] - anchor[j]) * rho;
        const double need =
            2.0 * (sh.beta + std::max(std::abs(dk[j]), std::abs(dk[j + 1])) * t_spacing);
        if (!(gap > need))
            throw std::invalid_argument(
                "breakpoints " + std::to_string(target.breakpoints[j]) + " and " +
                std::to_string(target.breakpoints[j + 1]) + " (indices " + std::to_string(j) +
                ", " + std::to_string(j + 1) +
                ") are closer than the walls they carry: need a gap greater than " +
                std::to_string(need));
    }

    long long lo = start[0] - 2;
    long long hi = end[m - 1] + 2;
    if (lo > -1) lo = -1;
    if (hi < 1) hi = 1;

    std::vector<double> vals(static_cast<std::size_t>(hi - lo + 1));
    for (long long i = lo; i <= hi; ++i) {
        double v = static_cast<double>(target.levels[0]);
        for (std::size_t j = 0; j < m; ++j) {
            if (i <= start[j]) break; // clusters are ordered; the rest contribute 0 here
            if (i >= end[j]) {
                v += static_cast<double>(dk[j]);
                continue;
            }
            const int copies = std::abs(dk[j]);
            for (int k = 0; k < copies; ++k) {
                const double rel = static_cast<double>(i - anchor[j] - k * stride) * rho;
                v += (dk[j] > 0) ? sh(rel) : sh(-rel) - 1.0;
            }
        }
        vals[static_cast<std::size_t>(i - lo)] = v;
    }

    UniformPartition part(rho, narrow_index(lo), narrow_index(hi));
    PiecewiseAffine pa(part, std::move(vals));
    const std::vector<double>& nv = pa.node_values();

    // Zone energies: split the cell range midway between consecutive clusters;
    // summing the two-scale cell energies zone by zone partitions the total
    // exactly.
    std::vector<long long> cut(m + 1);
    cut[0] = lo;
    for (std::size_t j = 0; j + 1 < m; ++j) cut[j + 1] = (end[j] + start[j + 1]) / 2;
    cut[m] = hi;

    const auto w = [&pot](double v) { return pot.w(v); };
    nlohmann::json jumps = nlohmann::json::array();
    double total = 0.0;
    double run_val = std::numeric_limits<double>::quiet_NaN();
    double run_w = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        double zone_energy = 0.0;
        for (long long i = cut[j]; i < cut[j + 1]; ++i) {
            const double v0 = nv[static_cast<std::size_t>(i - lo)];
            const double v1 = nv[static_cast<std::size_t>(i - lo + 1)];
            double weak;
            if (v0 == v1) {
                if (v0 != run_val) {
                    run_val = v0;
                    run_w = pot.w(v0);
                }
                weak = run_w * rho;
            } else {
                weak = chord_integral(w, v0, v1, rho);
            }
            const double dv = v1 - v0;
            zone_energy += eps * dv * dv / rho + weak / eps;
        }
        total += zone_energy;
        jumps.push_back(nlohmann::json{
            {"breakpoint", static_cast<double>(anchor[j]) * rho},
            {"jump", dk[j]},
            {"zone", {static_cast<double>(cut[j]) * rho, static_cast<double>(cut[j + 1]) * rho}},
            {"energy", zone_energy}});
    }

    nlohmann::json md{{"kind", "bv"},
                      {"t_spacing", t_spacing},
                      {"jumps", std::move(jumps)},
                      {"total_zone_energy", total},
                      {"cells_per_wall", 2.0 * sh.beta / rho},
                      {"window", {part.x_min(), part.x_max()}}};
    return RecoveryBuild{eps, delta, sh.beta, sh.root_eps, std::move(pa), std::move(md)};
}

} // namespace fkup
