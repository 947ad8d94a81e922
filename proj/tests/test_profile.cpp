#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fkup/profile.hpp"
#include "fkup/quadrature.hpp"
#include "support/oracles.hpp"

using namespace fkup;

namespace {

const WeakPotential& default_pot() {
    static WeakPotential pot{PairPotentialSpec{}};
    return pot;
}

const HeteroclinicProfile& default_profile() {
    static HeteroclinicProfile prof = heteroclinic_profile(default_pot());
    return prof;
}

double min_curvature_near_well(const WeakPotential& pot) {
    double m = 1e300;
    for (int k = 0; k <= 1000; ++k) m = std::min(m, pot.w2(0.9 + 0.1 * k / 1000.0));
    return m;
}

} // namespace

TEST_CASE("profile passes through 1/2 at the origin and stays strictly monotone") {
    const HeteroclinicProfile& prof = default_profile();
    CHECK(prof.value(0.0) == 0.5);
    for (std::size_t k = 0; k + 1 < prof.x.size(); ++k) {
        CHECK(prof.x[k] < prof.x[k + 1]);
        CHECK(prof.xi[k] < prof.xi[k + 1]);
    }
    CHECK(prof.xi.front() == doctest::Approx(prof.eta).epsilon(1e-12));
    CHECK(prof.xi.back() == doctest::Approx(1.0 - prof.eta).epsilon(1e-12));
    CHECK(prof.increasing);
    CHECK(prof.kappa == doctest::Approx(std::sqrt(default_pot().curvature_at_well() / 2.0)));
}

TEST_CASE("profile is odd about its midpoint") {
    const HeteroclinicProfile& prof = default_profile();
    const double span = 1.5 * prof.x_back();
    for (int k = 0; k <= 100; ++k) {
        const double x = -span + 2.0 * span * k / 100.0;
        CHECK(std::abs(prof.value(x) + prof.value(-x) - 1.0) <= 1e-8);
    }
}

TEST_CASE("tabulated slopes solve the first-order wall equation") {
    const WeakPotential& pot = default_pot();
    const HeteroclinicProfile& prof = default_profile();
    double max_slope = 0.0;
    for (double s : prof.slopes) max_slope = std::max(max_slope, s);
    for (std::size_t k = 0; k < prof.x.size(); ++k) {
        CHECK(prof.slopes[k] ==
              doctest::Approx(std::sqrt(std::max(pot.w(prof.xi[k]), 0.0))).epsilon(1e-12));
    }
    // centered differences of the table reproduce the slopes
    double max_resid = 0.0;
    for (std::size_t k = 1; k + 1 < prof.x.size(); ++k) {
        const double d = (prof.xi[k + 1] - prof.xi[k - 1]) / (prof.x[k + 1] - prof.x[k - 1]);
        max_resid = std::max(max_resid, std::abs(d - prof.slopes[k]));
    }
    CHECK(max_resid <= 1e-6 * max_slope);
}

TEST_CASE("beyond the table the tails decay at the exact exponential rate") {
    const HeteroclinicProfile& prof = default_profile();
    for (double t : {0.1, 0.5, 2.0, 10.0}) {
        CHECK(prof.value(prof.x_back() + t) ==
              doctest::Approx(1.0 - prof.eta * std::exp(-prof.kappa * t)).epsilon(1e-12));
        CHECK(prof.value(prof.x_front() - t) ==
              doctest::Approx(prof.eta * std::exp(-prof.kappa * t)).epsilon(1e-12));
    }
    CHECK(prof.value(1e6) == doctest::Approx(1.0));
    CHECK(prof.value(-1e6) == doctest::Approx(0.0));
}

TEST_CASE("the energy splits evenly between gradient and substrate terms") {
    const WeakPotential& pot = default_pot();
    const HeteroclinicProfile& prof = default_profile();
    const double pb = pot.p_bar();
    const double dir = prof.dirichlet_integral();
    const double wk = prof.weak_integral(pot);
    CHECK(std::abs(dir - wk) <= 1e-4 * pb);
    CHECK(std::abs(dir - pb / 2.0) <= 1e-4 * pb);
    CHECK(std::abs(wk - pb / 2.0) <= 1e-4 * pb);
}

TEST_CASE("the decreasing profile is the mirror image") {
    const WeakPotential& pot = default_pot();
    const HeteroclinicProfile down = heteroclinic_profile(pot, 1e-4, false);
    const HeteroclinicProfile& up = default_profile();
    CHECK_FALSE(down.increasing);
    for (double x : {-2.0, -0.5, 0.0, 0.7, 1.9}) {
        CHECK(down.value(x) == doctest::Approx(up.value(-x)).epsilon(1e-13));
        CHECK(down.slope(x) == doctest::Approx(-up.slope(-x)).epsilon(1e-13));
    }
}

TEST_CASE("profile construction rejects bad arguments") {
    const WeakPotential& pot = default_pot();
    CHECK_THROWS_AS(heteroclinic_profile(pot, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(heteroclinic_profile(pot, 0.4), std::invalid_argument);
    CHECK_THROWS_AS(heteroclinic_profile(pot, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(heteroclinic_profile(pot, 1e-4, true, 100), std::invalid_argument);

    PairPotentialSpec flat;
    flat.standoff = 12.0; // w is truncation noise; no wall exists
    CHECK_THROWS_AS(heteroclinic_profile(WeakPotential{flat}), std::invalid_argument);
}

TEST_CASE("unit recovery: integer tails, monotone wall, snapped anchor") {
    const WeakPotential& pot = default_pot();
    const HeteroclinicProfile& prof = default_profile();
    const RecoveryBuild rb = recovery_step(pot, prof, 0.01, 0.05, 0.123, 0, 1);
    CHECK(rb.epsilon == 0.01);
    CHECK(rb.delta == 0.05);
    CHECK(rb.beta > rb.tangent_point);
    CHECK(rb.tangent_point == doctest::Approx(std::sqrt(0.01)));
    CHECK(rb.result.left_tail() == 0.0);
    CHECK(rb.result.right_tail() == 1.0);
    const auto& v = rb.result.node_values();
    for (std::size_t k = 0; k + 1 < v.size(); ++k) CHECK(v[k] <= v[k + 1]);
    CHECK(rb.metadata.at("kind") == "step");
    const double snapped = rb.metadata.at("x0_snapped").get<double>();
    CHECK(std::abs(snapped - 0.123) <= 0.5 * 0.01 * 0.05 + 1e-15);
    CHECK(rb.result(snapped) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rb.metadata.at("cells_per_wall").get<double>() >= 8.0);

    const nlohmann::json j = to_json(rb);
    for (const char* key : {"epsilon", "delta", "beta", "tangent_point", "result", "metadata"})
        CHECK(j.contains(key));
}

TEST_CASE("a downward step mirrors the upward one") {
    const WeakPotential& pot = default_pot();
    const HeteroclinicProfile& prof = default_profile();
    const RecoveryBuild down = recovery_step(pot, prof, 0.01, 0.05, 0.0, 2, 1);
    CHECK(down.result.left_tail() == 2.0);
    CHECK(down.result.right_tail() == 1.0);
    const auto& v = down.result.node_values();
    for (std::size_t k = 0; k + 1 < v.size(); ++k) CHECK(v[k] >= v[k + 1]);

    CHECK_THROWS_AS(recovery_step(pot, prof, 0.01, 0.05, 0.0, 0, 2), std::invalid_argument);
    CHECK_THROWS_AS(recovery_multijump(pot, prof, 0.01, 0.05, 0.0, 0, 0), std::invalid_argument);
    const HeteroclinicProfile down_prof = heteroclinic_profile(pot, 1e-4, false);
    CHECK_THROWS_AS(recovery_step(pot, down_prof, 0.01, 0.05, 0.0, 0, 1), std::invalid_argument);
}

TEST_CASE("tangent closure stays within the curvature bound and shrinks with epsilon") {
    const WeakPotential& pot = default_pot();
    const HeteroclinicProfile& prof = default_profile();
    const double w_sharp = min_curvature_near_well(pot);
    CHECK(w_sharp > 0.0);
    double prev_beta = 1e300;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        const RecoveryBuild rb = recovery_step(pot, prof, eps, 0.02, 0.0, 0, 1);
        CHECK(rb.beta - rb.tangent_point <= std::sqrt(2.0) * eps / std::sqrt(w_sharp) + 1e-15);
        CHECK(rb.beta < prev_beta);
        prev_beta = rb.beta;
    }
}

TEST_CASE("double jump: two separated walls, energy close to twice the wall cost") {
    const WeakPotential& pot = default_pot();
    const HeteroclinicProfile& prof = default_profile();
    const double eps = 0.01, delta = 0.05;
    const RecoveryBuild rb = recovery_multijump(pot, prof, eps, delta, 0.0, 2, 0);
    CHECK(rb.result.left_tail() == 0.0);
    CHECK(rb.result.right_tail() == 2.0);
    CHECK(rb.metadata.at("copy_positions").size() == 2);
    const double e = continuum_energy_twoscale(rb.result, pot, TwoScaleParams(eps, delta));
    const double pb = pot.p_bar();
    CHECK(std::abs(e - 2.0 * pb) <= 0.03 * 2.0 * pb);

    const RecoveryBuild dn = recovery_multijump(pot, prof, eps, delta, 0.0, -1, 1);
    CHECK(dn.result.left_tail() == 1.0);
    CHECK(dn.result.right_tail() == 0.0);
}

TEST_CASE("spliced recovery: zone energies partition the total exactly") {
    const WeakPotential& pot = default_pot();
    const HeteroclinicProfile& prof = default_profile();
    const double eps = 0.01, delta = 0.05;
    const StepFunction target({-3.0, 3.0}, {0, 2, 1});
    const RecoveryBuild rb = recovery_bv(pot, prof, eps, delta, target);
    CHECK(rb.result.left_tail() == 0.0);
    CHECK(rb.result.right_tail() == 1.0);
    const double total = continuum_energy_twoscale(rb.result, pot, TwoScaleParams(eps, delta));
    const double zone_total = rb.metadata.at("total_zone_energy").get<double>();
    CHECK(std::abs(zone_total - total) <= 1e-12 * total);
    CHECK(rb.metadata.at("jumps").size() == 2);
    double jump_sum = 0.0;
    for (const auto& jz : rb.metadata.at("jumps")) jump_sum += jz.at("energy").get<double>();
    CHECK(jump_sum == doctest::Approx(zone_total).epsilon(1e-13));
    // each zone carries roughly |jump| wall costs
    const double pb = pot.p_bar();
    CHECK(std::abs(rb.metadata["jumps"][0]["energy"].get<double>() - 2.0 * pb) <= 0.05 * 2.0 * pb);
    CHECK(std::abs(rb.metadata["jumps"][1]["energy"].get<double>() - pb) <= 0.05 * pb);
}

TEST_CASE("recovery energy is invariant under vertical integer shifts") {
    const WeakPotential& pot = default_pot();
    const HeteroclinicProfile& prof = default_profile();
    const double eps = 0.02, delta = 0.1;
    const TwoScaleParams tp(eps, delta);
    const StepFunction base({-2.0, 2.0}, {0, 1, 3});
    const StepFunction lifted({-2.0, 2.0}, {5, 6, 8});
    const RecoveryBuild rb0 = recovery_bv(pot, prof, eps, delta, base);
    const RecoveryBuild rb5 = recovery_bv(pot, prof, eps, delta, lifted);
    const double e0 = continuum_energy_twoscale(rb0.result, pot, tp);
    const double e5 = continuum_energy_twoscale(rb5.result, pot, tp);
    // the weak term amplifies the truncated periodicity defect of w by the
    // window length over eps, and the 5-level shift telescopes 5 such defects
    const double window_len =
        rb0.result.partition().x_max() - rb0.result.partition().x_min();
    const double bound = 10.0 * pot.spec().quadrature_tol * (1.0 + 5.0 * window_len / eps);
    CHECK(std::abs(e0 - e5) <= bound);
}

TEST_CASE("the recovery family closes on the step in L1 as the scales shrink") {
    const WeakPotential& pot = default_pot();
    const HeteroclinicProfile& prof = default_profile();
    const StepFunction target({0.0}, {0, 1});
    double prev = 1e300;
    for (double s : {0.1, 0.05, 0.025}) {
        const RecoveryBuild rb = recovery_bv(pot, prof, s, s, target);
        const double l1 = l1_distance_step_window(rb.result, target,
                                                  rb.result.partition().x_min(),
                                                  rb.result.partition().x_max());
        CHECK(l1 > 0.0);
        if (prev < 1e300) CHECK(prev / l1 > 1.5);
        prev = l1;
    }
}

TEST_CASE("recovery rejects unusable scale combinations") {
    const WeakPotential& pot = default_pot();
    const HeteroclinicProfile& prof = default_profile();
    // heavy-tailed profile cannot place the tangent point far out
    const HeteroclinicProfile coarse = heteroclinic_profile(pot, 0.05);
    CHECK_THROWS_WITH_AS(recovery_step(pot, coarse, 1e-4, 0.05, 0.0, 0, 1),
                         doctest::Contains("eta too large"), std::invalid_argument);
    // fewer than 8 cells across a wall
    CHECK_THROWS_WITH_AS(recovery_step(pot, prof, 0.01, 5.0, 0.0, 0, 1),
                         doctest::Contains("too coarse"), std::invalid_argument);
    // breakpoints closer than the walls they carry
    CHECK_THROWS_WITH_AS(recovery_bv(pot, prof, 0.1, 0.1, StepFunction({0.0, 0.3}, {0, 1, 2})),
                         doctest::Contains("closer than the walls"), std::invalid_argument);
    CHECK_THROWS_AS(recovery_step(pot, prof, -1.0, 0.05, 0.0, 0, 1), std::invalid_argument);
}
