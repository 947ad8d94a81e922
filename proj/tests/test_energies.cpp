#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fkup/energies.hpp"
#include "support/oracles.hpp"

using namespace fkup;

namespace {

const WeakPotential& default_pot() {
    static WeakPotential pot{PairPotentialSpec{}};
    return pot;
}

ChainState sampled_reference(const BoundaryData& b, double delta, double halfwidth) {
    const ReferenceProfile rp(b);
    const int m = static_cast<int>(std::llround(halfwidth / delta));
    std::vector<double> v(static_cast<std::size_t>(2 * m + 1));
    for (int i = -m; i <= m; ++i) v[static_cast<std::size_t>(i + m)] = rp(i * delta);
    return ChainState(delta, -m, std::move(v));
}

} // namespace

TEST_CASE("scale parameter validation") {
    CHECK_THROWS_AS(MesoscaleParams(0.0), std::invalid_argument);
    CHECK_THROWS_AS(MesoscaleParams(1.5), std::invalid_argument);
    CHECK_THROWS_AS(TwoScaleParams(0.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(TwoScaleParams(0.1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(BoundaryData(1, 1), std::invalid_argument);
    CHECK(BoundaryData(0, 2).jump() == 2);
    CHECK(BoundaryData(2, 0).jump() == -2);
}

TEST_CASE("boundary JSON round-trip") {
    const BoundaryData b(-1, 3);
    const BoundaryData back = boundary_from_json(to_json(b));
    CHECK(back.m_left == -1);
    CHECK(back.m_right == 3);
    CHECK_THROWS_AS(boundary_from_json(nlohmann::json{{"m_left", 0}}), std::invalid_argument);
}

TEST_CASE("reference profile interpolates the far-field levels") {
    const BoundaryData b(0, 1);
    const ReferenceProfile rp(b);
    CHECK(rp(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(rp(20.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rp(-20.0) == doctest::Approx(0.0).epsilon(1e-12));
    const double h = 1e-6;
    for (double x : {-1.0, 0.0, 0.7, 2.0})
        CHECK(rp.derivative(x) ==
              doctest::Approx((rp(x + h) - rp(x - h)) / (2.0 * h)).epsilon(1e-7));
    const ReferenceProfile down(BoundaryData(2, -1));
    CHECK(down(0.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(down(30.0) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("discrete mesoscale energy equals the defining sums") {
    const WeakPotential& pot = default_pot();
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const double delta = 0.05 + 0.01 * rep;
        ChainState c = oracles::random_chain(rng, delta, 8, 0, 1, 0.6);
        double expect = 0.0;
        for (std::size_t k = 0; k + 1 < c.values.size(); ++k) {
            const double dv = c.values[k + 1] - c.values[k];
            expect += dv * dv / delta;
        }
        for (double v : c.values) expect += delta * pot.w(v);
        CHECK(discrete_energy_meso(c, pot, MesoscaleParams(delta)) ==
              doctest::Approx(expect).epsilon(1e-13));
    }
}

TEST_CASE("the two-scale discrete energy is the mesoscale expression in the node values") {
    const WeakPotential& pot = default_pot();
    std::mt19937_64 rng(12);
    const double eps = 0.05, delta = 0.1;
    ChainState c = oracles::random_chain(rng, eps * delta, 10, 0, 2, 0.5);
    const double two = discrete_energy_twoscale(c, pot, TwoScaleParams(eps, delta));
    ChainState c_meso(delta, c.i_min, c.values);
    // same node values read at mesoscale spacing delta
    CHECK(two == discrete_energy_meso(c_meso, pot, MesoscaleParams(delta)));
    // spacing mismatches are rejected
    CHECK_THROWS_AS(discrete_energy_twoscale(c_meso, pot, TwoScaleParams(eps, delta)),
                    std::invalid_argument);
    CHECK_THROWS_AS(discrete_energy_meso(c, pot, MesoscaleParams(delta)), std::invalid_argument);
}

TEST_CASE("raw chain energy matches the ChainState form") {
    const WeakPotential& pot = default_pot();
    std::mt19937_64 rng(13);
    ChainState c = oracles::random_chain(rng, 0.1, 12, 0, 1, 0.4);
    CHECK(chain_energy(c.values, pot, 0.1) == discrete_energy_meso(c, pot, MesoscaleParams(0.1)));
    std::vector<double> g;
    chain_gradient(c.values, pot, 0.1, g);
    const std::vector<double> g2 = grad_discrete(c, pot, MesoscaleParams(0.1));
    CHECK(g == g2);
}

TEST_CASE("continuum mesoscale energy splits into dirichlet plus weak part") {
    const WeakPotential& pot = default_pot();
    std::mt19937_64 rng(14);
    PiecewiseAffine g = oracles::random_pa(rng, 0.1, 15, 0, 1, 0.5);
    const double total = continuum_energy_meso(g, pot, MesoscaleParams(0.1));
    CHECK(total == doctest::Approx(dirichlet_energy(g) + weak_energy(g, pot)).epsilon(1e-13));
}

TEST_CASE("energy gap shrinks like delta^2 and ignores the window size") {
    const WeakPotential& pot = default_pot();
    const BoundaryData b(0, 1);
    const MesoscaleParams mp1(0.1), mp2(0.05);
    const double gap1 = energy_gap(sampled_reference(b, 0.1, 20.0), pot, mp1);
    const double gap2 = energy_gap(sampled_reference(b, 0.05, 20.0), pot, mp2);
    CHECK(gap1 > 0.0);
    CHECK(gap2 > 0.0);
    const double ratio = gap1 / gap2;
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);

    const double gap1_wide = energy_gap(sampled_reference(b, 0.1, 40.0), pot, mp1);
    CHECK(std::abs(gap1_wide - gap1) <= 0.01 * gap1);
}

TEST_CASE("rescaled functional: F_eps of the dilated function equals F of the original") {
    const WeakPotential& pot = default_pot();
    std::mt19937_64 rng(15);
    for (double eps : {0.5, 0.1, 0.01}) {
        for (int rep = 0; rep < 10; ++rep) {
            PiecewiseAffine g = oracles::random_pa(rng, 0.25, 12, 0, 1, 0.7);
            PiecewiseAffine dilated(
                UniformPartition(eps * g.partition().spacing, g.partition().i_min,
                                 g.partition().i_max),
                g.node_values());
            const double f = continuum_F(g, pot);
            const double feps = continuum_F_eps(dilated, pot, eps);
            CHECK(std::abs(feps - f) <= 1e-10 * std::max(1.0, std::abs(f)));
        }
    }
    PiecewiseAffine g = oracles::random_pa(rng, 0.25, 12, 0, 1, 0.7);
    CHECK_THROWS_AS(continuum_F_eps(g, pot, 0.0), std::invalid_argument);
}

TEST_CASE("sharp-interface energy is the variation times the wall cost") {
    const WeakPotential& pot = default_pot();
    const double pb = pot.p_bar();
    CHECK(bv_energy(StepFunction({0.0}, {0, 1}), pot) == doctest::Approx(pb).epsilon(1e-14));
    CHECK(bv_energy(StepFunction({-2.0, 3.0}, {0, 2, 1}), pot) ==
          doctest::Approx(3.0 * pb).epsilon(1e-14));
}

TEST_CASE("discrete gradient matches central differences away from the clamps") {
    const WeakPotential& pot = default_pot();
    std::mt19937_64 rng(16);
    const double h = 1e-6;
    for (int rep = 0; rep < 20; ++rep) {
        const double delta = 0.04 + 0.01 * (rep % 5);
        ChainState c = oracles::random_chain(rng, delta, 10, 0, 1, 0.5);
        const std::vector<double> g = grad_discrete(c, pot, MesoscaleParams(delta));
        CHECK(g.front() == 0.0);
        CHECK(g.back() == 0.0);
        const std::vector<double> fd = oracles::fd_gradient(
            [&](std::vector<double>& v) { return chain_energy(v, pot, delta); }, c.values, h);
        for (std::size_t k = 1; k + 1 < g.size(); ++k)
            CHECK(std::abs(g[k] - fd[k]) <= 1e-6 * std::max(1.0, std::abs(fd[k])));
    }
    // two-scale route: same values, spacing eps*delta
    const TwoScaleParams tp(0.05, 0.1);
    ChainState c = oracles::random_chain(rng, tp.epsilon * tp.delta, 10, 0, 2, 0.5);
    const std::vector<double> g = grad_discrete(c, pot, tp);
    const std::vector<double> fd = oracles::fd_gradient(
        [&](std::vector<double>& v) { return chain_energy(v, pot, tp.delta); }, c.values, h);
    for (std::size_t k = 1; k + 1 < g.size(); ++k)
        CHECK(std::abs(g[k] - fd[k]) <= 1e-6 * std::max(1.0, std::abs(fd[k])));
}

TEST_CASE("lower bound: continuum energy dominates the variation of p") {
    const WeakPotential& pot = default_pot();
    const MesoscaleParams mp(0.1);
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 50; ++rep) {
        PiecewiseAffine g = oracles::random_pa(rng, 0.1, 20, 0, 1, 0.8);
        CHECK(continuum_energy_meso(g, pot, mp) >= var_of_p_composed(g, pot) - 1e-7);
    }
}

TEST_CASE("tail bound and energy record") {
    const WeakPotential& pot = default_pot();
    PiecewiseAffine g(UniformPartition(0.5, -2, 2), {0.0, 0.3, 0.8, 1.0, 1.0});
    CHECK(weak_tail_bound(g, pot) <= 20.0 * pot.spec().quadrature_tol);
    PiecewiseAffine off(UniformPartition(0.5, -2, 2), {0.4, 0.3, 0.8, 1.0, 1.0});
    CHECK(weak_tail_bound(off, pot) > 0.1);

    const nlohmann::json rec = energy_record("continuum_meso", {{"delta", 0.1}}, 2.5, 1e-9);
    CHECK(rec.at("functional") == "continuum_meso");
    CHECK(rec.at("params").at("delta") == 0.1);
    CHECK(rec.at("value") == 2.5);
    CHECK(rec.at("tail_bound") == 1e-9);
}
