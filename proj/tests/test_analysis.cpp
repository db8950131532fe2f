#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "collapse/analysis.hpp"
#include "oracles.hpp"

using namespace collapse;

namespace {

ConfigurationSpace line_space(int L, int particles = 1)
{
    std::vector<Particle> ps(particles, Particle{1.0, Support::line(0), false, {}});
    return ConfigurationSpace(LatticeGrid({L, L, L}, {1.0}), ParticleSet(ps));
}

}  // namespace

TEST_CASE("decay fit recovers an exponential")
{
    std::vector<double> t, m;
    for (int i = 0; i < 20; ++i) {
        t.push_back(0.1 * i);
        m.push_back(0.5 * std::exp(-3.0 * 0.1 * i));
    }
    DecayFit f = fit_offdiagonal_decay(t, m);
    CHECK(f.rate == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(f.amplitude == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(f.stderr_rate < 1e-10);
    CHECK(f.points == 20);
    m.assign(20, 1e-20);
    CHECK_THROWS_AS(fit_offdiagonal_decay(t, m), std::domain_error);
    CHECK_THROWS_AS(fit_offdiagonal_decay({0.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("trace distance")
{
    DensityMatrix a = DensityMatrix::Zero(2, 2), b = DensityMatrix::Zero(2, 2);
    a(0, 0) = 1.0;
    b(1, 1) = 1.0;
    CHECK(trace_distance(a, b) == doctest::Approx(1.0));
    CHECK(trace_distance(a, a) == 0.0);
    DensityMatrix c = 0.5 * (a + b);
    CHECK(trace_distance(a, c) == doctest::Approx(0.5));
}

TEST_CASE("torus potential agrees with an Ewald sum")
{
    LatticeGrid g({24, 20, 16}, {1.0, 1.0, 1.0});
    for (double s : {1.0, std::sqrt(2.0)}) {
        TorusPotential tp(g, s, 0);
        for (double r : {0.0, 2.5, 7.0, 12.0}) {
            const double ew = oracle::ewald_smeared_potential({24.0, 20.0, 16.0}, {r, 0.0, 0.0}, s);
            CHECK(tp(r) == doctest::Approx(ew).epsilon(1e-9));
        }
    }
    CHECK_THROWS_AS(TorusPotential(g, 0.0), std::invalid_argument);
}

TEST_CASE("free smeared potential limits")
{
    CHECK(free_smeared_potential(50.0, 1.0) == doctest::Approx(-1.0 / 50.0));
    CHECK(free_smeared_potential(0.0, 1.0) == doctest::Approx(-std::sqrt(2.0 / std::numbers::pi)));
    CHECK(free_smeared_potential(1e-6, 1.0) == doctest::Approx(free_smeared_potential(0.0, 1.0)));
}

TEST_CASE("quadrature oracle for the Coulomb difference norm")
{
    for (double d : {1.0, 3.0, 10.0})
        CHECK(oracle::coulomb_difference_norm(d) == doctest::Approx(4.0 * std::numbers::pi * d).epsilon(1e-4));
}

TEST_CASE("rate profile is zero at zero separation and symmetric")
{
    auto sp = line_space(16);
    ModelSpec s;
    s.kind = ModelKind::csl;
    Model m = build_model(s, sp, false);
    auto prof = rate_profile(m, {0, 3, -3, 13}, 0);
    CHECK(prof[0].rate.total == 0.0);
    CHECK(prof[1].rate.total == doctest::Approx(prof[2].rate.total).epsilon(1e-12));
    CHECK(prof[1].rate.total == doctest::Approx(prof[3].rate.total).epsilon(1e-12));
    CHECK(prof[1].separation == 3.0);
    RateComponents r = closed_form_rate(m, 0, 3);
    CHECK(r.total == doctest::Approx(r.intrinsic + r.backaction));
}

TEST_CASE("CSL intrinsic rate follows the smeared overlap")
{
    auto sp = line_space(32);
    ModelSpec s;
    s.kind = ModelKind::csl;
    s.sigma = 2.0;
    s.gamma = 1.3;
    Model m = build_model(s, sp, false);
    auto prof = rate_profile(m, {1, 2, 4, 8}, 0);
    // gamma/8 * 2 (C(0) - C(d)), C(d) = exp(-d^2/4 sigma^2) / (8 pi^{3/2} sigma^3) in the continuum
    for (const auto& row : prof) {
        const double d = row.separation;
        const double c0 = 1.0 / (8.0 * std::pow(std::numbers::pi, 1.5) * 8.0);
        const double expect = 1.3 / 4.0 * c0 * (1.0 - std::exp(-d * d / 16.0));
        CHECK(row.rate.intrinsic == doctest::Approx(expect).epsilon(2e-3));
    }
}

TEST_CASE("united DP rate equals the split rate")
{
    auto sp = line_space(16);
    ModelSpec s;
    s.kind = ModelKind::dp;
    s.sigma = 1.0;
    s.kappa = 1.5;
    s.G = 0.7;
    Model m = build_model(s, sp, false);
    for (std::size_t y : {1u, 4u, 8u}) {
        RateComponents a = closed_form_rate(m, 0, y), b = united_rate(m, 0, y);
        CHECK(a.intrinsic == doctest::Approx(b.intrinsic).epsilon(1e-12));
        CHECK(a.backaction == doctest::Approx(b.backaction).epsilon(1e-12));
        CHECK(a.total == doctest::Approx(b.total).epsilon(1e-12));
    }
    ModelSpec c = s;
    c.kind = ModelKind::csl;
    CHECK_THROWS_AS(united_rate(build_model(c, sp, false), 0, 1), std::invalid_argument);
}

TEST_CASE("kappa scan is minimal at kappa = 2 and symmetric under kappa -> 4/kappa")
{
    auto sp = line_space(16);
    ModelSpec s;
    s.kind = ModelKind::dp;
    s.G = 0.5;
    KappaScan scan = kappa_scan(s, sp, {0.5, 1.0, 2.0, 4.0, 8.0}, 0, 3);
    CHECK(scan.argmin == 2.0);
    CHECK(scan.rows[2].relative == doctest::Approx(1.0));
    CHECK(scan.rows[0].rate.total == doctest::Approx(scan.rows[4].rate.total).epsilon(1e-12));
    CHECK(scan.rows[1].rate.total == doctest::Approx(scan.rows[3].rate.total).epsilon(1e-12));
    CHECK(scan.rows[2].rate.backaction == doctest::Approx(scan.rows[2].rate.intrinsic).epsilon(1e-12));
    CHECK_THROWS_AS(kappa_scan(s, sp, {}, 0, 3), std::invalid_argument);
}

TEST_CASE("pair potential curve approaches the Newtonian form")
{
    auto sp = line_space(32, 2);
    ModelSpec s;
    s.kind = ModelKind::csl;
    s.sigma = 1.0;
    s.G = 1.3;
    Model m = build_model(s, sp, false);
    auto rows = pair_potential_curve(m, {4, 6, 8}, 0);
    for (const auto& r : rows) {
        CHECK(r.ratio == doctest::Approx(1.0).epsilon(0.02));
        CHECK(r.corrected == doctest::Approx(r.shifted + r.correction));
    }
    CHECK_THROWS_AS(pair_potential_curve(build_model(s, line_space(16), false), {2}, 0), std::invalid_argument);
}

TEST_CASE("linearity witness for deterministic and monitored models")
{
    ConfigurationSpace sp(LatticeGrid({8}, {1.0}), ParticleSet({Particle{1.0, Support::full(), true, {}}}));
    StateVector a = StateVector::Unit(8, 1), b = StateVector::Unit(8, 5);
    const double r2 = 1.0 / std::sqrt(2.0);
    std::vector<StateVector> cats = {r2 * (a + b), r2 * (a - b)}, mix = {a, b};
    ModelSpec s;
    s.kind = ModelKind::csl;
    s.dt = 0.01;
    Model m = build_model(s, sp);
    LinearityOptions o;
    o.steps = 20;
    o.evolution = Evolution::unconditional;
    LinearityReport rep = linearity_witness(m, cats, mix, o);
    CHECK(rep.distance < 1e-12);
    CHECK(!rep.distinguishable);
    std::vector<StateVector> wrong = {a, a};
    CHECK_THROWS_AS(linearity_witness(m, cats, wrong, o), std::invalid_argument);
}
