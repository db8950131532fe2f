#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "collapse/analysis.hpp"
#include "collapse/models.hpp"
#include "collapse/presets.hpp"
#include "collapse/spectral.hpp"

using namespace collapse;

namespace {

ConfigurationSpace one_particle(std::vector<int> dims, bool kinetic = true)
{
    std::vector<double> a(dims.size(), 1.0);
    return ConfigurationSpace(LatticeGrid(dims, a), ParticleSet({Particle{1.0, Support::full(), kinetic, {}}}));
}

ConfigurationSpace two_on_line(std::vector<int> dims)
{
    std::vector<double> a(dims.size(), 1.0);
    return ConfigurationSpace(LatticeGrid(dims, a), ParticleSet({Particle{1.0, Support::line(0), false, {}},
                                                                 Particle{2.0, Support::line(0), false, {}}}));
}

ModelSpec spec(ModelKind kind, double sigma = 1.0)
{
    ModelSpec s;
    s.kind = kind;
    s.sigma = sigma;
    s.gamma = 1.0;
    s.kappa = 2.0;
    s.G = 0.8;
    return s;
}

}  // namespace

TEST_CASE("model validation")
{
    auto sp = one_particle({4});
    ModelSpec s = spec(ModelKind::csl);
    s.gamma = 0.0;
    CHECK_THROWS_AS(build_model(s, sp), std::invalid_argument);
    s = spec(ModelKind::dp, 0.0);
    CHECK_THROWS_WITH_AS(build_model(s, sp), doctest::Contains("diverges"), std::invalid_argument);
    s = spec(ModelKind::dp);
    s.G = 0.0;
    CHECK_THROWS_AS(build_model(s, sp), std::invalid_argument);
    s = spec(ModelKind::generic);
    CHECK_THROWS_AS(build_model(s, sp), std::invalid_argument);
    s.kernel = KernelKind::csl;
    CHECK_NOTHROW(build_model(s, sp));
    s = spec(ModelKind::csl);
    s.dt = 0.0;
    CHECK_THROWS_AS(build_model(s, sp), std::invalid_argument);
    CHECK(model_kind_from_string(to_string(ModelKind::pair)) == ModelKind::pair);
    CHECK_THROWS_AS(model_kind_from_string("grw"), std::invalid_argument);
}

TEST_CASE("density and potential fields follow the particles")
{
    auto sp = two_on_line({8, 4, 4});
    Model m = build_model(spec(ModelKind::csl), sp, false);
    const LatticeGrid& g = m.grid();
    const std::size_t x = 13;
    SiteField rho = m.density_field(x);
    CHECK(rho.sum() * g.cell_volume() == doctest::Approx(3.0));
    SiteField expect = SiteField::Zero(rho.size());
    for (std::size_t n = 0; n < 2; ++n)
        expect += sp.particles()[n].mass * spectral::translate(g, m.density_profile(), sp.site(x, n));
    CHECK((rho - expect).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(!m.smeared_feedback());
    CHECK(build_model(spec(ModelKind::dp), sp, false).smeared_feedback());
    ModelSpec off = spec(ModelKind::csl);
    off.feedback = false;
    Model nf = build_model(off, sp, false);
    CHECK(nf.potential_field(x).cwiseAbs().maxCoeff() == 0.0);
    CHECK(!nf.has_feedback());
    CHECK_THROWS_AS(nf.propagator(), std::logic_error);
}

TEST_CASE("single particle back-action potential is position independent")
{
    auto sp = one_particle({8, 8, 8}, false);
    for (ModelKind k : {ModelKind::csl, ModelKind::dp}) {
        Model m = build_model(spec(k), sp);
        TrajectorySystem sys = make_system(m);
        const DiagonalField& v = sys.feedback->backaction_potential();
        CHECK(v.maxCoeff() - v.minCoeff() < 1e-10);
        DiagonalField direct = build_backaction_hamiltonian(m);
        CHECK((direct - v).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("back-action potential does not depend on gamma")
{
    auto sp = two_on_line({8, 4, 4});
    std::vector<DiagonalField> vs;
    for (double gamma : {0.1, 1.0, 10.0}) {
        ModelSpec s = spec(ModelKind::csl);
        s.gamma = gamma;
        Model m = build_model(s, sp);
        vs.push_back(make_system(m).feedback->backaction_potential());
    }
    CHECK((vs[0] - vs[1]).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((vs[2] - vs[1]).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("back-action potential from pair displacements matches the dense form")
{
    auto sp = two_on_line({8, 4, 4});
    for (ModelKind k : {ModelKind::csl, ModelKind::dp}) {
        Model m = build_model(spec(k), sp);
        TrajectorySystem sys = make_system(m);
        DiagonalField direct = build_backaction_hamiltonian(m);
        CHECK((direct - sys.feedback->backaction_potential()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(hfb_identity_residual(projector(StateVector::Ones(64) / 8.0), *sys.feedback) < 1e-12);
    }
}

TEST_CASE("pair sum by brute force")
{
    auto sp = two_on_line({6, 2, 2});
    const LatticeGrid& g = sp.grid();
    SiteField h = SiteField::LinSpaced(static_cast<Eigen::Index>(g.size()), 0.0, 1.0);
    DiagonalField ps = pair_sum(sp, h, false);
    DiagonalField all = pair_sum(sp, h, true);
    for (std::size_t x = 0; x < sp.size(); ++x) {
        auto s = sp.sites(x);
        auto c0 = g.coords(s[0]), c1 = g.coords(s[1]);
        std::vector<int> d01 = {c0[0] - c1[0], c0[1] - c1[1], c0[2] - c1[2]};
        std::vector<int> d10 = {-d01[0], -d01[1], -d01[2]};
        const double cross = 2.0 * (h[g.site(d01)] + h[g.site(d10)]);
        CHECK(ps[x] == doctest::Approx(cross));
        CHECK(all[x] == doctest::Approx(cross + (1.0 + 4.0) * h[0]));
    }
}

TEST_CASE("united DP route reproduces the kernel Gram matrices")
{
    auto sp = two_on_line({8, 4, 4});
    for (double kappa : {0.5, 2.0, 3.0}) {
        ModelSpec s = spec(ModelKind::dp);
        s.kappa = kappa;
        Model m = build_model(s, sp);
        TrajectorySystem united = make_system(m);
        MonitoringSpec mon(m.kernel(), m.observables());
        FeedbackSpec fb(mon, m.feedback_operators());
        const double scale = mon.gram().cwiseAbs().maxCoeff();
        CHECK((united.monitoring->gram() - mon.gram()).cwiseAbs().maxCoeff() < 1e-10 * scale);
        CHECK((united.feedback->inverse_gram() - fb.inverse_gram()).cwiseAbs().maxCoeff() <
              1e-10 * fb.inverse_gram().cwiseAbs().maxCoeff());
        CHECK((united.feedback->cross() - fb.cross()).cwiseAbs().maxCoeff() <
              1e-10 * fb.cross().cwiseAbs().maxCoeff());
    }
}

TEST_CASE("DP decoherence coefficient")
{
    CHECK(kappa_decoherence_coefficient(2.0) == doctest::Approx(1.0));
    for (double k : {0.5, 1.0, 1.5, 3.0, 4.0})
        CHECK(kappa_decoherence_coefficient(k) > 1.0);
    for (double k : {0.5, 1.3, 3.7})
        CHECK(kappa_decoherence_coefficient(k) == doctest::Approx(kappa_decoherence_coefficient(4.0 / k)));
    CHECK_THROWS_AS(kappa_decoherence_coefficient(0.0), std::invalid_argument);
}

TEST_CASE("Schrodinger-Newton potential and step")
{
    auto sp = one_particle({6, 6, 6});
    ModelSpec s = spec(ModelKind::sn);
    Model m = build_model(s, sp);
    CHECK(!m.monitored());
    StateVector psi = gaussian_state(sp, {{2.0, 2.0, 2.0}}, 0.8);
    Eigen::VectorXd p = probabilities(psi);
    DiagonalField v = sn_potential(m, p);
    SiteField phi = coulomb_potential(m.grid(), mean_mass_density(sp, p), s.G);
    CHECK((v - phi).cwiseAbs().maxCoeff() < 1e-14);
    StateVector next = sn_step(psi, m);
    CHECK(next.norm() == doctest::Approx(1.0));
    CHECK_THROWS_AS(make_system(m), std::invalid_argument);
    CHECK_THROWS_AS(exact_pair_step(projector(psi), m), std::invalid_argument);
}

TEST_CASE("exact pair potential is the lattice Green's function")
{
    auto sp = two_on_line({16, 8, 8});
    ModelSpec s = spec(ModelKind::pair);
    Model m = build_model(s, sp);
    DiagonalField v = pair_potential(m);
    const LatticeGrid& g = m.grid();
    SiteField d = SiteField::Zero(static_cast<Eigen::Index>(g.size()));
    d[0] = 1.0 / g.cell_volume();
    SiteField w = coulomb_potential(g, d, s.G);
    for (std::size_t x = 0; x < sp.size(); ++x) {
        auto c0 = g.coords(sp.site(x, 0)), c1 = g.coords(sp.site(x, 1));
        std::vector<int> r = {c0[0] - c1[0], 0, 0};
        CHECK(v[x] == doctest::Approx(2.0 * w[g.site(r)]));
    }
    DensityMatrix rho = projector(StateVector::Ones(256) / 16.0);
    DensityMatrix next = exact_pair_step(rho, m);
    CHECK(std::abs(next.trace() - 1.0) < 1e-12);
}

TEST_CASE("back-action rate scales as 1/gamma")
{
    auto sp = one_particle({16, 8, 8});
    std::vector<double> products;
    for (double gamma : {0.3, 1.0, 7.0}) {
        ModelSpec s = spec(ModelKind::csl);
        s.gamma = gamma;
        Model m = build_model(s, sp, false);
        products.push_back(closed_form_rate(m, 0, 5 * 64).backaction * gamma);
    }
    CHECK(std::abs(products[0] / products[1] - 1.0) < 1e-10);
    CHECK(std::abs(products[2] / products[1] - 1.0) < 1e-10);
}

TEST_CASE("physical presets and lattice units")
{
    const auto& grw = find_preset("grw-csl");
    CHECK(grw.sigma == 1e-7);
    CHECK(grw.gamma_over_hbar2 == 1e16);
    const auto& dp = find_preset("dp");
    CHECK(dp.sigma == 1e-14);
    CHECK(dp.kappa == 2.0);
    CHECK_THROWS_AS(find_preset("none"), std::invalid_argument);
    LatticeUnits u;
    LatticeParameters lp = to_lattice(grw, u);
    CHECK(lp.sigma == doctest::Approx(1.0));
    const double tau = u.mass * u.length * u.length / si::hbar;
    CHECK(lp.G == doctest::Approx(si::G * u.mass * tau * tau / std::pow(u.length, 3)).epsilon(1e-12));
    CHECK(lp.gamma ==
          doctest::Approx(grw.gamma_over_hbar2 * u.mass * u.mass * tau / std::pow(u.length, 3)).epsilon(1e-12));
}
