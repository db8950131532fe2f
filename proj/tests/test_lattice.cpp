#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "collapse/lattice.hpp"
#include "oracles.hpp"

using namespace collapse;

TEST_CASE("grid indexing is row-major and wraps periodically")
{
    LatticeGrid g({4, 3, 5}, {1.0, 2.0, 0.5});
    CHECK(g.size() == 60);
    CHECK(g.cell_volume() == doctest::Approx(1.0));
    for (std::size_t s = 0; s < g.size(); ++s)
        CHECK(g.site(g.coords(s)) == s);
    std::vector<int> c = {0, 0, 1};
    CHECK(g.site(c) == 1);
    c = {1, 0, 0};
    CHECK(g.site(c) == 15);
    c = {-1, 3, 5};
    std::vector<int> w = {3, 0, 0};
    CHECK(g.site(c) == g.site(w));
    std::vector<int> shift = {1, -1, 0};
    CHECK(g.shifted(0, shift) == g.site(std::vector<int>{1, 2, 0}));
}

TEST_CASE("wavenumbers are folded into the Brillouin zone")
{
    LatticeGrid g({8}, {0.5});
    const double pi = std::numbers::pi;
    CHECK(g.wavenumber(0, 0) == 0.0);
    CHECK(g.wavenumber(0, 1) == doctest::Approx(2.0 * pi / 4.0));
    CHECK(g.wavenumber(0, 7) == doctest::Approx(-2.0 * pi / 4.0));
    CHECK(std::abs(g.wavenumber(0, 4)) == doctest::Approx(pi / 0.5));
    for (int n = 0; n < 8; ++n)
        CHECK(g.k_squared()[n] == doctest::Approx(std::pow(g.wavenumber(0, n), 2)));
}

TEST_CASE("minimum-image displacement")
{
    LatticeGrid g({10}, {1.0});
    CHECK(g.displacement(0, 3, 0) == doctest::Approx(3.0));
    CHECK(g.displacement(0, 8, 0) == doctest::Approx(-2.0));
    CHECK(g.distance(1, 9) == doctest::Approx(2.0));
}

TEST_CASE("invalid grids are rejected")
{
    CHECK_THROWS_AS(LatticeGrid({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(LatticeGrid({4, 4}, {1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(LatticeGrid({0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(ParticleSet({Particle{-1.0, Support::full(), true, {}}}), std::invalid_argument);
}

TEST_CASE("configuration space of two particles on a line")
{
    LatticeGrid g({6, 4, 4}, {1.0});
    ConfigurationSpace sp(g, ParticleSet({Particle{1.0, Support::line(0, {0, 1, 2}), true, {}},
                                          Particle{2.0, Support::line(0, {0, 1, 2}), true, {}}}));
    CHECK(sp.size() == 36);
    for (std::size_t x = 0; x < sp.size(); ++x) {
        auto l = sp.local_indices(x);
        CHECK(sp.config_index(l) == x);
        auto sites = sp.sites(x);
        CHECK(sp.config_at_sites(sites) == x);
        for (std::size_t n = 0; n < 2; ++n) {
            auto c = g.coords(sites[n]);
            CHECK(c[1] == 1);
            CHECK(c[2] == 2);
        }
    }
    // particle 0 is the most significant index
    CHECK(sp.local_index(6, 0) == 1);
    CHECK(sp.local_index(6, 1) == 0);
    std::vector<std::size_t> off = {g.site(std::vector<int>{0, 0, 0}), sp.site(0, 1)};
    CHECK_THROWS(sp.config_at_sites(off));
}

TEST_CASE("mass density field counts each particle")
{
    LatticeGrid g({5}, {0.5});
    ConfigurationSpace sp(g, ParticleSet({Particle{1.0, Support::full(), true, {}},
                                          Particle{3.0, Support::full(), true, {}}}));
    DiagonalField f = mass_density_field(sp, 2);
    for (std::size_t x = 0; x < sp.size(); ++x) {
        double expect = 0.0;
        if (sp.site(x, 0) == 2)
            expect += 1.0 / 0.5;
        if (sp.site(x, 1) == 2)
            expect += 3.0 / 0.5;
        CHECK(f[static_cast<Eigen::Index>(x)] == doctest::Approx(expect));
    }
}

TEST_CASE("kinetic term has the spectral dispersion")
{
    LatticeGrid g({8}, {1.0});
    ConfigurationSpace sp(g, ParticleSet({Particle{2.0, Support::full(), true, {}}}));
    Eigen::MatrixXd T = support_kinetic(sp, 0);
    CHECK((T - T.transpose()).norm() < 1e-14);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    std::vector<double> expect;
    for (int n = 0; n < 8; ++n)
        expect.push_back(std::pow(g.wavenumber(0, n), 2) / 4.0);
    std::sort(expect.begin(), expect.end());
    for (int n = 0; n < 8; ++n)
        CHECK(es.eigenvalues()[n] == doctest::Approx(expect[n]).epsilon(1e-12));
}

TEST_CASE("free Hamiltonian is the Kronecker sum with potentials")
{
    LatticeGrid g({4}, {1.0});
    Particle a{1.0, Support::full(), true, Eigen::VectorXd::LinSpaced(4, 0.0, 3.0)};
    Particle b{1.0, Support::full(), false, {}};
    ConfigurationSpace sp(g, ParticleSet({a, b}));
    Eigen::MatrixXd H = free_hamiltonian(sp);
    Eigen::MatrixXd T = support_kinetic(sp, 0);
    for (std::size_t x = 0; x < sp.size(); ++x)
        for (std::size_t y = 0; y < sp.size(); ++y) {
            double expect = 0.0;
            if (sp.local_index(x, 1) == sp.local_index(y, 1))
                expect += T(static_cast<Eigen::Index>(sp.local_index(x, 0)),
                            static_cast<Eigen::Index>(sp.local_index(y, 0)));
            if (x == y)
                expect += static_cast<double>(sp.local_index(x, 0));
            CHECK(H(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) ==
                  doctest::Approx(expect).epsilon(1e-12));
        }
}

TEST_CASE("gaussian states are normalised and centred")
{
    LatticeGrid g({32}, {1.0});
    ConfigurationSpace sp(g, ParticleSet({Particle{1.0, Support::full(), true, {}}}));
    StateVector psi = gaussian_state(sp, {{10.0}}, 2.0, {{0.5}});
    CHECK(psi.norm() == doctest::Approx(1.0));
    Eigen::VectorXd p = probabilities(psi);
    double mean = 0.0;
    for (int i = 0; i < 32; ++i)
        mean += p[i] * i;
    CHECK(mean == doctest::Approx(10.0).epsilon(1e-6));
    // wrapped centre
    StateVector w = gaussian_state(sp, {{-1.0}}, 1.0);
    CHECK(std::abs(w[31]) == doctest::Approx(std::abs(w.cwiseAbs().maxCoeff())));
    CHECK_THROWS_AS(gaussian_state(sp, {{1.0}}, 0.0), std::invalid_argument);
}

TEST_CASE("superposition and projector")
{
    StateVector a = StateVector::Zero(4), b = StateVector::Zero(4);
    a[0] = 1.0;
    b[3] = 1.0;
    StateVector s = superpose(a, b, std::numbers::pi / 2);
    CHECK(s.norm() == doctest::Approx(1.0));
    DensityMatrix r = projector(s);
    CHECK(std::abs(r.trace() - 1.0) < 1e-15);
    CHECK(std::abs(r(0, 3) - std::complex<double>(0.0, -0.5)) < 1e-15);
    CHECK_THROWS_AS(superpose(a, -a), std::domain_error);
}

TEST_CASE("double commutator matches dense products")
{
    const int n = 6;
    Eigen::VectorXd d = Eigen::VectorXd::Random(n);
    Eigen::VectorXd e = Eigen::VectorXd::Random(n);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Random(n, n);
    DensityMatrix rho = m * m.adjoint();
    rho /= rho.trace();
    CHECK((double_commutator(d, rho) - oracle::double_commutator(d, rho)).cwiseAbs().maxCoeff() < 1e-13);
    // polarisation: the bilinear form from squares
    DensityMatrix bil = double_commutator(d, e, 1.0, rho);
    DensityMatrix pol = 0.25 * (oracle::double_commutator(d + e, rho) - oracle::double_commutator(d - e, rho));
    CHECK((bil - pol).cwiseAbs().maxCoeff() < 1e-13);
}
