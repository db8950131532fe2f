#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "collapse/kernels.hpp"
#include "collapse/spectral.hpp"
#include "oracles.hpp"

using namespace collapse;

namespace {

SiteField random_field(std::size_t n, unsigned seed)
{
    std::srand(seed);
    return SiteField::Random(static_cast<Eigen::Index>(n));
}

}  // namespace

TEST_CASE("FFT round trip and normalisation")
{
    LatticeGrid g({6, 5, 4}, {1.0});
    SiteField f = random_field(g.size(), 1);
    auto F = spectral::forward(g, f);
    CHECK(std::abs(F[0].real() - f.sum()) < 1e-12);
    SiteField back = spectral::inverse_real(g, F);
    CHECK((back - f).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("bilinear form matches the real-space kernel sum")
{
    LatticeGrid g({8, 6}, {0.5, 0.7});
    auto K = CorrelationKernel::dp(g, 2.0, 1.3);
    SiteField f = random_field(g.size(), 2), h = random_field(g.size(), 3);
    Eigen::MatrixXd M = K.matrix();
    const double dv = g.cell_volume();
    const double direct = dv * dv * f.dot(M * h);
    CHECK(kernel_quadratic_form(K, f, h) == doctest::Approx(direct).epsilon(1e-12));
    CHECK((K.apply(h) - dv * M * h).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("correlation, convolution and translation by brute force")
{
    LatticeGrid g({5, 4}, {1.0, 2.0});
    SiteField f = random_field(g.size(), 4), h = random_field(g.size(), 5);
    SiteField corr = spectral::correlation(g, f, h);
    SiteField conv = spectral::convolution(g, f, h);
    for (std::size_t s = 0; s < g.size(); ++s) {
        auto cs = g.coords(s);
        double c = 0.0, v = 0.0;
        for (std::size_t r = 0; r < g.size(); ++r) {
            auto cr = g.coords(r);
            std::vector<int> plus = {cr[0] + cs[0], cr[1] + cs[1]};
            std::vector<int> minus = {cs[0] - cr[0], cs[1] - cr[1]};
            c += f[r] * h[g.site(plus)];
            v += f[r] * h[g.site(minus)];
        }
        CHECK(corr[s] == doctest::Approx(c * g.cell_volume()).epsilon(1e-12));
        CHECK(conv[s] == doctest::Approx(v * g.cell_volume()).epsilon(1e-12));
    }
    const std::size_t site = g.site(std::vector<int>{2, 3});
    SiteField t = spectral::translate(g, f, site);
    for (std::size_t r = 0; r < g.size(); ++r) {
        auto cr = g.coords(r);
        std::vector<int> back = {cr[0] - 2, cr[1] - 3};
        CHECK(t[r] == doctest::Approx(f[g.site(back)]));
    }
}

TEST_CASE("spectral gradient satisfies Parseval with k squared")
{
    LatticeGrid g({8, 8, 8}, {1.0});
    SiteField f = random_field(g.size(), 6);
    double grad = gradient_inner_product(g, f, f);
    double spec = spectral::bilinear(g, f, f, g.k_squared());
    CHECK(grad == doctest::Approx(spec).epsilon(1e-12));
}

TEST_CASE("smearing conserves mass and matches the Gaussian profile")
{
    LatticeGrid g({64}, {0.5});
    SiteField d = SiteField::Zero(64);
    d[0] = 1.0 / g.cell_volume();
    SiteField s = smear(g, d, 2.0);
    CHECK(s.sum() * g.cell_volume() == doctest::Approx(1.0).epsilon(1e-13));
    for (int i = 0; i < 8; ++i) {
        const double x = i * 0.5;
        const double expect = std::exp(-x * x / 8.0) / std::sqrt(2.0 * std::numbers::pi * 4.0);
        CHECK(s[i] == doctest::Approx(expect).epsilon(1e-6));
    }
    CHECK((smear(g, d, 0.0) - d).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Poisson solve inverts the Laplacian on non-zero modes")
{
    LatticeGrid g({8, 8, 8}, {1.0});
    SiteField rho = random_field(g.size(), 7);
    rho.array() -= rho.mean();
    SiteField phi = coulomb_potential(g, rho, 0.7);
    std::vector<double> lap(g.k_squared());
    for (double& v : lap)
        v = -v;
    SiteField back = spectral::apply_multiplier(g, phi, lap);
    CHECK((back - 4.0 * std::numbers::pi * 0.7 * rho).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("kernel inverse round trip")
{
    LatticeGrid g({6, 6, 6}, {1.0});
    for (auto K : {CorrelationKernel::csl(g, 2.5), CorrelationKernel::dp(g, 2.0, 0.3)}) {
        SiteField f = random_field(g.size(), 8);
        SiteField pf = K.project(f);
        SiteField rt = K.apply_inverse(K.apply(pf));
        CHECK((rt - pf).cwiseAbs().maxCoeff() < 1e-12 * pf.cwiseAbs().maxCoeff());
        SiteField rt2 = K.apply(K.apply_inverse(pf));
        CHECK((rt2 - pf).cwiseAbs().maxCoeff() < 1e-12 * pf.cwiseAbs().maxCoeff());
    }
    CHECK_THROWS_AS(CorrelationKernel::csl(g, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(CorrelationKernel::dp(g, -1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(CorrelationKernel::dp(g, 2.0, 0.0), std::invalid_argument);
}

TEST_CASE("DP kernel agrees with the real-space 1/r double sum for a neutral source")
{
    LatticeGrid g({32, 32, 32}, {1.0});
    const double kappa = 2.0, G = 1.0;
    auto K = CorrelationKernel::dp(g, kappa, G);
    SiteField d = SiteField::Zero(static_cast<Eigen::Index>(g.size()));
    d[g.site(std::vector<int>{14, 16, 16})] = 1.0;
    d[g.site(std::vector<int>{18, 16, 16})] = -1.0;
    SiteField f = smear(g, d, 1.5);
    const double spectral_q = kernel_quadratic_form(K, f, f);
    const double real_q = oracle::coulomb_double_sum(g.dims(), f, kappa * G);
    CHECK(spectral_q == doctest::Approx(real_q).epsilon(0.01));
}

TEST_CASE("noise streams are reproducible and independent")
{
    NoiseStream a(7, 3), b(7, 3), c(7, 4), d(8, 3);
    auto va = a.normals(100), vb = b.normals(100), vc = c.normals(100), vd = d.normals(100);
    CHECK(va == vb);
    CHECK(va != vc);
    CHECK(va != vd);
}

TEST_CASE("sampled noise has the inverse-kernel covariance")
{
    LatticeGrid g({4, 4}, {1.0, 0.5});
    const double dt = 0.01;
    for (auto K : {CorrelationKernel::csl(g, 3.0), CorrelationKernel::dp(g, 2.0, 1.0)}) {
        NoiseStream rng(11);
        const int n = 40000;
        const auto N = static_cast<Eigen::Index>(g.size());
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(N, N);
        for (int i = 0; i < n; ++i) {
            SiteField xi = sample_noise(K, dt, rng);
            cov += xi * xi.transpose();
        }
        cov /= n;
        Eigen::MatrixXd expect = K.inverse_matrix() / dt;
        CHECK((cov - expect).norm() < 0.05 * expect.norm());
    }
}
