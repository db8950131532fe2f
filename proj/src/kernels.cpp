#include "collapse/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "collapse/spectral.hpp"

namespace collapse {

std::vector<double> smearing_multiplier(const LatticeGrid& grid, double sigma)
{
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("smearing width must be non-negative");
    std::vector<double> m(grid.size(), 1.0);
    if (sigma > 0.0) {
        const auto& k2 = grid.k_squared();
        for (std::size_t i = 0; i < m.size(); ++i)
            m[i] = std::exp(-0.5 * sigma * sigma * k2[i]);
    }
    return m;
}

SiteField smear(const LatticeGrid& grid, const SiteField& f, double sigma)
{
    if (sigma == 0.0)
        return f;
    return spectral::apply_multiplier(grid, f, smearing_multiplier(grid, sigma));
}

std::vector<double> coulomb_multiplier(const LatticeGrid& grid, double G)
{
    std::vector<double> m(grid.size(), 0.0);
    const auto& k2 = grid.k_squared();
    for (std::size_t i = 0; i < m.size(); ++i)
        if (k2[i] > 0.0)
            m[i] = -4.0 * std::numbers::pi * G / k2[i];
    return m;
}

SiteField coulomb_potential(const LatticeGrid& grid, const SiteField& density, double G)
{
    return spectral::apply_multiplier(grid, density, coulomb_multiplier(grid, G));
}

CorrelationKernel::CorrelationKernel(LatticeGrid grid, KernelKind kind, double strength, double G)
    : grid_(std::move(grid)), kind_(kind), strength_(strength), G_(G)
{
    const std::size_t M = grid_.size();
    mult_.assign(M, 0.0);
    inv_mult_.assign(M, 0.0);
    proj_.assign(M, 0.0);
    const auto& k2 = grid_.k_squared();
    for (std::size_t i = 0; i < M; ++i) {
        double m = 0.0;
        if (kind_ == KernelKind::csl)
            m = strength_;
        else if (k2[i] > 0.0)
            m = 4.0 * std::numbers::pi * strength_ * G_ / k2[i];
        mult_[i] = m;
        if (m > 0.0) {
            inv_mult_[i] = 1.0 / m;
            proj_[i] = 1.0;
        }
    }
}

CorrelationKernel CorrelationKernel::csl(const LatticeGrid& grid, double gamma)
{
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw std::invalid_argument("CSL strength gamma must be positive");
    return CorrelationKernel(grid, KernelKind::csl, gamma, 0.0);
}

CorrelationKernel CorrelationKernel::dp(const LatticeGrid& grid, double kappa, double G)
{
    if (!(kappa > 0.0) || !std::isfinite(kappa))
        throw std::invalid_argument("DP parameter kappa must be positive");
    if (!(G > 0.0) || !std::isfinite(G))
        throw std::invalid_argument("DP kernel needs G > 0");
    return CorrelationKernel(grid, KernelKind::dp, kappa, G);
}

SiteField CorrelationKernel::apply(const SiteField& f) const
{
    return spectral::apply_multiplier(grid_, f, mult_);
}

SiteField CorrelationKernel::apply_inverse(const SiteField& f) const
{
    return spectral::apply_multiplier(grid_, f, inv_mult_);
}

SiteField CorrelationKernel::project(const SiteField& f) const
{
    if (kind_ == KernelKind::csl)
        return f;
    return spectral::apply_multiplier(grid_, f, proj_);
}

namespace {

Eigen::MatrixXd lattice_matrix(const LatticeGrid& grid, const std::vector<double>& mult)
{
    const auto M = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd K(M, M);
    SiteField e = SiteField::Zero(M);
    for (Eigen::Index s = 0; s < M; ++s) {
        e.setZero();
        e[s] = 1.0;
        K.col(s) = spectral::apply_multiplier(grid, e, mult) / grid.cell_volume();
    }
    return K;
}

}  // namespace

Eigen::MatrixXd CorrelationKernel::matrix() const
{
    return lattice_matrix(grid_, mult_);
}

Eigen::MatrixXd CorrelationKernel::inverse_matrix() const
{
    return lattice_matrix(grid_, inv_mult_);
}

double kernel_quadratic_form(const CorrelationKernel& kernel, const SiteField& f, const SiteField& g)
{
    return spectral::bilinear(kernel.grid(), f, g, kernel.multiplier());
}

double inverse_quadratic_form(const CorrelationKernel& kernel, const SiteField& f, const SiteField& g)
{
    return spectral::bilinear(kernel.grid(), f, g, kernel.inverse_multiplier());
}

double gradient_inner_product(const LatticeGrid& grid, const SiteField& f, const SiteField& g)
{
    double s = 0.0;
    for (int a = 0; a < grid.dimension(); ++a) {
        auto df = spectral::gradient(grid, f, a);
        auto dg = &f == &g ? df : spectral::gradient(grid, g, a);
        s += (df.conjugate().cwiseProduct(dg)).sum().real();
    }
    return s * grid.cell_volume();
}

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t index)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index & 0xffffffffu), static_cast<std::uint32_t>(index >> 32)};
    engine_.seed(seq);
}

Eigen::VectorXd NoiseStream::normals(Eigen::Index n)
{
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i)
        w[i] = dist_(engine_);
    return w;
}

SiteField sample_noise(const CorrelationKernel& kernel, double dt, NoiseStream& rng)
{
    if (!(dt > 0.0))
        throw std::invalid_argument("time step must be positive");
    const LatticeGrid& grid = kernel.grid();
    Eigen::VectorXd w = rng.normals(static_cast<Eigen::Index>(grid.size()));
    const double scale = 1.0 / std::sqrt(dt * grid.cell_volume());
    if (kernel.kind() == KernelKind::csl)
        return w * (scale / std::sqrt(kernel.strength()));
    std::vector<double> root(kernel.inverse_multiplier());
    for (double& v : root)
        v = std::sqrt(v);
    return spectral::apply_multiplier(grid, w, root) * scale;
}

}  // namespace collapse
