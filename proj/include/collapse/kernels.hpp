#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "collapse/lattice.hpp"

namespace collapse {

/// Gaussian smearing exp(-sigma^2 k^2 / 2) applied spectrally. sigma = 0 is the identity.
SiteField smear(const LatticeGrid& grid, const SiteField& f, double sigma);
std::vector<double> smearing_multiplier(const LatticeGrid& grid, double sigma);

/// Periodic Poisson solve lap(phi) = 4 pi G rho with the k = 0 mode set to zero.
SiteField coulomb_potential(const LatticeGrid& grid, const SiteField& density, double G);
std::vector<double> coulomb_multiplier(const LatticeGrid& grid, double G);

enum class KernelKind { csl, dp };

/// Noise correlation kernel gamma(r - s), stored by its Fourier multiplier.
/// Modes with zero multiplier are outside the kernel's range and are
/// dropped by the inverse.
class CorrelationKernel {
public:
    static CorrelationKernel csl(const LatticeGrid& grid, double gamma);
    static CorrelationKernel dp(const LatticeGrid& grid, double kappa, double G);

    KernelKind kind() const { return kind_; }
    const LatticeGrid& grid() const { return grid_; }
    /// gamma for CSL, kappa for DP.
    double strength() const { return strength_; }
    double G() const { return G_; }

    const std::vector<double>& multiplier() const { return mult_; }
    const std::vector<double>& inverse_multiplier() const { return inv_mult_; }
    /// 1 on retained modes, 0 on dropped ones.
    const std::vector<double>& projector() const { return proj_; }

    /// int ds gamma(r - s) f(s)
    SiteField apply(const SiteField& f) const;
    /// int ds gamma^{-1}(r - s) f(s), on the retained modes.
    SiteField apply_inverse(const SiteField& f) const;
    /// Projection onto the retained modes.
    SiteField project(const SiteField& f) const;

    /// Lattice matrices Gamma_rs and Gamma^{-1}_rs, with dV sum_s Gamma_rs f_s = K[f].
    Eigen::MatrixXd matrix() const;
    Eigen::MatrixXd inverse_matrix() const;

private:
    CorrelationKernel(LatticeGrid grid, KernelKind kind, double strength, double G);

    LatticeGrid grid_;
    KernelKind kind_;
    double strength_;
    double G_;
    std::vector<double> mult_, inv_mult_, proj_;
};

/// Q(f, g) = int dr ds f(r) gamma(r - s) g(s)
double kernel_quadratic_form(const CorrelationKernel& kernel, const SiteField& f, const SiteField& g);
/// The same with gamma^{-1}.
double inverse_quadratic_form(const CorrelationKernel& kernel, const SiteField& f, const SiteField& g);

/// int dr grad f . grad g using the complex spectral gradient.
double gradient_inner_product(const LatticeGrid& grid, const SiteField& f, const SiteField& g);

/// Gaussian random numbers for one trajectory. Each trajectory owns its
/// stream, seeded from (base seed, trajectory index).
class NoiseStream {
public:
    explicit NoiseStream(std::uint64_t seed, std::uint64_t index = 0);
    double normal() { return dist_(engine_); }
    Eigen::VectorXd normals(Eigen::Index n);

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> dist_{0.0, 1.0};
};

/// One increment of the signal noise over dt, with covariance
/// gamma^{-1}(r - s) / dt in the continuum sense.
SiteField sample_noise(const CorrelationKernel& kernel, double dt, NoiseStream& rng);

}  // namespace collapse
