#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace collapse {

using SiteField = Eigen::VectorXd;      // one real value per lattice site
using DiagonalField = Eigen::VectorXd;  // one real value per configuration
using DensityMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

/// Periodic rectangular lattice in 1, 2 or 3 dimensions.
/// Sites are stored row-major: the last axis varies fastest.
class LatticeGrid {
public:
    LatticeGrid(std::vector<int> dims, std::vector<double> spacing);

    int dimension() const { return static_cast<int>(dims_.size()); }
    const std::vector<int>& dims() const { return dims_; }
    const std::vector<double>& spacing() const { return spacing_; }
    std::size_t size() const { return size_; }
    double cell_volume() const { return cell_volume_; }
    double length(int axis) const { return dims_[axis] * spacing_[axis]; }

    std::vector<int> coords(std::size_t site) const;
    /// Coordinates are wrapped periodically.
    std::size_t site(std::span<const int> coords) const;
    /// Site displaced by `shift` lattice steps along each axis.
    std::size_t shifted(std::size_t site, std::span<const int> shift) const;

    /// Folded wavenumber of Fourier index n along an axis, in [-pi/a, pi/a].
    double wavenumber(int axis, int n) const;
    /// |k|^2 of every Fourier mode, in the same ordering as the sites.
    const std::vector<double>& k_squared() const { return k2_; }

    /// Minimum-image displacement from site a to site b along an axis.
    double displacement(std::size_t a, std::size_t b, int axis) const;
    double distance(std::size_t a, std::size_t b) const;

    bool operator==(const LatticeGrid& other) const;

private:
    std::vector<int> dims_;
    std::vector<double> spacing_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
    double cell_volume_ = 0.0;
    std::vector<double> k2_;
};

/// Region of the field grid a particle may occupy.
struct Support {
    enum class Kind { full, line };
    Kind kind = Kind::full;
    int axis = 0;
    std::vector<int> origin;  // a point on the line; empty means the grid origin

    static Support full() { return {}; }
    static Support line(int axis, std::vector<int> origin = {}) { return {Kind::line, axis, std::move(origin)}; }
};

struct Particle {
    double mass = 1.0;
    Support support;
    bool kinetic = true;
    /// Optional external potential, one value per support point.
    std::optional<Eigen::VectorXd> potential;
};

class ParticleSet {
public:
    ParticleSet() = default;
    explicit ParticleSet(std::vector<Particle> particles);

    std::size_t size() const { return particles_.size(); }
    const Particle& operator[](std::size_t n) const { return particles_[n]; }
    const std::vector<Particle>& all() const { return particles_; }
    double total_mass() const;

private:
    std::vector<Particle> particles_;
};

/// Tensor product of the particle supports. Particle 0 is the most
/// significant index.
class ConfigurationSpace {
public:
    ConfigurationSpace(LatticeGrid grid, ParticleSet particles);

    const LatticeGrid& grid() const { return grid_; }
    const ParticleSet& particles() const { return particles_; }
    std::size_t particle_count() const { return particles_.size(); }
    std::size_t size() const { return size_; }

    std::size_t support_size(std::size_t n) const { return support_sites_[n].size(); }
    const std::vector<std::size_t>& support_sites(std::size_t n) const { return support_sites_[n]; }
    /// Grid the particle moves on: the field grid itself, or a 1D chain.
    LatticeGrid support_grid(std::size_t n) const;

    std::vector<std::size_t> local_indices(std::size_t config) const;
    std::size_t config_index(std::span<const std::size_t> local) const;
    std::size_t local_index(std::size_t config, std::size_t n) const;
    /// Grid site occupied by each particle.
    std::vector<std::size_t> sites(std::size_t config) const;
    std::size_t site(std::size_t config, std::size_t n) const;
    /// Configuration with every particle at the given grid sites.
    std::size_t config_at_sites(std::span<const std::size_t> grid_sites) const;

private:
    LatticeGrid grid_;
    ParticleSet particles_;
    std::vector<std::vector<std::size_t>> support_sites_;
    std::vector<std::vector<long>> site_to_local_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

/// rho_hat(r) on every configuration: sum_n m_n delta(r, x_n) / dV.
DiagonalField mass_density_field(const ConfigurationSpace& space, std::size_t site);

/// Kinetic term of one particle on its support, k^2/2m spectrally.
Eigen::MatrixXd support_kinetic(const ConfigurationSpace& space, std::size_t n);

/// Free Hamiltonian: kinetic Kronecker sum plus external potentials.
Eigen::MatrixXd free_hamiltonian(const ConfigurationSpace& space);

/// Diagonal of rho normalised to unit sum.
Eigen::VectorXd probabilities(const DensityMatrix& rho);
Eigen::VectorXd probabilities(const StateVector& psi);

/// Mass distribution on the field grid: sum_n m_n P_n(r) / dV.
SiteField mean_mass_density(const ConfigurationSpace& space, const Eigen::VectorXd& probs);

/// Product of Gaussian packets, one per particle, centred at centers[n]
/// (physical coordinates) with position spread `width` and mean momentum
/// momenta[n]. Distances use the minimum image.
StateVector gaussian_state(const ConfigurationSpace& space, const std::vector<std::vector<double>>& centers,
                           double width, const std::vector<std::vector<double>>& momenta = {});
/// Normalised (a + e^{i phase} b).
StateVector superpose(const StateVector& a, const StateVector& b, double phase = 0.0);
DensityMatrix projector(const StateVector& psi);

/// [D,[D,rho]] for diagonal D: (D(x) - D(y))^2 rho_xy.
DensityMatrix double_commutator(const DiagonalField& d, const DensityMatrix& rho);
/// weight * (D1(x) - D1(y)) (D2(x) - D2(y)) rho_xy, the symmetric bilinear form.
DensityMatrix double_commutator(const DiagonalField& d1, const DiagonalField& d2, double weight,
                                const DensityMatrix& rho);

}  // namespace collapse
