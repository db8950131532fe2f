#include "collapse/lattice.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "collapse/spectral.hpp"

namespace collapse {

namespace {

int wrap(int c, int n)
{
    int r = c % n;
    return r < 0 ? r + n : r;
}

}  // namespace

LatticeGrid::LatticeGrid(std::vector<int> dims, std::vector<double> spacing)
    : dims_(std::move(dims)), spacing_(std::move(spacing))
{
    if (dims_.empty() || dims_.size() > 3)
        throw std::invalid_argument("lattice must have 1, 2 or 3 axes");
    if (spacing_.size() == 1 && dims_.size() > 1)
        spacing_.assign(dims_.size(), spacing_[0]);
    if (spacing_.size() != dims_.size())
        throw std::invalid_argument("lattice spacing must match the number of axes");
    size_ = 1;
    cell_volume_ = 1.0;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        if (dims_[i] < 1)
            throw std::invalid_argument("lattice extent must be positive");
        if (!(spacing_[i] > 0.0) || !std::isfinite(spacing_[i]))
            throw std::invalid_argument("lattice spacing must be positive");
        size_ *= static_cast<std::size_t>(dims_[i]);
        cell_volume_ *= spacing_[i];
    }
    strides_.assign(dims_.size(), 1);
    for (int i = static_cast<int>(dims_.size()) - 2; i >= 0; --i)
        strides_[i] = strides_[i + 1] * static_cast<std::size_t>(dims_[i + 1]);

    k2_.assign(size_, 0.0);
    for (std::size_t s = 0; s < size_; ++s) {
        auto c = coords(s);
        double k2 = 0.0;
        for (int a = 0; a < dimension(); ++a) {
            double k = wavenumber(a, c[a]);
            k2 += k * k;
        }
        k2_[s] = k2;
    }
}

std::vector<int> LatticeGrid::coords(std::size_t site) const
{
    std::vector<int> c(dims_.size());
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        c[i] = static_cast<int>((site / strides_[i]) % static_cast<std::size_t>(dims_[i]));
    }
    return c;
}

std::size_t LatticeGrid::site(std::span<const int> c) const
{
    if (c.size() != dims_.size())
        throw std::invalid_argument("coordinate rank does not match lattice");
    std::size_t s = 0;
    for (std::size_t i = 0; i < dims_.size(); ++i)
        s += static_cast<std::size_t>(wrap(c[i], dims_[i])) * strides_[i];
    return s;
}

std::size_t LatticeGrid::shifted(std::size_t s, std::span<const int> shift) const
{
    auto c = coords(s);
    for (std::size_t i = 0; i < c.size() && i < shift.size(); ++i)
        c[i] += shift[i];
    return site(c);
}

double LatticeGrid::wavenumber(int axis, int n) const
{
    int N = dims_[axis];
    int m = wrap(n, N);
    if (m > N / 2)
        m -= N;
    return 2.0 * std::numbers::pi * m / (N * spacing_[axis]);
}

double LatticeGrid::displacement(std::size_t a, std::size_t b, int axis) const
{
    int N = dims_[axis];
    int d = coords(b)[axis] - coords(a)[axis];
    d = wrap(d, N);
    if (d > N / 2)
        d -= N;
    return d * spacing_[axis];
}

double LatticeGrid::distance(std::size_t a, std::size_t b) const
{
    double r2 = 0.0;
    for (int i = 0; i < dimension(); ++i) {
        double d = displacement(a, b, i);
        r2 += d * d;
    }
    return std::sqrt(r2);
}

bool LatticeGrid::operator==(const LatticeGrid& other) const
{
    return dims_ == other.dims_ && spacing_ == other.spacing_;
}

ParticleSet::ParticleSet(std::vector<Particle> particles) : particles_(std::move(particles))
{
    for (const auto& p : particles_) {
        if (!(p.mass > 0.0) || !std::isfinite(p.mass))
            throw std::invalid_argument("particle mass must be positive");
    }
}

double ParticleSet::total_mass() const
{
    double m = 0.0;
    for (const auto& p : particles_)
        m += p.mass;
    return m;
}

ConfigurationSpace::ConfigurationSpace(LatticeGrid grid, ParticleSet particles)
    : grid_(std::move(grid)), particles_(std::move(particles))
{
    if (particles_.size() == 0)
        throw std::invalid_argument("at least one particle is required");
    const std::size_t P = particles_.size();
    support_sites_.resize(P);
    site_to_local_.assign(P, std::vector<long>(grid_.size(), -1));
    for (std::size_t n = 0; n < P; ++n) {
        const Support& sup = particles_[n].support;
        auto& sites = support_sites_[n];
        if (sup.kind == Support::Kind::full) {
            sites.resize(grid_.size());
            for (std::size_t s = 0; s < grid_.size(); ++s)
                sites[s] = s;
        } else {
            if (sup.axis < 0 || sup.axis >= grid_.dimension())
                throw std::invalid_argument("line support axis out of range");
            std::vector<int> c = sup.origin;
            if (c.empty())
                c.assign(grid_.dimension(), 0);
            if (static_cast<int>(c.size()) != grid_.dimension())
                throw std::invalid_argument("line support origin has wrong rank");
            c[sup.axis] = 0;
            for (int i = 0; i < grid_.dims()[sup.axis]; ++i) {
                c[sup.axis] = i;
                sites.push_back(grid_.site(c));
            }
        }
        for (std::size_t l = 0; l < sites.size(); ++l)
            site_to_local_[n][sites[l]] = static_cast<long>(l);
        const auto& pot = particles_[n].potential;
        if (pot && static_cast<std::size_t>(pot->size()) != sites.size())
            throw std::invalid_argument("external potential size does not match particle support");
    }
    strides_.assign(P, 1);
    for (int n = static_cast<int>(P) - 2; n >= 0; --n)
        strides_[n] = strides_[n + 1] * support_sites_[n + 1].size();
    size_ = strides_[0] * support_sites_[0].size();
}

LatticeGrid ConfigurationSpace::support_grid(std::size_t n) const
{
    const Support& sup = particles_[n].support;
    if (sup.kind == Support::Kind::full)
        return grid_;
    return LatticeGrid({grid_.dims()[sup.axis]}, {grid_.spacing()[sup.axis]});
}

std::vector<std::size_t> ConfigurationSpace::local_indices(std::size_t config) const
{
    std::vector<std::size_t> l(particles_.size());
    for (std::size_t n = 0; n < l.size(); ++n)
        l[n] = local_index(config, n);
    return l;
}

std::size_t ConfigurationSpace::local_index(std::size_t config, std::size_t n) const
{
    return (config / strides_[n]) % support_sites_[n].size();
}

std::size_t ConfigurationSpace::config_index(std::span<const std::size_t> local) const
{
    if (local.size() != particles_.size())
        throw std::invalid_argument("configuration needs one index per particle");
    std::size_t x = 0;
    for (std::size_t n = 0; n < local.size(); ++n) {
        if (local[n] >= support_sites_[n].size())
            throw std::out_of_range("support index out of range");
        x += local[n] * strides_[n];
    }
    return x;
}

std::vector<std::size_t> ConfigurationSpace::sites(std::size_t config) const
{
    std::vector<std::size_t> s(particles_.size());
    for (std::size_t n = 0; n < s.size(); ++n)
        s[n] = site(config, n);
    return s;
}

std::size_t ConfigurationSpace::site(std::size_t config, std::size_t n) const
{
    return support_sites_[n][local_index(config, n)];
}

std::size_t ConfigurationSpace::config_at_sites(std::span<const std::size_t> grid_sites) const
{
    if (grid_sites.size() != particles_.size())
        throw std::invalid_argument("configuration needs one site per particle");
    std::vector<std::size_t> local(grid_sites.size());
    for (std::size_t n = 0; n < grid_sites.size(); ++n) {
        long l = site_to_local_[n].at(grid_sites[n]);
        if (l < 0)
            throw std::invalid_argument("site " + std::to_string(grid_sites[n]) + " is outside the support of particle " +
                                        std::to_string(n));
        local[n] = static_cast<std::size_t>(l);
    }
    return config_index(local);
}

DiagonalField mass_density_field(const ConfigurationSpace& space, std::size_t site)
{
    DiagonalField d = DiagonalField::Zero(static_cast<Eigen::Index>(space.size()));
    const double inv_dv = 1.0 / space.grid().cell_volume();
    for (std::size_t x = 0; x < space.size(); ++x) {
        for (std::size_t n = 0; n < space.particle_count(); ++n) {
            if (space.site(x, n) == site)
                d[x] += space.particles()[n].mass * inv_dv;
        }
    }
    return d;
}

Eigen::MatrixXd support_kinetic(const ConfigurationSpace& space, std::size_t n)
{
    LatticeGrid g = space.support_grid(n);
    const double m = space.particles()[n].mass;
    std::vector<double> mult(g.k_squared());
    for (double& v : mult)
        v /= 2.0 * m;
    const auto S = static_cast<Eigen::Index>(g.size());
    Eigen::MatrixXd T(S, S);
    SiteField e = SiteField::Zero(S);
    for (Eigen::Index j = 0; j < S; ++j) {
        e.setZero();
        e[j] = 1.0;
        T.col(j) = spectral::apply_multiplier(g, e, mult);
    }
    return 0.5 * (T + T.transpose());
}

Eigen::MatrixXd free_hamiltonian(const ConfigurationSpace& space)
{
    const auto D = static_cast<Eigen::Index>(space.size());
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(D, D);
    const std::size_t P = space.particle_count();
    for (std::size_t n = 0; n < P; ++n) {
        const Particle& p = space.particles()[n];
        if (p.kinetic) {
            Eigen::MatrixXd T = support_kinetic(space, n);
            const std::size_t S = space.support_size(n);
            for (std::size_t x = 0; x < space.size(); ++x) {
                auto local = space.local_indices(x);
                const std::size_t lx = local[n];
                for (std::size_t j = 0; j < S; ++j) {
                    local[n] = j;
                    H(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(space.config_index(local))) +=
                        T(static_cast<Eigen::Index>(lx), static_cast<Eigen::Index>(j));
                }
            }
        }
        if (p.potential) {
            for (std::size_t x = 0; x < space.size(); ++x)
                H(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)) +=
                    (*p.potential)[static_cast<Eigen::Index>(space.local_index(x, n))];
        }
    }
    return H;
}

Eigen::VectorXd probabilities(const DensityMatrix& rho)
{
    Eigen::VectorXd p = rho.diagonal().real();
    double tr = p.sum();
    if (!(tr > 0.0))
        throw std::domain_error("density matrix has non-positive trace");
    return p / tr;
}

Eigen::VectorXd probabilities(const StateVector& psi)
{
    Eigen::VectorXd p = psi.cwiseAbs2();
    double n = p.sum();
    if (!(n > 0.0))
        throw std::domain_error("state vector has zero norm");
    return p / n;
}

SiteField mean_mass_density(const ConfigurationSpace& space, const Eigen::VectorXd& probs)
{
    SiteField rho = SiteField::Zero(static_cast<Eigen::Index>(space.grid().size()));
    const double inv_dv = 1.0 / space.grid().cell_volume();
    for (std::size_t x = 0; x < space.size(); ++x) {
        const double px = probs[static_cast<Eigen::Index>(x)];
        if (px == 0.0)
            continue;
        for (std::size_t n = 0; n < space.particle_count(); ++n)
            rho[static_cast<Eigen::Index>(space.site(x, n))] += space.particles()[n].mass * px * inv_dv;
    }
    return rho;
}

StateVector gaussian_state(const ConfigurationSpace& space, const std::vector<std::vector<double>>& centers,
                           double width, const std::vector<std::vector<double>>& momenta)
{
    const LatticeGrid& g = space.grid();
    const std::size_t P = space.particle_count();
    if (centers.size() != P)
        throw std::invalid_argument("gaussian_state needs one centre per particle");
    if (!momenta.empty() && momenta.size() != P)
        throw std::invalid_argument("gaussian_state needs one momentum per particle");
    if (!(width > 0.0))
        throw std::invalid_argument("packet width must be positive");
    std::vector<Eigen::VectorXcd> factors(P);
    for (std::size_t n = 0; n < P; ++n) {
        if (static_cast<int>(centers[n].size()) != g.dimension())
            throw std::invalid_argument("packet centre has wrong rank");
        if (!momenta.empty() && static_cast<int>(momenta[n].size()) != g.dimension())
            throw std::invalid_argument("packet momentum has wrong rank");
        const auto& sites = space.support_sites(n);
        Eigen::VectorXcd f(static_cast<Eigen::Index>(sites.size()));
        for (std::size_t l = 0; l < sites.size(); ++l) {
            auto c = g.coords(sites[l]);
            double r2 = 0.0, phase = 0.0;
            for (int a = 0; a < g.dimension(); ++a) {
                const double L = g.length(a);
                double d = c[a] * g.spacing()[a] - centers[n][a];
                d -= L * std::round(d / L);
                r2 += d * d;
                if (!momenta.empty())
                    phase += momenta[n][a] * d;
            }
            f[static_cast<Eigen::Index>(l)] = std::polar(std::exp(-r2 / (4.0 * width * width)), phase);
        }
        factors[n] = f / f.norm();
    }
    StateVector psi(static_cast<Eigen::Index>(space.size()));
    for (std::size_t x = 0; x < space.size(); ++x) {
        std::complex<double> v = 1.0;
        for (std::size_t n = 0; n < P; ++n)
            v *= factors[n][static_cast<Eigen::Index>(space.local_index(x, n))];
        psi[static_cast<Eigen::Index>(x)] = v;
    }
    return psi / psi.norm();
}

StateVector superpose(const StateVector& a, const StateVector& b, double phase)
{
    StateVector s = a + std::polar(1.0, phase) * b;
    const double n = s.norm();
    if (!(n > 0.0))
        throw std::domain_error("superposition vanishes");
    return s / n;
}

DensityMatrix projector(const StateVector& psi)
{
    return psi * psi.adjoint() / psi.squaredNorm();
}

DensityMatrix double_commutator(const DiagonalField& d, const DensityMatrix& rho)
{
    return double_commutator(d, d, 1.0, rho);
}

DensityMatrix double_commutator(const DiagonalField& d1, const DiagonalField& d2, double weight,
                                const DensityMatrix& rho)
{
    if (d1.size() != rho.rows() || d2.size() != rho.rows() || rho.rows() != rho.cols())
        throw std::invalid_argument("diagonal field and density matrix dimensions differ");
    DensityMatrix out(rho.rows(), rho.cols());
    for (Eigen::Index y = 0; y < rho.cols(); ++y)
        for (Eigen::Index x = 0; x < rho.rows(); ++x)
            out(x, y) = weight * (d1[x] - d1[y]) * (d2[x] - d2[y]) * rho(x, y);
    return out;
}

}  // namespace collapse
