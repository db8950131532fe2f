#include "collapse/models.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "collapse/spectral.hpp"

namespace collapse {

namespace {

constexpr double max_dense_entries = 4e7;

SiteField point_density(const LatticeGrid& grid)
{
    SiteField d = SiteField::Zero(static_cast<Eigen::Index>(grid.size()));
    d[0] = 1.0 / grid.cell_volume();
    return d;
}

void require(bool ok, const std::string& message)
{
    if (!ok)
        throw std::invalid_argument(message);
}

// Grid site of the displacement from site b to site a.
std::size_t difference_site(const LatticeGrid& grid, std::size_t a, std::size_t b)
{
    auto ca = grid.coords(a);
    auto cb = grid.coords(b);
    for (std::size_t i = 0; i < ca.size(); ++i)
        ca[i] -= cb[i];
    return grid.site(ca);
}

}  // namespace

std::string to_string(ModelKind kind)
{
    switch (kind) {
    case ModelKind::generic: return "generic";
    case ModelKind::csl: return "csl";
    case ModelKind::dp: return "dp";
    case ModelKind::sn: return "sn";
    case ModelKind::pair: return "pair";
    }
    return "unknown";
}

ModelKind model_kind_from_string(const std::string& name)
{
    if (name == "generic") return ModelKind::generic;
    if (name == "csl") return ModelKind::csl;
    if (name == "dp") return ModelKind::dp;
    if (name == "sn") return ModelKind::sn;
    if (name == "pair") return ModelKind::pair;
    throw std::invalid_argument("unknown model kind '" + name + "'");
}

const CorrelationKernel& Model::kernel() const
{
    if (!kernel_)
        throw std::logic_error("model " + to_string(spec_.kind) + " has no noise kernel");
    return *kernel_;
}

const Propagator& Model::propagator() const
{
    if (!propagator_)
        throw std::logic_error("model was built without dynamics");
    return *propagator_;
}

SiteField Model::sum_of_profiles(const SiteField& profile, std::size_t config) const
{
    SiteField out = SiteField::Zero(profile.size());
    for (std::size_t n = 0; n < space_.particle_count(); ++n)
        out += space_.particles()[n].mass * spectral::translate(grid(), profile, space_.site(config, n));
    return out;
}

SiteField Model::density_field(std::size_t config) const
{
    return sum_of_profiles(density_profile_, config);
}

SiteField Model::potential_field(std::size_t config) const
{
    return sum_of_profiles(potential_profile_, config);
}

Eigen::MatrixXd Model::observables() const
{
    const auto M = static_cast<Eigen::Index>(grid().size());
    const auto D = static_cast<Eigen::Index>(space_.size());
    require(static_cast<double>(M) * static_cast<double>(D) <= max_dense_entries,
            "configuration space too large for dense monitoring");
    Eigen::MatrixXd A(M, D);
    for (Eigen::Index x = 0; x < D; ++x)
        A.col(x) = density_field(static_cast<std::size_t>(x));
    return A;
}

Eigen::MatrixXd Model::feedback_operators() const
{
    const auto M = static_cast<Eigen::Index>(grid().size());
    const auto D = static_cast<Eigen::Index>(space_.size());
    require(static_cast<double>(M) * static_cast<double>(D) <= max_dense_entries,
            "configuration space too large for dense monitoring");
    Eigen::MatrixXd B(M, D);
    for (Eigen::Index x = 0; x < D; ++x)
        B.col(x) = potential_field(static_cast<std::size_t>(x));
    return B;
}

Model build_model(const ModelSpec& spec, const ConfigurationSpace& space, bool with_dynamics)
{
    require(spec.dt > 0.0 && std::isfinite(spec.dt), "time step dt must be positive");
    require(spec.G >= 0.0 && std::isfinite(spec.G), "G must be non-negative");
    const bool monitored = spec.kind == ModelKind::generic || spec.kind == ModelKind::csl || spec.kind == ModelKind::dp;

    Model model(spec, space);
    const LatticeGrid& grid = space.grid();
    if (monitored) {
        KernelKind kk = spec.kind == ModelKind::csl ? KernelKind::csl : KernelKind::dp;
        if (spec.kind == ModelKind::generic) {
            require(spec.kernel.has_value(), "generic model needs a kernel choice");
            kk = *spec.kernel;
        }
        require(std::isfinite(spec.sigma) && spec.sigma >= 0.0, "sigma must be non-negative");
        if (kk == KernelKind::dp && spec.feedback)
            require(spec.sigma > 0.0, "DP feedback with sigma = 0 diverges; sigma must be positive");
        require(spec.sigma > 0.0, "sigma must be positive for a monitored model");
        if (kk == KernelKind::csl) {
            require(spec.gamma > 0.0 && std::isfinite(spec.gamma), "gamma must be positive");
            model.kernel_ = CorrelationKernel::csl(grid, spec.gamma);
        } else {
            require(spec.kappa > 0.0 && std::isfinite(spec.kappa), "kappa must be positive");
            require(spec.G > 0.0, "the DP kernel needs G > 0");
            model.kernel_ = CorrelationKernel::dp(grid, spec.kappa, spec.G);
        }
        model.smeared_feedback_ = spec.smeared_feedback.value_or(kk == KernelKind::dp);
        const SiteField delta = point_density(grid);
        model.density_profile_ = smear(grid, delta, spec.sigma);
        if (spec.feedback)
            model.potential_profile_ =
                coulomb_potential(grid, model.smeared_feedback_ ? model.density_profile_ : delta, spec.G);
        else
            model.potential_profile_ = SiteField::Zero(delta.size());
    } else {
        model.smeared_feedback_ = false;
        model.density_profile_ = point_density(grid);
        model.potential_profile_ = coulomb_potential(grid, model.density_profile_, spec.G);
    }

    if (with_dynamics) {
        require(static_cast<double>(space.size()) * static_cast<double>(space.size()) <= max_dense_entries,
                "configuration space too large for dense dynamics");
        model.free_hamiltonian_ = free_hamiltonian(space);
        Eigen::MatrixXd H = model.free_hamiltonian_;
        if (spec.kind == ModelKind::pair)
            H.diagonal() += pair_potential(model);
        model.propagator_ = std::make_shared<const Propagator>(H, spec.dt);
    }
    return model;
}

Eigen::MatrixXd potential_gradient_gram(const Model& model)
{
    const LatticeGrid& grid = model.grid();
    const auto M = static_cast<Eigen::Index>(grid.size());
    const auto D = static_cast<Eigen::Index>(model.space().size());
    const int dims = grid.dimension();
    require(static_cast<double>(M) * dims * static_cast<double>(D) <= max_dense_entries,
            "configuration space too large for dense monitoring");
    Eigen::MatrixXcd grads(M * dims, D);
    for (Eigen::Index x = 0; x < D; ++x) {
        SiteField phi = model.potential_field(static_cast<std::size_t>(x));
        for (int a = 0; a < dims; ++a)
            grads.col(x).segment(a * M, M) = spectral::gradient(grid, phi, a);
    }
    Eigen::MatrixXd H = (grads.adjoint() * grads).real() * grid.cell_volume();
    return 0.5 * (H + H.transpose());
}

TrajectorySystem make_system(const Model& model, Evolution evolution, StepScheme scheme)
{
    if (!model.monitored())
        throw std::invalid_argument("model " + to_string(model.kind()) + " has no monitoring");
    TrajectorySystem sys;
    sys.free = model.shared_propagator();
    if (!sys.free)
        throw std::invalid_argument("model was built without dynamics");
    sys.evolution = evolution;
    sys.scheme = scheme;

    const CorrelationKernel& k = model.kernel();
    Eigen::MatrixXd A = model.observables();
    const bool united = k.kind() == KernelKind::dp && model.has_feedback() && model.smeared_feedback();
    if (united) {
        // With B the potential of the smeared density, K[A] = -kappa B and all
        // three Gram matrices are multiples of int grad Phi_x . grad Phi_y.
        const double kappa = k.strength(), G = k.G();
        const double four_pi_g = 4.0 * std::numbers::pi * G;
        Eigen::MatrixXd Hg = potential_gradient_gram(model);
        auto mon = std::make_shared<const MonitoringSpec>(k, std::move(A), (kappa / four_pi_g) * Hg);
        sys.feedback = std::make_shared<const FeedbackSpec>(*mon, model.feedback_operators(),
                                                            Hg / (four_pi_g * kappa), -Hg / four_pi_g);
        sys.monitoring = mon;
    } else {
        auto mon = std::make_shared<const MonitoringSpec>(k, std::move(A));
        if (model.has_feedback())
            sys.feedback = std::make_shared<const FeedbackSpec>(*mon, model.feedback_operators());
        sys.monitoring = mon;
    }
    return sys;
}

DiagonalField pair_sum(const ConfigurationSpace& space, const SiteField& h, bool include_self)
{
    const LatticeGrid& grid = space.grid();
    if (static_cast<std::size_t>(h.size()) != grid.size())
        throw std::invalid_argument("displacement field size does not match lattice");
    DiagonalField out = DiagonalField::Zero(static_cast<Eigen::Index>(space.size()));
    const std::size_t P = space.particle_count();
    for (std::size_t x = 0; x < space.size(); ++x) {
        auto sites = space.sites(x);
        double v = 0.0;
        for (std::size_t n = 0; n < P; ++n) {
            const double mn = space.particles()[n].mass;
            for (std::size_t q = 0; q < P; ++q) {
                if (q == n && !include_self)
                    continue;
                v += mn * space.particles()[q].mass *
                     h[static_cast<Eigen::Index>(difference_site(grid, sites[n], sites[q]))];
            }
        }
        out[static_cast<Eigen::Index>(x)] = v;
    }
    return out;
}

DiagonalField build_backaction_hamiltonian(const Model& model)
{
    if (!model.monitored())
        throw std::invalid_argument("model " + to_string(model.kind()) + " has no back-action potential");
    SiteField potential = model.potential_profile();
    if (model.kernel().kind() == KernelKind::dp)
        potential = model.kernel().project(potential);
    SiteField h = spectral::correlation(model.grid(), model.density_profile(), potential);
    return 0.5 * pair_sum(model.space(), h, true);
}

double kappa_decoherence_coefficient(double kappa)
{
    if (!(kappa > 0.0))
        throw std::invalid_argument("kappa must be positive");
    return kappa / 4.0 + 1.0 / kappa;
}

DiagonalField sn_potential(const Model& model, const Eigen::VectorXd& probs)
{
    const ConfigurationSpace& space = model.space();
    SiteField phi = coulomb_potential(model.grid(), mean_mass_density(space, probs), model.spec().G);
    DiagonalField v(static_cast<Eigen::Index>(space.size()));
    for (std::size_t x = 0; x < space.size(); ++x) {
        double s = 0.0;
        for (std::size_t n = 0; n < space.particle_count(); ++n)
            s += space.particles()[n].mass * phi[static_cast<Eigen::Index>(space.site(x, n))];
        v[static_cast<Eigen::Index>(x)] = s;
    }
    return v;
}

StateVector sn_step(const StateVector& psi, const Model& model)
{
    if (model.kind() != ModelKind::sn)
        throw std::invalid_argument("sn_step needs the sn model kind");
    const Eigen::VectorXd p = probabilities(psi);
    const DiagonalField v = sn_potential(model, p);
    const double dt = model.dt();
    StateVector out(psi.size());
    const double n = psi.norm();
    for (Eigen::Index x = 0; x < psi.size(); ++x)
        out[x] = std::exp(std::complex<double>(0.0, -v[x] * dt)) * psi[x] / n;
    out = model.propagator().apply(out);
    return out / out.norm();
}

DiagonalField pair_potential(const Model& model)
{
    const LatticeGrid& grid = model.grid();
    SiteField w = coulomb_potential(grid, point_density(grid), model.spec().G);
    return 0.5 * pair_sum(model.space(), w, false);
}

DensityMatrix exact_pair_step(const DensityMatrix& rho, const Model& model)
{
    if (model.kind() != ModelKind::pair)
        throw std::invalid_argument("exact_pair_step needs the pair model kind");
    return model.propagator().conjugate(rho);
}

}  // namespace collapse
