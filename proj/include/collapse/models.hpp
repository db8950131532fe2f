#pragma once

#include <memory>
#include <optional>
#include <string>

#include "collapse/kernels.hpp"
#include "collapse/lattice.hpp"
#include "collapse/sme.hpp"
#include "collapse/trajectory.hpp"

namespace collapse {

enum class ModelKind {
    generic,  // user chosen kernel with mass density monitoring
    csl,      // white-noise kernel, Newtonian feedback from the sharp density
    dp,       // 1/|r| kernel, feedback from the smeared density
    sn,       // deterministic Schrodinger-Newton baseline
    pair,     // exact Newtonian pair potential, no monitoring
};

struct ModelSpec {
    ModelKind kind = ModelKind::csl;
    std::optional<KernelKind> kernel;  // required for the generic kind
    double sigma = 1.0;
    double gamma = 1.0;
    double kappa = 2.0;
    double G = 1.0;
    bool feedback = true;                  // gravitational feedback of the signal
    std::optional<bool> smeared_feedback;  // potential from the smeared density
    double dt = 1e-3;
};

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// Configuration space, fields and free evolution of one model. Immutable.
class Model {
public:
    const ModelSpec& spec() const { return spec_; }
    const ConfigurationSpace& space() const { return space_; }
    const LatticeGrid& grid() const { return space_.grid(); }
    ModelKind kind() const { return spec_.kind; }
    bool monitored() const { return kernel_.has_value(); }
    bool has_feedback() const { return monitored() && spec_.feedback; }
    bool smeared_feedback() const { return smeared_feedback_; }
    double dt() const { return spec_.dt; }

    const CorrelationKernel& kernel() const;
    /// Smeared density of a unit mass at the lattice origin.
    const SiteField& density_profile() const { return density_profile_; }
    /// Newtonian potential of a unit mass at the origin, sharp or smeared.
    const SiteField& potential_profile() const { return potential_profile_; }

    /// rho_sigma(r; x) for one configuration.
    SiteField density_field(std::size_t config) const;
    /// Phi(r; x) sourced by the configuration, zero without feedback.
    SiteField potential_field(std::size_t config) const;

    /// Dense (sites x configurations) matrices of the two fields.
    Eigen::MatrixXd observables() const;
    Eigen::MatrixXd feedback_operators() const;

    const Eigen::MatrixXd& free_hamiltonian() const { return free_hamiltonian_; }
    bool has_dynamics() const { return propagator_ != nullptr; }
    /// exp(-i H dt) of the free Hamiltonian, plus the pair potential for the pair kind.
    const Propagator& propagator() const;
    std::shared_ptr<const Propagator> shared_propagator() const { return propagator_; }

private:
    friend Model build_model(const ModelSpec&, const ConfigurationSpace&, bool);
    Model(ModelSpec spec, ConfigurationSpace space) : spec_(std::move(spec)), space_(std::move(space)) {}

    SiteField sum_of_profiles(const SiteField& profile, std::size_t config) const;

    ModelSpec spec_;
    ConfigurationSpace space_;
    std::optional<CorrelationKernel> kernel_;
    bool smeared_feedback_ = false;
    SiteField density_profile_;
    SiteField potential_profile_;
    Eigen::MatrixXd free_hamiltonian_;
    std::shared_ptr<const Propagator> propagator_;
};

/// Validates the spec and builds the model. Throws std::invalid_argument.
/// Without dynamics only the field-level quantities are available, which
/// keeps large configuration spaces cheap.
Model build_model(const ModelSpec& spec, const ConfigurationSpace& space, bool with_dynamics = true);

/// Dense monitoring and feedback data for trajectory runs. The DP kernel
/// with smeared feedback uses the gradient form of its rates.
TrajectorySystem make_system(const Model& model, Evolution evolution = Evolution::conditional,
                             StepScheme scheme = StepScheme::milstein);

/// Gram matrix int grad Phi_x . grad Phi_y of the feedback potentials.
Eigen::MatrixXd potential_gradient_gram(const Model& model);

/// V_G(x) = (1/2) int rho_sigma(r; x) Phi(r; x), from pair displacements.
DiagonalField build_backaction_hamiltonian(const Model& model);

/// Total DP decoherence coefficient kappa/4 + 1/kappa, minimal at kappa = 2.
double kappa_decoherence_coefficient(double kappa);

/// Schrodinger-Newton potential m_n Phi(x_n) from the mean mass density.
DiagonalField sn_potential(const Model& model, const Eigen::VectorXd& probs);
StateVector sn_step(const StateVector& psi, const Model& model);

/// Inter-particle Newtonian potential sum_{n<n'} m_n m_n' w(x_n - x_n'),
/// w the periodic lattice Green's function of a point mass.
DiagonalField pair_potential(const Model& model);
DensityMatrix exact_pair_step(const DensityMatrix& rho, const Model& model);

/// Pair displacement field h(s) = dV sum_r f(r) g(r + s) evaluated on
/// configurations as sum_{n,n'} m_n m_n' h(x_n - x_n'), with or without
/// the n = n' terms.
DiagonalField pair_sum(const ConfigurationSpace& space, const SiteField& h, bool include_self);

}  // namespace collapse
