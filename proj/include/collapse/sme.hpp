#pragma once

#include <stdexcept>
#include <string>

#include "collapse/kernels.hpp"
#include "collapse/lattice.hpp"
#include "collapse/monitoring.hpp"

namespace collapse {

/// Raised when a step would leave the state unusable. `step` is -1 when
/// the failing call was not part of a trajectory loop.
class NumericalGuardError : public std::runtime_error {
public:
    NumericalGuardError(std::string guard, const std::string& detail, long step = -1);
    const std::string& guard() const { return guard_; }
    long step() const { return step_; }
    NumericalGuardError at_step(long step) const;

private:
    std::string guard_;
    std::string detail_;
    long step_;
};

/// exp(-i H dt) for a time independent Hermitian H, from its
/// eigendecomposition. Diagonal Hamiltonians are kept as phases.
class Propagator {
public:
    Propagator(const Eigen::MatrixXd& hamiltonian, double dt);
    Propagator(const Eigen::MatrixXcd& hamiltonian, double dt);
    static Propagator identity(std::size_t dim, double dt);

    double dt() const { return dt_; }
    std::size_t dim() const { return dim_; }
    bool diagonal() const { return diagonal_; }

    DensityMatrix conjugate(const DensityMatrix& rho) const;
    StateVector apply(const StateVector& psi) const;
    const Eigen::MatrixXcd& matrix() const { return U_; }

private:
    void build(const Eigen::MatrixXcd& H);

    double dt_;
    std::size_t dim_ = 0;
    bool diagonal_ = false;
    Eigen::VectorXcd phases_;
    Eigen::MatrixXcd U_;
};

enum class StepScheme {
    milstein,        // strong order 1 for the diagonal commutative noise
    euler_maruyama,  // plain Ito-Euler increment
};

struct Signal {
    SiteField noise;   // delta varrho
    SiteField signal;  // <A> + delta varrho
};

Signal generate_signal(const Eigen::VectorXd& probs, const MonitoringSpec& monitoring, double dt, NoiseStream& rng);
Signal generate_signal(const DensityMatrix& rho, const MonitoringSpec& monitoring, double dt, NoiseStream& rng);

/// Tr(D rho) for a normalised rho. Throws std::domain_error otherwise.
double expectation(const DensityMatrix& rho, const DiagonalField& d);

/// H[D] rho = {D - <D>, rho}
DensityMatrix hcal(const DiagonalField& d, const DensityMatrix& rho);

/// Conditional update of rho under continuous monitoring, then the free evolution.
DensityMatrix sme_step(const DensityMatrix& rho, const Propagator& free, const MonitoringSpec& monitoring,
                       const SiteField& noise, StepScheme scheme = StepScheme::milstein);

/// exp(-i H dt) rho exp(i H dt) for a diagonal Hamiltonian.
DensityMatrix feedback_step(const DensityMatrix& rho, const DiagonalField& hamiltonian, double dt);

/// Monitoring and feedback in one step, including the -i[V_G, rho] term.
DensityMatrix combined_step(const DensityMatrix& rho, const Propagator& free, const MonitoringSpec& monitoring,
                            const FeedbackSpec& feedback, const SiteField& noise,
                            StepScheme scheme = StepScheme::milstein);

/// Unconditional evolution. The dissipator is integrated exactly.
DensityMatrix me_step(const DensityMatrix& rho, const Propagator& free, const MonitoringSpec& monitoring);
DensityMatrix me_step(const DensityMatrix& rho, const Propagator& free, const MonitoringSpec& monitoring,
                      const FeedbackSpec& feedback);

/// Pure state unraveling, normalised after each step.
StateVector sse_step(const StateVector& psi, const Propagator& free, const MonitoringSpec& monitoring,
                     const SiteField& noise, StepScheme scheme = StepScheme::milstein);
StateVector sse_step(const StateVector& psi, const Propagator& free, const MonitoringSpec& monitoring,
                     const FeedbackSpec& feedback, const SiteField& noise, StepScheme scheme = StepScheme::milstein);

/// -(i/2) [B, {A, rho}] contracted over the field.
DensityMatrix feedback_cross_term(const DensityMatrix& rho, const FeedbackSpec& feedback);
/// Largest entry of -(i/2)[B,{A,rho}] - (-i[V_G, rho]). Zero when the
/// cross Gram matrix int A_x P B_y is symmetric.
double hfb_identity_residual(const DensityMatrix& rho, const FeedbackSpec& feedback);
/// Largest entry of -(i/2)[B,{A,rho}] + (i/4)[{A,B},rho] for dense operators.
double hfb_identity_residual(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B, const DensityMatrix& rho);
double hfb_identity_residual(const DiagonalField& A, const DiagonalField& B, const DensityMatrix& rho);
bool hfb_identity_check(const DiagonalField& A, const DiagonalField& B, const DensityMatrix& rho,
                        double tolerance = 1e-12);

/// Smallest eigenvalue of the Hermitian part of rho.
double min_eigenvalue(const DensityMatrix& rho);
double purity(const DensityMatrix& rho);

}  // namespace collapse
