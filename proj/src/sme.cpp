#include "collapse/sme.hpp"

#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

namespace collapse {

using cd = std::complex<double>;

NumericalGuardError::NumericalGuardError(std::string guard, const std::string& detail, long step)
    : std::runtime_error(guard + " guard tripped" + (step >= 0 ? " at step " + std::to_string(step) : std::string()) +
                         ": " + detail),
      guard_(std::move(guard)), detail_(detail), step_(step)
{
}

NumericalGuardError NumericalGuardError::at_step(long step) const
{
    return NumericalGuardError(guard_, detail_, step);
}

Propagator::Propagator(const Eigen::MatrixXd& hamiltonian, double dt) : dt_(dt)
{
    build(hamiltonian.cast<cd>());
}

Propagator::Propagator(const Eigen::MatrixXcd& hamiltonian, double dt) : dt_(dt)
{
    build(hamiltonian);
}

Propagator Propagator::identity(std::size_t dim, double dt)
{
    const auto D = static_cast<Eigen::Index>(dim);
    return Propagator(Eigen::MatrixXd(Eigen::MatrixXd::Zero(D, D)), dt);
}

void Propagator::build(const Eigen::MatrixXcd& H)
{
    if (!(dt_ > 0.0) || !std::isfinite(dt_))
        throw std::invalid_argument("time step must be positive");
    if (H.rows() != H.cols())
        throw std::invalid_argument("Hamiltonian must be square");
    const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    if ((H - H.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("Hamiltonian is not Hermitian");
    dim_ = static_cast<std::size_t>(H.rows());
    Eigen::MatrixXcd off = H;
    off.diagonal().setZero();
    diagonal_ = off.cwiseAbs().maxCoeff() == 0.0;
    if (dim_ == 0)
        diagonal_ = true;
    if (diagonal_) {
        phases_.resize(H.rows());
        for (Eigen::Index i = 0; i < H.rows(); ++i)
            phases_[i] = std::exp(cd(0.0, -H(i, i).real() * dt_));
        return;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (H + H.adjoint()));
    Eigen::VectorXcd ph(H.rows());
    for (Eigen::Index i = 0; i < H.rows(); ++i)
        ph[i] = std::exp(cd(0.0, -es.eigenvalues()[i] * dt_));
    U_ = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

DensityMatrix Propagator::conjugate(const DensityMatrix& rho) const
{
    if (static_cast<std::size_t>(rho.rows()) != dim_)
        throw std::invalid_argument("density matrix dimension does not match propagator");
    if (diagonal_)
        return phases_.asDiagonal() * rho * phases_.conjugate().asDiagonal();
    DensityMatrix tmp;
    tmp.noalias() = U_ * rho;
    DensityMatrix out;
    out.noalias() = tmp * U_.adjoint();
    return out;
}

StateVector Propagator::apply(const StateVector& psi) const
{
    if (static_cast<std::size_t>(psi.size()) != dim_)
        throw std::invalid_argument("state dimension does not match propagator");
    if (diagonal_)
        return phases_.cwiseProduct(psi);
    return U_ * psi;
}

Signal generate_signal(const Eigen::VectorXd& probs, const MonitoringSpec& monitoring, double dt, NoiseStream& rng)
{
    Signal s;
    s.noise = sample_noise(monitoring.kernel(), dt, rng);
    s.signal = monitoring.expectation(probs) + s.noise;
    return s;
}

Signal generate_signal(const DensityMatrix& rho, const MonitoringSpec& monitoring, double dt, NoiseStream& rng)
{
    return generate_signal(probabilities(rho), monitoring, dt, rng);
}

double expectation(const DensityMatrix& rho, const DiagonalField& d)
{
    if (d.size() != rho.rows())
        throw std::invalid_argument("diagonal field and density matrix dimensions differ");
    const cd tr = rho.trace();
    if (std::abs(tr - 1.0) > 1e-8)
        throw std::domain_error("density matrix is not normalised");
    return rho.diagonal().real().dot(d);
}

DensityMatrix hcal(const DiagonalField& d, const DensityMatrix& rho)
{
    if (d.size() != rho.rows())
        throw std::invalid_argument("diagonal field and density matrix dimensions differ");
    const double mean = probabilities(rho).dot(d);
    DensityMatrix out(rho.rows(), rho.cols());
    for (Eigen::Index y = 0; y < rho.cols(); ++y)
        for (Eigen::Index x = 0; x < rho.rows(); ++x)
            out(x, y) = (d[x] + d[y] - 2.0 * mean) * rho(x, y);
    return out;
}

namespace {

void check_dims(const DensityMatrix& rho, const Propagator& free, const MonitoringSpec& monitoring)
{
    const auto D = static_cast<std::size_t>(rho.rows());
    if (rho.rows() != rho.cols() || D != free.dim() || D != monitoring.dim())
        throw std::invalid_argument("density matrix, propagator and monitoring dimensions differ");
}

void guard_increment(const DensityMatrix& increment, const DensityMatrix& rho)
{
    const double ni = increment.cwiseAbs().sum();
    const double nr = rho.cwiseAbs().sum();
    if (!std::isfinite(ni) || ni > 0.1 * nr)
        throw NumericalGuardError("step-size", "increment norm " + std::to_string(ni) + " exceeds 0.1 of state norm " +
                                                   std::to_string(nr));
}

// Ito increment of the conditional equation for the diagonal noise
// operator f_xy = (a_x + a_y)/2 - <a> - i (b_x - b_y), each scaled by dt.
// The Milstein correction is (f^2 - Var a - E[f^2 - Var a]) / 2.
DensityMatrix conditional_update(const DensityMatrix& rho, const MonitoringSpec& mon, const FeedbackSpec* fb,
                                 const SiteField& noise, double dt, StepScheme scheme)
{
    const Eigen::Index D = rho.rows();
    const Eigen::VectorXd p = probabilities(rho);
    const Eigen::VectorXd alpha = mon.conditioning(noise) * dt;
    const double mean_a = p.dot(alpha);
    const double var_a = p.dot(alpha.cwiseAbs2()) - mean_a * mean_a;
    const Eigen::MatrixXd& G = mon.gram();
    const Eigen::MatrixXd& RA = mon.rates();

    Eigen::VectorXd beta, pC, Cd;
    if (fb)
        beta = fb->field(noise) * dt;

    const bool milstein = scheme == StepScheme::milstein;
    Eigen::VectorXd Gp, Gd;
    double pGp = 0.0, evar = 0.0;
    if (milstein) {
        Gp = G * p;
        Gd = G.diagonal();
        pGp = p.dot(Gp);
        evar = dt * (p.dot(Gd) - pGp);
        if (fb) {
            pC = fb->cross().transpose() * p;
            Cd = fb->cross().diagonal();
        }
    }

    DensityMatrix incr(D, D);
    for (Eigen::Index y = 0; y < D; ++y) {
        for (Eigen::Index x = 0; x < D; ++x) {
            double u = 0.5 * (alpha[x] + alpha[y]) - mean_a;
            double rate = RA(x, y);
            cd f(u, 0.0);
            if (fb) {
                f -= cd(0.0, beta[x] - beta[y]);
                rate += fb->rates()(x, y);
            }
            cd factor = f - rate * dt;
            if (milstein) {
                double eu2 = dt * (0.25 * (Gd[x] + Gd[y] + 2.0 * G(x, y)) - Gp[x] - Gp[y] + pGp);
                cd ef2(eu2, 0.0);
                if (fb) {
                    const Eigen::MatrixXd& C = fb->cross();
                    double eudb = dt * (0.5 * (Cd[x] - C(x, y) + C(y, x) - Cd[y]) - pC[x] + pC[y]);
                    double edb2 = dt * 2.0 * fb->rates()(x, y);
                    ef2 += cd(-edb2, -2.0 * eudb);
                }
                factor += 0.5 * ((f * f - var_a) - (ef2 - evar));
            }
            incr(x, y) = factor * rho(x, y);
        }
    }
    guard_increment(incr, rho);
    return rho + incr;
}

DensityMatrix apply_phase(const DensityMatrix& rho, const DiagonalField& h, double dt)
{
    Eigen::VectorXcd ph(h.size());
    for (Eigen::Index i = 0; i < h.size(); ++i)
        ph[i] = std::exp(cd(0.0, -h[i] * dt));
    return ph.asDiagonal() * rho * ph.conjugate().asDiagonal();
}

DensityMatrix me_impl(const DensityMatrix& rho, const Propagator& free, const MonitoringSpec& mon,
                      const FeedbackSpec* fb)
{
    check_dims(rho, free, mon);
    const double dt = free.dt();
    Eigen::MatrixXd R = mon.rates();
    if (fb)
        R += fb->rates();
    DensityMatrix out = rho.cwiseProduct((-dt * R).array().exp().matrix().cast<cd>());
    if (fb)
        out = apply_phase(out, fb->backaction_potential(), dt);
    return free.conjugate(out);
}

StateVector sse_impl(const StateVector& psi, const Propagator& free, const MonitoringSpec& mon,
                     const FeedbackSpec* fb, const SiteField& noise, StepScheme scheme)
{
    const Eigen::Index D = psi.size();
    if (static_cast<std::size_t>(D) != free.dim() || static_cast<std::size_t>(D) != mon.dim())
        throw std::invalid_argument("state, propagator and monitoring dimensions differ");
    const double dt = free.dt();
    const Eigen::VectorXd p = probabilities(psi);
    const StateVector phi = psi / std::sqrt(psi.squaredNorm());
    const Eigen::MatrixXd& G = mon.gram();

    const Eigen::VectorXd alpha = mon.conditioning(noise) * dt;
    const double mean_a = p.dot(alpha);
    const Eigen::VectorXd Gp = G * p;
    const double pGp = p.dot(Gp);

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(D);
    Eigen::VectorXd Gip = Eigen::VectorXd::Zero(D), Cp = Eigen::VectorXd::Zero(D), pC = Eigen::VectorXd::Zero(D);
    double pGip = 0.0, pCp = 0.0;
    if (fb) {
        beta = fb->field(noise) * dt;
        Gip = fb->inverse_gram() * p;
        pGip = p.dot(Gip);
        Cp = fb->cross() * p;
        pC = fb->cross().transpose() * p;
        pCp = p.dot(Cp);
    }
    const double mean_b = p.dot(beta);
    const double var_a = p.dot(alpha.cwiseAbs2()) - mean_a * mean_a;
    const double cov_ab = p.dot(alpha.cwiseProduct(beta)) - mean_a * mean_b;

    const bool milstein = scheme == StepScheme::milstein;
    double evar = 0.0, ecov = 0.0;
    if (milstein) {
        evar = dt * (p.dot(G.diagonal()) - pGp);
        if (fb)
            ecov = dt * (p.dot(fb->cross().diagonal()) - pCp);
    }

    StateVector out(D);
    for (Eigen::Index x = 0; x < D; ++x) {
        // mean-subtracted quadratic forms of A_x - <A> and B_x - <B>
        double qa = G(x, x) - 2.0 * Gp[x] + pGp;
        double qb = fb ? fb->inverse_gram()(x, x) - 2.0 * Gip[x] + pGip : 0.0;
        double fx = fb ? pC[x] - Cp[x] : 0.0;
        cd drift(-0.125 * qa - 0.5 * qb, -0.5 * fx);
        cd m(0.5 * (alpha[x] - mean_a), -(beta[x] - mean_b));
        cd factor = 1.0 + drift * dt + m;
        if (milstein) {
            double ea = dt * qa;
            double eb = dt * qb;
            double eab = fb ? dt * (fb->cross()(x, x) - Cp[x] - pC[x] + pCp) : 0.0;
            cd em2(0.25 * ea - eb, -eab);
            cd pathwise = m * m - 0.5 * var_a + cd(0.0, cov_ab);
            cd expected = em2 - 0.5 * evar + cd(0.0, ecov);
            factor += 0.5 * (pathwise - expected);
        }
        out[x] = factor * phi[x];
    }
    const double n = out.norm();
    if (!std::isfinite(n) || n < 1e-6)
        throw NumericalGuardError("norm", "state norm collapsed to " + std::to_string(n));
    if ((out - phi).cwiseAbs().sum() > 0.1 * phi.cwiseAbs().sum())
        throw NumericalGuardError("step-size", "state increment exceeds 0.1 of the state norm");
    if (fb) {
        const DiagonalField& vg = fb->backaction_potential();
        for (Eigen::Index x = 0; x < D; ++x)
            out[x] *= std::exp(cd(0.0, -vg[x] * dt));
    }
    out /= n;
    return free.apply(out);
}

}  // namespace

DensityMatrix sme_step(const DensityMatrix& rho, const Propagator& free, const MonitoringSpec& monitoring,
                       const SiteField& noise, StepScheme scheme)
{
    check_dims(rho, free, monitoring);
    return free.conjugate(conditional_update(rho, monitoring, nullptr, noise, free.dt(), scheme));
}

DensityMatrix feedback_step(const DensityMatrix& rho, const DiagonalField& hamiltonian, double dt)
{
    if (hamiltonian.size() != rho.rows() || rho.rows() != rho.cols())
        throw std::invalid_argument("feedback Hamiltonian and density matrix dimensions differ");
    return apply_phase(rho, hamiltonian, dt);
}

DensityMatrix combined_step(const DensityMatrix& rho, const Propagator& free, const MonitoringSpec& monitoring,
                            const FeedbackSpec& feedback, const SiteField& noise, StepScheme scheme)
{
    check_dims(rho, free, monitoring);
    if (feedback.dim() != monitoring.dim())
        throw std::invalid_argument("feedback and monitoring dimensions differ");
    DensityMatrix next = conditional_update(rho, monitoring, &feedback, noise, free.dt(), scheme);
    next = apply_phase(next, feedback.backaction_potential(), free.dt());
    return free.conjugate(next);
}

DensityMatrix me_step(const DensityMatrix& rho, const Propagator& free, const MonitoringSpec& monitoring)
{
    return me_impl(rho, free, monitoring, nullptr);
}

DensityMatrix me_step(const DensityMatrix& rho, const Propagator& free, const MonitoringSpec& monitoring,
                      const FeedbackSpec& feedback)
{
    return me_impl(rho, free, monitoring, &feedback);
}

StateVector sse_step(const StateVector& psi, const Propagator& free, const MonitoringSpec& monitoring,
                     const SiteField& noise, StepScheme scheme)
{
    return sse_impl(psi, free, monitoring, nullptr, noise, scheme);
}

StateVector sse_step(const StateVector& psi, const Propagator& free, const MonitoringSpec& monitoring,
                     const FeedbackSpec& feedback, const SiteField& noise, StepScheme scheme)
{
    return sse_impl(psi, free, monitoring, &feedback, noise, scheme);
}

DensityMatrix feedback_cross_term(const DensityMatrix& rho, const FeedbackSpec& feedback)
{
    const Eigen::MatrixXd& C = feedback.cross();
    if (C.rows() != rho.rows())
        throw std::invalid_argument("feedback and density matrix dimensions differ");
    DensityMatrix out(rho.rows(), rho.cols());
    for (Eigen::Index y = 0; y < rho.cols(); ++y)
        for (Eigen::Index x = 0; x < rho.rows(); ++x)
            out(x, y) = cd(0.0, -0.5) * (C(x, x) + C(y, x) - C(x, y) - C(y, y)) * rho(x, y);
    return out;
}

double hfb_identity_residual(const DensityMatrix& rho, const FeedbackSpec& feedback)
{
    const DiagonalField& vg = feedback.backaction_potential();
    DensityMatrix commutator(rho.rows(), rho.cols());
    for (Eigen::Index y = 0; y < rho.cols(); ++y)
        for (Eigen::Index x = 0; x < rho.rows(); ++x)
            commutator(x, y) = cd(0.0, -1.0) * (vg[x] - vg[y]) * rho(x, y);
    return (feedback_cross_term(rho, feedback) - commutator).cwiseAbs().maxCoeff();
}

double hfb_identity_residual(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B, const DensityMatrix& rho)
{
    if (A.rows() != rho.rows() || B.rows() != rho.rows())
        throw std::invalid_argument("operator and density matrix dimensions differ");
    const cd I(0.0, 1.0);
    Eigen::MatrixXcd anti = A * rho + rho * A;
    Eigen::MatrixXcd lhs = -0.5 * I * (B * anti - anti * B);
    Eigen::MatrixXcd AB = A * B + B * A;
    Eigen::MatrixXcd rhs = -0.25 * I * (AB * rho - rho * AB);
    return (lhs - rhs).cwiseAbs().maxCoeff();
}

double hfb_identity_residual(const DiagonalField& A, const DiagonalField& B, const DensityMatrix& rho)
{
    return hfb_identity_residual(Eigen::MatrixXcd(A.cast<cd>().asDiagonal()), Eigen::MatrixXcd(B.cast<cd>().asDiagonal()),
                                 rho);
}

bool hfb_identity_check(const DiagonalField& A, const DiagonalField& B, const DensityMatrix& rho, double tolerance)
{
    return hfb_identity_residual(A, B, rho) < tolerance;
}

double min_eigenvalue(const DensityMatrix& rho)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double purity(const DensityMatrix& rho)
{
    return rho.cwiseAbs2().sum();
}

}  // namespace collapse
