#pragma once

#include "collapse/kernels.hpp"
#include "collapse/lattice.hpp"

namespace collapse {

/// Continuously monitored observables A_r, diagonal in the configuration
/// basis and stored as a (sites x configurations) matrix, with the noise
/// kernel of the measurement record.
class MonitoringSpec {
public:
    MonitoringSpec(CorrelationKernel kernel, Eigen::MatrixXd observables);
    /// Use a precomputed Gram matrix Q_gamma(A_x, A_y).
    MonitoringSpec(CorrelationKernel kernel, Eigen::MatrixXd observables, Eigen::MatrixXd gram);

    const CorrelationKernel& kernel() const { return kernel_; }
    const Eigen::MatrixXd& observables() const { return A_; }
    std::size_t dim() const { return static_cast<std::size_t>(A_.cols()); }

    /// Q_gamma(A_x, A_y)
    const Eigen::MatrixXd& gram() const { return gram_; }
    /// Decoherence rate of rho_xy: Q_gamma(A_x - A_y, A_x - A_y) / 8.
    const Eigen::MatrixXd& rates() const { return rates_; }

    /// <A_r> for the given configuration probabilities.
    SiteField expectation(const Eigen::VectorXd& probs) const;
    /// a(x) = int dr A_r(x) K[noise](r)
    DiagonalField conditioning(const SiteField& noise) const;

private:
    void finish();

    CorrelationKernel kernel_;
    Eigen::MatrixXd A_;
    Eigen::MatrixXd gram_;
    Eigen::MatrixXd rates_;
};

/// Feedback operators B_r driven by the measurement signal.
class FeedbackSpec {
public:
    FeedbackSpec(const MonitoringSpec& monitoring, Eigen::MatrixXd operators);
    /// Use precomputed Q_{gamma^-1}(B_x, B_y) and int A_x P B_y.
    FeedbackSpec(const MonitoringSpec& monitoring, Eigen::MatrixXd operators, Eigen::MatrixXd inverse_gram,
                 Eigen::MatrixXd cross);

    const Eigen::MatrixXd& operators() const { return B_; }
    std::size_t dim() const { return static_cast<std::size_t>(B_.cols()); }
    const Eigen::MatrixXd& inverse_gram() const { return inv_gram_; }
    /// int A_x P B_y, P the projector on retained kernel modes.
    const Eigen::MatrixXd& cross() const { return cross_; }
    /// Q_{gamma^-1}(B_x - B_y, B_x - B_y) / 2
    const Eigen::MatrixXd& rates() const { return rates_; }
    /// V_G(x) = int A_x P B_x / 2, the back-action potential
    const DiagonalField& backaction_potential() const { return vg_; }

    /// int dr signal(r) B_r(x)
    DiagonalField field(const SiteField& signal) const;

private:
    void finish(const MonitoringSpec& monitoring);

    Eigen::MatrixXd B_;
    Eigen::MatrixXd inv_gram_;
    Eigen::MatrixXd cross_;
    Eigen::MatrixXd rates_;
    DiagonalField vg_;
    double cell_volume_ = 1.0;
};

/// Rates R_xy = (G_xx + G_yy - 2 G_xy) * factor from a Gram matrix.
Eigen::MatrixXd rates_from_gram(const Eigen::MatrixXd& gram, double factor);

}  // namespace collapse
