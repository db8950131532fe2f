#include <stdexcept>

#include "collapse/monitoring.hpp"
#include "collapse/spectral.hpp"

namespace collapse {

namespace {

Eigen::MatrixXd apply_columns(const LatticeGrid& grid, const Eigen::MatrixXd& X, const std::vector<double>& mult)
{
    Eigen::MatrixXd out(X.rows(), X.cols());
    for (Eigen::Index c = 0; c < X.cols(); ++c)
        out.col(c) = spectral::apply_multiplier(grid, X.col(c), mult);
    return out;
}

Eigen::MatrixXd symmetrised(const Eigen::MatrixXd& M)
{
    return 0.5 * (M + M.transpose());
}

}  // namespace

Eigen::MatrixXd rates_from_gram(const Eigen::MatrixXd& gram, double factor)
{
    const Eigen::Index D = gram.rows();
    Eigen::MatrixXd R(D, D);
    for (Eigen::Index y = 0; y < D; ++y)
        for (Eigen::Index x = 0; x < D; ++x)
            R(x, y) = factor * (gram(x, x) + gram(y, y) - 2.0 * gram(x, y));
    R.diagonal().setZero();
    return R;
}

MonitoringSpec::MonitoringSpec(CorrelationKernel kernel, Eigen::MatrixXd observables)
    : kernel_(std::move(kernel)), A_(std::move(observables))
{
    if (static_cast<std::size_t>(A_.rows()) != kernel_.grid().size())
        throw std::invalid_argument("observable rows must match the kernel lattice");
    const LatticeGrid& g = kernel_.grid();
    gram_ = symmetrised(g.cell_volume() * A_.transpose() * apply_columns(g, A_, kernel_.multiplier()));
    finish();
}

MonitoringSpec::MonitoringSpec(CorrelationKernel kernel, Eigen::MatrixXd observables, Eigen::MatrixXd gram)
    : kernel_(std::move(kernel)), A_(std::move(observables)), gram_(std::move(gram))
{
    if (static_cast<std::size_t>(A_.rows()) != kernel_.grid().size())
        throw std::invalid_argument("observable rows must match the kernel lattice");
    if (gram_.rows() != A_.cols() || gram_.cols() != A_.cols())
        throw std::invalid_argument("Gram matrix must be square in the configuration dimension");
    finish();
}

void MonitoringSpec::finish()
{
    rates_ = rates_from_gram(gram_, 0.125);
}

SiteField MonitoringSpec::expectation(const Eigen::VectorXd& probs) const
{
    if (probs.size() != A_.cols())
        throw std::invalid_argument("probability vector size does not match configuration space");
    return A_ * probs;
}

DiagonalField MonitoringSpec::conditioning(const SiteField& noise) const
{
    if (noise.size() != A_.rows())
        throw std::invalid_argument("noise field size does not match lattice");
    SiteField k = kernel_.apply(noise);
    return kernel_.grid().cell_volume() * (A_.transpose() * k);
}

FeedbackSpec::FeedbackSpec(const MonitoringSpec& monitoring, Eigen::MatrixXd operators) : B_(std::move(operators))
{
    if (B_.rows() != monitoring.observables().rows() || B_.cols() != monitoring.observables().cols())
        throw std::invalid_argument("feedback operators must have the shape of the observables");
    const CorrelationKernel& k = monitoring.kernel();
    const LatticeGrid& g = k.grid();
    inv_gram_ = symmetrised(g.cell_volume() * B_.transpose() * apply_columns(g, B_, k.inverse_multiplier()));
    Eigen::MatrixXd PB = k.kind() == KernelKind::csl ? B_ : apply_columns(g, B_, k.projector());
    cross_ = g.cell_volume() * monitoring.observables().transpose() * PB;
    finish(monitoring);
}

FeedbackSpec::FeedbackSpec(const MonitoringSpec& monitoring, Eigen::MatrixXd operators, Eigen::MatrixXd inverse_gram,
                           Eigen::MatrixXd cross)
    : B_(std::move(operators)), inv_gram_(std::move(inverse_gram)), cross_(std::move(cross))
{
    if (B_.rows() != monitoring.observables().rows() || B_.cols() != monitoring.observables().cols())
        throw std::invalid_argument("feedback operators must have the shape of the observables");
    const Eigen::Index D = B_.cols();
    if (inv_gram_.rows() != D || inv_gram_.cols() != D || cross_.rows() != D || cross_.cols() != D)
        throw std::invalid_argument("feedback Gram matrices must be square in the configuration dimension");
    finish(monitoring);
}

void FeedbackSpec::finish(const MonitoringSpec& monitoring)
{
    cell_volume_ = monitoring.kernel().grid().cell_volume();
    rates_ = rates_from_gram(inv_gram_, 0.5);
    vg_ = 0.5 * cross_.diagonal();
}

DiagonalField FeedbackSpec::field(const SiteField& signal) const
{
    if (signal.size() != B_.rows())
        throw std::invalid_argument("signal size does not match lattice");
    return cell_volume_ * (B_.transpose() * signal);
}

}  // namespace collapse
