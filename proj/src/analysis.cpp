#include "collapse/analysis.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "collapse/spectral.hpp"

namespace collapse {

namespace {

void check_configs(const Model& model, std::size_t x, std::size_t y)
{
    if (x >= model.space().size() || y >= model.space().size())
        throw std::out_of_range("configuration index out of range");
}

std::size_t moved_config(const ConfigurationSpace& space, std::size_t n, int shift, int axis)
{
    std::vector<std::size_t> local(space.particle_count(), 0);
    std::size_t ref = space.config_index(local);
    auto sites = space.sites(ref);
    std::vector<int> step(space.grid().dimension(), 0);
    step[axis] = shift;
    sites[n] = space.grid().shifted(sites[n], step);
    return space.config_at_sites(sites);
}

}  // namespace

RateComponents closed_form_rate(const Model& model, std::size_t x, std::size_t y)
{
    check_configs(model, x, y);
    const CorrelationKernel& k = model.kernel();
    RateComponents r;
    if (x == y)
        return r;
    SiteField dA = model.density_field(x) - model.density_field(y);
    r.intrinsic = kernel_quadratic_form(k, dA, dA) / 8.0;
    if (model.has_feedback()) {
        SiteField dB = model.potential_field(x) - model.potential_field(y);
        r.backaction = inverse_quadratic_form(k, dB, dB) / 2.0;
    }
    r.total = r.intrinsic + r.backaction;
    return r;
}

RateComponents united_rate(const Model& model, std::size_t x, std::size_t y)
{
    check_configs(model, x, y);
    const CorrelationKernel& k = model.kernel();
    if (k.kind() != KernelKind::dp || !model.has_feedback() || !model.smeared_feedback())
        throw std::invalid_argument("united rate needs the DP kernel with smeared feedback");
    RateComponents r;
    if (x == y)
        return r;
    SiteField dPhi = model.potential_field(x) - model.potential_field(y);
    const double u = gradient_inner_product(model.grid(), dPhi, dPhi) / (8.0 * std::numbers::pi * k.G());
    r.intrinsic = k.strength() / 4.0 * u;
    r.backaction = u / k.strength();
    r.total = kappa_decoherence_coefficient(k.strength()) * u;
    return r;
}

DecoherenceProfile rate_profile(const Model& model, const std::vector<int>& separations, int axis)
{
    const ConfigurationSpace& space = model.space();
    if (axis < 0 || axis >= model.grid().dimension())
        throw std::invalid_argument("axis out of range");
    std::vector<std::size_t> zero(space.particle_count(), 0);
    const std::size_t ref = space.config_index(zero);
    DecoherenceProfile out;
    for (int d : separations) {
        std::size_t y = moved_config(space, 0, d, axis);
        out.push_back({d * model.grid().spacing()[axis], closed_form_rate(model, ref, y)});
    }
    return out;
}

DecayFit fit_offdiagonal_decay(const std::vector<double>& times, const std::vector<double>& magnitudes, double floor)
{
    if (times.size() != magnitudes.size())
        throw std::invalid_argument("time and magnitude series differ in length");
    std::vector<double> t, y;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (magnitudes[i] > floor && std::isfinite(magnitudes[i])) {
            t.push_back(times[i]);
            y.push_back(std::log(magnitudes[i]));
        }
    }
    if (t.size() < 3)
        throw std::domain_error("coherence signal below the noise floor");
    const double n = static_cast<double>(t.size());
    double tm = 0.0, ym = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        tm += t[i];
        ym += y[i];
    }
    tm /= n;
    ym /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        sxx += (t[i] - tm) * (t[i] - tm);
        sxy += (t[i] - tm) * (y[i] - ym);
    }
    if (!(sxx > 0.0))
        throw std::domain_error("decay fit needs distinct times");
    const double slope = sxy / sxx;
    const double icept = ym - slope * tm;
    double ss = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        double r = y[i] - (icept + slope * t[i]);
        ss += r * r;
    }
    DecayFit fit;
    fit.rate = -slope;
    fit.amplitude = std::exp(icept);
    fit.stderr_rate = t.size() > 2 ? std::sqrt(ss / (n - 2.0) / sxx) : 0.0;
    fit.points = t.size();
    return fit;
}

KappaScan kappa_scan(const ModelSpec& base, const ConfigurationSpace& space, const std::vector<double>& kappas,
                     std::size_t x, std::size_t y)
{
    if (kappas.empty())
        throw std::invalid_argument("kappa grid is empty");
    ModelSpec spec = base;
    spec.kind = ModelKind::dp;
    spec.feedback = true;
    spec.kappa = 2.0;
    const double reference = closed_form_rate(build_model(spec, space, false), x, y).total;
    KappaScan scan;
    double best = std::numeric_limits<double>::infinity();
    for (double kappa : kappas) {
        if (!(kappa > 0.0))
            throw std::invalid_argument("kappa values must be positive");
        spec.kappa = kappa;
        KappaRow row;
        row.kappa = kappa;
        row.rate = closed_form_rate(build_model(spec, space, false), x, y);
        row.relative = reference > 0.0 ? row.rate.total / reference : 0.0;
        if (row.rate.total < best) {
            best = row.rate.total;
            scan.argmin = kappa;
        }
        scan.rows.push_back(row);
    }
    return scan;
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("density matrices differ in dimension");
    DensityMatrix d = a - b;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

namespace {

DensityMatrix mean_projector(const std::vector<StateVector>& ensemble)
{
    DensityMatrix m = DensityMatrix::Zero(ensemble[0].size(), ensemble[0].size());
    for (const auto& psi : ensemble)
        m += projector(psi);
    return m / static_cast<double>(ensemble.size());
}

DensityMatrix evolve_deterministic(const Model& model, const std::vector<StateVector>& ensemble, std::size_t steps)
{
    DensityMatrix m = DensityMatrix::Zero(ensemble[0].size(), ensemble[0].size());
    for (const auto& psi0 : ensemble) {
        if (model.kind() == ModelKind::sn) {
            StateVector psi = psi0 / psi0.norm();
            for (std::size_t s = 0; s < steps; ++s)
                psi = sn_step(psi, model);
            m += projector(psi);
        } else {
            DensityMatrix rho = projector(psi0);
            for (std::size_t s = 0; s < steps; ++s)
                rho = exact_pair_step(rho, model);
            m += rho;
        }
    }
    return m / static_cast<double>(ensemble.size());
}

}  // namespace

LinearityReport linearity_witness(const Model& model, const std::vector<StateVector>& ensemble_a,
                                  const std::vector<StateVector>& ensemble_b, const LinearityOptions& options)
{
    if (ensemble_a.empty() || ensemble_b.empty())
        throw std::invalid_argument("linearity witness needs two non-empty ensembles");
    LinearityReport rep;
    rep.model = to_string(model.kind());
    rep.time = static_cast<double>(options.steps) * model.dt();
    rep.initial_distance = trace_distance(mean_projector(ensemble_a), mean_projector(ensemble_b));
    if (rep.initial_distance > 1e-8)
        throw std::invalid_argument("ensembles must start from the same mean density matrix");

    DensityMatrix mean_a, mean_b;
    if (model.monitored()) {
        TrajectorySystem sys = make_system(model, options.evolution);
        if (options.evolution == Evolution::unconditional) {
            std::vector<DensityMatrix> ia, ib;
            for (const auto& p : ensemble_a)
                ia.push_back(projector(p));
            for (const auto& p : ensemble_b)
                ib.push_back(projector(p));
            EnsembleOptions eo{0, false, false};
            RecordOptions ro;
            ro.every = std::max<std::size_t>(1, options.steps);
            mean_a = run_ensemble(ia, sys, options.steps, options.seed, ia.size(), ro, eo).mean_final;
            mean_b = run_ensemble(ib, sys, options.steps, options.seed, ib.size(), ro, eo).mean_final;
            rep.threshold = options.threshold;
        } else {
            auto run = [&](const std::vector<StateVector>& ens, std::uint64_t seed) {
                std::vector<DensityMatrix> init;
                for (const auto& p : ens)
                    init.push_back(projector(p));
                std::size_t count = (options.trajectories + init.size() - 1) / init.size() * init.size();
                RecordOptions ro;
                ro.every = std::max<std::size_t>(1, options.steps);
                ro.positivity_max_dim = 0;
                EnsembleOptions eo{0, false, false};
                return run_ensemble(init, sys, options.steps, seed, count, ro, eo).mean_final;
            };
            mean_a = run(ensemble_a, options.seed);
            mean_b = run(ensemble_b, options.seed + 1);
            rep.trajectories = options.trajectories;
            rep.threshold = 5.0 / std::sqrt(static_cast<double>(options.trajectories));
        }
    } else {
        mean_a = evolve_deterministic(model, ensemble_a, options.steps);
        mean_b = evolve_deterministic(model, ensemble_b, options.steps);
        rep.threshold = options.threshold;
    }
    rep.distance = trace_distance(mean_a, mean_b);
    rep.distinguishable = rep.distance > rep.threshold;
    return rep;
}

TorusPotential::TorusPotential(const LatticeGrid& grid, double width, int axis)
{
    if (!(width > 0.0))
        throw std::invalid_argument("torus potential needs a positive smearing width");
    if (axis < 0 || axis >= grid.dimension())
        throw std::invalid_argument("axis out of range");
    const int D = grid.dimension();
    std::vector<double> L(D);
    volume_ = 1.0;
    for (int a = 0; a < D; ++a) {
        L[a] = grid.length(a);
        volume_ *= L[a];
    }
    length_ = L[axis];
    // exp(-s^2 k^2 / 2) < 1e-16 beyond this radius
    const double kmax = std::sqrt(2.0 * 37.0) / width;
    std::vector<int> nmax(D);
    for (int a = 0; a < D; ++a)
        nmax[a] = static_cast<int>(std::ceil(kmax * L[a] / (2.0 * std::numbers::pi)));
    const double s2 = width * width;
    for (int nx = 0; nx <= nmax[axis]; ++nx) {
        const double kx = 2.0 * std::numbers::pi * nx / L[axis];
        double w = 0.0;
        std::vector<int> others;
        for (int a = 0; a < D; ++a)
            if (a != axis)
                others.push_back(a);
        auto term = [&](double q2) {
            const double k2 = kx * kx + q2;
            if (k2 > 0.0)
                w += std::exp(-0.5 * s2 * k2) / k2;
        };
        if (others.empty()) {
            term(0.0);
        } else if (others.size() == 1) {
            const int a = others[0];
            for (int n = -nmax[a]; n <= nmax[a]; ++n) {
                const double k = 2.0 * std::numbers::pi * n / L[a];
                term(k * k);
            }
        } else {
            const int a = others[0], b = others[1];
            for (int n = -nmax[a]; n <= nmax[a]; ++n) {
                const double ka = 2.0 * std::numbers::pi * n / L[a];
                for (int m = -nmax[b]; m <= nmax[b]; ++m) {
                    const double kb = 2.0 * std::numbers::pi * m / L[b];
                    term(ka * ka + kb * kb);
                }
            }
        }
        kx_.push_back(kx);
        weight_.push_back(nx == 0 ? w : 2.0 * w);
    }
}

double TorusPotential::operator()(double r) const
{
    double s = 0.0;
    for (std::size_t i = kx_.size(); i-- > 0;)
        s += weight_[i] * std::cos(kx_[i] * r);
    return 4.0 * std::numbers::pi / volume_ * s;
}

double free_smeared_potential(double d, double width)
{
    if (d == 0.0)
        return -std::sqrt(2.0 / std::numbers::pi) / width;
    return -std::erf(d / (std::sqrt(2.0) * width)) / d;
}

std::vector<PairPotentialRow> pair_potential_curve(const Model& model, const std::vector<int>& separations, int axis)
{
    const LatticeGrid& grid = model.grid();
    if (grid.dimension() != 3)
        throw std::invalid_argument("pair potential curve needs a 3D field grid");
    if (!model.has_feedback())
        throw std::invalid_argument("pair potential curve needs a model with feedback");
    if (model.space().particle_count() < 2)
        throw std::invalid_argument("pair potential curve needs two particles");
    if (axis < 0 || axis >= 3)
        throw std::invalid_argument("axis out of range");
    const double m1 = model.space().particles()[0].mass;
    const double m2 = model.space().particles()[1].mass;
    const double G = model.spec().G;
    const double a = grid.spacing()[axis];

    const SiteField potential = model.kernel().project(model.potential_profile());
    const SiteField h = spectral::correlation(grid, model.density_profile(), potential);
    auto inter = [&](int d) {
        std::vector<int> plus(3, 0), minus(3, 0);
        plus[axis] = d;
        minus[axis] = -d;
        return 0.5 * m1 * m2 * (h[static_cast<Eigen::Index>(grid.site(plus))] +
                                h[static_cast<Eigen::Index>(grid.site(minus))]);
    };
    const double width = model.smeared_feedback() ? std::sqrt(2.0) * model.spec().sigma : model.spec().sigma;
    TorusPotential torus(grid, width, axis);
    const int half = grid.dims()[axis] / 2;
    const double r_half = half * a;
    const double v_half = inter(half);
    const double t_half = torus(r_half);

    std::vector<PairPotentialRow> rows;
    for (int d : separations) {
        PairPotentialRow row;
        const double r = d * a;
        row.separation = r;
        row.lattice = inter(d);
        row.shifted = row.lattice - v_half;
        const double v_free = G * m1 * m2 * free_smeared_potential(r, width);
        const double v_torus = -G * m1 * m2 * (torus(r) - t_half);
        row.correction = v_free - v_torus;
        row.corrected = row.shifted + row.correction;
        row.ratio = r > 0.0 ? row.corrected * r / (-G * m1 * m2) : std::numeric_limits<double>::quiet_NaN();
        rows.push_back(row);
    }
    return rows;
}

}  // namespace collapse
