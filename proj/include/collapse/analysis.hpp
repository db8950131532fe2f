#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "collapse/models.hpp"

namespace collapse {

struct RateComponents {
    double intrinsic = 0.0;
    double backaction = 0.0;
    double total = 0.0;
};

/// Decay rate of rho_xy under the unconditional generator:
/// Q_gamma(d rho_sigma)/8 + Q_{gamma^-1}(d Phi)/2, with d f = f(.;x) - f(.;y).
RateComponents closed_form_rate(const Model& model, std::size_t x, std::size_t y);

/// The DP rate from int |grad d Phi_sigma|^2 with coefficients kappa/4 and
/// 1/kappa over 8 pi G. Needs the DP kernel with smeared feedback.
RateComponents united_rate(const Model& model, std::size_t x, std::size_t y);

struct DecoherenceRow {
    double separation = 0.0;
    RateComponents rate;
};
using DecoherenceProfile = std::vector<DecoherenceRow>;

/// Rates between the reference configuration (every particle at local index
/// 0) and the one with particle 0 moved by each separation (in sites) along
/// the axis.
DecoherenceProfile rate_profile(const Model& model, const std::vector<int>& separations, int axis = 0);

struct DecayFit {
    double rate = 0.0;
    double amplitude = 0.0;
    double stderr_rate = 0.0;
    std::size_t points = 0;
};

/// Least squares fit of log|rho_xy(t)| = log A - rate t. Points below the
/// floor are dropped; throws std::domain_error when fewer than 3 remain.
DecayFit fit_offdiagonal_decay(const std::vector<double>& times, const std::vector<double>& magnitudes,
                               double floor = 1e-12);

struct KappaRow {
    double kappa = 0.0;
    RateComponents rate;
    double relative = 0.0;  // total / total at kappa = 2
};

struct KappaScan {
    std::vector<KappaRow> rows;
    double argmin = 0.0;
};

/// Total DP rate between two configurations over a grid of kappa values.
KappaScan kappa_scan(const ModelSpec& base, const ConfigurationSpace& space, const std::vector<double>& kappas,
                     std::size_t x, std::size_t y);

/// (1/2) sum |eigenvalues of (a - b)|
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

struct LinearityReport {
    std::string model;
    double time = 0.0;
    std::size_t trajectories = 0;  // per ensemble member list; 0 for deterministic runs
    double initial_distance = 0.0;
    double distance = 0.0;
    double threshold = 0.0;
    bool distinguishable = false;  // distance > threshold
};

struct LinearityOptions {
    std::size_t steps = 100;
    std::size_t trajectories = 400;  // per ensemble, monitored models only
    std::uint64_t seed = 1;
    Evolution evolution = Evolution::conditional;
    /// Threshold for deterministic models. Monitored models use 5/sqrt(trajectories).
    double threshold = 0.1;
};

/// Evolve two ensembles of pure states with equal mean density matrix and
/// report the trace distance of the evolved means.
LinearityReport linearity_witness(const Model& model, const std::vector<StateVector>& ensemble_a,
                                  const std::vector<StateVector>& ensemble_b, const LinearityOptions& options);

/// Periodic image sum (4 pi / V) sum_{k != 0} exp(-s^2 k^2 / 2) cos(k r) / k^2
/// over the continuum torus with the grid's box lengths, for a displacement
/// r along one axis. s is the total Gaussian width of the two smeared sources.
class TorusPotential {
public:
    TorusPotential(const LatticeGrid& grid, double width, int axis = 0);
    double operator()(double r) const;

private:
    double length_;
    double volume_;
    std::vector<double> kx_;
    std::vector<double> weight_;
};

/// Potential of two unit Gaussian masses of total width s at distance d in
/// open space: -erf(d / (sqrt(2) s)) / d.
double free_smeared_potential(double d, double width);

struct PairPotentialRow {
    double separation = 0.0;
    double lattice = 0.0;     // inter-particle part of V_G
    double shifted = 0.0;     // lattice value minus the value at L/2
    double correction = 0.0;  // open space minus torus, both relative to L/2
    double corrected = 0.0;
    double ratio = 0.0;       // corrected * d / (-G m1 m2)
};

/// Inter-particle part of V_G for particles 0 and 1 separated by d sites
/// along the axis, with the periodic-image correction. Needs a 3D grid.
std::vector<PairPotentialRow> pair_potential_curve(const Model& model, const std::vector<int>& separations,
                                                   int axis = 0);

}  // namespace collapse
