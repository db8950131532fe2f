#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "collapse/analysis.hpp"
#include "collapse/models.hpp"

namespace collapse {

/// Invalid or unreadable run configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One branch of the initial state: Gaussian packets or sharp sites.
struct BranchSpec {
    std::vector<std::vector<double>> centers;    // physical coordinates, one per particle
    std::vector<std::vector<double>> momenta;    // optional
    std::vector<std::vector<int>> sites;         // lattice coordinates, one per particle
};

struct InitialSpec {
    enum class Type { gaussian, site, cat };
    Type type = Type::gaussian;
    double width = 1.0;
    std::vector<BranchSpec> branches;  // one branch, two for a cat
    double phase = 0.0;                // relative phase of the second cat branch
};

struct IntegrationSpec {
    enum class Mode { trajectory, ensemble, master };
    Mode mode = Mode::trajectory;
    Evolution evolution = Evolution::conditional;
    StepScheme scheme = StepScheme::milstein;
    double dt = 1e-3;
    std::size_t steps = 1000;
    std::size_t ensemble = 1;
    std::uint64_t seed = 1;
    std::size_t record_every = 1;
};

struct OutputSpec {
    std::string dir = "collapse-out";
    std::vector<std::pair<std::size_t, std::size_t>> coherences;  // configuration index pairs
    bool auto_coherence = true;                                   // add the cat branch pair
    std::vector<std::vector<int>> signal_sites;                   // lattice coordinates
    std::size_t snapshot_every = 0;                               // 0: no density matrix snapshots
    bool per_trajectory_files = true;
};

struct AnalysisSpec {
    std::vector<int> separations;  // in sites
    int axis = 0;
    std::vector<double> kappas;
    std::size_t linearity_steps = 100;
    std::size_t linearity_trajectories = 400;
    Evolution linearity_evolution = Evolution::conditional;
    double linearity_threshold = 0.1;
};

struct RunConfig {
    std::vector<int> dims;
    std::vector<double> spacing;
    std::vector<Particle> particles;
    InitialSpec initial;
    ModelSpec model;
    IntegrationSpec integration;
    OutputSpec outputs;
    AnalysisSpec analysis;
};

/// Parse and validate. Throws ConfigError.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
/// The resolved configuration, defaults included.
nlohmann::json to_json(const RunConfig& config);

ConfigurationSpace make_space(const RunConfig& config);
/// Normalised initial branches, one per branch spec.
std::vector<StateVector> initial_branches(const RunConfig& config, const ConfigurationSpace& space);
/// The initial pure state: the single branch, or the normalised cat.
StateVector initial_state(const RunConfig& config, const ConfigurationSpace& space);

std::string to_string(Evolution evolution);
std::string to_string(IntegrationSpec::Mode mode);

}  // namespace collapse
