#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "collapse/sme.hpp"

namespace collapse {

enum class Evolution {
    conditional,    // monitoring and feedback in one step
    composed,       // conditional step, then the signal-driven feedback phase
    unconditional,  // master equation
    pure,           // state vector unraveling
};

/// Everything a trajectory loop needs. The feedback may be absent.
struct TrajectorySystem {
    std::shared_ptr<const Propagator> free;
    std::shared_ptr<const MonitoringSpec> monitoring;
    std::shared_ptr<const FeedbackSpec> feedback;
    Evolution evolution = Evolution::conditional;
    StepScheme scheme = StepScheme::milstein;

    double dt() const { return free->dt(); }
    std::size_t dim() const { return free->dim(); }
};

struct RecordOptions {
    std::size_t every = 1;
    std::vector<std::pair<std::string, DiagonalField>> observables;
    std::vector<std::pair<std::size_t, std::size_t>> coherences;
    std::vector<std::size_t> signal_sites;
    bool states = false;
    std::size_t positivity_max_dim = 64;
    double positivity_floor = -1e-8;
};

struct TrajectoryRecord {
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
    std::vector<double> time;
    std::vector<double> trace;
    std::vector<double> purity;
    std::vector<double> min_eigenvalue;        // empty when the dimension is too large to check
    std::vector<std::vector<double>> observables;  // [observable][record]
    std::vector<std::vector<double>> coherences;   // |rho_xy| per requested pair
    std::vector<std::vector<double>> signals;      // signal at requested sites, NaN at t = 0
    std::vector<DensityMatrix> states;
    std::vector<std::string> warnings;
    DensityMatrix final_state;
};

/// Append one record row for rho at time t. signal may be null.
void append_record(TrajectoryRecord& record, const DensityMatrix& rho, double t, const RecordOptions& options,
                   const SiteField* signal = nullptr);

/// Run one trajectory. The noise stream is seeded from (seed, index).
TrajectoryRecord run_trajectory(const DensityMatrix& initial, const TrajectorySystem& system, std::size_t steps,
                                std::uint64_t seed, std::uint64_t index = 0, const RecordOptions& options = {});

struct EnsembleOptions {
    std::size_t threads = 0;  // 0: COLLAPSE_SIM_THREADS or the hardware count
    bool keep_records = true;
    bool mean_states = true;
};

struct EnsembleResult {
    std::vector<TrajectoryRecord> records;
    std::vector<double> time;
    std::vector<DensityMatrix> mean_states;  // ensemble mean at each record time
    DensityMatrix mean_final;
};

/// Trajectory i starts from initials[i % initials.size()] and uses noise
/// stream (base_seed, i). Results do not depend on the thread count.
EnsembleResult run_ensemble(const std::vector<DensityMatrix>& initials, const TrajectorySystem& system,
                            std::size_t steps, std::uint64_t base_seed, std::size_t count,
                            const RecordOptions& record = {}, const EnsembleOptions& options = {});

std::size_t default_thread_count();

}  // namespace collapse
