#include "collapse/trajectory.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace collapse {

namespace {

constexpr std::size_t chunk_size = 8;

StateVector pure_state(const DensityMatrix& rho)
{
    Eigen::Index j = 0;
    rho.diagonal().real().maxCoeff(&j);
    StateVector psi = rho.col(j) / std::sqrt(rho(j, j).real());
    return psi / psi.norm();
}

}  // namespace

void append_record(TrajectoryRecord& rec, const DensityMatrix& rho, double t, const RecordOptions& opt,
                   const SiteField* signal)
{
    rec.observables.resize(opt.observables.size());
    rec.coherences.resize(opt.coherences.size());
    rec.signals.resize(opt.signal_sites.size());
    rec.time.push_back(t);
    const double tr = rho.trace().real();
    rec.trace.push_back(tr);
    rec.purity.push_back(purity(rho));
    if (static_cast<std::size_t>(rho.rows()) <= opt.positivity_max_dim) {
        double lmin = min_eigenvalue(rho);
        rec.min_eigenvalue.push_back(lmin);
        if (lmin < opt.positivity_floor && rec.warnings.size() < 16)
            rec.warnings.push_back("positivity floor crossed at t = " + std::to_string(t) +
                                   ", smallest eigenvalue " + std::to_string(lmin));
    }
    const Eigen::VectorXd diag = rho.diagonal().real();
    for (std::size_t k = 0; k < opt.observables.size(); ++k)
        rec.observables[k].push_back(diag.dot(opt.observables[k].second) / tr);
    for (std::size_t k = 0; k < opt.coherences.size(); ++k) {
        auto [x, y] = opt.coherences[k];
        rec.coherences[k].push_back(std::abs(rho(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y))));
    }
    for (std::size_t k = 0; k < opt.signal_sites.size(); ++k)
        rec.signals[k].push_back(signal ? (*signal)[static_cast<Eigen::Index>(opt.signal_sites[k])]
                                        : std::numeric_limits<double>::quiet_NaN());
    if (opt.states)
        rec.states.push_back(rho);
}

TrajectoryRecord run_trajectory(const DensityMatrix& initial, const TrajectorySystem& system, std::size_t steps,
                                std::uint64_t seed, std::uint64_t index, const RecordOptions& options)
{
    if (!system.free)
        throw std::invalid_argument("trajectory system needs a free propagator");
    if (!system.monitoring)
        throw std::invalid_argument("trajectory system needs a monitoring specification");
    if (static_cast<std::size_t>(initial.rows()) != system.dim())
        throw std::invalid_argument("initial state dimension does not match the system");
    if (options.every == 0)
        throw std::invalid_argument("record cadence must be positive");
    for (const auto& [x, y] : options.coherences)
        if (x >= system.dim() || y >= system.dim())
            throw std::out_of_range("coherence index out of range");

    const Propagator& free = *system.free;
    const MonitoringSpec& mon = *system.monitoring;
    const FeedbackSpec* fb = system.feedback.get();
    const double dt = free.dt();

    TrajectoryRecord rec;
    rec.seed = seed;
    rec.index = index;
    rec.observables.resize(options.observables.size());
    rec.coherences.resize(options.coherences.size());
    rec.signals.resize(options.signal_sites.size());

    NoiseStream rng(seed, index);
    DensityMatrix rho = initial;
    StateVector psi;
    const bool pure = system.evolution == Evolution::pure;
    if (pure) {
        psi = pure_state(initial);
        rho = psi * psi.adjoint();
    }
    append_record(rec, rho, 0.0, options, nullptr);

    for (std::size_t step = 1; step <= steps; ++step) {
        try {
            Signal sig;
            if (system.evolution == Evolution::unconditional) {
                rho = fb ? me_step(rho, free, mon, *fb) : me_step(rho, free, mon);
            } else if (pure) {
                sig = generate_signal(probabilities(psi), mon, dt, rng);
                psi = fb ? sse_step(psi, free, mon, *fb, sig.noise, system.scheme)
                         : sse_step(psi, free, mon, sig.noise, system.scheme);
            } else {
                sig = generate_signal(rho, mon, dt, rng);
                if (!fb) {
                    rho = sme_step(rho, free, mon, sig.noise, system.scheme);
                } else if (system.evolution == Evolution::composed) {
                    rho = sme_step(rho, free, mon, sig.noise, system.scheme);
                    rho = feedback_step(rho, fb->field(sig.signal), dt);
                } else {
                    rho = combined_step(rho, free, mon, *fb, sig.noise, system.scheme);
                }
            }
            if (step % options.every == 0 || step == steps) {
                if (pure)
                    rho = psi * psi.adjoint();
                append_record(rec, rho, static_cast<double>(step) * dt, options, sig.signal.size() ? &sig.signal : nullptr);
            }
        } catch (const NumericalGuardError& e) {
            throw e.at_step(static_cast<long>(step));
        }
    }
    if (pure)
        rho = psi * psi.adjoint();
    rec.final_state = rho;
    return rec;
}

std::size_t default_thread_count()
{
    if (const char* env = std::getenv("COLLAPSE_SIM_THREADS")) {
        char* end = nullptr;
        long n = std::strtol(env, &end, 10);
        if (end != env && n > 0)
            return static_cast<std::size_t>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

EnsembleResult run_ensemble(const std::vector<DensityMatrix>& initials, const TrajectorySystem& system,
                            std::size_t steps, std::uint64_t base_seed, std::size_t count, const RecordOptions& record,
                            const EnsembleOptions& options)
{
    if (initials.empty())
        throw std::invalid_argument("ensemble needs at least one initial state");
    if (count == 0)
        throw std::invalid_argument("ensemble size must be positive");

    RecordOptions rec_opt = record;
    rec_opt.states = options.mean_states;

    struct Chunk {
        std::vector<DensityMatrix> sums;
        DensityMatrix final_sum;
    };
    const std::size_t nchunks = (count + chunk_size - 1) / chunk_size;
    std::vector<Chunk> chunks(nchunks);
    std::vector<TrajectoryRecord> records(options.keep_records ? count : 0);
    std::vector<double> time;

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::mutex time_mutex;

    auto worker = [&]() {
        for (;;) {
            std::size_t c = next.fetch_add(1);
            if (c >= nchunks)
                return;
            try {
                Chunk& ch = chunks[c];
                const std::size_t lo = c * chunk_size, hi = std::min(count, lo + chunk_size);
                for (std::size_t i = lo; i < hi; ++i) {
                    TrajectoryRecord r =
                        run_trajectory(initials[i % initials.size()], system, steps, base_seed, i, rec_opt);
                    if (i == 0) {
                        std::lock_guard<std::mutex> lock(time_mutex);
                        time = r.time;
                    }
                    if (options.mean_states) {
                        if (ch.sums.empty())
                            ch.sums = r.states;
                        else
                            for (std::size_t k = 0; k < r.states.size(); ++k)
                                ch.sums[k] += r.states[k];
                    }
                    if (ch.final_sum.size() == 0)
                        ch.final_sum = r.final_state;
                    else
                        ch.final_sum += r.final_state;
                    r.states.clear();
                    if (options.keep_records)
                        records[i] = std::move(r);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next.store(nchunks);
                return;
            }
        }
    };

    std::size_t nthreads = options.threads ? options.threads : default_thread_count();
    nthreads = std::max<std::size_t>(1, std::min(nthreads, nchunks));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < nthreads; ++t)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    EnsembleResult out;
    out.time = time;
    const double inv = 1.0 / static_cast<double>(count);
    out.mean_final = chunks[0].final_sum;
    for (std::size_t c = 1; c < nchunks; ++c)
        out.mean_final += chunks[c].final_sum;
    out.mean_final *= inv;
    if (options.mean_states) {
        out.mean_states = chunks[0].sums;
        for (std::size_t c = 1; c < nchunks; ++c)
            for (std::size_t k = 0; k < out.mean_states.size(); ++k)
                out.mean_states[k] += chunks[c].sums[k];
        for (auto& s : out.mean_states)
            s *= inv;
    }
    out.records = std::move(records);
    return out;
}

}  // namespace collapse
