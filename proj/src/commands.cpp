#include "collapse/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <locale>
#include <ostream>
#include <sstream>

#include "collapse/analysis.hpp"
#include "collapse/config.hpp"
#include "collapse/presets.hpp"

namespace collapse {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    std::ostringstream s;
    s.imbue(std::locale::classic());
    s << std::setprecision(17) << v;
    return s.str();
}

std::string short_fmt(double v)
{
    std::ostringstream s;
    s.imbue(std::locale::classic());
    s << std::setprecision(6) << v;
    return s.str();
}

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
    void row(const std::vector<double>& values) { rows_.push_back(values); }

    void write(std::ostream& os) const
    {
        for (std::size_t i = 0; i < header_.size(); ++i)
            os << (i ? "," : "") << header_[i];
        os << "\r\n";
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i)
                os << (i ? "," : "") << fmt(r[i]);
            os << "\r\n";
        }
    }

    json to_json() const
    {
        json j = json::array();
        for (const auto& r : rows_) {
            json o;
            for (std::size_t i = 0; i < r.size(); ++i)
                o[header_[i]] = std::isfinite(r[i]) ? json(r[i]) : json(nullptr);
            j.push_back(o);
        }
        return j;
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<double>> rows_;
};

void write_file(const fs::path& path, const std::string& content)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    f << content;
}

RunConfig load(const CommandOptions& opt)
{
    RunConfig c = load_config(opt.config_path);
    if (opt.seed)
        c.integration.seed = *opt.seed;
    if (opt.out)
        c.outputs.dir = *opt.out;
    return c;
}

Model build(const RunConfig& c, bool with_dynamics)
{
    try {
        return build_model(c.model, make_space(c), with_dynamics);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

std::vector<std::pair<std::string, DiagonalField>> position_observables(const ConfigurationSpace& space)
{
    std::vector<std::pair<std::string, DiagonalField>> out;
    const LatticeGrid& g = space.grid();
    for (std::size_t n = 0; n < space.particle_count(); ++n) {
        const Support& sup = space.particles()[n].support;
        for (int a = 0; a < g.dimension(); ++a) {
            if (sup.kind == Support::Kind::line && a != sup.axis)
                continue;
            DiagonalField f(static_cast<Eigen::Index>(space.size()));
            for (std::size_t x = 0; x < space.size(); ++x)
                f[static_cast<Eigen::Index>(x)] = g.coords(space.site(x, n))[a] * g.spacing()[a];
            out.emplace_back("x" + std::to_string(n) + "_axis" + std::to_string(a) + "[length]", std::move(f));
        }
    }
    return out;
}

std::size_t peak(const StateVector& psi)
{
    Eigen::Index j = 0;
    psi.cwiseAbs().maxCoeff(&j);
    return static_cast<std::size_t>(j);
}

CsvTable series_table(const TrajectoryRecord& rec, const RecordOptions& opt)
{
    std::vector<std::string> h = {"t[time]", "trace[1]", "purity[1]"};
    const bool lmin = !rec.min_eigenvalue.empty();
    if (lmin)
        h.push_back("min_eigenvalue[1]");
    for (const auto& [name, f] : opt.observables)
        h.push_back(name);
    for (const auto& [x, y] : opt.coherences)
        h.push_back("abs_rho_" + std::to_string(x) + "_" + std::to_string(y) + "[1]");
    for (std::size_t s : opt.signal_sites)
        h.push_back("signal_site" + std::to_string(s) + "[mass/volume]");
    CsvTable t(h);
    for (std::size_t i = 0; i < rec.time.size(); ++i) {
        std::vector<double> r = {rec.time[i], rec.trace[i], rec.purity[i]};
        if (lmin)
            r.push_back(rec.min_eigenvalue[i]);
        for (const auto& o : rec.observables)
            r.push_back(o[i]);
        for (const auto& c : rec.coherences)
            r.push_back(c[i]);
        for (const auto& s : rec.signals)
            r.push_back(s[i]);
        t.row(r);
    }
    return t;
}

std::string snapshot_csv(const std::vector<double>& time, const std::vector<DensityMatrix>& states, double dt,
                         std::size_t every)
{
    CsvTable t({"t[time]", "config", "probability[1]"});
    for (std::size_t i = 0; i < states.size() && i < time.size(); ++i) {
        const auto step = static_cast<std::size_t>(std::llround(time[i] / dt));
        if (step % every != 0)
            continue;
        const double tr = states[i].trace().real();
        for (Eigen::Index x = 0; x < states[i].rows(); ++x)
            t.row({time[i], static_cast<double>(x), states[i](x, x).real() / tr});
    }
    std::ostringstream s;
    t.write(s);
    return s.str();
}

TrajectoryRecord deterministic_run(const Model& model, const StateVector& psi0, std::size_t steps,
                                   const RecordOptions& opt)
{
    TrajectoryRecord rec;
    StateVector psi = psi0;
    DensityMatrix rho = projector(psi0);
    const bool sn = model.kind() == ModelKind::sn;
    append_record(rec, rho, 0.0, opt);
    for (std::size_t s = 1; s <= steps; ++s) {
        if (sn)
            psi = sn_step(psi, model);
        else
            rho = exact_pair_step(rho, model);
        if (s % opt.every == 0 || s == steps) {
            if (sn)
                rho = projector(psi);
            append_record(rec, rho, static_cast<double>(s) * model.dt(), opt);
        }
    }
    rec.final_state = sn ? projector(psi) : rho;
    return rec;
}

json fit_coherences(const TrajectoryRecord& rec, const RecordOptions& opt, const Model& model)
{
    json out = json::array();
    for (std::size_t k = 0; k < opt.coherences.size(); ++k) {
        auto [x, y] = opt.coherences[k];
        json j;
        j["pair"] = {x, y};
        try {
            DecayFit f = fit_offdiagonal_decay(rec.time, rec.coherences[k]);
            j["fitted_rate"] = f.rate;
            j["fitted_rate_stderr"] = f.stderr_rate;
            j["points"] = f.points;
        } catch (const std::domain_error& e) {
            j["fitted_rate"] = nullptr;
            j["fit_error"] = e.what();
        }
        if (model.monitored()) {
            RateComponents r = closed_form_rate(model, x, y);
            j["closed_form_rate"] = {{"intrinsic", r.intrinsic}, {"backaction", r.backaction}, {"total", r.total}};
        }
        out.push_back(j);
    }
    return out;
}

json final_diagnostics(const TrajectoryRecord& rec, const RecordOptions& opt)
{
    json j;
    if (rec.time.empty())
        return j;
    j["t"] = rec.time.back();
    j["trace"] = rec.trace.back();
    j["purity"] = rec.purity.back();
    if (!rec.min_eigenvalue.empty())
        j["min_eigenvalue"] = rec.min_eigenvalue.back();
    for (std::size_t k = 0; k < opt.observables.size(); ++k)
        j["observables"][opt.observables[k].first] = rec.observables[k].back();
    return j;
}

int run_impl(const CommandOptions& options, std::ostream& out)
{
    const auto start = std::chrono::steady_clock::now();
    RunConfig c = load(options);
    Model model = build(c, true);
    const ConfigurationSpace& space = model.space();
    const auto branches = initial_branches(c, space);
    const StateVector psi0 = initial_state(c, space);
    const DensityMatrix rho0 = projector(psi0);

    RecordOptions rec;
    rec.every = c.integration.record_every;
    rec.observables = position_observables(space);
    for (const auto& [x, y] : c.outputs.coherences) {
        if (x >= space.size() || y >= space.size())
            throw ConfigError("outputs.coherences index out of range");
        rec.coherences.emplace_back(x, y);
    }
    if (c.outputs.auto_coherence && branches.size() == 2) {
        std::size_t a = peak(branches[0]), b = peak(branches[1]);
        if (a != b)
            rec.coherences.emplace_back(a, b);
    }
    for (const auto& s : c.outputs.signal_sites)
        rec.signal_sites.push_back(space.grid().site(s));
    if (c.outputs.snapshot_every) {
        if (c.outputs.snapshot_every % rec.every != 0)
            throw ConfigError("outputs.snapshot_every must be a multiple of integration.record_every");
        rec.states = true;
    }
    const std::size_t steps = c.integration.steps;
    const std::uint64_t seed = c.integration.seed;

    fs::path dir(c.outputs.dir);
    fs::create_directories(dir);

    json summary;
    summary["command"] = "run";
    summary["config"] = to_json(c);
    summary["seed"] = seed;

    TrajectoryRecord main;
    std::vector<DensityMatrix> main_states;
    std::string main_name;
    std::vector<std::string> warnings;
    RecordOptions main_opt = rec;

    if (!model.monitored()) {
        if (c.integration.mode != IntegrationSpec::Mode::master)
            throw ConfigError("model " + to_string(model.kind()) + " is deterministic; use integration.mode = master");
        rec.signal_sites.clear();
        main_opt = rec;
        main = deterministic_run(model, psi0, steps, rec);
        main_name = "master.csv";
        summary["trajectories"] = json::array();
    } else if (c.integration.mode == IntegrationSpec::Mode::master) {
        rec.signal_sites.clear();
        main_opt = rec;
        TrajectorySystem sys = make_system(model, Evolution::unconditional, c.integration.scheme);
        main = run_trajectory(rho0, sys, steps, seed, 0, rec);
        main_name = "master.csv";
        summary["trajectories"] = json::array();
    } else if (c.integration.mode == IntegrationSpec::Mode::trajectory) {
        TrajectorySystem sys = make_system(model, c.integration.evolution, c.integration.scheme);
        main = run_trajectory(rho0, sys, steps, seed, 0, rec);
        main_name = "trajectory_0.csv";
        summary["trajectories"] = json::array({{{"index", 0}, {"file", main_name}}});
    } else {
        TrajectorySystem sys = make_system(model, c.integration.evolution, c.integration.scheme);
        RecordOptions traj_opt = rec;
        traj_opt.states = false;
        EnsembleOptions eo;
        eo.keep_records = c.outputs.per_trajectory_files;
        eo.mean_states = true;
        EnsembleResult res = run_ensemble({rho0}, sys, steps, seed, c.integration.ensemble, traj_opt, eo);
        json list = json::array();
        for (const TrajectoryRecord& r : res.records) {
            const std::string name = "trajectory_" + std::to_string(r.index) + ".csv";
            std::ostringstream s;
            series_table(r, traj_opt).write(s);
            write_file(dir / name, s.str());
            list.push_back({{"index", r.index}, {"file", name}});
            for (const auto& w : r.warnings)
                warnings.push_back("trajectory " + std::to_string(r.index) + ": " + w);
        }
        summary["trajectories"] = list;
        summary["ensemble"] = c.integration.ensemble;
        main_opt = rec;
        main_opt.signal_sites.clear();
        main_opt.states = false;
        for (std::size_t i = 0; i < res.mean_states.size(); ++i)
            append_record(main, res.mean_states[i], res.time[i], main_opt);
        main.final_state = res.mean_final;
        main_states = std::move(res.mean_states);
        main_name = "ensemble_mean.csv";
    }
    if (main_states.empty())
        main_states = main.states;
    for (const auto& w : main.warnings)
        warnings.push_back(w);

    std::ostringstream s;
    series_table(main, main_opt).write(s);
    write_file(dir / main_name, s.str());
    summary["series"] = main_name;
    if (c.outputs.snapshot_every) {
        write_file(dir / "snapshots.csv", snapshot_csv(main.time, main_states, c.integration.dt,
                                                       c.outputs.snapshot_every));
        summary["snapshots"] = "snapshots.csv";
    }
    summary["final"] = final_diagnostics(main, main_opt);
    summary["coherences"] = fit_coherences(main, main_opt, model);
    summary["warnings"] = warnings;
    summary["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_file(dir / "summary.json", summary.dump(2) + "\n");
    if (options.json)
        out << summary.dump(2) << "\n";
    else
        out << "wrote " << (dir / main_name).string() << " and " << (dir / "summary.json").string() << "\n";
    return exit_ok;
}

json linearity_json(const LinearityReport& r)
{
    return {{"model", r.model},
            {"time", r.time},
            {"trajectories", r.trajectories},
            {"initial_distance", r.initial_distance},
            {"distance", r.distance},
            {"threshold", r.threshold},
            {"distinguishable", r.distinguishable}};
}

int analyze_impl(const std::string& sub, const CommandOptions& options, std::ostream& out)
{
    RunConfig c = load(options);
    const AnalysisSpec& a = c.analysis;
    json report;
    std::optional<CsvTable> table;

    if (sub == "rate") {
        Model model = build(c, false);
        if (!model.monitored())
            throw ConfigError("rate analysis needs a monitored model");
        table.emplace(std::vector<std::string>{"separation[length]", "gamma_intrinsic[1/time]",
                                               "gamma_backaction[1/time]", "gamma_total[1/time]"});
        try {
            for (const auto& r : rate_profile(model, a.separations, a.axis))
                table->row({r.separation, r.rate.intrinsic, r.rate.backaction, r.rate.total});
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    } else if (sub == "pair-potential") {
        Model model = build(c, false);
        if (!model.monitored())
            throw ConfigError("pair-potential analysis needs a monitored model with feedback");
        std::vector<int> seps;
        for (int d : a.separations)
            if (d > 0)
                seps.push_back(d);
        table.emplace(std::vector<std::string>{"separation[length]", "v_lattice[energy]", "v_shifted[energy]",
                                               "correction[energy]", "v_corrected[energy]", "ratio[1]"});
        std::vector<PairPotentialRow> rows;
        try {
            rows = pair_potential_curve(model, seps, a.axis);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        for (const auto& r : rows)
            table->row({r.separation, r.lattice, r.shifted, r.correction, r.corrected, r.ratio});
    } else if (sub == "kappa-scan") {
        const ConfigurationSpace space = make_space(c);
        int d = 0;
        for (int s : a.separations)
            if (s != 0) {
                d = s;
                break;
            }
        if (d == 0)
            throw ConfigError("kappa-scan needs a nonzero separation");
        std::vector<std::size_t> zero(space.particle_count(), 0);
        const std::size_t x = space.config_index(zero);
        auto sites = space.sites(x);
        std::vector<int> step(space.grid().dimension(), 0);
        step[a.axis] = d;
        sites[0] = space.grid().shifted(sites[0], step);
        KappaScan scan;
        try {
            scan = kappa_scan(c.model, space, a.kappas, x, space.config_at_sites(sites));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        table.emplace(std::vector<std::string>{"kappa[1]", "gamma_intrinsic[1/time]", "gamma_backaction[1/time]",
                                               "gamma_total[1/time]", "relative_to_kappa2[1]"});
        for (const auto& r : scan.rows)
            table->row({r.kappa, r.rate.intrinsic, r.rate.backaction, r.rate.total, r.relative});
        report["argmin"] = scan.argmin;
    } else if (sub == "linearity") {
        if (c.initial.type != InitialSpec::Type::cat)
            throw ConfigError("linearity analysis needs a cat initial state");
        Model model = build(c, true);
        auto br = initial_branches(c, model.space());
        // orthogonalise so that both ensembles share the mean exactly
        StateVector a0 = br[0] / br[0].norm();
        StateVector b0 = br[1] - a0 * a0.dot(br[1]);
        if (!(b0.norm() > 1e-12))
            throw ConfigError("cat branches coincide");
        b0 /= b0.norm();
        const double r2 = 1.0 / std::sqrt(2.0);
        std::vector<StateVector> ens_a = {r2 * (a0 + b0), r2 * (a0 - b0)};
        std::vector<StateVector> ens_b = {a0, b0};
        LinearityOptions lo;
        lo.steps = a.linearity_steps;
        lo.trajectories = a.linearity_trajectories;
        lo.seed = c.integration.seed;
        lo.evolution = a.linearity_evolution;
        lo.threshold = a.linearity_threshold;
        report = linearity_json(linearity_witness(model, ens_a, ens_b, lo));
    } else {
        throw ConfigError("unknown analysis '" + sub + "'");
    }

    std::string text;
    if (options.json) {
        json j = report;
        j["analysis"] = sub;
        if (table)
            j["rows"] = table->to_json();
        text = j.dump(2) + "\n";
    } else if (table) {
        std::ostringstream s;
        table->write(s);
        text = s.str();
    } else {
        text = report.dump(2) + "\n";
    }
    out << text;
    if (options.out) {
        fs::create_directories(*options.out);
        const bool as_json = options.json || !table;
        write_file(fs::path(*options.out) / (sub + (as_json ? ".json" : ".csv")), text);
    }
    return exit_ok;
}

template <class F>
int guarded(std::ostream& err, F&& body)
{
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const NumericalGuardError& e) {
        err << "numerical guard: " << e.what() << "\n";
        return exit_guard;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_failure;
    }
}

}  // namespace

int cmd_run(const CommandOptions& options, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] { return run_impl(options, out); });
}

int cmd_analyze(const std::string& subcommand, const CommandOptions& options, std::ostream& out,
                std::ostream& err)
{
    return guarded(err, [&] { return analyze_impl(subcommand, options, out); });
}

int cmd_presets(bool as_json, std::ostream& out)
{
    const LatticeUnits units;
    json list = json::array();
    for (const PhysicalPreset& p : physical_presets()) {
        LatticeParameters lp = to_lattice(p, units);
        json j;
        j["name"] = p.name;
        j["kernel"] = p.kernel == KernelKind::csl ? "csl" : "dp";
        j["sigma_m"] = p.sigma;
        if (p.kernel == KernelKind::csl)
            j["gamma_over_hbar2_m3_kg-2_s-1"] = p.gamma_over_hbar2;
        else
            j["kappa"] = p.kappa;
        j["description"] = p.description;
        j["lattice"] = {{"sigma", lp.sigma}, {"gamma", lp.gamma}, {"kappa", lp.kappa}, {"G", lp.G}};
        list.push_back(j);
    }
    json units_j = {{"length_m", units.length},
                    {"mass_kg", units.mass},
                    {"time_s", units.time()},
                    {"hbar", 1.0},
                    {"mapping",
                     {{"sigma", "sigma / a"},
                      {"G", "G m0^3 a / hbar^2"},
                      {"gamma", "(gamma / hbar^2) m0^3 / (hbar a)"},
                      {"time", "m0 a^2 / hbar"}}}};
    if (as_json) {
        out << json{{"presets", list}, {"lattice_units", units_j}}.dump(2) << "\n";
        return exit_ok;
    }
    for (const json& p : list) {
        out << p["name"].get<std::string>() << ": " << p["description"].get<std::string>() << "\n";
        out << "  kernel " << p["kernel"].get<std::string>() << ", sigma = " << short_fmt(p["sigma_m"].get<double>())
            << " m";
        if (p.contains("kappa"))
            out << ", kappa = " << short_fmt(p["kappa"].get<double>());
        else
            out << ", gamma/hbar^2 = " << short_fmt(p["gamma_over_hbar2_m3_kg-2_s-1"].get<double>())
                << " m^3 kg^-2 s^-1";
        out << "\n  lattice: sigma = " << short_fmt(p["lattice"]["sigma"].get<double>())
            << ", gamma = " << short_fmt(p["lattice"]["gamma"].get<double>())
            << ", G = " << short_fmt(p["lattice"]["G"].get<double>()) << "\n";
    }
    out << "lattice units: a = " << short_fmt(units.length) << " m, m0 = " << short_fmt(units.mass)
        << " kg, time unit m0 a^2 / hbar = " << short_fmt(units.time()) << " s, hbar = 1\n";
    out << "mapping: sigma_lat = sigma / a, G_lat = G m0^3 a / hbar^2, gamma_lat = (gamma / hbar^2) m0^3 / (hbar a)\n";
    return exit_ok;
}

}  // namespace collapse
