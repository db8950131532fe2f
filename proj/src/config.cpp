#include "collapse/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace collapse {

using nlohmann::json;

namespace {

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys)
{
    if (!j.is_object())
        throw ConfigError(where + " must be an object");
    std::set<std::string> known(keys.begin(), keys.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <class T>
T get(const json& j, const char* key, const std::string& where, T fallback)
{
    if (!j.contains(key) || j.at(key).is_null())
        return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + " has the wrong type");
    }
}

template <class T>
T require(const json& j, const char* key, const std::string& where)
{
    if (!j.contains(key))
        throw ConfigError(where + "." + key + " is required");
    return get<T>(j, key, where, T{});
}

double positive(double v, const std::string& name)
{
    if (!(v > 0.0))
        throw ConfigError(name + " must be positive");
    return v;
}

Evolution evolution_from(const std::string& s)
{
    if (s == "conditional")
        return Evolution::conditional;
    if (s == "composed")
        return Evolution::composed;
    if (s == "unconditional")
        return Evolution::unconditional;
    if (s == "pure")
        return Evolution::pure;
    throw ConfigError("unknown evolution '" + s + "'");
}

StepScheme scheme_from(const std::string& s)
{
    if (s == "milstein")
        return StepScheme::milstein;
    if (s == "euler-maruyama")
        return StepScheme::euler_maruyama;
    throw ConfigError("unknown scheme '" + s + "'");
}

BranchSpec parse_branch(const json& j, const std::string& where)
{
    allow_keys(j, where, {"centers", "momenta", "sites"});
    BranchSpec b;
    b.centers = get<std::vector<std::vector<double>>>(j, "centers", where, {});
    b.momenta = get<std::vector<std::vector<double>>>(j, "momenta", where, {});
    b.sites = get<std::vector<std::vector<int>>>(j, "sites", where, {});
    return b;
}

json branch_json(const BranchSpec& b)
{
    json j = json::object();
    if (!b.centers.empty())
        j["centers"] = b.centers;
    if (!b.momenta.empty())
        j["momenta"] = b.momenta;
    if (!b.sites.empty())
        j["sites"] = b.sites;
    return j;
}

}  // namespace

std::string to_string(Evolution evolution)
{
    switch (evolution) {
    case Evolution::conditional: return "conditional";
    case Evolution::composed: return "composed";
    case Evolution::unconditional: return "unconditional";
    case Evolution::pure: return "pure";
    }
    return "conditional";
}

std::string to_string(IntegrationSpec::Mode mode)
{
    switch (mode) {
    case IntegrationSpec::Mode::trajectory: return "trajectory";
    case IntegrationSpec::Mode::ensemble: return "ensemble";
    case IntegrationSpec::Mode::master: return "master";
    }
    return "trajectory";
}

RunConfig parse_config(const json& j)
{
    allow_keys(j, "config", {"grid", "particles", "initial", "model", "integration", "outputs", "analysis"});
    RunConfig c;

    if (!j.contains("grid"))
        throw ConfigError("config.grid is required");
    const json& g = j.at("grid");
    allow_keys(g, "grid", {"dims", "spacing"});
    c.dims = require<std::vector<int>>(g, "dims", "grid");
    if (c.dims.empty() || c.dims.size() > 3)
        throw ConfigError("grid.dims must have 1 to 3 entries");
    for (int d : c.dims)
        if (d < 1)
            throw ConfigError("grid.dims entries must be positive");
    if (g.contains("spacing") && g.at("spacing").is_number())
        c.spacing.assign(c.dims.size(), g.at("spacing").get<double>());
    else
        c.spacing = get<std::vector<double>>(g, "spacing", "grid", std::vector<double>(c.dims.size(), 1.0));
    if (c.spacing.size() != c.dims.size())
        throw ConfigError("grid.spacing must match grid.dims");
    for (double a : c.spacing)
        positive(a, "grid.spacing");

    if (!j.contains("particles") || !j.at("particles").is_array() || j.at("particles").empty())
        throw ConfigError("config.particles must be a non-empty array");
    for (std::size_t n = 0; n < j.at("particles").size(); ++n) {
        const json& p = j.at("particles")[n];
        const std::string where = "particles[" + std::to_string(n) + "]";
        allow_keys(p, where, {"mass", "support", "kinetic"});
        Particle part;
        part.mass = positive(get<double>(p, "mass", where, 1.0), where + ".mass");
        part.kinetic = get<bool>(p, "kinetic", where, true);
        if (p.contains("support")) {
            const json& s = p.at("support");
            allow_keys(s, where + ".support", {"kind", "axis", "origin"});
            const std::string kind = get<std::string>(s, "kind", where + ".support", "full");
            if (kind == "full") {
                part.support = Support::full();
            } else if (kind == "line") {
                int axis = get<int>(s, "axis", where + ".support", 0);
                if (axis < 0 || axis >= static_cast<int>(c.dims.size()))
                    throw ConfigError(where + ".support.axis out of range");
                auto origin = get<std::vector<int>>(s, "origin", where + ".support", {});
                if (!origin.empty() && origin.size() != c.dims.size())
                    throw ConfigError(where + ".support.origin must match grid.dims");
                part.support = Support::line(axis, origin);
            } else {
                throw ConfigError("unknown support kind '" + kind + "'");
            }
        }
        c.particles.push_back(part);
    }

    if (j.contains("model")) {
        const json& m = j.at("model");
        allow_keys(m, "model", {"kind", "kernel", "sigma", "gamma", "kappa", "G", "feedback", "smeared_feedback"});
        try {
            c.model.kind = model_kind_from_string(get<std::string>(m, "kind", "model", "csl"));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        if (m.contains("kernel") && !m.at("kernel").is_null()) {
            const std::string k = get<std::string>(m, "kernel", "model", "csl");
            if (k == "csl")
                c.model.kernel = KernelKind::csl;
            else if (k == "dp")
                c.model.kernel = KernelKind::dp;
            else
                throw ConfigError("unknown kernel '" + k + "'");
        }
        c.model.sigma = get<double>(m, "sigma", "model", 1.0);
        c.model.gamma = get<double>(m, "gamma", "model", 1.0);
        c.model.kappa = get<double>(m, "kappa", "model", 2.0);
        c.model.G = get<double>(m, "G", "model", 1.0);
        c.model.feedback = get<bool>(m, "feedback", "model", true);
        if (m.contains("smeared_feedback") && !m.at("smeared_feedback").is_null())
            c.model.smeared_feedback = get<bool>(m, "smeared_feedback", "model", false);
        if (c.model.sigma < 0.0)
            throw ConfigError("model.sigma must not be negative");
        positive(c.model.gamma, "model.gamma");
        positive(c.model.kappa, "model.kappa");
        if (c.model.G < 0.0)
            throw ConfigError("model.G must not be negative");
    }

    if (j.contains("integration")) {
        const json& in = j.at("integration");
        allow_keys(in, "integration",
                   {"mode", "evolution", "scheme", "dt", "steps", "ensemble", "seed", "record_every"});
        const std::string mode = get<std::string>(in, "mode", "integration", "trajectory");
        if (mode == "trajectory")
            c.integration.mode = IntegrationSpec::Mode::trajectory;
        else if (mode == "ensemble")
            c.integration.mode = IntegrationSpec::Mode::ensemble;
        else if (mode == "master")
            c.integration.mode = IntegrationSpec::Mode::master;
        else
            throw ConfigError("unknown integration mode '" + mode + "'");
        c.integration.evolution = evolution_from(get<std::string>(in, "evolution", "integration", "conditional"));
        if (c.integration.evolution == Evolution::unconditional)
            throw ConfigError("use integration.mode = master for unconditional evolution");
        c.integration.scheme = scheme_from(get<std::string>(in, "scheme", "integration", "milstein"));
        c.integration.dt = positive(get<double>(in, "dt", "integration", 1e-3), "integration.dt");
        const long steps = get<long>(in, "steps", "integration", 1000);
        const long ens = get<long>(in, "ensemble", "integration", 1);
        const long every = get<long>(in, "record_every", "integration", 1);
        if (steps < 0)
            throw ConfigError("integration.steps must not be negative");
        if (ens < 1)
            throw ConfigError("integration.ensemble must be at least 1");
        if (every < 1)
            throw ConfigError("integration.record_every must be at least 1");
        c.integration.steps = static_cast<std::size_t>(steps);
        c.integration.ensemble = static_cast<std::size_t>(ens);
        c.integration.record_every = static_cast<std::size_t>(every);
        c.integration.seed = get<std::uint64_t>(in, "seed", "integration", 1);
    }
    c.model.dt = c.integration.dt;

    if (j.contains("initial")) {
        const json& ini = j.at("initial");
        allow_keys(ini, "initial", {"type", "width", "centers", "momenta", "sites", "branches", "phase"});
        const std::string type = get<std::string>(ini, "type", "initial", "gaussian");
        if (type == "gaussian")
            c.initial.type = InitialSpec::Type::gaussian;
        else if (type == "site")
            c.initial.type = InitialSpec::Type::site;
        else if (type == "cat")
            c.initial.type = InitialSpec::Type::cat;
        else
            throw ConfigError("unknown initial type '" + type + "'");
        c.initial.width = positive(get<double>(ini, "width", "initial", 1.0), "initial.width");
        c.initial.phase = get<double>(ini, "phase", "initial", 0.0);
        if (c.initial.type == InitialSpec::Type::cat) {
            if (!ini.contains("branches") || !ini.at("branches").is_array() || ini.at("branches").size() != 2)
                throw ConfigError("initial.branches must list two branches for a cat state");
            for (std::size_t b = 0; b < 2; ++b)
                c.initial.branches.push_back(
                    parse_branch(ini.at("branches")[b], "initial.branches[" + std::to_string(b) + "]"));
        } else {
            if (ini.contains("branches"))
                throw ConfigError("initial.branches is only used by cat states");
            BranchSpec b;
            b.centers = get<std::vector<std::vector<double>>>(ini, "centers", "initial", {});
            b.momenta = get<std::vector<std::vector<double>>>(ini, "momenta", "initial", {});
            b.sites = get<std::vector<std::vector<int>>>(ini, "sites", "initial", {});
            c.initial.branches.push_back(b);
        }
    } else {
        c.initial.branches.push_back({});
    }
    const std::size_t P = c.particles.size();
    for (BranchSpec& b : c.initial.branches) {
        if (b.centers.empty() && b.sites.empty()) {
            b.centers.assign(P, std::vector<double>(c.dims.size(), 0.0));
        }
        if (!b.centers.empty() && !b.sites.empty())
            throw ConfigError("an initial branch gives either centers or sites");
        const std::size_t list = b.centers.empty() ? b.sites.size() : b.centers.size();
        if (list != P)
            throw ConfigError("initial state needs one entry per particle");
        for (const auto& v : b.centers)
            if (v.size() != c.dims.size())
                throw ConfigError("initial centers must match grid.dims");
        for (const auto& v : b.sites)
            if (v.size() != c.dims.size())
                throw ConfigError("initial sites must match grid.dims");
        if (!b.momenta.empty() && b.momenta.size() != P)
            throw ConfigError("initial momenta need one entry per particle");
        for (const auto& v : b.momenta)
            if (v.size() != c.dims.size())
                throw ConfigError("initial momenta must match grid.dims");
    }

    if (j.contains("outputs")) {
        const json& o = j.at("outputs");
        allow_keys(o, "outputs",
                   {"dir", "coherences", "auto_coherence", "signal_sites", "snapshot_every", "per_trajectory_files"});
        c.outputs.dir = get<std::string>(o, "dir", "outputs", c.outputs.dir);
        for (const auto& pr : get<std::vector<std::vector<long>>>(o, "coherences", "outputs", {})) {
            if (pr.size() != 2 || pr[0] < 0 || pr[1] < 0)
                throw ConfigError("outputs.coherences entries are pairs of configuration indices");
            c.outputs.coherences.emplace_back(pr[0], pr[1]);
        }
        c.outputs.auto_coherence = get<bool>(o, "auto_coherence", "outputs", true);
        c.outputs.signal_sites = get<std::vector<std::vector<int>>>(o, "signal_sites", "outputs", {});
        for (const auto& s : c.outputs.signal_sites)
            if (s.size() != c.dims.size())
                throw ConfigError("outputs.signal_sites entries must match grid.dims");
        const long snap = get<long>(o, "snapshot_every", "outputs", 0);
        if (snap < 0)
            throw ConfigError("outputs.snapshot_every must not be negative");
        c.outputs.snapshot_every = static_cast<std::size_t>(snap);
        c.outputs.per_trajectory_files = get<bool>(o, "per_trajectory_files", "outputs", true);
    }

    if (j.contains("analysis")) {
        const json& a = j.at("analysis");
        allow_keys(a, "analysis",
                   {"separations", "axis", "kappas", "linearity_steps", "linearity_trajectories",
                    "linearity_evolution", "linearity_threshold"});
        c.analysis.separations = get<std::vector<int>>(a, "separations", "analysis", {});
        c.analysis.axis = get<int>(a, "axis", "analysis", 0);
        c.analysis.kappas = get<std::vector<double>>(a, "kappas", "analysis", {});
        for (double k : c.analysis.kappas)
            positive(k, "analysis.kappas");
        const long ls = get<long>(a, "linearity_steps", "analysis", 100);
        const long lt = get<long>(a, "linearity_trajectories", "analysis", 400);
        if (ls < 1 || lt < 1)
            throw ConfigError("analysis linearity step and trajectory counts must be positive");
        c.analysis.linearity_steps = static_cast<std::size_t>(ls);
        c.analysis.linearity_trajectories = static_cast<std::size_t>(lt);
        c.analysis.linearity_evolution =
            evolution_from(get<std::string>(a, "linearity_evolution", "analysis", "conditional"));
        c.analysis.linearity_threshold =
            positive(get<double>(a, "linearity_threshold", "analysis", 0.1), "analysis.linearity_threshold");
    }
    if (c.analysis.axis < 0 || c.analysis.axis >= static_cast<int>(c.dims.size()))
        throw ConfigError("analysis.axis out of range");
    if (c.analysis.separations.empty())
        for (int d = 0; d <= c.dims[c.analysis.axis] / 2; ++d)
            c.analysis.separations.push_back(d);
    if (c.analysis.kappas.empty())
        for (int i = 2; i <= 16; ++i)
            c.analysis.kappas.push_back(0.25 * i);
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file '" + path + "'");
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

json to_json(const RunConfig& c)
{
    json j;
    j["grid"] = {{"dims", c.dims}, {"spacing", c.spacing}};
    j["particles"] = json::array();
    for (const Particle& p : c.particles) {
        json s;
        if (p.support.kind == Support::Kind::full) {
            s = {{"kind", "full"}};
        } else {
            s = {{"kind", "line"}, {"axis", p.support.axis}};
            if (!p.support.origin.empty())
                s["origin"] = p.support.origin;
        }
        j["particles"].push_back({{"mass", p.mass}, {"support", s}, {"kinetic", p.kinetic}});
    }
    json ini;
    ini["type"] = c.initial.type == InitialSpec::Type::gaussian ? "gaussian"
                  : c.initial.type == InitialSpec::Type::site   ? "site"
                                                                : "cat";
    ini["width"] = c.initial.width;
    if (c.initial.type == InitialSpec::Type::cat) {
        ini["branches"] = json::array();
        for (const auto& b : c.initial.branches)
            ini["branches"].push_back(branch_json(b));
        ini["phase"] = c.initial.phase;
    } else {
        ini.update(branch_json(c.initial.branches.front()));
    }
    j["initial"] = ini;
    json m;
    m["kind"] = to_string(c.model.kind);
    m["kernel"] = c.model.kernel ? json(*c.model.kernel == KernelKind::csl ? "csl" : "dp") : json(nullptr);
    m["sigma"] = c.model.sigma;
    m["gamma"] = c.model.gamma;
    m["kappa"] = c.model.kappa;
    m["G"] = c.model.G;
    m["feedback"] = c.model.feedback;
    m["smeared_feedback"] = c.model.smeared_feedback ? json(*c.model.smeared_feedback) : json(nullptr);
    j["model"] = m;
    j["integration"] = {{"mode", to_string(c.integration.mode)},
                        {"evolution", to_string(c.integration.evolution)},
                        {"scheme", c.integration.scheme == StepScheme::milstein ? "milstein" : "euler-maruyama"},
                        {"dt", c.integration.dt},
                        {"steps", c.integration.steps},
                        {"ensemble", c.integration.ensemble},
                        {"seed", c.integration.seed},
                        {"record_every", c.integration.record_every}};
    json coh = json::array();
    for (const auto& [x, y] : c.outputs.coherences)
        coh.push_back({x, y});
    j["outputs"] = {{"dir", c.outputs.dir},
                    {"coherences", coh},
                    {"auto_coherence", c.outputs.auto_coherence},
                    {"signal_sites", c.outputs.signal_sites},
                    {"snapshot_every", c.outputs.snapshot_every},
                    {"per_trajectory_files", c.outputs.per_trajectory_files}};
    j["analysis"] = {{"separations", c.analysis.separations},
                     {"axis", c.analysis.axis},
                     {"kappas", c.analysis.kappas},
                     {"linearity_steps", c.analysis.linearity_steps},
                     {"linearity_trajectories", c.analysis.linearity_trajectories},
                     {"linearity_evolution", to_string(c.analysis.linearity_evolution)},
                     {"linearity_threshold", c.analysis.linearity_threshold}};
    return j;
}

ConfigurationSpace make_space(const RunConfig& c)
{
    try {
        return ConfigurationSpace(LatticeGrid(c.dims, c.spacing), ParticleSet(c.particles));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

std::vector<StateVector> initial_branches(const RunConfig& c, const ConfigurationSpace& space)
{
    std::vector<StateVector> out;
    for (const BranchSpec& b : c.initial.branches) {
        if (!b.sites.empty()) {
            std::vector<std::size_t> sites;
            for (const auto& s : b.sites)
                sites.push_back(space.grid().site(s));
            StateVector psi = StateVector::Zero(static_cast<Eigen::Index>(space.size()));
            try {
                psi[static_cast<Eigen::Index>(space.config_at_sites(sites))] = 1.0;
            } catch (const std::exception& e) {
                throw ConfigError(std::string("initial site outside the particle support: ") + e.what());
            }
            out.push_back(psi);
        } else {
            try {
                out.push_back(gaussian_state(space, b.centers, c.initial.width, b.momenta));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
    }
    return out;
}

StateVector initial_state(const RunConfig& c, const ConfigurationSpace& space)
{
    auto b = initial_branches(c, space);
    if (b.size() == 1)
        return b[0];
    try {
        return superpose(b[0], b[1], c.initial.phase);
    } catch (const std::domain_error& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace collapse
