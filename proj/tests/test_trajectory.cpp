#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "collapse/models.hpp"
#include "collapse/trajectory.hpp"

using namespace collapse;

namespace {

Model ring(double dt = 1e-3)
{
    LatticeGrid g({8}, {1.0});
    ConfigurationSpace sp(g, ParticleSet({Particle{1.0, Support::full(), true, {}}}));
    ModelSpec s;
    s.kind = ModelKind::csl;
    s.sigma = 1.0;
    s.gamma = 10.0;
    s.G = 0.03;
    s.dt = dt;
    return build_model(s, sp);
}

DensityMatrix cat(const Model& m)
{
    return projector(superpose(gaussian_state(m.space(), {{1.0}}, 0.8), gaussian_state(m.space(), {{5.0}}, 0.8)));
}

}  // namespace

TEST_CASE("trajectories are reproducible from (seed, index)")
{
    Model m = ring();
    TrajectorySystem sys = make_system(m);
    RecordOptions opt;
    opt.every = 10;
    opt.coherences = {{1, 5}};
    opt.signal_sites = {0, 3};
    auto a = run_trajectory(cat(m), sys, 100, 42, 7, opt);
    auto b = run_trajectory(cat(m), sys, 100, 42, 7, opt);
    auto c = run_trajectory(cat(m), sys, 100, 42, 8, opt);
    CHECK(a.time.size() == 11);
    CHECK(a.final_state == b.final_state);
    CHECK(a.coherences == b.coherences);
    for (std::size_t k = 1; k < a.signals[1].size(); ++k)
        CHECK(a.signals[1][k] == b.signals[1][k]);
    CHECK(a.final_state != c.final_state);
    CHECK(std::isnan(a.signals[0][0]));
    CHECK(!std::isnan(a.signals[0][1]));
    for (double tr : a.trace)
        CHECK(std::abs(tr - 1.0) < 1e-12);
}

TEST_CASE("ensemble results do not depend on the thread count")
{
    Model m = ring();
    TrajectorySystem sys = make_system(m);
    RecordOptions opt;
    opt.every = 25;
    EnsembleOptions one{1, true, true}, four{4, true, true};
    auto a = run_ensemble({cat(m)}, sys, 50, 3, 21, opt, one);
    auto b = run_ensemble({cat(m)}, sys, 50, 3, 21, opt, four);
    CHECK(a.mean_final == b.mean_final);
    CHECK(a.mean_states.size() == 3);
    for (std::size_t k = 0; k < a.mean_states.size(); ++k)
        CHECK(a.mean_states[k] == b.mean_states[k]);
    CHECK(a.records.size() == 21);
    CHECK(a.records[20].index == 20);
    CHECK(a.records[20].final_state == run_trajectory(cat(m), sys, 50, 3, 20, opt).final_state);
}

TEST_CASE("evolution variants run and keep the trace")
{
    Model m = ring();
    for (Evolution e : {Evolution::conditional, Evolution::composed, Evolution::unconditional, Evolution::pure}) {
        TrajectorySystem sys = make_system(m, e);
        auto r = run_trajectory(cat(m), sys, 40, 5, 0, {});
        CHECK(std::abs(r.final_state.trace().real() - 1.0) < 1e-12);
        if (e == Evolution::pure)
            CHECK(r.purity.back() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("guard errors carry the step index")
{
    Model m = ring(5.0);
    TrajectorySystem sys = make_system(m);
    try {
        run_trajectory(cat(m), sys, 50, 1);
        FAIL("expected a guard error");
    } catch (const NumericalGuardError& e) {
        CHECK(e.step() >= 1);
        CHECK(std::string(e.what()).find("step") != std::string::npos);
    }
}

TEST_CASE("invalid trajectory requests are rejected")
{
    Model m = ring();
    TrajectorySystem sys = make_system(m);
    RecordOptions bad;
    bad.every = 0;
    CHECK_THROWS_AS(run_trajectory(cat(m), sys, 10, 1, 0, bad), std::invalid_argument);
    RecordOptions out;
    out.coherences = {{0, 99}};
    CHECK_THROWS_AS(run_trajectory(cat(m), sys, 10, 1, 0, out), std::out_of_range);
    CHECK_THROWS_AS(run_ensemble({}, sys, 10, 1, 4), std::invalid_argument);
    CHECK_THROWS_AS(run_ensemble({cat(m)}, sys, 10, 1, 0), std::invalid_argument);
}
