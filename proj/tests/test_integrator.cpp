#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "fixtures.hpp"
#include "mfdrift/error.hpp"
#include "mfdrift/integrator.hpp"
#include "mfdrift/scenario.hpp"

using namespace mfdrift;

namespace {

Model flat_model(double level, double half_width, double sigma, double q, double n0, double z0)
{
    Model m;
    m.regions = {fixtures::flat_band(level, half_width, sigma)};
    m.theta = {{1.0}};
    m.demand = {DemandProfile{{ConstantSegment{q}}}};
    m.initial = {InitialState{n0, z0, 0.0}};
    return m;
}

bool same(const PathRecord& a, const PathRecord& b)
{
    if (a.t != b.t || a.samples.size() != b.samples.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        const Sample& x = a.samples[i];
        const Sample& y = b.samples[i];
        if (x.n != y.n || x.z != y.z || x.g != y.g || x.n_buf != y.n_buf || x.q_in != y.q_in) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("one hand-computed Euler step")
{
    const Model m = flat_model(1.5, 0.1, 0.04, 2.0, 1000.0, 0.0);
    const auto s0 = initial_states(m);
    const auto s1 = step_euler(s0, m, {2.0}, 0.5, {0.0}, DriftMode::ito_correct);
    CHECK(s1[0].n - s0[0].n == doctest::Approx(0.25).epsilon(1e-6));
    // Zero noise at the midpoint leaves z in place.
    CHECK(std::fabs(s1[0].z) < 1e-12);
    // The jam gate withholds about 1e-8 veh/s, which waits in the buffer.
    CHECK(s1[0].n_buf == doctest::Approx(0.5 * 2.0 * (1.0 - psi(9000.0, 1.0))).epsilon(1e-6));
}

TEST_CASE("noise-free balance point stays put")
{
    const Model m = flat_model(3.0, 0.3, 0.0, 3.0, 1000.0, 0.0);
    auto s = initial_states(m);
    for (int k = 0; k < 100; ++k) {
        s = step_latent(s, m, {3.0}, 0.5, {1.0}, DriftMode::ito_correct);
    }
    CHECK(s[0].n == doctest::Approx(1000.0).epsilon(1e-6));
    CHECK(std::fabs(s[0].z) < 1e-12);
}

TEST_CASE("latent step keeps G strictly inside the band")
{
    const ScenarioConfig cfg = load_preset("single-polynomial");
    auto s = initial_states(cfg.model);
    for (double xi : {-40.0, 40.0, 1e3, -1e3}) {
        s[0].n = 3000.0;
        const auto next = step_latent(s, cfg.model, {5.0}, 0.5, {xi}, DriftMode::ito_correct);
        const auto c = characteristic_curves(cfg.model.regions[0].boundary, next[0].n);
        const double g = c.g_mi + next[0].z;
        CHECK(g >= c.g_lw);
        CHECK(g <= c.g_up);
    }
}

TEST_CASE("horizon zero records only the initial state")
{
    ScenarioConfig cfg = load_preset("single-polynomial");
    cfg.sim.horizon = 0.0;
    const PathRecord rec = run_path(cfg.model, cfg.sim, 0);
    REQUIRE(rec.t.size() == 1);
    CHECK(rec.t[0] == 0.0);
    CHECK(rec.samples[0].n == cfg.model.initial[0].n);
}

TEST_CASE("paths are reproducible and independent of the thread count")
{
    ScenarioConfig cfg = load_preset("single-polynomial");
    cfg.sim.n_paths = 24;
    cfg.sim.horizon = 1000.0;
    CHECK(same(run_path(cfg.model, cfg.sim, 3), run_path(cfg.model, cfg.sim, 3)));

    setenv("MFDRIFT_THREADS", "1", 1);
    const EnsembleResult one = run_ensemble(cfg.model, cfg.sim);
    setenv("MFDRIFT_THREADS", "4", 1);
    const EnsembleResult four = run_ensemble(cfg.model, cfg.sim);
    unsetenv("MFDRIFT_THREADS");
    REQUIRE(one.paths.size() == 24);
    for (std::size_t i = 0; i < one.paths.size(); ++i) {
        CHECK(same(one.paths[i], four.paths[i]));
        CHECK(same(one.paths[i], run_path(cfg.model, cfg.sim, i)));
    }
    CHECK(one.paths[0].samples.back().n != one.paths[1].samples.back().n);
}

TEST_CASE("Euler on z and the latent scheme agree for small steps")
{
    ScenarioConfig cfg = load_preset("single-polynomial");
    cfg.model.regions[0].sigma = 0.005;
    cfg.sim.dt = 0.01;
    cfg.sim.horizon = 100.0;
    cfg.sim.record_stride = 100;
    for (std::size_t path = 0; path < 5; ++path) {
        cfg.sim.integration_mode = IntegrationMode::euler_on_z;
        const PathRecord a = run_path(cfg.model, cfg.sim, path);
        cfg.sim.integration_mode = IntegrationMode::latent_w;
        const PathRecord b = run_path(cfg.model, cfg.sim, path);
        double worst = 0.0;
        for (std::size_t k = 0; k < a.samples.size(); ++k) {
            worst = std::max(worst, std::fabs(a.samples[k].n - b.samples[k].n));
        }
        CHECK(worst < 1.0);
    }
}

TEST_CASE("flow audits close on every path")
{
    ScenarioConfig cfg = load_preset("single-polynomial");
    cfg.sim.n_paths = 50;
    const EnsembleResult ens = run_ensemble(cfg.model, cfg.sim);
    for (const auto& path : ens.paths) {
        const FlowAudit& a = path.audit[0];
        CHECK(std::fabs(a.flow_residual()) < 1e-6 * a.throughput());
        CHECK(std::fabs(a.buffer_residual()) < 1e-6 * a.throughput());
        CHECK(std::fabs(a.clamp_n) + std::fabs(a.clamp_buf) < 1e-3 * a.throughput());
    }
}

TEST_CASE("halving the step barely moves the mean final accumulation")
{
    // Coarse steps reuse the sum of the two fine increments, so the two
    // ensembles share their Brownian paths and only discretization differs.
    const ScenarioConfig cfg = load_preset("single-polynomial");
    const Model& m = cfg.model;
    const double dt = 0.5;
    const std::size_t steps = 10000;
    double coarse = 0.0;
    double fine = 0.0;
    const std::size_t paths = 200;
    for (std::size_t p = 0; p < paths; ++p) {
        RandomStream rs = SeedTree(99).child("path", p).stream();
        auto c = initial_states(m);
        auto f = c;
        for (std::size_t k = 0; k < steps; ++k) {
            const double t = static_cast<double>(k) * dt;
            const double a = rs.standard_normal();
            const double b = rs.standard_normal();
            f = step_latent(f, m, {eval_demand(m.demand[0], t)}, dt / 2, {a}, DriftMode::ito_correct);
            f = step_latent(f, m, {eval_demand(m.demand[0], t + dt / 2)}, dt / 2, {b},
                            DriftMode::ito_correct);
            c = step_latent(c, m, {eval_demand(m.demand[0], t)}, dt, {(a + b) / std::sqrt(2.0)},
                            DriftMode::ito_correct);
        }
        coarse += c[0].n;
        fine += f[0].n;
    }
    CHECK(std::fabs(coarse - fine) < 0.01 * fine);
}

TEST_CASE("frozen-n sampler")
{
    const auto p = fixtures::flat_band(3.0, 1.0, 0.1);
    const auto s = sample_frozen_variation(p, 500.0, 0.0, {0.0, 10.0}, 0.1, 2000, DriftMode::ito_correct, 4);
    REQUIRE(s.size() == 2);
    CHECK(s[0].size() == 2000);
    for (double z : s[0]) {
        CHECK(z == 0.0);
    }
    double m = 0.0;
    for (double z : s[1]) {
        m += z;
        CHECK(std::fabs(z) < 1.0);
    }
    CHECK(std::fabs(m / 2000.0) < 0.02);
}

TEST_CASE("invalid run settings")
{
    ScenarioConfig cfg = load_preset("single-polynomial");
    cfg.sim.dt = 0.0;
    CHECK_THROWS_AS(run_path(cfg.model, cfg.sim, 0), ConfigError);
    CHECK_THROWS_AS(integration_mode_from_string("rk4"), ConfigError);
}
