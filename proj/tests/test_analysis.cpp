#include <cmath>

#include "doctest.h"
#include "mfdrift/analysis.hpp"
#include "mfdrift/error.hpp"
#include "mfdrift/scenario.hpp"

using namespace mfdrift;

namespace {

/// One-region path through the given (n, g) records at unit time spacing.
PathRecord path_of(std::size_t id, const std::vector<double>& n, const std::vector<double>& g)
{
    PathRecord p;
    p.path_id = id;
    p.regions = 1;
    for (std::size_t k = 0; k < n.size(); ++k) {
        p.t.push_back(static_cast<double>(k));
        Sample s;
        s.n = n[k];
        s.g = g[k];
        p.samples.push_back(s);
    }
    return p;
}

EnsembleResult ensemble_of(std::vector<PathRecord> paths)
{
    EnsembleResult e;
    e.regions = 1;
    e.paths = std::move(paths);
    return e;
}

}  // namespace

TEST_CASE("summary statistics")
{
    CHECK(sample_skewness({-1.0, 0.0, 1.0}) == 0.0);
    // scipy.stats.skew([1, 2, 3, 10], bias=False)
    CHECK(sample_skewness({1.0, 2.0, 3.0, 10.0}) == doctest::Approx(1.763632614803888));
    CHECK_THROWS_AS(sample_skewness({1.0, 2.0}), DomainError);
    CHECK_THROWS_AS(sample_skewness({2.0, 2.0, 2.0}), DomainError);
    CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.25) == doctest::Approx(1.75));
    CHECK(interquartile_range({1.0, 2.0, 3.0, 4.0}) == doctest::Approx(1.5));
    CHECK(spearman({1, 2, 3, 4}, {10, 20, 15, 40}) == doctest::Approx(0.8));
    CHECK(pearson({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0));
}

TEST_CASE("histograms integrate to one")
{
    const auto h = make_histogram({0.1, 0.2, 0.2, 0.7, 0.9, 1.3}, 5);
    CHECK(h.integral() == doctest::Approx(1.0).epsilon(1e-12));
    std::size_t total = 0;
    for (auto c : h.counts) {
        total += c;
    }
    CHECK(total == 6);
    const auto point = make_histogram({2.5, 2.5, 2.5}, 10);
    std::size_t occupied = 0;
    for (auto c : point.counts) {
        occupied += c > 0 ? 1 : 0;
    }
    CHECK(occupied == 1);
    CHECK(point.integral() == doctest::Approx(1.0));
}

TEST_CASE("hysteresis interpolates crossings")
{
    // Loading: n 0 -> 20 with g = n / 10; unloading at g = n / 20.
    const auto p = path_of(0, {0, 10, 20, 10, 0}, {0.0, 1.0, 2.0, 0.5, 0.0});
    const auto never_back = path_of(1, {0, 10, 20, 30, 40}, {0.0, 1.0, 2.0, 3.0, 4.0});
    const auto h = hysteresis_curve(ensemble_of({p, never_back}), {5.0, 15.0});
    CHECK(h.count[0] == 1);
    CHECK(h.count[1] == 1);
    CHECK(h.mean_decrease[0] == doctest::Approx(0.5 - 0.25));
    CHECK(h.mean_decrease[1] == doctest::Approx(1.5 - 1.25));
    CHECK(std::isnan(h.std_error[0]));

    const auto flat = path_of(2, {0, 10, 20, 10, 0}, {0.0, 1.0, 2.0, 1.0, 0.0});
    const auto h0 = hysteresis_curve(ensemble_of({flat, flat}), {5.0, 15.0});
    CHECK(h0.mean_decrease[0] == doctest::Approx(0.0));
    CHECK(h0.std_error[1] == doctest::Approx(0.0));

    const auto none = hysteresis_curve(ensemble_of({never_back}), {5.0});
    CHECK(none.count[0] == 0);
    CHECK(std::isnan(none.mean_decrease[0]));
}

TEST_CASE("gridlock fractions")
{
    const auto e = ensemble_of({path_of(0, {0, 100}, {0, 1}), path_of(1, {0, 7000}, {0, 1})});
    CHECK(gridlock_probability(e, 0.0, 1.0) == 1.0);
    CHECK(gridlock_probability(e, 10001.0, 1.0) == 0.0);
    CHECK(gridlock_probability(e, 6000.0, 1.0) == 0.5);
    CHECK(recovered_fraction(e, 1000.0, 1.0) == 0.5);
    CHECK_THROWS_AS(gridlock_probability(e, 10.0, 5.0), DomainError);
}

TEST_CASE("ensemble-level distributions")
{
    ScenarioConfig cfg = load_preset("single-polynomial");
    cfg.sim.n_paths = 40;
    cfg.sim.horizon = 3000.0;
    const EnsembleResult ens = simulate(cfg);

    const auto t0 = marginal_at_time(ens, 0.0, Variable::n);
    CHECK(t0.integral() == doctest::Approx(1.0));
    std::size_t occupied = 0;
    for (auto c : t0.counts) {
        occupied += c > 0 ? 1 : 0;
    }
    CHECK(occupied == 1);

    const double window = cfg.window();
    const auto g = exit_flow_samples_at(ens, 3000.0, window);
    REQUIRE(!g.empty());
    const auto& bnd = cfg.model.regions[0].boundary;
    const double lo = characteristic_curves(bnd, 3000.0 - window).g_lw;
    const double hi = characteristic_curves(bnd, 3000.0 + window).g_up;
    for (double v : g) {
        CHECK(v >= lo);
        CHECK(v <= hi);
    }
    CHECK(exit_flow_distribution_at(ens, 3000.0, window).integral() == doctest::Approx(1.0));
    CHECK_THROWS_AS(exit_flow_distribution_at(ens, -100.0, 1.0), DomainError);
}

TEST_CASE("noise-free ensemble gives a point mass")
{
    ScenarioConfig cfg = load_preset("single-polynomial");
    cfg.model.regions[0].sigma = 0.0;
    cfg.sim.n_paths = 5;
    cfg.sim.horizon = 1000.0;
    const EnsembleResult ens = simulate(cfg);
    const auto h = marginal_at_time(ens, 1000.0, Variable::g);
    std::size_t occupied = 0;
    for (auto c : h.counts) {
        occupied += c > 0 ? 1 : 0;
    }
    CHECK(occupied == 1);
}

TEST_CASE("heatmap marginals match one-dimensional histograms")
{
    ScenarioConfig cfg = load_preset("two-region");
    cfg.sim.n_paths = 20;
    cfg.sim.horizon = 1000.0;
    const EnsembleResult ens = simulate(cfg);
    const auto hm = joint_heatmap(ens, Variable::n, 0, 1, 200.0, 1000.0, 12);
    const auto [xs, ys] = paired_samples(ens, Variable::n, 0, 1, 200.0, 1000.0);
    const auto hx = make_histogram(xs, hm.x_edges);
    const auto hy = make_histogram(ys, hm.y_edges);
    for (std::size_t i = 0; i < hm.nx(); ++i) {
        std::size_t row = 0;
        for (std::size_t j = 0; j < hm.ny(); ++j) {
            row += hm.at(i, j);
        }
        CHECK(row == hx.counts[i]);
    }
    for (std::size_t j = 0; j < hm.ny(); ++j) {
        std::size_t col = 0;
        for (std::size_t i = 0; i < hm.nx(); ++i) {
            col += hm.at(i, j);
        }
        CHECK(col == hy.counts[j]);
    }
    CHECK(hm.sample_count == xs.size());
    ScenarioConfig single = load_preset("single-polynomial");
    single.sim.n_paths = 2;
    single.sim.horizon = 10.0;
    CHECK_THROWS_AS(joint_heatmap(simulate(single), Variable::n, 0, 1, 0, 10), DomainError);
}
