#include <sstream>
#include <variant>

#include "doctest.h"
#include "mfdrift/error.hpp"
#include "mfdrift/io.hpp"
#include "mfdrift/scenario.hpp"

using namespace mfdrift;

namespace {

std::string expect_config_error(const std::string& text)
{
    try {
        parse_scenario(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    FAIL("expected ConfigError");
    return {};
}

}  // namespace

TEST_CASE("demand profiles")
{
    const DemandProfile pulse{{ParabolicPulse{1.0, 2.0, 1000.0, 500.0}}};
    CHECK(eval_demand(pulse, 1250.0) == doctest::Approx(2.5));
    CHECK(eval_demand(pulse, 1000.0) == doctest::Approx(3.0));
    CHECK(eval_demand(pulse, 2000.0) == doctest::Approx(1.0));
    const DemandProfile steps{{ConstantSegment{2.0, 0.0, 100.0}, ConstantSegment{0.5}}};
    CHECK(eval_demand(steps, 50.0) == doctest::Approx(2.5));
    CHECK(eval_demand(steps, 100.0) == doctest::Approx(0.5));
    const DemandProfile negative{{ConstantSegment{-1.0}}};
    CHECK_THROWS_AS(validate_demand(negative, 10.0, "/regions/0/demand"), ConfigError);
}

TEST_CASE("bundled presets carry the published coefficients")
{
    const auto poly = load_preset("single-polynomial");
    const auto& band = std::get<BandedCurve>(poly.model.regions[0].boundary.envelope);
    const auto& cubic = std::get<PolynomialCurve>(band.base.shape);
    CHECK(cubic.a == 3.298e-11);
    CHECK(cubic.b == -7.37423e-7);
    CHECK(cubic.c == 4.52e-3);
    CHECK(poly.model.regions[0].sigma == 0.04);

    const auto ex = load_preset("single-exponential");
    const auto& pair = std::get<CurvePair>(ex.model.regions[0].boundary.envelope);
    const auto& up = std::get<ExponentialCurve>(pair.upper.shape);
    const auto& lw = std::get<ExponentialCurve>(pair.lower.shape);
    CHECK(up.p1 == 4.7093e-2);
    CHECK(up.p2 == 1.4137);
    CHECK(up.n_crt == 1408.4875);
    CHECK(lw.p1 == 1.5874e-3);
    CHECK(lw.p2 == 1.8538);
    CHECK(lw.n_crt == 1502.2319);
    CHECK(ex.model.regions[0].n_jam() == 8000.0);

    const auto two = load_preset("two-region");
    CHECK(two.model.theta[0][1] == 0.7);
    CHECK(two.model.theta[1][0] == 0.5);
    CHECK(two.sim.horizon == 4000.0);
    const auto& d1 = std::get<ParabolicPulse>(two.model.demand[0].segments[1]);
    const auto& d2 = std::get<ParabolicPulse>(two.model.demand[1].segments[1]);
    CHECK(d1.t_peak < d2.t_peak);

    CHECK(load_preset("skew-eta-0.8").model.regions[0].boundary.eta == 0.8);
    CHECK(load_preset("skew-eta-0.2").model.regions[0].boundary.eta == 0.2);
    CHECK_THROWS_AS(load_preset("nonexistent"), ConfigError);
}

TEST_CASE("every preset validates and round-trips through JSON")
{
    for (const auto& name : preset_names()) {
        CAPTURE(name);
        const auto cfg = load_preset(name);
        CHECK_NOTHROW(validate_scenario(cfg));
        const auto again = parse_scenario(serialize_scenario(cfg));
        CHECK(serialize_scenario(again) == serialize_scenario(cfg));
        CHECK(scenario_fingerprint(again) == scenario_fingerprint(cfg));
        CHECK(scenario_fingerprint(cfg).size() == 16);
    }
}

TEST_CASE("strict schema")
{
    auto doc = scenario_to_json(load_preset("single-polynomial"));
    doc["regions"][0]["boundary"]["colour"] = "red";
    CHECK(expect_config_error(doc.dump()).find("/regions/0/boundary/colour") != std::string::npos);

    doc = scenario_to_json(load_preset("single-polynomial"));
    doc["simulation"]["dt"] = "fast";
    CHECK(expect_config_error(doc.dump()).find("/simulation/dt") != std::string::npos);

    doc = scenario_to_json(load_preset("single-polynomial"));
    doc["regions"][0]["boundary"]["eta"] = 1.5;
    CHECK(expect_config_error(doc.dump()).find("/regions/0/boundary") != std::string::npos);

    CHECK(expect_config_error("{\n  \"name\": \"x\",\n  oops\n}").find("line 3") != std::string::npos);
}

TEST_CASE("path CSV round trip")
{
    ScenarioConfig cfg = load_preset("two-region");
    cfg.sim.n_paths = 3;
    cfg.sim.horizon = 200.0;
    const EnsembleResult ens = simulate(cfg);
    std::ostringstream os;
    write_paths_csv(os, ens);
    std::istringstream is(os.str());
    const EnsembleResult back = read_paths_csv(is);
    REQUIRE(back.paths.size() == 3);
    CHECK(back.regions == 2);
    for (std::size_t p = 0; p < 3; ++p) {
        CHECK(back.paths[p].t == ens.paths[p].t);
        for (std::size_t i = 0; i < ens.paths[p].samples.size(); ++i) {
            CHECK(back.paths[p].samples[i].n == ens.paths[p].samples[i].n);
            CHECK(back.paths[p].samples[i].z == ens.paths[p].samples[i].z);
            CHECK(back.paths[p].samples[i].q_in == ens.paths[p].samples[i].q_in);
        }
    }
    std::istringstream bad("path_id,t,region_id,n,z,g,n_buf,q_in\n0,0,0,1,2\n");
    CHECK_THROWS_AS(read_paths_csv(bad), ConfigError);
}

TEST_CASE("observation CSV round trip")
{
    ObservationSeries obs;
    for (int i = 0; i < 10; ++i) {
        obs.t.push_back(5.0 * i);
        obs.n.push_back(100.0 + 0.1 * i);
        obs.q_in.push_back(2.0 + 1e-3 * i);
    }
    std::ostringstream os;
    write_observations_csv(os, obs);
    std::istringstream is(os.str());
    const auto back = read_observations_csv(is);
    CHECK(back.t == obs.t);
    CHECK(back.n == obs.n);
    CHECK(back.q_in == obs.q_in);

    std::istringstream no_inflow("t,n\n0,1\n5,2\n");
    CHECK(read_observations_csv(no_inflow).q_in.empty());
}

TEST_CASE("number formatting round-trips")
{
    for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17}) {
        CHECK(std::stod(format_double(x)) == x);
    }
}
