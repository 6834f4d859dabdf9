#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "mfdrift/error.hpp"
#include "mfdrift/network.hpp"

using namespace mfdrift;

namespace {

RegionState state(double n, double z, double n_buf, std::size_t regions = 1, std::size_t self = 0)
{
    RegionState s;
    s.n = n;
    s.z = z;
    s.n_buf = n_buf;
    s.n_by_dest.assign(regions, 0.0);
    s.n_by_dest[self] = n;
    return s;
}

}  // namespace

TEST_CASE("soft gate")
{
    CHECK(psi(0.0, 1.0) == 0.0);
    CHECK(psi(1.0, 1.0) == doctest::Approx(0.7071067811865476));
    CHECK(psi(-3.0, 1.0) == -psi(3.0, 1.0));
}

TEST_CASE("effective inflow")
{
    auto p = fixtures::flat_band(3.0, 0.5);
    p.q_max = 5.0;
    // Oracle values from mpmath.
    CHECK(effective_inflow(0.0, 1000.0, 2.0, p) == doctest::Approx(1.999999987654321).epsilon(1e-14));
    CHECK(effective_inflow(100.0, 1000.0, 2.0, p) == doctest::Approx(4.999849980385791).epsilon(1e-14));
    CHECK(effective_inflow(0.0, p.n_jam(), 2.0, p) == 0.0);
    CHECK(effective_inflow(0.0, p.n_jam() + 5.0, 2.0, p) == 0.0);
}

TEST_CASE("outflow split is proportional to destination buckets")
{
    RegionState s = state(100.0, 0.0, 0.0, 2);
    s.n_by_dest = {30.0, 70.0};
    auto split = outflow_split(s, 2.0);
    CHECK(split[0] == doctest::Approx(0.6));
    CHECK(split[1] == doctest::Approx(1.4));
    for (double v : outflow_split(s, 0.0)) {
        CHECK(v == 0.0);
    }
    auto single = outflow_split(state(50.0, 0.0, 0.0), 1.7);
    CHECK(single.size() == 1);
    CHECK(single[0] == doctest::Approx(1.7));
}

TEST_CASE("single region drift")
{
    auto p = fixtures::flat_band(3.0, 0.5, 0.04);
    const TransferMatrix theta{{1.0}};
    const auto s = state(1000.0, 0.2, 0.0);
    // Balance point: raw demand equals the realized exit flow.
    auto d = drift_vector({s}, {p}, theta, {3.2}, DriftMode::ito_correct);
    CHECK(d[0].g == doctest::Approx(3.2));
    CHECK(std::fabs(d[0].dn) < 1e-6);
    CHECK(d[0].dn == doctest::Approx(d[0].q_in - d[0].g));
    CHECK(d[0].dn_buf == doctest::Approx(3.2 - d[0].q_in));
    CHECK(d[0].transfer_in == 0.0);
    const auto gd = gamma_delta(p.boundary, 1000.0);
    CHECK(d[0].mu_z == drift_diffusion(0.2, gd, 0.04, DriftMode::ito_correct).mu);
}

TEST_CASE("two-region transfer is credited to the receiver")
{
    auto p1 = fixtures::flat_band(2.0, 0.5, 0.04);
    auto p2 = fixtures::flat_band(2.0, 0.5, 0.04);
    const TransferMatrix theta{{0.0, 1.0}, {0.0, 1.0}};
    RegionState s1 = state(100.0, 0.0, 0.0, 2, 1);
    RegionState s2 = state(500.0, 0.0, 0.0, 2, 1);
    auto d = drift_vector({s1, s2}, {p1, p2}, theta, {0.0, 0.0}, DriftMode::ito_correct);
    CHECK(d[0].g == doctest::Approx(2.0));
    CHECK(d[0].transfer_out == doctest::Approx(2.0));
    CHECK(d[1].transfer_in == doctest::Approx(2.0));
    CHECK(d[1].dn == doctest::Approx(d[1].q_in - d[1].g + 2.0));
    CHECK(d[1].dn_by_dest[1] == doctest::Approx(d[1].dn));
}

TEST_CASE("diffusion vector")
{
    auto p = fixtures::flat_band(3.0, 1.0, 0.04);
    CHECK(diffusion_vector({state(1000.0, 0.0, 0.0)}, {p})[0] == doctest::Approx(0.04));
    CHECK(std::fabs(diffusion_vector({state(1000.0, 1.0, 0.0)}, {p})[0]) < 1e-12);
    p.sigma = 0.0;
    CHECK(diffusion_vector({state(1000.0, 0.3, 0.0)}, {p})[0] == 0.0);
}

TEST_CASE("transfer matrix validation")
{
    CHECK_NOTHROW(validate_transfer_matrix({{0.3, 0.7}, {0.5, 0.5}}, 2, "/theta"));
    CHECK_THROWS_AS(validate_transfer_matrix({{0.3, 0.6}, {0.5, 0.5}}, 2, "/theta"), ConfigError);
    CHECK_THROWS_AS(validate_transfer_matrix({{1.2, -0.2}, {0.5, 0.5}}, 2, "/theta"), ConfigError);
    CHECK_THROWS_AS(validate_transfer_matrix({{1.0}}, 2, "/theta"), ConfigError);
}
