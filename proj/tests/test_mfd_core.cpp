#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "mfdrift/error.hpp"
#include "mfdrift/mfd_core.hpp"

using namespace mfdrift;

namespace {

MfdCurveSpec cubic() { return {PolynomialCurve{3.298e-11, -7.37423e-7, 4.52e-3}, 1.0}; }

BoundarySpec pair_band(double up, double lw, double eta)
{
    BoundarySpec b;
    b.envelope = CurvePair{fixtures::constant_curve(up), fixtures::constant_curve(lw)};
    b.eta = eta;
    return b;
}

}  // namespace

TEST_CASE("curve families evaluate to their closed forms")
{
    CHECK(eval_curve(cubic(), 0.0) == 0.0);
    // Oracle: mpmath at 30 digits gives 3.815557.
    CHECK(eval_curve(cubic(), 1000.0) == doctest::Approx(3.815557).epsilon(1e-9));

    MfdCurveSpec ex{ExponentialCurve{4.7093e-2, 1.4137, 1408.4875}, 1.0};
    CHECK(eval_curve(ex, 1408.4875) == doctest::Approx(489.839708032490714).epsilon(1e-12));

    MfdCurveSpec scaled = ex;
    scaled.flow_scale = 1.0 / 60.0;
    CHECK(eval_curve(scaled, 1408.4875) == doctest::Approx(489.839708032490714 / 60.0));

    MfdCurveSpec tab{TabulatedCurve{{{0, 0}, {1, 1}, {2, 0}}}, 1.0};
    CHECK(eval_curve(tab, 0.5) == doctest::Approx(0.5));
    CHECK(eval_curve(tab, 5.0) == 0.0);
    CHECK_THROWS_AS(eval_curve(cubic(), -1.0), DomainError);
}

TEST_CASE("slope matches a central difference")
{
    const double n = 2500.0;
    const double h = 1e-3;
    const double fd = (eval_curve(cubic(), n + h) - eval_curve(cubic(), n - h)) / (2 * h);
    CHECK(curve_slope(cubic(), n) == doctest::Approx(fd).epsilon(1e-7));
}

TEST_CASE("eta mixing places g_mi inside the band")
{
    auto mid = characteristic_curves(pair_band(4, 2, 0.5), 100.0);
    CHECK(mid.g_mi == doctest::Approx(3.0));
    auto high = characteristic_curves(pair_band(4, 2, 0.8), 100.0);
    CHECK(high.g_mi == doctest::Approx(3.6));

    BoundarySpec banded;
    banded.envelope = BandedCurve{cubic(), 0.15};
    auto c = characteristic_curves(banded, 1000.0);
    CHECK(c.g_up == doctest::Approx(4.38789055).epsilon(1e-9));
    CHECK(c.g_lw == doctest::Approx(3.24322345).epsilon(1e-9));
    CHECK(c.g_mi == doctest::Approx(3.815557).epsilon(1e-9));
    CHECK_THROWS_AS(characteristic_curves(banded, 10001.0), DomainError);
}

TEST_CASE("gamma and delta combinations")
{
    auto sym = gamma_delta(pair_band(4, 2, 0.5), 10.0);
    CHECK(sym.gamma_plus == doctest::Approx(1.0));
    CHECK(sym.gamma_minus == doctest::Approx(-1.0));
    CHECK(sym.delta_minus == doctest::Approx(2.0));
    CHECK(sym.delta_plus == doctest::Approx(0.0));
    CHECK_FALSE(sym.degenerate);

    auto skew = gamma_delta(pair_band(4, 2, 0.8), 10.0);
    CHECK(skew.gamma_plus == doctest::Approx(0.4));
    CHECK(skew.gamma_minus == doctest::Approx(-1.6));
    CHECK(skew.delta_minus == doctest::Approx(2.0));
    CHECK(skew.delta_plus == doctest::Approx(-1.2));

    BoundarySpec banded;
    banded.envelope = BandedCurve{cubic(), 0.15};
    CHECK(gamma_delta(banded, 0.0).degenerate);
    CHECK(gamma_delta_from({1.0, 1.0 - 1e-8, 1.0}).degenerate);
}

TEST_CASE("critical accumulation")
{
    // Oracle: smaller root of 3a n^2 + 2b n + c, evaluated with mpmath.
    CHECK(critical_accumulation(cubic(), 10000.0) ==
          doctest::Approx(4312.14399488425).epsilon(1e-10));
    MfdCurveSpec ex{ExponentialCurve{0.3, 1.0, 1000.0}, 1.0};
    CHECK(critical_accumulation(ex, 10000.0) == doctest::Approx(1000.0));
    MfdCurveSpec tab{TabulatedCurve{{{0, 0}, {1, 1}, {2, 0}}}, 1.0};
    CHECK(critical_accumulation(tab, 2.0) == doctest::Approx(1.0).epsilon(1e-6));
    MfdCurveSpec rising{TabulatedCurve{{{0, 0}, {1, 1}}}, 1.0};
    CHECK_THROWS_AS(critical_accumulation(rising, 1.0), DomainError);
}

TEST_CASE("validation names the offending field")
{
    BoundarySpec b;
    b.envelope = BandedCurve{cubic(), 0.15};
    b.eta = 1.2;
    try {
        validate_boundary(b, "/regions/0/boundary");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field_path().find("/regions/0/boundary") == 0);
    }
    b.eta = 0.5;
    CHECK_NOTHROW(validate_boundary(b, "/regions/0/boundary"));
}
