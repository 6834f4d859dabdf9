#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "mfdrift/error.hpp"
#include "mfdrift/rng.hpp"
#include "mfdrift/variation.hpp"

using namespace mfdrift;

TEST_CASE("transform maps the real line into the band")
{
    const auto gd = fixtures::band(1.0, -1.0);
    CHECK(transform_w_to_z(0.0, gd) == 0.0);
    CHECK(transform_w_to_z(std::atanh(0.5), gd) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(transform_w_to_z(40.0, gd) == doctest::Approx(1.0));
    CHECK(transform_w_to_z(-40.0, gd) == doctest::Approx(-1.0));

    CHECK(inverse_transform(0.0, gd) == 0.0);
    CHECK(inverse_transform(0.5, gd) == doctest::Approx(0.5493061443340549).epsilon(1e-14));
    const double w_edge = inverse_transform(1.0 - 1e-12, gd);
    CHECK(std::isfinite(w_edge));
    CHECK(w_edge > 10.0);
    CHECK_THROWS_AS(inverse_transform(1.0, gd), DomainError);
    CHECK_THROWS_AS(inverse_transform(-1.5, gd), DomainError);
}

TEST_CASE("transform round-trips on skewed bands")
{
    RandomStream rs(11);
    for (int i = 0; i < 1000; ++i) {
        const double gp = 0.1 + 3.0 * rs.uniform();
        const double gm = -(0.1 + 3.0 * rs.uniform());
        const auto gd = fixtures::band(gp, gm);
        const double w = 6.0 * (rs.uniform() - 0.5);
        const double z = transform_w_to_z(w, gd);
        REQUIRE(z > gm);
        REQUIRE(z < gp);
        CHECK(inverse_transform(z, gd) == doctest::Approx(w).epsilon(1e-9));
    }
}

TEST_CASE("latent placement is independent of band width")
{
    for (double frac : {0.1, 0.5, 0.8}) {
        for (double width : {0.5, 2.0, 7.0}) {
            const auto gd = fixtures::band(width * (1 - frac), -width * frac);
            CHECK(std::fabs(transform_w_to_z(latent_for_fraction(frac), gd)) < 1e-12 * width);
        }
    }
}

TEST_CASE("drift and diffusion on the symmetric unit band")
{
    const auto gd = fixtures::band(1.0, -1.0);
    const auto ito = drift_diffusion(0.5, gd, 0.1, DriftMode::ito_correct);
    CHECK(ito.mu == doctest::Approx(-0.00375).epsilon(1e-14));
    CHECK(ito.s == doctest::Approx(0.075).epsilon(1e-14));
    const auto lit = drift_diffusion(0.5, gd, 0.1, DriftMode::paper_literal);
    CHECK(std::fabs(lit.mu) < 1e-15);
    CHECK(lit.s == doctest::Approx(0.075).epsilon(1e-14));

    for (auto mode : {DriftMode::ito_correct, DriftMode::paper_literal}) {
        CHECK(drift_diffusion(0.0, gd, 0.3, mode).mu == 0.0);
    }
    for (double edge : {1.0, -1.0}) {
        const auto e = drift_diffusion(edge, gd, 0.3, DriftMode::ito_correct);
        CHECK(e.mu == 0.0);
        CHECK(e.s == 0.0);
    }
    GammaDelta deg;
    deg.degenerate = true;
    const auto d = drift_diffusion(0.0, deg, 0.3, DriftMode::ito_correct);
    CHECK(d.mu == 0.0);
    CHECK(d.s == 0.0);
}

TEST_CASE("ito drift equals half sigma squared times the second derivative of the transform")
{
    RandomStream rs(5);
    const double sigma = 0.2;
    for (int i = 0; i < 200; ++i) {
        const auto gd = fixtures::band(0.2 + 2.0 * rs.uniform(), -(0.2 + 2.0 * rs.uniform()));
        const double w = 4.0 * (rs.uniform() - 0.5);
        const double h = 1e-4;
        const double zp = transform_w_to_z(w + h, gd);
        const double z0 = transform_w_to_z(w, gd);
        const double zm = transform_w_to_z(w - h, gd);
        const auto dd = drift_diffusion(z0, gd, sigma, DriftMode::ito_correct);
        CHECK(dd.s == doctest::Approx(sigma * (zp - zm) / (2 * h)).epsilon(1e-6));
        CHECK(dd.mu == doctest::Approx(0.5 * sigma * sigma * (zp - 2 * z0 + zm) / (h * h))
                           .epsilon(1e-4)
                           .scale(1e-6));
    }
}

TEST_CASE("modes coincide when the band width is one")
{
    RandomStream rs(9);
    for (int i = 0; i < 100; ++i) {
        const double gm = -rs.uniform();
        const auto gd = fixtures::band(gm + 1.0, gm);
        const double z = gm + rs.uniform();
        const double sigma = 0.5 * rs.uniform();
        const auto a = drift_diffusion(z, gd, sigma, DriftMode::ito_correct);
        const auto b = drift_diffusion(z, gd, sigma, DriftMode::paper_literal);
        CHECK(a.mu == doctest::Approx(b.mu).epsilon(1e-13).scale(1e-15));
        CHECK(a.s == b.s);
    }
}

TEST_CASE("latent step")
{
    CHECK(step_latent_w(0.0, 0.04, 1.0, 1.0) == doctest::Approx(0.04));
    CHECK(step_latent_w(0.7, 0.04, 1.0, 0.0) == 0.7);
    CHECK(step_latent_w(0.7, 0.0, 1.0, 2.5) == 0.7);
}

TEST_CASE("drift mode names")
{
    CHECK(drift_mode_from_string(to_string(DriftMode::ito_correct)) == DriftMode::ito_correct);
    CHECK(drift_mode_from_string(to_string(DriftMode::paper_literal)) == DriftMode::paper_literal);
    CHECK_THROWS_AS(drift_mode_from_string("stratonovich"), ConfigError);
}
