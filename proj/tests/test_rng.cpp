#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "mfdrift/rng.hpp"

using namespace mfdrift;

TEST_CASE("Philox known-answer vector")
{
    // Random123 reference: counter = key = 0.
    const auto out = philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(out[0] == 0x6627e8d5u);
    CHECK(out[1] == 0xe169c58du);
    CHECK(out[2] == 0xbc57ac4cu);
    CHECK(out[3] == 0x9b00dbd8u);
}

TEST_CASE("streams replay exactly")
{
    const SeedTree tree(42);
    RandomStream a = tree.child("path", 7).stream();
    RandomStream b = tree.child("path", 7).stream();
    for (int i = 0; i < 100; ++i) {
        CHECK(a.standard_normal() == b.standard_normal());
    }
    CHECK(a.draws() == 100);
}

TEST_CASE("children depend only on their path")
{
    const SeedTree tree(42);
    const auto k5 = tree.child("path", 5).key();
    (void)tree.child("path", 4);
    CHECK(tree.child("path", 5).key() == k5);
    CHECK(tree.child("path", 6).key() != k5);
    CHECK(tree.child("particle", 5).key() != k5);
    CHECK(SeedTree(43).child("path", 5).key() != k5);
    CHECK(tree.child("path", 5).depth() == 1);
}

TEST_CASE("normal moments over a million draws")
{
    RandomStream rs = SeedTree(2024).child("moments", 0).stream();
    const int n = 1000000;
    double sum = 0.0;
    double sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rs.standard_normal();
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::fabs(mean) < 0.004);
    CHECK(var > 0.995);
    CHECK(var < 1.005);
}

TEST_CASE("Kolmogorov-Smirnov statistic against the normal CDF")
{
    RandomStream rs = SeedTree(7).child("ks", 0).stream();
    const std::size_t n = 100000;
    std::vector<double> x(n);
    for (double& v : x) {
        v = rs.standard_normal();
    }
    std::sort(x.begin(), x.end());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = 0.5 * std::erfc(-x[i] / std::sqrt(2.0));
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    CHECK(d < 0.006);
}

TEST_CASE("sibling streams are uncorrelated")
{
    const SeedTree tree(1);
    const int n = 100000;
    RandomStream a = tree.child("path", 0).stream();
    RandomStream b = tree.child("path", 1).stream();
    double sab = 0.0;
    for (int i = 0; i < n; ++i) {
        sab += a.standard_normal() * b.standard_normal();
    }
    CHECK(std::fabs(sab / n) < 0.01);
}

TEST_CASE("uniforms stay in the open unit interval and quantile inverts")
{
    RandomStream rs(3);
    for (int i = 0; i < 10000; ++i) {
        const double u = rs.uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
    CHECK(normal_quantile(0.5) == 0.0);
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
    CHECK(normal_quantile(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-12));
}
