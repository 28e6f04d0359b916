#include <catch2/catch_amalgamated.hpp>

#include "fairdiv/allocation.hpp"
#include "support/generators.hpp"

using namespace fairdiv;

TEST_CASE("induced fractional allocation of simple distributions", "[allocation]") {
    SECTION("a deterministic distribution induces its 0/1 indicator") {
        Allocation a{{{0, 2}, {1}}};
        DistributionalAllocation d(2, 3, {{Rational(1), a}});
        const auto f = induced_fractional(d);
        CHECK(f.f[0][0] == 1);
        CHECK(f.f[0][1] == 0);
        CHECK(f.f[0][2] == 1);
        CHECK(f.f[1][1] == 1);
    }
    SECTION("a fair coin over one good splits it evenly") {
        DistributionalAllocation d(
            2, 1, {{Rational(1, 2), Allocation{{{0}, {}}}}, {Rational(1, 2), Allocation{{{}, {0}}}}});
        const auto f = induced_fractional(d);
        CHECK(f.f[0][0] == Rational(1, 2));
        CHECK(f.f[1][0] == Rational(1, 2));
    }
}

TEST_CASE("distribution construction validates and merges", "[allocation]") {
    Allocation a{{{0}, {1}}};
    SECTION("duplicates merge") {
        DistributionalAllocation d(
            2, 2, {{Rational(1, 4), a}, {Rational(1, 4), a}, {Rational(1, 2), Allocation{{{1}, {0}}}}});
        CHECK(d.support_size() == 2);
        CHECK(d.entries()[0].prob + d.entries()[1].prob == 1);
    }
    SECTION("probabilities must sum to one and be positive") {
        CHECK_THROWS_AS(DistributionalAllocation(2, 2, {{Rational(1, 2), a}}), ParseError);
        CHECK_THROWS_AS(DistributionalAllocation(2, 2, {{Rational(0), a}, {Rational(1), a}}),
                        ParseError);
    }
    SECTION("allocations must partition the goods") {
        CHECK_THROWS_AS(DistributionalAllocation(2, 2, {{Rational(1), Allocation{{{0}, {0}}}}}),
                        ParseError);
        CHECK_THROWS_AS(DistributionalAllocation(2, 2, {{Rational(1), Allocation{{{0}, {}}}}}),
                        ParseError);
    }
}

TEST_CASE("expected value equals the induced fractional row value", "[allocation]") {
    SECTION("hand cases") {
        DistributionalAllocation d(
            2, 2, {{Rational(1, 2), Allocation{{{0, 1}, {}}}}, {Rational(1, 2), Allocation{{{}, {0, 1}}}}});
        const std::vector<Rational> v{Rational(2), Rational(0)};
        CHECK(expected_value(d, 0, v) == 1);  // 50/50 over bundles worth 2 and 0
    }
    SECTION("random distributions, both formulas agree exactly") {
        Rng rng(2024);
        for (int t = 0; t < 100; ++t) {
            const int n = 2 + static_cast<int>(rng.below(3));
            const int m = 1 + static_cast<int>(rng.below(6));
            const auto d = testsupport::random_distribution(rng, n, m, 8);
            const auto f = induced_fractional(d);
            std::vector<Rational> values(m);
            for (auto& v : values) v = rng.rational(20, 6);
            for (AgentId i = 0; i < n; ++i)
                CHECK(expected_value(d, i, values) == f.value_for(i, values));
        }
    }
}

TEST_CASE("induced fractional columns always sum to one", "[allocation]") {
    Rng rng(7);
    for (int t = 0; t < 50; ++t) {
        const auto d = testsupport::random_distribution(rng, 3, 5, 12);
        const auto f = induced_fractional(d);
        CHECK(f.is_full());
    }
}

TEST_CASE("portion matrix validity", "[allocation]") {
    PortionMatrix beta(2);
    beta.beta = {{Rational(1, 2), Rational(1, 2)}, {Rational(1, 2), Rational(1, 4)}};
    CHECK(beta.valid());
    beta.beta[1][0] = Rational(2, 3);  // column 0 now sums to 7/6
    CHECK_FALSE(beta.valid());
    beta.beta[1][0] = Rational(-1, 4);
    CHECK_FALSE(beta.valid());
}

TEST_CASE("distribution JSON round trip", "[allocation]") {
    Rng rng(11);
    const auto d = testsupport::random_distribution(rng, 3, 4, 6);
    const auto back = load_distribution(save_distribution(d), 3, 4);
    REQUIRE(back.support_size() == d.support_size());
    for (int k = 0; k < d.support_size(); ++k) {
        CHECK(back.entries()[k].prob == d.entries()[k].prob);
        CHECK(back.entries()[k].allocation == d.entries()[k].allocation);
    }
    CHECK_THROWS_AS(load_distribution(R"({"support":[{"prob":"1"}]})", 2, 2), ParseError);
}
