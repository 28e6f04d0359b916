#include <catch2/catch_amalgamated.hpp>

#include "fairdiv/mechanisms.hpp"
#include "fairdiv/rounding.hpp"
#include "fairdiv/shares.hpp"
#include "support/generators.hpp"

using namespace fairdiv;

namespace {

Instance cyclic_instance() {
    return Instance({{Rational(6), Rational(4), Rational(3), Rational(5), Rational(2), Rational(1)},
                     {Rational(6), Rational(5), Rational(4), Rational(3), Rational(2), Rational(1)},
                     {Rational(6), Rational(4), Rational(5), Rational(3), Rational(2), Rational(1)}});
}

OrderProfile orders_for(const FractionalAllocation& f, Rng& rng) {
    return testsupport::random_order_profile(rng, f.n, f.m);
}

}  // namespace

TEST_CASE("faithful implementation basics", "[rounding]") {
    SECTION("integral input gives a single allocation") {
        FractionalAllocation f(2, 3);
        f.f = {{1, 0, 1}, {0, 1, 0}};
        const Instance inst({{Rational(1), Rational(1), Rational(1)},
                             {Rational(1), Rational(1), Rational(1)}});
        const auto d = faithful_implement(f, derive_orders(inst));
        REQUIRE(d.support_size() == 1);
        CHECK(d.entries()[0].allocation.bundles[0] == std::vector<GoodId>{0, 2});
    }
    SECTION("all-halves over two agents: two complementary allocations") {
        const Instance inst({{Rational(4), Rational(3), Rational(2), Rational(1)},
                             {Rational(1), Rational(2), Rational(3), Rational(4)}});
        const auto d =
            faithful_implement(FractionalAllocation::uniform(2, 4), derive_orders(inst));
        REQUIRE(d.support_size() == 2);
        CHECK(d.entries()[0].prob == Rational(1, 2));
        CHECK(d.entries()[0].allocation.bundles[0] == d.entries()[1].allocation.bundles[1]);
        for (AgentId i = 0; i < 2; ++i)
            CHECK(testsupport::support_spread(d, i, inst.valuation(i)) <=
                  testsupport::max_fractional_good(FractionalAllocation::uniform(2, 4), i,
                                                   inst.valuation(i)));
    }
    SECTION("partial input is rejected") {
        FractionalAllocation f(2, 2);
        f.f = {{Rational(1, 2), 0}, {Rational(1, 4), 1}};
        const Instance inst({{Rational(1), Rational(1)}, {Rational(1), Rational(1)}});
        CHECK_THROWS_AS(faithful_implement(f, derive_orders(inst)), NotFullyAllocated);
    }
}

TEST_CASE("faithful implementation induces its input exactly", "[rounding]") {
    Rng rng(606);
    for (int t = 0; t < 80; ++t) {
        const int n = 1 + static_cast<int>(rng.below(4));
        const int m = 1 + static_cast<int>(rng.below(7));
        // random full fractional allocations, via a random distribution
        const auto f = induced_fractional(testsupport::random_distribution(rng, n, m, 6));
        const auto orders = orders_for(f, rng);
        const auto d = faithful_implement(f, orders);
        CHECK(induced_fractional(d) == f);
    }
}

TEST_CASE("per-agent spread is bounded by one fractional good", "[rounding]") {
    Rng rng(707);
    for (int t = 0; t < 60; ++t) {
        const int n = 2 + static_cast<int>(rng.below(3));
        const int m = 1 + static_cast<int>(rng.below(7));
        const auto f = induced_fractional(testsupport::random_distribution(rng, n, m, 8));
        // valuations consistent with random orders
        const auto orders = orders_for(f, rng);
        std::vector<std::vector<Rational>> values(n, std::vector<Rational>(m));
        for (int i = 0; i < n; ++i) {
            Rational v = rng.rational(20, 4) + 1;
            for (int r = 0; r < m; ++r) {
                values[i][orders[i].at_rank(r)] = v;
                v = v * rng.rational(6, 7) / 7;  // non-increasing down the order
            }
        }
        const auto d = faithful_implement(f, orders);
        for (AgentId i = 0; i < n; ++i)
            CHECK(testsupport::support_spread(d, i, values[i]) <=
                  testsupport::max_fractional_good(f, i, values[i]));
    }
}

TEST_CASE("all-1/k fractions land on a support of exactly k", "[rounding]") {
    Rng rng(808);
    for (int k : {2, 3, 4}) {
        // uniform 1/k over k agents
        const int m = k + 2;
        const auto orders = testsupport::random_order_profile(rng, k, m);
        const auto d = faithful_implement(FractionalAllocation::uniform(k, m), orders);
        CHECK(d.support_size() == k);
        // mixed: one pinned good per agent plus 1/k leftovers
        FractionalAllocation f(k, k + 3);
        for (int i = 0; i < k; ++i) {
            f.f[i][i] = 1;
            for (int x = k; x < k + 3; ++x) f.f[i][x] = Rational(1, k);
        }
        const auto orders2 = testsupport::random_order_profile(rng, k, k + 3);
        const auto d2 = faithful_implement(f, orders2);
        CHECK(d2.support_size() == k);
        for (const auto& e : d2.entries()) {
            CHECK(e.prob == Rational(1, k));
            for (int i = 0; i < k; ++i)
                CHECK(std::find(e.allocation.bundles[i].begin(), e.allocation.bundles[i].end(),
                                i) != e.allocation.bundles[i].end());
        }
    }
}

TEST_CASE("support reduction", "[rounding]") {
    SECTION("singleton support is untouched") {
        Allocation a{{{0, 1}, {}}};
        const DistributionalAllocation d(2, 2, {{Rational(1), a}});
        CHECK(reduce_support(d).support_size() == 1);
    }
    SECTION("random distributions reduce to a basic support") {
        Rng rng(909);
        for (int t = 0; t < 40; ++t) {
            const int n = 2 + static_cast<int>(rng.below(2));
            const int m = 2 + static_cast<int>(rng.below(4));
            const auto d = testsupport::random_distribution(rng, n, m, 20);
            const auto reduced = reduce_support(d);
            CHECK(reduced.support_size() <= (n - 1) * m + 1);
            CHECK(induced_fractional(reduced) == induced_fractional(d));
            // entries come from the original support
            for (const auto& e : reduced.entries()) {
                const bool found = std::any_of(
                    d.entries().begin(), d.entries().end(),
                    [&](const auto& orig) { return orig.allocation == e.allocation; });
                CHECK(found);
            }
            // projection: a second application changes nothing
            const auto twice = reduce_support(reduced);
            REQUIRE(twice.support_size() == reduced.support_size());
            for (int k = 0; k < twice.support_size(); ++k)
                CHECK(twice.entries()[k].prob == reduced.entries()[k].prob);
        }
    }
    SECTION("two agents, one good") {
        Rng rng(111);
        const auto d = testsupport::random_distribution(rng, 2, 1, 5);
        CHECK(reduce_support(d).support_size() <= 2);
    }
    SECTION("two agents, three goods, twenty draws") {
        Rng rng(222);
        for (int t = 0; t < 10; ++t) {
            const auto d = testsupport::random_distribution(rng, 2, 3, 20);
            const auto reduced = reduce_support(d);
            CHECK(reduced.support_size() <= 4);  // (n-1)m + 1
            CHECK(induced_fractional(reduced) == induced_fractional(d));
        }
    }
}

TEST_CASE("implement-export end to end", "[rounding]") {
    SECTION("single agent gets everything") {
        const Instance solo({{Rational(1), Rational(2)}});
        const auto out =
            implement_export(AgentOrdering::identity(1), derive_orders(solo), PortionMatrix(1));
        REQUIRE(out.combined.support_size() == 1);
        CHECK(out.combined.entries()[0].allocation.bundles[0] == std::vector<GoodId>{0, 1});
    }

    SECTION("three agents, harmonic portions") {
        const Instance inst = cyclic_instance();
        const AgentOrdering pi = AgentOrdering::identity(3);
        const auto out =
            implement_export(pi, derive_orders(inst), harmonic_portion_matrix(pi));
        CHECK(out.combined.support_size() <= 18);
        CHECK(induced_fractional(out.combined) == out.cuq);
        CHECK(out.cuq == cuq_fractional(derive_orders(inst), pi));
        // combined support within the union of per-shift supports
        for (const auto& e : out.combined.entries()) {
            bool found = false;
            for (const auto& shift_dist : out.per_shift)
                for (const auto& se : shift_dist.entries())
                    found = found || se.allocation == e.allocation;
            CHECK(found);
        }
    }

    SECTION("per-shift supports satisfy the rank/portion value bound") {
        Rng rng(313);
        for (int t = 0; t < 25; ++t) {
            const int n = 2 + static_cast<int>(rng.below(3));
            const int m = n + static_cast<int>(rng.below(4));
            const Instance inst = testsupport::random_instance(rng, n, m);
            const auto orders = derive_orders(inst);
            const AgentOrdering pi(rng.permutation(n));
            const auto beta = testsupport::random_portion_matrix(rng, n);
            const auto out = implement_export(pi, orders, beta);
            for (int s = 0; s < n; ++s)
                for (const auto& e : out.per_shift[s].entries())
                    for (AgentId i = 0; i < n; ++i) {
                        const Rational value = inst.bundle_value(i, e.allocation.bundles[i]);
                        const int pos = (pi.position(i) - s + n) % n;  // 0-based
                        bool witnessed = false;
                        for (int r = 1; r <= pos + 1 && !witnessed; ++r) {
                            // r-th ranked good (1-based) and the tail past rank 2n-r
                            const Rational top = r <= m ? inst.value(i, orders[i].at_rank(r - 1))
                                                        : Rational(0);
                            Rational tail = 0;
                            for (int rr = 2 * n - r; rr < m; ++rr)
                                tail += inst.value(i, orders[i].at_rank(rr));
                            if (value >= std::max(top, Rational(beta.beta[i][s] * tail)))
                                witnessed = true;
                        }
                        CHECK(witnessed);
                    }
        }
    }

    SECTION("fewer goods than agents works through padding") {
        const Instance inst({{Rational(2), Rational(1)},
                             {Rational(1), Rational(2)},
                             {Rational(1), Rational(1)}});
        const AgentOrdering pi = AgentOrdering::identity(3);
        const auto out = implement_export(pi, derive_orders(inst), harmonic_portion_matrix(pi));
        CHECK(induced_fractional(out.combined) == cuq_fractional(derive_orders(inst), pi));
        CHECK(out.combined.support_size() <= 3 * 2);
        CHECK(out.combined.goods() == 2);
    }

    SECTION("no goods at all") {
        const Instance inst = load_instance(R"({"agents":[{"values":[]},{"values":[]}]})");
        const auto out = implement_export(AgentOrdering::identity(2), derive_orders(inst),
                                          PortionMatrix(2));
        CHECK(out.combined.support_size() == 1);
    }
}
