#include <catch2/catch_amalgamated.hpp>

#include "fairdiv/decomposition.hpp"
#include "fairdiv/mechanisms.hpp"
#include "support/generators.hpp"

using namespace fairdiv;

namespace {

Instance cyclic_instance() {
    return Instance({{Rational(6), Rational(4), Rational(3), Rational(5), Rational(2), Rational(1)},
                     {Rational(6), Rational(5), Rational(4), Rational(3), Rational(2), Rational(1)},
                     {Rational(6), Rational(4), Rational(5), Rational(3), Rational(2), Rational(1)}});
}

}  // namespace

TEST_CASE("greedy completion basics", "[decomposition]") {
    SECTION("already satisfied input comes back unchanged") {
        CompletionTargets t;
        t.matrix = {{Rational(1), Rational(0)}, {Rational(0), Rational(1)}};
        t.row_targets = {Rational(1), Rational(1)};
        CHECK(greedy_complete(t) == t.matrix);
    }
    SECTION("first-fit fills zeros to the identity") {
        CompletionTargets t;
        t.matrix = {{Rational(0), Rational(0)}, {Rational(0), Rational(0)}};
        t.row_targets = {Rational(1), Rational(1)};
        const auto out = greedy_complete(t);
        CHECK(out == std::vector<std::vector<Rational>>{{Rational(1), Rational(0)},
                                                        {Rational(0), Rational(1)}});
    }
    SECTION("violated preconditions are detected") {
        CompletionTargets t;
        t.matrix = {{Rational(1, 2), Rational(1)}};
        t.row_targets = {Rational(1)};  // row already sums to 3/2 > 1
        CHECK_THROWS_AS(greedy_complete(t), InfeasibleTargets);
        t.matrix = {{Rational(1, 2), Rational(1, 2)}};
        t.row_targets = {Rational(3)};  // targets must sum to the column count
        CHECK_THROWS_AS(greedy_complete(t), InfeasibleTargets);
    }
}

TEST_CASE("greedy completion hits row and column targets exactly", "[decomposition]") {
    Rng rng(1234);
    for (int t = 0; t < 500; ++t) {
        const int r = 5, c = 7;
        // feasible random input: scale a random matrix down, then pick row
        // targets that dominate the rows and sum to c
        CompletionTargets targets;
        targets.matrix.assign(r, std::vector<Rational>(c));
        for (auto& row : targets.matrix)
            for (auto& e : row) e = rng.rational(3, 5) / (3 * r);  // columns stay below 1
        std::vector<Rational> row_sums(r, Rational(0));
        Rational total = 0;
        for (int u = 0; u < r; ++u)
            for (int v = 0; v < c; ++v) {
                row_sums[u] += targets.matrix[u][v];
                total += targets.matrix[u][v];
            }
        targets.row_targets = row_sums;
        Rational slack = Rational(c) - total;  // spread remaining target mass
        for (int u = 0; u < r; ++u) {
            const Rational add = u + 1 == r ? slack : slack / (r - u) * rng.rational(2, 2);
            targets.row_targets[u] += add;
            slack -= add;
        }
        const auto out = greedy_complete(targets);
        for (int u = 0; u < r; ++u) {
            Rational sum = 0;
            for (int v = 0; v < c; ++v) {
                CHECK(out[u][v] >= targets.matrix[u][v]);
                CHECK(out[u][v] <= 1);
                sum += out[u][v];
            }
            CHECK(sum == targets.row_targets[u]);
        }
        for (int v = 0; v < c; ++v) {
            Rational sum = 0;
            for (int u = 0; u < r; ++u) sum += out[u][v];
            CHECK(sum == 1);
        }
    }
}

TEST_CASE("partial allocations follow the picked/zeroed/portion pattern", "[decomposition]") {
    const Instance inst = cyclic_instance();
    const auto ctx = build_picking_context(AgentOrdering::identity(3), derive_orders(inst));

    SECTION("zero portions leave exactly the picked indicator") {
        const auto partial = partial_allocations(ctx, PortionMatrix(3));
        for (int s = 0; s < 3; ++s)
            for (AgentId i = 0; i < 3; ++i)
                for (GoodId x = 0; x < 6; ++x)
                    CHECK(partial[s].f[i][x] == (ctx.pick_of[i][s] == x ? 1 : 0));
    }

    SECTION("portions land on the fractional set only") {
        PortionMatrix beta = harmonic_portion_matrix(AgentOrdering::identity(3));
        const auto partial = partial_allocations(ctx, beta);
        // shift 0: picks (0,1,2); fractional sets per the orders above
        const auto b = [&](int i, int s) { return beta.beta[i][s]; };
        CHECK(partial[0].f[0] ==
              std::vector<Rational>{1, 0, 0, 0, b(0, 0), b(0, 0)});
        CHECK(partial[0].f[1] ==
              std::vector<Rational>{0, 1, 0, 0, b(1, 0), b(1, 0)});
        CHECK(partial[0].f[2] ==
              std::vector<Rational>{0, 0, 1, b(2, 0), b(2, 0), b(2, 0)});
        CHECK(partial[1].f[0] ==
              std::vector<Rational>{0, b(0, 1), 0, 1, b(0, 1), b(0, 1)});
        CHECK(partial[2].f[1] ==
              std::vector<Rational>{0, 1, b(1, 2), 0, b(1, 2), b(1, 2)});
        for (int s = 0; s < 3; ++s) CHECK(partial[s].is_partial());
    }

    SECTION("invalid portion matrices are rejected") {
        PortionMatrix bad(3);
        bad.beta[0][0] = Rational(2, 3);
        bad.beta[1][0] = Rational(2, 3);
        CHECK_THROWS_AS(partial_allocations(ctx, bad), InvalidPortionMatrix);
    }
}

TEST_CASE("partial allocations are valid for random portions", "[decomposition]") {
    Rng rng(31337);
    for (int t = 0; t < 60; ++t) {
        const int n = 1 + static_cast<int>(rng.below(5));
        const int m = n + static_cast<int>(rng.below(7));
        const auto orders = testsupport::random_order_profile(rng, n, m);
        const auto ctx = build_picking_context(AgentOrdering(rng.permutation(n)), orders);
        const auto partial = partial_allocations(ctx, testsupport::random_portion_matrix(rng, n));
        for (const auto& g : partial) CHECK(g.is_partial());
    }
}

TEST_CASE("completion reproduces n times the cuq allocation", "[decomposition]") {
    SECTION("single agent") {
        const Instance solo({{Rational(2), Rational(1)}});
        const auto ctx = build_picking_context(AgentOrdering::identity(1), derive_orders(solo));
        const auto fulls = complete_to_cuq(ctx, PortionMatrix(1), cuq_padded_from_context(ctx));
        CHECK(fulls[0].f[0] == std::vector<Rational>{1, 1});
    }

    SECTION("three agents with harmonic portions") {
        const auto ctx =
            build_picking_context(AgentOrdering::identity(3), derive_orders(cyclic_instance()));
        const PortionMatrix beta = harmonic_portion_matrix(AgentOrdering::identity(3));
        const auto cuq = cuq_padded_from_context(ctx);
        const auto partial = partial_allocations(ctx, beta);
        const auto fulls = complete_to_cuq(ctx, beta, cuq);
        for (int s = 0; s < 3; ++s) {
            CHECK(fulls[s].is_full());
            for (AgentId i = 0; i < 3; ++i)
                for (GoodId x = 0; x < 6; ++x) {
                    CHECK(fulls[s].f[i][x] >= partial[s].f[i][x]);
                    const bool full_frac = fulls[s].f[i][x] > 0 && fulls[s].f[i][x] < 1;
                    const bool part_frac = partial[s].f[i][x] > 0 && partial[s].f[i][x] < 1;
                    if (full_frac) CHECK(part_frac);
                }
        }
        for (AgentId i = 0; i < 3; ++i)
            for (GoodId x = 0; x < 6; ++x) {
                Rational sum = 0;
                for (int s = 0; s < 3; ++s) sum += fulls[s].f[i][x];
                CHECK(sum == 3 * cuq.f[i][x]);
            }
    }

    SECTION("two agents sharing a favorite: sums to twice the uniform matrix") {
        const Instance inst({{Rational(4), Rational(1), Rational(2)},
                             {Rational(4), Rational(3), Rational(2)}});
        const auto ctx = build_picking_context(AgentOrdering::identity(2), derive_orders(inst));
        const auto fulls =
            complete_to_cuq(ctx, harmonic_portion_matrix(AgentOrdering::identity(2)),
                            cuq_padded_from_context(ctx));
        for (AgentId i = 0; i < 2; ++i)
            for (GoodId x = 0; x < 3; ++x)
                CHECK(fulls[0].f[i][x] + fulls[1].f[i][x] == 1);  // 2 * (1/2)
    }
}

TEST_CASE("pipeline invariants on random instances", "[decomposition]") {
    Rng rng(2718);
    for (int t = 0; t < 60; ++t) {
        const int n = 1 + static_cast<int>(rng.below(5));
        const int m = n + static_cast<int>(rng.below(6));
        const auto orders = testsupport::random_order_profile(rng, n, m);
        const AgentOrdering pi(rng.permutation(n));
        const auto ctx = build_picking_context(pi, orders);
        const auto beta = testsupport::random_portion_matrix(rng, n);
        const auto cuq = cuq_padded_from_context(ctx);
        const auto partial = partial_allocations(ctx, beta);
        const auto fulls = complete_to_cuq(ctx, beta, cuq);
        const auto fulls_again = complete_to_cuq(ctx, beta, cuq);
        for (int s = 0; s < n; ++s) {
            CHECK(fulls[s].is_full());
            CHECK(fulls[s] == fulls_again[s]);  // deterministic
            for (AgentId i = 0; i < n; ++i)
                for (GoodId x = 0; x < m; ++x) CHECK(fulls[s].f[i][x] >= partial[s].f[i][x]);
        }
        for (AgentId i = 0; i < n; ++i)
            for (GoodId x = 0; x < m; ++x) {
                Rational sum = 0;
                for (int s = 0; s < n; ++s) sum += fulls[s].f[i][x];
                CHECK(sum == Rational(n) * cuq.f[i][x]);
            }
    }
}
