#pragma once

#include <vector>

#include "fairdiv/allocation.hpp"
#include "fairdiv/picking.hpp"

namespace fairdiv {

struct InvalidPortionMatrix : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InfeasibleTargets : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Matrix completion inputs: raise entries of B (r x c, entries in [0,1])
/// until row u sums to exactly s[u] and every column sums to exactly 1.
/// Feasibility needs row sums <= s, column sums <= 1 and sum(s) == c.
struct CompletionTargets {
    std::vector<std::vector<Rational>> matrix;
    std::vector<Rational> row_targets;

    int rows() const { return static_cast<int>(matrix.size()); }
    int cols() const { return matrix.empty() ? 0 : static_cast<int>(matrix[0].size()); }

    void check() const {
        const int r = rows(), c = cols();
        if (static_cast<int>(row_targets.size()) != r)
            throw InfeasibleTargets("one row target per row required");
        Rational target_total = 0;
        for (int u = 0; u < r; ++u) {
            Rational row = 0;
            for (int v = 0; v < c; ++v) {
                if (matrix[u][v] < 0 || matrix[u][v] > 1)
                    throw InfeasibleTargets("matrix entry outside [0,1]");
                row += matrix[u][v];
            }
            if (row > row_targets[u]) throw InfeasibleTargets("row sum exceeds its target");
            target_total += row_targets[u];
        }
        for (int v = 0; v < c; ++v) {
            Rational col = 0;
            for (int u = 0; u < r; ++u) col += matrix[u][v];
            if (col > 1) throw InfeasibleTargets("column sum exceeds 1");
        }
        if (target_total != c) throw InfeasibleTargets("row targets must sum to column count");
    }
};

/// First-fit greedy completion: repeatedly pick the lowest-index unsatisfied
/// row and column and pour in the largest increment either can absorb. Both
/// sides finish together because total row slack equals total column slack.
inline std::vector<std::vector<Rational>> greedy_complete(const CompletionTargets& targets) {
    targets.check();
    const int r = targets.rows(), c = targets.cols();
    auto out = targets.matrix;
    std::vector<Rational> row_sum(r, Rational(0)), col_sum(c, Rational(0));
    for (int u = 0; u < r; ++u)
        for (int v = 0; v < c; ++v) {
            row_sum[u] += out[u][v];
            col_sum[v] += out[u][v];
        }
    int next_row = 0, next_col = 0;
    int steps = 0;
    while (true) {
        while (next_row < r && row_sum[next_row] == targets.row_targets[next_row]) ++next_row;
        while (next_col < c && col_sum[next_col] == 1) ++next_col;
        if (next_row == r || next_col == c) break;
        if (++steps > r + c)  // every step saturates a row or a column
            throw std::logic_error("greedy completion exceeded its step bound");
        const Rational row_room = targets.row_targets[next_row] - row_sum[next_row];
        const Rational col_room = 1 - col_sum[next_col];
        const Rational delta = std::min(row_room, col_room);
        out[next_row][next_col] += delta;
        row_sum[next_row] += delta;
        col_sum[next_col] += delta;
    }
    if (next_row != r || next_col != c)
        throw InfeasibleTargets("completion finished with unmet targets");
    return out;
}

/// Builds the n partial fractional allocations a portion matrix induces, one
/// per cyclic shift: the picked good at 1, zeroed goods at 0, and every good
/// in the fractional set at beta[agent][shift]. Each column of each partial
/// allocation sums to at most 1.
inline std::vector<FractionalAllocation> partial_allocations(const PickingContext& ctx,
                                                             const PortionMatrix& beta) {
    if (beta.n != ctx.n || !beta.valid())
        throw InvalidPortionMatrix("portion matrix rows/columns must sum to at most 1");
    const PickSets sets = pick_sets(ctx);
    std::vector<FractionalAllocation> partial(ctx.n, FractionalAllocation(ctx.n, ctx.m));
    for (int s = 0; s < ctx.n; ++s)
        for (AgentId i = 0; i < ctx.n; ++i) {
            partial[s].f[i][ctx.pick_of[i][s]] = 1;
            for (GoodId x : sets.fractional[i][s]) partial[s].f[i][x] = beta.beta[i][s];
        }
    return partial;
}

/// Completes the partial allocations of beta to full fractional allocations
/// summing to exactly n * cuq, good by good: the n x n slice for good x is
/// completed with row targets n * cuq_{i,x} and column targets 1. The result
/// is pointwise at least the partial allocation and strictly fractional only
/// where the partial allocation already was.
inline std::vector<FractionalAllocation> complete_to_cuq(const PickingContext& ctx,
                                                         const PortionMatrix& beta,
                                                         const FractionalAllocation& cuq_padded) {
    const auto partial = partial_allocations(ctx, beta);
    const int n = ctx.n;
    std::vector<FractionalAllocation> full(n, FractionalAllocation(n, ctx.m));
    for (GoodId x = 0; x < ctx.m; ++x) {
        CompletionTargets targets;
        targets.matrix.assign(n, std::vector<Rational>(n, Rational(0)));
        targets.row_targets.assign(n, Rational(0));
        for (AgentId i = 0; i < n; ++i) {
            for (int s = 0; s < n; ++s) targets.matrix[i][s] = partial[s].f[i][x];
            targets.row_targets[i] = Rational(n) * cuq_padded.f[i][x];
        }
        const auto completed = greedy_complete(targets);
        for (AgentId i = 0; i < n; ++i)
            for (int s = 0; s < n; ++s) full[s].f[i][x] = completed[i][s];
    }
    return full;
}

}  // namespace fairdiv
