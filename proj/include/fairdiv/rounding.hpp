#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "fairdiv/allocation.hpp"
#include "fairdiv/decomposition.hpp"
#include "fairdiv/linalg.hpp"
#include "fairdiv/picking.hpp"

namespace fairdiv {

struct NotFullyAllocated : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// One agent's consumption slots: her goods in preference order, cut at
// integer boundaries of the running fractional mass. Slot s holds the mass
// between s and s+1, so everything in a slot is weakly preferred to
// everything in later slots, and any two realized bundles differ per slot by
// goods sandwiched between the same boundaries.
struct SlotPiece {
    int column;  // good id, or a padding column >= m
    Rational mass;
};

using Slot = std::vector<SlotPiece>;

inline Integer floor_of(const Rational& r) {
    // Non-negative throughout the sweep.
    return numerator(r) / denominator(r);
}

// Extracts one perfect matching of the positive-entry bipartite graph that is
// forced through the edge (forced_row, forced_col). Rows/columns are tried in
// increasing index, so the result is deterministic.
class MatchingFinder {
public:
    explicit MatchingFinder(const std::vector<std::vector<Rational>>& weights)
        : weights_(weights), size_(static_cast<int>(weights.size())) {}

    std::vector<int> find(int forced_row, int forced_col) const {
        std::vector<int> row_match(size_, -1), col_match(size_, -1);
        row_match[forced_row] = forced_col;
        col_match[forced_col] = forced_row;
        for (int r = 0; r < size_; ++r) {
            if (row_match[r] != -1) continue;
            std::vector<char> visited(size_, 0);
            if (!augment(r, forced_row, visited, row_match, col_match))
                throw std::logic_error(
                    "no perfect matching in a scaled doubly stochastic support");
        }
        return row_match;
    }

private:
    bool augment(int row, int forced_row, std::vector<char>& visited, std::vector<int>& row_match,
                 std::vector<int>& col_match) const {
        for (int c = 0; c < size_; ++c) {
            if (weights_[row][c] == 0 || visited[c]) continue;
            visited[c] = 1;
            const int owner = col_match[c];
            if (owner == -1 ||
                (owner != forced_row && augment(owner, forced_row, visited, row_match, col_match))) {
                row_match[row] = c;
                col_match[c] = row;
                return true;
            }
        }
        return false;
    }

    const std::vector<std::vector<Rational>>& weights_;
    int size_;
};

}  // namespace detail

/// Implements a full fractional allocation as an explicit distribution over
/// integral allocations with the same induced fractional allocation, exactly.
///
/// Construction: sweep each agent's row in her preference order and cut the
/// cumulative mass at integer boundaries into unit slots; pad the last slots
/// with zero-value dummy columns until the slot/column matrix is doubly
/// stochastic; then peel perfect matchings, each time extracting the largest
/// feasible probability through a smallest remaining entry. Consequences:
///  - each agent's bundle value varies across the support by at most the
///    value of one good she holds strictly fractionally, for every valuation
///    consistent with her order;
///  - when every strictly fractional entry is 1/k the support has exactly k
///    allocations.
inline DistributionalAllocation faithful_implement(const FractionalAllocation& frac,
                                                   const OrderProfile& orders) {
    const int n = frac.n, m = frac.m;
    if (static_cast<int>(orders.size()) != n || (m > 0 && orders[0].goods() != m))
        throw NotFullyAllocated("order profile does not match the allocation's shape");
    if (!frac.in_range()) throw NotFullyAllocated("fractions must lie in [0,1]");
    for (GoodId x = 0; x < m; ++x)
        if (frac.column_sum(x) != 1)
            throw NotFullyAllocated("column " + std::to_string(x) + " does not sum to 1");

    if (m == 0) {
        Allocation empty;
        empty.bundles.assign(n, {});
        return DistributionalAllocation(n, 0, {{Rational(1), empty}});
    }

    // Slot construction.
    std::vector<std::vector<detail::Slot>> slots(n);
    for (AgentId i = 0; i < n; ++i) {
        Rational cum = 0;
        for (GoodId x : orders[i].ranking()) {
            const Rational& mass = frac.f[i][x];
            if (mass == 0) continue;
            Rational start = cum;
            cum += mass;
            while (start < cum) {
                const Integer s = detail::floor_of(start);
                const Rational slot_end = Rational(s) + 1;
                const Rational piece_end = std::min(slot_end, cum);
                const auto slot_index = static_cast<std::size_t>(s);
                if (slots[i].size() <= slot_index) slots[i].resize(slot_index + 1);
                slots[i][slot_index].push_back({x, piece_end - start});
                start = piece_end;
            }
        }
    }

    // Pad the trailing fractional slot of each agent with dummy columns so
    // every slot carries mass exactly 1 and the matrix becomes square.
    int total_slots = 0;
    for (AgentId i = 0; i < n; ++i) total_slots += static_cast<int>(slots[i].size());
    int dummy_col = m;
    Rational dummy_left = 1;
    for (AgentId i = 0; i < n; ++i) {
        if (slots[i].empty()) continue;
        Rational deficit = Rational(static_cast<int>(slots[i].size())) - frac.row_sum(i);
        while (deficit > 0) {
            const Rational piece = std::min(deficit, dummy_left);
            slots[i].back().push_back({dummy_col, piece});
            deficit -= piece;
            dummy_left -= piece;
            if (dummy_left == 0) {
                ++dummy_col;
                dummy_left = 1;
            }
        }
    }
    const int cols = dummy_left == 1 ? dummy_col : dummy_col + 1;
    if (cols != total_slots)
        throw std::logic_error("slot/column padding must produce a square matrix");

    // Dense slot-by-column weight matrix (doubly stochastic by construction).
    std::vector<std::vector<Rational>> weights(total_slots, std::vector<Rational>(cols, Rational(0)));
    std::vector<AgentId> slot_owner(total_slots);
    {
        int row = 0;
        for (AgentId i = 0; i < n; ++i)
            for (const auto& slot : slots[i]) {
                slot_owner[row] = i;
                for (const auto& piece : slot) weights[row][piece.column] += piece.mass;
                ++row;
            }
    }

    // Birkhoff-style peeling.
    std::vector<DistributionalAllocation::Entry> entries;
    Rational remaining = 1;
    const detail::MatchingFinder finder(weights);
    while (remaining > 0) {
        int min_row = -1, min_col = -1;
        for (int r = 0; r < total_slots; ++r)
            for (int c = 0; c < cols; ++c) {
                if (weights[r][c] == 0) continue;
                if (min_row == -1 || weights[r][c] < weights[min_row][min_col]) {
                    min_row = r;
                    min_col = c;
                }
            }
        if (min_row == -1) throw std::logic_error("probability mass left but matrix is empty");
        const std::vector<int> match = finder.find(min_row, min_col);
        const Rational q = weights[min_row][min_col];
        Allocation alloc;
        alloc.bundles.assign(n, {});
        for (int r = 0; r < total_slots; ++r) {
            weights[r][match[r]] -= q;
            if (match[r] < m) alloc.bundles[slot_owner[r]].push_back(match[r]);
        }
        entries.push_back({q, std::move(alloc)});
        remaining -= q;
    }
    return DistributionalAllocation(n, m, std::move(entries));
}

/// Re-weights a distribution onto a basic subset of its support: at most
/// (n-1)*m + 1 allocations, induced fractional allocation preserved exactly.
///
/// No LP solver: while the preservation constraints (one per (agent, good)
/// pair minus the redundant last agent, plus total probability) admit a
/// nonzero null-space vector over the current support, walk along it in the
/// direction that zeroes the smallest-index support element first, drop what
/// hits zero, and repeat. The result is a fixed point: applying it again
/// changes nothing.
inline DistributionalAllocation reduce_support(const DistributionalAllocation& dist) {
    const int n = dist.agents(), m = dist.goods();
    std::vector<DistributionalAllocation::Entry> entries = dist.entries();
    while (entries.size() > 1) {
        const int k = static_cast<int>(entries.size());
        std::vector<std::vector<Rational>> constraints((n - 1) * m + 1,
                                                       std::vector<Rational>(k, Rational(0)));
        for (int col = 0; col < k; ++col) {
            constraints[0][col] = 1;  // total probability
            for (AgentId i = 0; i + 1 < n; ++i)
                for (GoodId x : entries[col].allocation.bundles[i])
                    constraints[1 + i * m + x][col] = 1;
        }
        const auto kernel = kernel_vector(std::move(constraints));
        if (!kernel) break;  // basic: support columns are independent
        const auto& z = *kernel;

        // Max step in each direction before some probability hits zero, and
        // the first element each direction zeroes.
        int first_zeroed_plus = -1, first_zeroed_minus = -1;
        Rational step_plus = 0, step_minus = 0;
        for (int col = 0; col < k; ++col) {
            if (z[col] < 0) {
                const Rational t = entries[col].prob / -z[col];
                if (first_zeroed_plus == -1 || t < step_plus) {
                    step_plus = t;
                    first_zeroed_plus = col;
                }
            } else if (z[col] > 0) {
                const Rational t = entries[col].prob / z[col];
                if (first_zeroed_minus == -1 || t < step_minus) {
                    step_minus = t;
                    first_zeroed_minus = col;
                }
            }
        }
        if (first_zeroed_plus == -1 || first_zeroed_minus == -1)
            throw std::logic_error("kernel vector must have both signs (probabilities sum to 1)");
        const bool go_plus = first_zeroed_plus < first_zeroed_minus;
        const Rational step = go_plus ? step_plus : step_minus;
        std::vector<DistributionalAllocation::Entry> next;
        next.reserve(entries.size() - 1);
        for (int col = 0; col < k; ++col) {
            const Rational move = go_plus ? Rational(step * z[col]) : Rational(-step * z[col]);
            Rational p = entries[col].prob + move;
            if (p < 0) throw std::logic_error("kernel walk stepped past a zero");
            if (p > 0) next.push_back({std::move(p), std::move(entries[col].allocation)});
        }
        if (next.size() >= entries.size())
            throw std::logic_error("kernel walk failed to drop a support element");
        entries = std::move(next);
    }
    return DistributionalAllocation(n, m, std::move(entries));
}

/// The full suffix-splitting pipeline for one ordering and portion matrix.
struct ImplementExport {
    DistributionalAllocation combined;               // induces cuq, support <= n*m
    std::vector<DistributionalAllocation> per_shift;  // one faithful rounding per shift
    FractionalAllocation cuq;                         // the induced target
};

namespace detail {

inline DistributionalAllocation strip_dummy_goods(const DistributionalAllocation& dist,
                                                  int real_m) {
    if (dist.goods() == real_m) return dist;
    std::vector<DistributionalAllocation::Entry> entries;
    entries.reserve(dist.entries().size());
    for (const auto& e : dist.entries()) {
        Allocation a;
        a.bundles.reserve(e.allocation.bundles.size());
        for (const auto& b : e.allocation.bundles) {
            std::vector<GoodId> real;
            for (GoodId x : b)
                if (x < real_m) real.push_back(x);
            a.bundles.push_back(std::move(real));
        }
        entries.push_back({e.prob, std::move(a)});
    }
    return DistributionalAllocation(dist.agents(), real_m, std::move(entries));
}

}  // namespace detail

/// Decomposes the cyclic-unit-quota fractional allocation of (orders, pi)
/// into per-shift full fractional allocations driven by the portion matrix,
/// faithfully rounds each, and support-reduces their uniform mixture.
/// The combined distribution induces cuq exactly on a support of at most
/// n*m allocations drawn from the per-shift supports.
inline ImplementExport implement_export(const AgentOrdering& pi, const OrderProfile& orders,
                                        const PortionMatrix& beta) {
    const int n = pi.agents();
    const int real_m = orders.empty() ? 0 : orders[0].goods();
    if (real_m == 0) {
        Allocation empty;
        empty.bundles.assign(n, {});
        DistributionalAllocation d(n, 0, {{Rational(1), empty}});
        return {d, std::vector<DistributionalAllocation>(n, d), FractionalAllocation(n, 0)};
    }
    const PickingContext ctx = build_picking_context(pi, orders);
    const FractionalAllocation cuq_pad = cuq_padded_from_context(ctx);
    const auto fulls = complete_to_cuq(ctx, beta, cuq_pad);

    std::vector<DistributionalAllocation> per_shift;
    per_shift.reserve(n);
    std::vector<DistributionalAllocation::Entry> mixture;
    for (int s = 0; s < n; ++s) {
        auto rounded = detail::strip_dummy_goods(faithful_implement(fulls[s], ctx.orders), real_m);
        for (const auto& e : rounded.entries()) mixture.push_back({e.prob / n, e.allocation});
        per_shift.push_back(std::move(rounded));
    }
    DistributionalAllocation combined =
        reduce_support(DistributionalAllocation(n, real_m, std::move(mixture)));
    return {std::move(combined), std::move(per_shift), cuq_from_context(ctx)};
}

}  // namespace fairdiv
