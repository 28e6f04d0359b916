#pragma once

#include <algorithm>
#include <vector>

#include "fairdiv/allocation.hpp"
#include "fairdiv/instance.hpp"

namespace fairdiv {

/// Runs the unit-quota picking mechanism for one agent ordering: each of the
/// first n-1 agents takes her best remaining good, the last agent takes the
/// whole remaining suffix.
inline Allocation unit_quota(const AgentOrdering& pi, const OrderProfile& orders) {
    const int n = pi.agents();
    const int m = orders.empty() ? 0 : orders[0].goods();
    std::vector<char> taken(m, 0);
    Allocation alloc;
    alloc.bundles.assign(n, {});
    for (int k = 0; k < n - 1; ++k) {
        const AgentId i = pi.agent_at(k);
        for (GoodId x : orders[i].ranking())
            if (!taken[x]) {
                taken[x] = 1;
                alloc.bundles[i].push_back(x);
                break;
            }
    }
    const AgentId last = pi.agent_at(n - 1);
    for (GoodId x = 0; x < m; ++x)
        if (!taken[x]) alloc.bundles[last].push_back(x);
    alloc.normalize();
    return alloc;
}

/// Everything the suffix-splitting pipeline needs about the n cyclic picking
/// orders of a base ordering pi. Unlike the unit-quota mechanism itself, here
/// every agent (including the last) picks exactly one good per shift, so each
/// picked set has exactly n goods.
///
/// When there are fewer goods than agents the orders are padded internally
/// with zero-value dummy goods (ids real_m..m-1, ranked last); callers strip
/// them from final outputs.
struct PickingContext {
    AgentOrdering pi;
    OrderProfile orders;  // padded profile
    int n = 0;
    int m = 0;       // padded good count (>= n)
    int real_m = 0;  // goods of the original problem

    std::vector<std::vector<GoodId>> picks_by_shift;  // [shift][position] -> good
    std::vector<std::vector<GoodId>> pick_of;         // [agent][shift] -> good
    std::vector<std::vector<int>> pick_rank;          // [agent][shift] -> rank of pick_of
    std::vector<std::vector<char>> in_picked_set;     // [shift][good] membership
    std::vector<int> last_shift;                      // [agent] -> shift where she picks last

    bool is_dummy(GoodId x) const { return x >= real_m; }
};

inline OrderProfile pad_orders(const OrderProfile& orders, int target_m) {
    OrderProfile padded;
    padded.reserve(orders.size());
    for (const auto& o : orders) {
        std::vector<GoodId> ranking = o.ranking();
        for (GoodId x = o.goods(); x < target_m; ++x) ranking.push_back(x);
        padded.emplace_back(std::move(ranking));
    }
    return padded;
}

inline PickingContext build_picking_context(const AgentOrdering& pi, const OrderProfile& orders) {
    PickingContext ctx{pi, orders};
    ctx.n = pi.agents();
    ctx.real_m = orders.empty() ? 0 : orders[0].goods();
    ctx.m = std::max(ctx.real_m, ctx.n);
    if (ctx.real_m < ctx.m) ctx.orders = pad_orders(orders, ctx.m);

    const int n = ctx.n;
    ctx.picks_by_shift.assign(n, std::vector<GoodId>(n, -1));
    ctx.pick_of.assign(n, std::vector<GoodId>(n, -1));
    ctx.pick_rank.assign(n, std::vector<int>(n, -1));
    ctx.in_picked_set.assign(n, std::vector<char>(ctx.m, 0));
    ctx.last_shift.assign(n, -1);
    for (AgentId i = 0; i < n; ++i) ctx.last_shift[i] = (pi.position(i) + 1) % n;

    for (int s = 0; s < n; ++s) {
        std::vector<char> taken(ctx.m, 0);
        for (int k = 0; k < n; ++k) {
            const AgentId i = pi.agent_at((k + s) % n);
            for (GoodId x : ctx.orders[i].ranking())
                if (!taken[x]) {
                    taken[x] = 1;
                    ctx.picks_by_shift[s][k] = x;
                    ctx.pick_of[i][s] = x;
                    ctx.pick_rank[i][s] = ctx.orders[i].rank_of(x);
                    ctx.in_picked_set[s][x] = 1;
                    break;
                }
        }
    }
    return ctx;
}

/// Zeroed and fractional good sets per (agent, shift): the picked good, the
/// zeroed set and the fractional set partition all goods.
struct PickSets {
    std::vector<std::vector<std::vector<GoodId>>> zeroed;      // [agent][shift]
    std::vector<std::vector<std::vector<GoodId>>> fractional;  // [agent][shift]
};

inline PickSets pick_sets(const PickingContext& ctx) {
    PickSets sets;
    sets.zeroed.assign(ctx.n, std::vector<std::vector<GoodId>>(ctx.n));
    sets.fractional.assign(ctx.n, std::vector<std::vector<GoodId>>(ctx.n));
    for (AgentId i = 0; i < ctx.n; ++i) {
        const auto& in_last = ctx.in_picked_set[ctx.last_shift[i]];
        for (int s = 0; s < ctx.n; ++s) {
            const GoodId own = ctx.pick_of[i][s];
            for (GoodId x = 0; x < ctx.m; ++x) {
                const bool in_union = ctx.in_picked_set[s][x] || in_last[x];
                if (x == own) continue;
                if (in_union)
                    sets.zeroed[i][s].push_back(x);
                else
                    sets.fractional[i][s].push_back(x);
            }
        }
    }
    return sets;
}

/// Closed form of the cyclic-unit-quota fractional allocation:
///   cuq_{i,x} = (1/n) * ( [x not picked in i's last shift] + #shifts where i picks x ).
/// Equals the fractional allocation induced by mixing the n unit-quota
/// allocations uniformly, and depends only on the strict orders.
/// This variant covers the padded good range.
inline FractionalAllocation cuq_padded_from_context(const PickingContext& ctx) {
    FractionalAllocation cuq(ctx.n, ctx.m);
    for (AgentId i = 0; i < ctx.n; ++i) {
        const auto& in_last = ctx.in_picked_set[ctx.last_shift[i]];
        for (GoodId x = 0; x < ctx.m; ++x) {
            int count = in_last[x] ? 0 : 1;
            for (int s = 0; s < ctx.n; ++s)
                if (ctx.pick_of[i][s] == x) ++count;
            cuq.f[i][x] = Rational(count, ctx.n);
        }
    }
    return cuq;
}

/// Restricts a padded fractional allocation back to the real goods.
inline FractionalAllocation strip_dummies(const FractionalAllocation& padded, int real_m) {
    FractionalAllocation out(padded.n, real_m);
    for (int i = 0; i < padded.n; ++i)
        for (GoodId x = 0; x < real_m; ++x) out.f[i][x] = padded.f[i][x];
    return out;
}

inline FractionalAllocation cuq_from_context(const PickingContext& ctx) {
    return strip_dummies(cuq_padded_from_context(ctx), ctx.real_m);
}

inline FractionalAllocation cuq_fractional(const OrderProfile& orders, const AgentOrdering& pi) {
    return cuq_from_context(build_picking_context(pi, orders));
}

}  // namespace fairdiv
