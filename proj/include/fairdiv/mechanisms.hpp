#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fairdiv/instance.hpp"
#include "fairdiv/rng.hpp"
#include "fairdiv/rounding.hpp"
#include "fairdiv/shares.hpp"

namespace fairdiv {

struct AlphaTooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct WrongAgentCount : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Deficiencies and ordering weights.

/// A good is alpha-satisfactory when it is worth at least alpha * TPS to the
/// agent; the deficiency is how far the count of such goods falls short of n.
inline int deficiency(std::span<const Rational> values, int n, const Rational& alpha) {
    const Rational bar = alpha * tps(values, n);
    int satisfactory = 0;
    for (const auto& v : values)
        if (v >= bar) ++satisfactory;
    return std::max(n - satisfactory, 0);
}

struct DeficiencyProfile {
    Rational alpha;
    std::vector<int> d;  // per agent, in [0, n]
};

inline DeficiencyProfile true_deficiencies(const Instance& inst, const Rational& alpha) {
    DeficiencyProfile prof{alpha, {}};
    prof.d.reserve(inst.agents());
    for (AgentId i = 0; i < inst.agents(); ++i)
        prof.d.push_back(deficiency(inst.valuation(i), inst.agents(), alpha));
    return prof;
}

/// Demand an agent places on the suffix of one picking order: nothing when
/// she picks early enough to grab a satisfactory good, 1/d_i otherwise.
inline Rational suffix_demand(const AgentOrdering& pi, AgentId i, int d_i) {
    const int n = pi.agents();
    if (pi.position(i) + 1 <= n - d_i) return Rational(0);
    return Rational(1, d_i);
}

inline Rational ordering_weight(const AgentOrdering& pi, const std::vector<int>& d) {
    Rational w = 0;
    for (AgentId i = 0; i < pi.agents(); ++i) w += suffix_demand(pi, i, d[i]);
    return w;
}

/// Maximum weight over all cyclic shifts, floored at 1.
inline Rational cyclic_weight(const AgentOrdering& pi, const std::vector<int>& d) {
    Rational best = 1;
    for (int s = 0; s < pi.agents(); ++s) {
        Rational w = ordering_weight(pi.cyclic_shift(s), d);
        if (w > best) best = std::move(w);
    }
    return best;
}

struct WeightReport {
    std::vector<Rational> demands;  // per agent, for the base ordering
    Rational weight;
    Rational cyclic;
};

inline WeightReport weight_report(const AgentOrdering& pi, const DeficiencyProfile& prof) {
    WeightReport r;
    r.demands.reserve(pi.agents());
    r.weight = 0;
    for (AgentId i = 0; i < pi.agents(); ++i) {
        r.demands.push_back(suffix_demand(pi, i, prof.d[i]));
        r.weight += r.demands.back();
    }
    r.cyclic = cyclic_weight(pi, prof.d);
    return r;
}

// ---------------------------------------------------------------------------
// Portion matrices.

/// Harmonic portion matrix: agent picking at position p (1-based) of shift s
/// gets 1/((n-p+1) * H_n) of the suffix. Rows and columns sum to exactly 1.
inline PortionMatrix harmonic_portion_matrix(const AgentOrdering& pi) {
    const int n = pi.agents();
    const Rational hn = harmonic(n);
    PortionMatrix beta(n);
    for (AgentId i = 0; i < n; ++i)
        for (int s = 0; s < n; ++s) {
            const int pos = (pi.position(i) - s + n) % n;  // 0-based within shift s
            beta.beta[i][s] = Rational(1) / (Rational(n - pos) * hn);
        }
    return beta;
}

/// Demand-scaled portion matrix: beta[i][s] = demand_i(shift s) / W.
inline PortionMatrix demand_portion_matrix(const AgentOrdering& pi, const std::vector<int>& d,
                                           const Rational& cyclic_w) {
    const int n = pi.agents();
    PortionMatrix beta(n);
    for (int s = 0; s < n; ++s) {
        const AgentOrdering shifted = pi.cyclic_shift(s);
        for (AgentId i = 0; i < n; ++i) beta.beta[i][s] = suffix_demand(shifted, i, d[i]) / cyclic_w;
    }
    return beta;
}

// ---------------------------------------------------------------------------
// Mechanism results.

enum class ShareBasis { Tps, Mms };
enum class Branch { Good, Fallback };

struct MechanismResult {
    std::string mechanism;
    DistributionalAllocation distribution;
    Rational rho;                // advertised ex-post fraction of the share
    ShareBasis basis;            // ex-post guarantees certified against TPS
    FractionalAllocation induced_target;  // the fractional allocation induced
    std::optional<AgentOrdering> pi;
    std::optional<std::uint64_t> seed;
    std::optional<Branch> branch;
    std::optional<Rational> alpha;
    std::optional<Rational> epsilon_bound;

    MechanismResult(std::string id, DistributionalAllocation dist, Rational rho_,
                    FractionalAllocation target)
        : mechanism(std::move(id)),
          distribution(std::move(dist)),
          rho(std::move(rho_)),
          basis(ShareBasis::Tps),
          induced_target(std::move(target)) {}
};

/// Reports an agent may deviate on; truthful values are used when absent.
struct Reports {
    std::optional<OrderProfile> orders;
    std::optional<std::vector<int>> deficiencies;
};

inline OrderProfile reported_orders(const Instance& inst, const Reports& reports) {
    return reports.orders ? *reports.orders : derive_orders(inst);
}

// ---------------------------------------------------------------------------
// Ordinal mechanism: 1/(H_{n-1}+2)-TPS ex-post, TIE, proportional ex-ante.

inline MechanismResult mechanism_logn(const Instance& inst,
                                      std::optional<AgentOrdering> pi_opt = std::nullopt,
                                      const Reports& reports = {}) {
    const int n = inst.agents();
    const AgentOrdering pi = pi_opt ? std::move(*pi_opt) : AgentOrdering::identity(n);
    auto exported = implement_export(pi, reported_orders(inst, reports), harmonic_portion_matrix(pi));
    const Rational rho = Rational(1) / (harmonic(n - 1) + 2);
    MechanismResult r("logn", std::move(exported.combined), rho, std::move(exported.cuq));
    r.pi = pi;
    return r;
}

// ---------------------------------------------------------------------------
// Deficiency-weighted mechanisms.

/// Implements the cyclic-unit-quota allocation of pi with demand-scaled
/// portions. alpha-TPS ex-post; requires alpha <= 1/(2 + W - 1/n) where W is
/// the cyclic weight of pi under the (reported) deficiencies.
inline MechanismResult general_weight_mechanism(const Instance& inst, const AgentOrdering& pi,
                                                const Rational& alpha,
                                                const Reports& reports = {}) {
    const int n = inst.agents();
    const std::vector<int> d =
        reports.deficiencies ? *reports.deficiencies : true_deficiencies(inst, alpha).d;
    const Rational w = cyclic_weight(pi, d);
    if (alpha > Rational(1) / (2 + w - Rational(1, n)))
        throw AlphaTooLarge("alpha exceeds 1/(2 + W - 1/n) for this ordering");
    auto exported =
        implement_export(pi, reported_orders(inst, reports), demand_portion_matrix(pi, d, w));
    MechanismResult r("general-weight", std::move(exported.combined), alpha,
                      std::move(exported.cuq));
    r.pi = pi;
    r.alpha = alpha;
    return r;
}

/// Orders agents by non-decreasing deficiency (ties by agent index) and runs
/// the demand-weighted mechanism. The sorted order has cyclic weight at most
/// 2, so any alpha <= 1/4 is feasible.
inline MechanismResult sorted_deficiency_mechanism(const Instance& inst, const Rational& alpha,
                                                   const std::vector<int>& d,
                                                   const Reports& reports) {
    const int n = inst.agents();
    std::vector<AgentId> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](AgentId a, AgentId b) { return d[a] < d[b]; });
    Reports with_d = reports;
    with_d.deficiencies = d;
    return general_weight_mechanism(inst, AgentOrdering(std::move(order)), alpha, with_d);
}

/// Deficiencies are taken as true (computed from the instance); alpha <= 1/4.
inline MechanismResult mechanism_public_deficiency(const Instance& inst, const Rational& alpha,
                                                   const Reports& reports = {}) {
    if (alpha <= 0 || alpha > Rational(1, 4))
        throw AlphaTooLarge("public-deficiency mechanism needs 0 < alpha <= 1/4");
    MechanismResult r =
        sorted_deficiency_mechanism(inst, alpha, true_deficiencies(inst, alpha).d, reports);
    r.mechanism = "public-deficiency";
    r.alpha = alpha;
    return r;
}

/// Parameters for the randomized-ordering mechanism, kept exact: with
/// t = ceil(log2 log2 n), alpha = 1/(25+2t) and the weight threshold is
/// 23+2t. Both are safe rational stand-ins for the real-valued originals.
struct LogLogParams {
    int t = 0;
    Rational alpha;
    Rational threshold;
    Rational epsilon_bound;  // upper bound on n^(-log2 n)
};

inline LogLogParams loglog_params(int n) {
    LogLogParams p;
    while (Integer(1) << (Integer(1) << p.t).convert_to<unsigned>() < n) ++p.t;
    p.alpha = Rational(1, 25 + 2 * p.t);
    p.threshold = Rational(23 + 2 * p.t);
    int log_floor = 0;
    while ((Integer(1) << (log_floor + 1)) <= n) ++log_floor;
    Integer denom = 1;
    for (int i = 0; i < log_floor; ++i) denom *= n;
    p.epsilon_bound = Rational(1, denom);
    return p;
}

/// Samples a uniform ordering; if its cyclic weight under the reported
/// deficiencies stays below the threshold (always, at desk scale), runs the
/// demand-weighted mechanism on it; otherwise falls back to the sorted
/// deficiency order. (1 - eps)-TIE with negligible eps; alpha-TPS ex-post
/// either way. threshold_override exists so tests can force the fallback.
inline MechanismResult mechanism_loglog(const Instance& inst, std::uint64_t seed,
                                        std::optional<Rational> threshold_override = std::nullopt,
                                        const Reports& reports = {}) {
    const int n = inst.agents();
    const LogLogParams params = loglog_params(n);
    const Rational threshold = threshold_override ? *threshold_override : params.threshold;
    const std::vector<int> d =
        reports.deficiencies ? *reports.deficiencies : true_deficiencies(inst, params.alpha).d;

    Rng rng(seed);
    AgentOrdering pi(rng.permutation(n));
    const bool good = cyclic_weight(pi, d) <= threshold;

    Reports with_d = reports;
    with_d.deficiencies = d;
    MechanismResult r = good ? general_weight_mechanism(inst, pi, params.alpha, with_d)
                             : sorted_deficiency_mechanism(inst, params.alpha, d, reports);
    r.mechanism = "loglog";
    r.seed = seed;
    r.branch = good ? Branch::Good : Branch::Fallback;
    r.alpha = params.alpha;
    r.rho = params.alpha;
    r.epsilon_bound = params.epsilon_bound;
    return r;  // on fallback, r.pi is the sorted-deficiency ordering actually used
}

// ---------------------------------------------------------------------------
// Two agents: 2/3-TPS ex-post on a support of exactly two allocations.

namespace detail {

inline DistributionalAllocation two_bundle_coin_flip(int m, std::vector<GoodId> first,
                                                     std::vector<GoodId> second) {
    Allocation a1{{first, second}};
    Allocation a2{{std::move(second), std::move(first)}};
    return DistributionalAllocation(
        2, m, {{Rational(1, 2), std::move(a1)}, {Rational(1, 2), std::move(a2)}});
}

}  // namespace detail

inline MechanismResult mechanism_two_agents(const Instance& inst) {
    if (inst.agents() != 2) throw WrongAgentCount("two-agent mechanism needs exactly 2 agents");
    const int m = inst.goods();
    const OrderProfile orders = derive_orders(inst);
    const AgentOrdering pi = AgentOrdering::identity(2);

    if (m == 0) {
        Allocation empty;
        empty.bundles.assign(2, {});
        MechanismResult r("two-agent",
                          DistributionalAllocation(2, 0, {{Rational(1), empty}}),
                          Rational(2, 3), FractionalAllocation(2, 0));
        r.pi = pi;
        return r;
    }

    const FractionalAllocation cuq = cuq_fractional(orders, pi);
    const GoodId fav0 = orders[0].at_rank(0);
    const GoodId fav1 = orders[1].at_rank(0);

    auto finish = [&](DistributionalAllocation dist) {
        MechanismResult r("two-agent", std::move(dist), Rational(2, 3), cuq);
        r.pi = pi;
        return r;
    };

    if (fav0 != fav1) return finish(faithful_implement(cuq, orders));

    const GoodId shared = fav0;
    const Rational bar0 = Rational(2, 3) * tps(inst.valuation(0), 2);
    const Rational bar1 = Rational(2, 3) * tps(inst.valuation(1), 2);
    const Rational& v0 = inst.value(0, shared);
    const Rational& v1 = inst.value(1, shared);

    if (v0 <= bar0 && v1 <= bar1) return finish(faithful_implement(cuq, orders));

    if (v0 >= bar0 && v1 >= bar1) {
        std::vector<GoodId> rest;
        for (GoodId x = 0; x < m; ++x)
            if (x != shared) rest.push_back(x);
        return finish(detail::two_bundle_coin_flip(m, {shared}, std::move(rest)));
    }

    // Hard case: the shared favorite clears the bar for one agent only. Sweep
    // the clearing agent's order in triplets, moving the other agent's best
    // good of each triplet into the favorite's bundle until she reaches the
    // bar; everything else lands in the complement.
    const AgentId sweeper = v0 > bar0 ? 0 : 1;
    const AgentId other = 1 - sweeper;
    const Rational other_bar = sweeper == 0 ? bar1 : bar0;

    std::vector<GoodId> ranked = orders[sweeper].ranking();
    while (ranked.size() % 3 != 0) ranked.push_back(static_cast<GoodId>(ranked.size()));
    auto other_rank = [&](GoodId x) { return x < m ? orders[other].rank_of(x) : x; };
    auto other_value = [&](GoodId x) { return x < m ? inst.value(other, x) : Rational(0); };

    std::vector<GoodId> with_favorite{ranked[0]};
    std::vector<GoodId> complement{ranked[1], ranked[2]};
    Rational other_in_favorite = other_value(ranked[0]);
    std::size_t triple = 3;
    for (; triple < ranked.size() && other_in_favorite < other_bar; triple += 3) {
        GoodId best = ranked[triple];
        for (int k = 1; k < 3; ++k)
            if (other_rank(ranked[triple + k]) < other_rank(best)) best = ranked[triple + k];
        for (int k = 0; k < 3; ++k) {
            const GoodId x = ranked[triple + k];
            (x == best ? with_favorite : complement).push_back(x);
        }
        other_in_favorite += other_value(best);
    }
    for (; triple < ranked.size(); ++triple) complement.push_back(ranked[triple]);

    auto strip = [&](std::vector<GoodId>& goods) {
        std::erase_if(goods, [&](GoodId x) { return x >= m; });
    };
    strip(with_favorite);
    strip(complement);
    return finish(detail::two_bundle_coin_flip(m, std::move(with_favorite), std::move(complement)));
}

}  // namespace fairdiv
