#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fairdiv/mechanisms.hpp"

namespace fairdiv {

struct SpaceTooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Baseline: faithful rounding of the report-independent 1/n allocation. Used
// to reproduce the separation against the cyclic-unit-quota mechanisms.

inline MechanismResult uniform_mechanism(const Instance& inst, const Reports& reports = {}) {
    const FractionalAllocation uniform =
        FractionalAllocation::uniform(inst.agents(), inst.goods());
    MechanismResult r("uniform", faithful_implement(uniform, reported_orders(inst, reports)),
                      Rational(1, inst.agents()), uniform);
    return r;
}

// ---------------------------------------------------------------------------
// Truthfulness audits.

enum class AuditVerdict { TieHolds, Violated, WithinEpsilon };

struct AuditReport {
    std::string mechanism;
    AgentId agent = 0;
    std::string deviation_space;
    Rational truthful_value;
    Rational best_deviation_value;
    std::optional<std::string> witness;  // description of a strictly better deviation
    AuditVerdict verdict = AuditVerdict::TieHolds;
    std::optional<Rational> epsilon_bound;
    long deviations_checked = 0;
};

struct AuditOptions {
    std::optional<AgentOrdering> pi;   // general-weight needs a fixed ordering
    std::optional<Rational> alpha;     // deficiency mechanisms
    std::uint64_t seed = 0;            // loglog
    std::optional<Rational> threshold_override;
};

constexpr int kAuditMaxGoods = 5;
constexpr int kAuditMaxAgentsWithDeficiencies = 3;

namespace detail {

// A cardinal stand-in for an order misreport: strictly decreasing values in
// the reported order. Ex-ante values of every mechanism here depend on the
// report only through its order, so any consistent representative is as good
// as any other; the audit evaluates the actual output distribution anyway.
inline Instance replace_with_order(const Instance& inst, AgentId agent,
                                   const StrictOrder& order) {
    std::vector<std::vector<Rational>> values;
    values.reserve(inst.agents());
    for (AgentId i = 0; i < inst.agents(); ++i) values.push_back(inst.valuation(i));
    for (int r = 0; r < order.goods(); ++r)
        values[agent][order.at_rank(r)] = Rational(order.goods() - r);
    return Instance(std::move(values));
}

inline std::string describe_order(const StrictOrder& order) {
    std::string s = "order(";
    for (int r = 0; r < order.goods(); ++r) {
        if (r) s += ',';
        s += std::to_string(order.at_rank(r));
    }
    s += ')';
    return s;
}

}  // namespace detail

/// Exhaustive truthfulness-in-expectation audit for one agent: runs the
/// mechanism under the truthful report and under every deviation in the
/// enumerable space (all strict orders; for "loglog" also every deficiency
/// report), holding all other reports and the seed fixed, and compares exact
/// expected values under the agent's true valuation.
inline AuditReport audit_tie(const std::string& mechanism, const Instance& inst, AgentId agent,
                             const AuditOptions& opts = {}) {
    const int n = inst.agents();
    const int m = inst.goods();
    if (m > kAuditMaxGoods)
        throw SpaceTooLarge("order enumeration is limited to m <= 5 goods");
    const bool with_deficiency_reports = mechanism == "loglog";
    if (with_deficiency_reports && n > kAuditMaxAgentsWithDeficiencies)
        throw SpaceTooLarge("order x deficiency enumeration is limited to n <= 3");

    const Rational alpha = opts.alpha.value_or(Rational(1, 4));
    // Deviating deficiency reports sit next to the other agents' truthful
    // ones, which must be computed at the alpha the mechanism actually uses.
    const Rational deficiency_alpha =
        mechanism == "loglog" ? loglog_params(n).alpha : alpha;

    // One mechanism evaluation under a (possibly deviating) report.
    auto run = [&](const std::optional<StrictOrder>& order,
                   const std::optional<int>& reported_d) -> DistributionalAllocation {
        Reports reports;
        if (order) {
            OrderProfile orders = derive_orders(inst);
            orders[agent] = *order;
            reports.orders = std::move(orders);
        }
        if (reported_d) {
            std::vector<int> d = true_deficiencies(inst, deficiency_alpha).d;
            d[agent] = *reported_d;
            reports.deficiencies = std::move(d);
        }
        if (mechanism == "logn") return mechanism_logn(inst, opts.pi, reports).distribution;
        if (mechanism == "general-weight") {
            const AgentOrdering pi = opts.pi.value_or(AgentOrdering::identity(n));
            return general_weight_mechanism(inst, pi, alpha, reports).distribution;
        }
        if (mechanism == "public-deficiency")
            return mechanism_public_deficiency(inst, alpha, reports).distribution;
        if (mechanism == "loglog")
            return mechanism_loglog(inst, opts.seed, opts.threshold_override, reports).distribution;
        if (mechanism == "uniform") return uniform_mechanism(inst, reports).distribution;
        if (mechanism == "two-agent") {
            if (!order) return mechanism_two_agents(inst).distribution;
            return mechanism_two_agents(detail::replace_with_order(inst, agent, *order))
                .distribution;
        }
        throw ParseError("unknown mechanism for audit: " + mechanism);
    };

    AuditReport report;
    report.mechanism = mechanism;
    report.agent = agent;
    report.deviation_space =
        with_deficiency_reports
            ? "all strict orders x deficiency reports 0..n (orders are a complete deviation "
              "space for the ex-ante value; cardinal detail beyond them cannot move it)"
            : "all strict orders (complete: the mechanism's ex-ante values depend on reports "
              "only through orders)";
    if (mechanism == "loglog") report.epsilon_bound = loglog_params(n).epsilon_bound;

    const auto true_values = inst.valuation(agent);
    report.truthful_value = expected_value(run(std::nullopt, std::nullopt), agent, true_values);
    report.best_deviation_value = report.truthful_value;

    std::vector<GoodId> ranking(m);
    std::iota(ranking.begin(), ranking.end(), 0);
    std::vector<int> deficiency_reports;
    if (with_deficiency_reports)
        for (int d = 0; d <= n; ++d) deficiency_reports.push_back(d);

    do {
        const StrictOrder order(ranking);
        auto consider = [&](const std::optional<int>& rep_d) {
            const Rational value = expected_value(run(order, rep_d), agent, true_values);
            ++report.deviations_checked;
            if (value > report.best_deviation_value) {
                report.best_deviation_value = value;
                report.witness = detail::describe_order(order) +
                                 (rep_d ? ",deficiency=" + std::to_string(*rep_d) : "");
            }
        };
        if (with_deficiency_reports)
            for (int d : deficiency_reports) consider(d);
        else
            consider(std::nullopt);
    } while (std::next_permutation(ranking.begin(), ranking.end()));

    if (report.best_deviation_value <= report.truthful_value) {
        report.verdict = AuditVerdict::TieHolds;
        report.witness.reset();
    } else if (report.epsilon_bound &&
               report.truthful_value >=
                   (1 - *report.epsilon_bound) * report.best_deviation_value) {
        report.verdict = AuditVerdict::WithinEpsilon;
    } else {
        report.verdict = AuditVerdict::Violated;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Ex-post share certification.

struct CertifyWitness {
    int entry = 0;  // index into the distribution's support
    AgentId agent = 0;
    Rational bundle_value;
    Rational required;  // rho * share
};

struct CertifyReport {
    bool pass = true;
    Rational rho;
    ShareBasis basis = ShareBasis::Tps;
    std::vector<Rational> shares;            // per agent
    std::vector<CertifyWitness> violations;  // empty when pass
    std::optional<Rational> min_ratio;       // min value/share over support, when shares > 0
};

/// Checks v_i(A_i) >= rho * share_i for every support allocation and agent,
/// with exact rational comparisons. Shares of zero certify vacuously.
inline CertifyReport certify_expost(const DistributionalAllocation& dist, const Instance& inst,
                                    const Rational& rho, ShareBasis basis) {
    CertifyReport report;
    report.rho = rho;
    report.basis = basis;
    for (AgentId i = 0; i < inst.agents(); ++i) {
        const auto& v = inst.valuation(i);
        report.shares.push_back(basis == ShareBasis::Tps ? tps(v, inst.agents())
                                                         : mms_oracle(v, inst.agents()));
    }
    for (std::size_t k = 0; k < dist.entries().size(); ++k) {
        const auto& entry = dist.entries()[k];
        for (AgentId i = 0; i < inst.agents(); ++i) {
            const Rational value = inst.bundle_value(i, entry.allocation.bundles[i]);
            if (value < rho * report.shares[i]) {
                report.pass = false;
                report.violations.push_back(
                    {static_cast<int>(k), i, value, rho * report.shares[i]});
            }
            if (report.shares[i] > 0) {
                const Rational ratio = value / report.shares[i];
                if (!report.min_ratio || ratio < *report.min_ratio) report.min_ratio = ratio;
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Adversarial corpus.

struct NamedInstance {
    std::string name;
    Instance instance;
};

/// n-agent separation family (m = 2n-1): one distinguished agent values n-1
/// "unit" goods at 1 and n "coin" goods at 1/n; everyone else values only the
/// coins, at 1 each. Every agent's MMS is exactly 1, yet any distribution
/// that sometimes gives the distinguished agent no unit good has a support
/// allocation leaving some agent at most 1/n of her MMS.
inline Instance separation_family(int n) {
    const int m = 2 * n - 1;
    std::vector<std::vector<Rational>> values(n, std::vector<Rational>(m, Rational(0)));
    for (GoodId x = 0; x < n - 1; ++x) values[0][x] = 1;
    for (GoodId x = n - 1; x < m; ++x) values[0][x] = Rational(1, n);
    for (AgentId i = 1; i < n; ++i)
        for (GoodId x = n - 1; x < m; ++x) values[i][x] = 1;
    return Instance(std::move(values));
}

inline std::vector<NamedInstance> adversarial_corpus() {
    std::vector<NamedInstance> corpus;
    corpus.push_back({"separation-n3", separation_family(3)});

    // The tight two-agent profile: the hard-case split leaves the first agent
    // exactly 2/3 of her share.
    corpus.push_back({"two-agent-tight",
                      Instance({{Rational(1), Rational(1, 3), Rational(1, 3), Rational(1, 3)},
                                {Rational(1, 2), Rational(1, 2), Rational(1, 2), Rational(1, 2)}})});

    // Three agents, six goods, orders chosen so the cyclic picked sets
    // overlap nontrivially across shifts.
    corpus.push_back({"three-agent-cyclic",
                      Instance({{Rational(6), Rational(4), Rational(3), Rational(5), Rational(2), Rational(1)},
                                {Rational(6), Rational(5), Rational(4), Rational(3), Rational(2), Rational(1)},
                                {Rational(6), Rational(4), Rational(5), Rational(3), Rational(2), Rational(1)}})});

    corpus.push_back({"all-zero-2x3",
                      Instance({{Rational(0), Rational(0), Rational(0)},
                                {Rational(0), Rational(0), Rational(0)}})});
    corpus.push_back({"single-good-2x1", Instance({{Rational(1)}, {Rational(1)}})});
    corpus.push_back({"fewer-goods-3x2",
                      Instance({{Rational(1), Rational(1)},
                                {Rational(2), Rational(1)},
                                {Rational(1), Rational(2)}})});
    return corpus;
}

// ---------------------------------------------------------------------------
// Monte-Carlo weight statistics.

/// Summary of w(pi) over uniformly random orderings for a fixed deficiency
/// vector. Everything is exact except the standard deviation, the one
/// floating-point summary in the system.
struct WeightStats {
    int n = 0;
    long trials = 0;
    Rational closed_form_mean;  // (#agents with d_i >= 1) / n
    Rational empirical_mean;
    double empirical_stddev = 0.0;
    Rational max_cyclic_weight;
    Rational harmonic_bound;  // H_n, never exceeded by any single weight
    Rational threshold;       // 23 + 2*ceil(log2 log2 n)
    double exceed_fraction = 0.0;
};

inline WeightStats weight_statistics(int n, const std::vector<int>& deficiencies, long trials,
                                     std::uint64_t seed) {
    WeightStats stats;
    stats.n = n;
    stats.trials = trials;
    stats.harmonic_bound = harmonic(n);
    stats.threshold = loglog_params(n).threshold;
    int demanders = 0;
    for (int d : deficiencies)
        if (d >= 1) ++demanders;
    stats.closed_form_mean = Rational(demanders, n);

    Rng rng(seed);
    Rational total = 0;
    stats.max_cyclic_weight = 1;
    long exceed = 0;
    double mean_acc = 0.0, m2_acc = 0.0;  // Welford, floats for the stddev only
    for (long t = 0; t < trials; ++t) {
        const AgentOrdering pi(rng.permutation(n));
        const Rational w = ordering_weight(pi, deficiencies);
        const Rational cyc = cyclic_weight(pi, deficiencies);
        total += w;
        if (cyc > stats.max_cyclic_weight) stats.max_cyclic_weight = cyc;
        if (cyc > stats.threshold) ++exceed;
        const double wd = static_cast<double>(w);
        const double delta = wd - mean_acc;
        mean_acc += delta / static_cast<double>(t + 1);
        m2_acc += delta * (wd - mean_acc);
    }
    stats.empirical_mean = total / trials;
    stats.empirical_stddev = trials > 1 ? std::sqrt(m2_acc / static_cast<double>(trials - 1)) : 0.0;
    stats.exceed_fraction = static_cast<double>(exceed) / static_cast<double>(trials);
    return stats;
}

}  // namespace fairdiv
