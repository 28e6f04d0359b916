#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fairdiv/instance.hpp"
#include "fairdiv/rational.hpp"

namespace fairdiv {

/// One bundle per agent; bundles are kept sorted ascending so allocations
/// compare and deduplicate canonically.
struct Allocation {
    std::vector<std::vector<GoodId>> bundles;

    void normalize() {
        for (auto& b : bundles) std::sort(b.begin(), b.end());
    }

    friend bool operator==(const Allocation&, const Allocation&) = default;
    friend bool operator<(const Allocation& a, const Allocation& b) {
        return a.bundles < b.bundles;
    }
};

/// Checks bundles are pairwise disjoint and cover exactly {0..m-1}.
inline bool is_valid_allocation(const Allocation& a, int n, int m) {
    if (static_cast<int>(a.bundles.size()) != n) return false;
    std::vector<int> seen(m, 0);
    for (const auto& b : a.bundles)
        for (GoodId x : b) {
            if (x < 0 || x >= m || seen[x]) return false;
            seen[x] = 1;
        }
    return std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
}

/// Agent-by-good matrix of exact fractions. Full allocations have every
/// column summing to 1; partial allocations to at most 1.
struct FractionalAllocation {
    int n = 0, m = 0;
    std::vector<std::vector<Rational>> f;  // f[agent][good]

    FractionalAllocation() = default;
    FractionalAllocation(int agents, int goods)
        : n(agents), m(goods), f(agents, std::vector<Rational>(goods, Rational(0))) {}

    static FractionalAllocation uniform(int agents, int goods) {
        FractionalAllocation u(agents, goods);
        for (auto& row : u.f)
            for (auto& e : row) e = Rational(1, agents);
        return u;
    }

    Rational column_sum(GoodId x) const {
        Rational s = 0;
        for (int i = 0; i < n; ++i) s += f[i][x];
        return s;
    }

    Rational row_sum(AgentId i) const {
        Rational s = 0;
        for (int x = 0; x < m; ++x) s += f[i][x];
        return s;
    }

    bool is_full() const {
        for (int x = 0; x < m; ++x)
            if (column_sum(x) != 1) return false;
        return in_range();
    }

    bool is_partial() const {
        for (int x = 0; x < m; ++x)
            if (column_sum(x) > 1) return false;
        return in_range();
    }

    bool in_range() const {
        for (const auto& row : f)
            for (const auto& e : row)
                if (e < 0 || e > 1) return false;
        return true;
    }

    /// Value of agent i's fractional row under her valuation.
    Rational value_for(AgentId i, std::span<const Rational> values) const {
        Rational v = 0;
        for (int x = 0; x < m; ++x) v += f[i][x] * values[x];
        return v;
    }

    friend bool operator==(const FractionalAllocation&, const FractionalAllocation&) = default;
};

/// Explicit probability distribution over integral allocations. Construction
/// merges duplicate allocations so support size is meaningful, checks every
/// allocation is a partition of the goods, and that probabilities are
/// positive and sum to exactly 1.
class DistributionalAllocation {
public:
    struct Entry {
        Rational prob;
        Allocation allocation;
    };

    DistributionalAllocation(int n, int m, std::vector<Entry> entries) : n_(n), m_(m) {
        std::map<Allocation, Rational> merged;
        Rational total = 0;
        for (auto& e : entries) {
            if (e.prob <= 0) throw ParseError("distribution probabilities must be positive");
            e.allocation.normalize();
            if (!is_valid_allocation(e.allocation, n, m))
                throw ParseError("distribution entry is not a valid allocation");
            merged[e.allocation] += e.prob;
            total += e.prob;
        }
        if (total != 1) throw ParseError("distribution probabilities must sum to 1");
        entries_.reserve(merged.size());
        for (auto& [alloc, p] : merged) entries_.push_back({p, alloc});
    }

    int agents() const { return n_; }
    int goods() const { return m_; }
    int support_size() const { return static_cast<int>(entries_.size()); }
    const std::vector<Entry>& entries() const { return entries_; }

private:
    int n_, m_;
    std::vector<Entry> entries_;  // sorted by allocation, deterministic
};

/// f_{i,x} = P[x ends up with i] when sampling from D; columns sum to 1.
inline FractionalAllocation induced_fractional(const DistributionalAllocation& d) {
    FractionalAllocation out(d.agents(), d.goods());
    for (const auto& e : d.entries())
        for (AgentId i = 0; i < d.agents(); ++i)
            for (GoodId x : e.allocation.bundles[i]) out.f[i][x] += e.prob;
    return out;
}

/// Expected value of agent i under D, exactly.
inline Rational expected_value(const DistributionalAllocation& d, AgentId i,
                               std::span<const Rational> values) {
    Rational v = 0;
    for (const auto& e : d.entries()) {
        Rational bundle = 0;
        for (GoodId x : e.allocation.bundles[i]) bundle += values[x];
        v += e.prob * bundle;
    }
    return v;
}

/// n-by-n matrix of suffix portions; every row and column sums to at most 1.
struct PortionMatrix {
    int n = 0;
    std::vector<std::vector<Rational>> beta;  // beta[agent][shift]

    PortionMatrix() = default;
    explicit PortionMatrix(int agents)
        : n(agents), beta(agents, std::vector<Rational>(agents, Rational(0))) {}

    bool valid() const {
        for (int i = 0; i < n; ++i) {
            Rational row = 0;
            for (int j = 0; j < n; ++j) {
                if (beta[i][j] < 0 || beta[i][j] > 1) return false;
                row += beta[i][j];
            }
            if (row > 1) return false;
        }
        for (int j = 0; j < n; ++j) {
            Rational col = 0;
            for (int i = 0; i < n; ++i) col += beta[i][j];
            if (col > 1) return false;
        }
        return true;
    }
};

// ---------------------------------------------------------------------------
// Distribution JSON format:
//   {"support":[{"prob":rational-string,"bundles":[[good-index,...],...]},...]}

inline nlohmann::json distribution_to_json(const DistributionalAllocation& d) {
    nlohmann::json support = nlohmann::json::array();
    for (const auto& e : d.entries()) {
        nlohmann::json entry;
        entry["prob"] = to_string(e.prob);
        entry["bundles"] = e.allocation.bundles;
        support.push_back(entry);
    }
    nlohmann::json j;
    j["support"] = support;
    return j;
}

inline std::string save_distribution(const DistributionalAllocation& d, bool pretty = false) {
    return pretty ? distribution_to_json(d).dump(2) : distribution_to_json(d).dump();
}

inline DistributionalAllocation distribution_from_json(const nlohmann::json& j, int n, int m) {
    if (!j.is_object() || !j.contains("support") || !j["support"].is_array())
        throw ParseError("distribution JSON needs a 'support' array");
    std::vector<DistributionalAllocation::Entry> entries;
    for (const auto& e : j["support"]) {
        if (!e.contains("prob") || !e["prob"].is_string() || !e.contains("bundles"))
            throw ParseError("support entry needs 'prob' string and 'bundles'");
        Allocation a;
        a.bundles = e["bundles"].get<std::vector<std::vector<GoodId>>>();
        entries.push_back({parse_rational(e["prob"].get<std::string>()), std::move(a)});
    }
    return DistributionalAllocation(n, m, std::move(entries));
}

inline DistributionalAllocation load_distribution(std::string_view text, int n, int m) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("distribution JSON: ") + e.what());
    }
    return distribution_from_json(j, n, m);
}

}  // namespace fairdiv
