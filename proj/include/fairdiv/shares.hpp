#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "fairdiv/rational.hpp"

namespace fairdiv {

struct SizeExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Proportional share: v(M)/n.
inline Rational prop_share(std::span<const Rational> values, int n) {
    Rational total = std::accumulate(values.begin(), values.end(), Rational(0));
    return total / n;
}

/// Truncated proportional share. Unrolls the recursion
///   TPS_n(v, M) = min(v(M)/n, TPS_{n-1}(v, M minus best)),  TPS_1(v, S) = v(S),
/// which is min over k of (value left after removing the k best goods)/(n-k),
/// and is 0 when there are fewer goods than agents.
inline Rational tps(std::span<const Rational> values, int n) {
    const int m = static_cast<int>(values.size());
    std::vector<Rational> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    Rational remaining = std::accumulate(sorted.begin(), sorted.end(), Rational(0));
    Rational best = remaining / n;
    for (int k = 1; k < n; ++k) {
        if (k > m) break;  // set ran out: TPS of the empty set is 0
        remaining -= sorted[k - 1];
        Rational candidate = remaining / (n - k);
        if (candidate < best) best = candidate;
    }
    if (m < n) return Rational(0);
    return best;
}

namespace detail {

// Exhaustive n-way partition search on integer values (descending), with
// bundle-symmetry pruning (an item may only open the next empty bundle),
// equal-load skipping, and an upper bound cut.
struct MmsSearch {
    const std::vector<Integer>& vals;
    std::vector<Integer> suffix;  // suffix[i] = vals[i] + ... + vals.back()
    int n;
    Integer best = -1;

    MmsSearch(const std::vector<Integer>& v, int bundles) : vals(v), n(bundles) {
        suffix.assign(vals.size() + 1, Integer(0));
        for (int i = static_cast<int>(vals.size()) - 1; i >= 0; --i)
            suffix[i] = suffix[i + 1] + vals[i];
    }

    void run(std::vector<Integer>& sums, int idx, int used) {
        const int m = static_cast<int>(vals.size());
        if (idx == m) {
            Integer mn = used < n ? Integer(0) : *std::min_element(sums.begin(), sums.end());
            if (mn > best) best = mn;
            return;
        }
        // No bundle can end below min(sums[b] + remaining); give up if even
        // that cannot beat the incumbent.
        Integer cap = sums[0] + suffix[idx];
        for (int b = 1; b < n; ++b) {
            Integer c = sums[b] + suffix[idx];
            if (c < cap) cap = c;
        }
        if (cap <= best) return;
        const int limit = used < n ? used + 1 : n;
        for (int b = 0; b < limit; ++b) {
            if (b > 0 && sums[b] == sums[b - 1]) continue;  // symmetric load
            sums[b] += vals[idx];
            run(sums, idx + 1, b == used ? used + 1 : used);
            sums[b] -= vals[idx];
        }
    }
};

// Two-bundle case: maximize an achievable subset sum that stays at most
// total/2 (the complement covers everything above). Branch and bound over
// descending values.
struct HalfSearch {
    const std::vector<Integer>& vals;
    std::vector<Integer> suffix;
    Integer target;  // floor-free: compare 2*sum against total
    Integer total;
    Integer best = 0;

    HalfSearch(const std::vector<Integer>& v, Integer tot) : vals(v), total(std::move(tot)) {
        suffix.assign(vals.size() + 1, Integer(0));
        for (int i = static_cast<int>(vals.size()) - 1; i >= 0; --i)
            suffix[i] = suffix[i + 1] + vals[i];
    }

    void run(const Integer& sum, int idx) {
        if (sum > best) best = sum;
        if (idx == static_cast<int>(vals.size())) return;
        if (2 * best == total) return;  // perfect split
        if (sum + suffix[idx] <= best) return;
        if (2 * (sum + vals[idx]) <= total) run(sum + vals[idx], idx + 1);
        run(sum, idx + 1);
    }
};

}  // namespace detail

constexpr int kMmsMaxAgents = 4;
constexpr int kMmsMaxGoods = 12;
constexpr int kMmsMaxGoodsTwoAgents = 24;

inline bool mms_oracle_feasible(int n, int m) {
    return (n <= kMmsMaxAgents && m <= kMmsMaxGoods) || (n == 2 && m <= kMmsMaxGoodsTwoAgents);
}

/// Exact maximin share by exhaustive search. Feasible only at desk scale
/// (n <= 4, m <= 12, or n == 2, m <= 24); throws SizeExceeded beyond that,
/// in which case callers should certify against the TPS instead.
inline Rational mms_oracle(std::span<const Rational> values, int n) {
    const int m = static_cast<int>(values.size());
    if (n < 1) throw SizeExceeded("mms oracle needs n >= 1");
    if (!mms_oracle_feasible(n, m))
        throw SizeExceeded("mms oracle limits: n <= 4 and m <= 12, or n == 2 and m <= 24");
    if (m < n) return Rational(0);

    // Work over a common denominator so the search runs on integers.
    Integer lcm = 1;
    for (const auto& v : values) lcm = boost::multiprecision::lcm(lcm, denominator(v));
    std::vector<Integer> scaled;
    scaled.reserve(m);
    for (const auto& v : values) {
        Integer s = numerator(v) * (lcm / denominator(v));
        if (s > 0) scaled.push_back(s);  // zero goods never change a bundle
    }
    if (static_cast<int>(scaled.size()) < n) return Rational(0);
    std::sort(scaled.begin(), scaled.end(), std::greater<>());

    if (n == 1) {
        Integer total = std::accumulate(scaled.begin(), scaled.end(), Integer(0));
        return Rational(total, lcm);
    }
    if (n == 2) {
        Integer total = std::accumulate(scaled.begin(), scaled.end(), Integer(0));
        detail::HalfSearch search(scaled, total);
        search.run(Integer(0), 0);
        return Rational(search.best, lcm);
    }
    detail::MmsSearch search(scaled, n);
    std::vector<Integer> sums(n, Integer(0));
    search.run(sums, 0, 0);
    return Rational(search.best, lcm);
}

/// Whether v(M minus S) >= (n - |S|) * TPS_n(v, M). Holds for every S with
/// |S| <= n; exposed so the property can be exercised directly.
inline bool tps_remainder_bound_holds(std::span<const Rational> values, int n,
                                      std::span<const int> removed) {
    std::vector<char> gone(values.size(), 0);
    for (int x : removed) gone[x] = 1;
    Rational rest = 0;
    for (std::size_t x = 0; x < values.size(); ++x)
        if (!gone[x]) rest += values[x];
    const int r = static_cast<int>(removed.size());
    return rest >= Rational(n - r) * tps(values, n);
}

/// Per-agent share summary; mms present only when the oracle ran.
struct ShareReport {
    Rational prop;
    Rational tps;
    std::optional<Rational> mms;
    int n = 0;
    int m = 0;
};

inline ShareReport share_report(std::span<const Rational> values, int n, bool with_mms) {
    ShareReport r;
    r.n = n;
    r.m = static_cast<int>(values.size());
    r.prop = prop_share(values, n);
    r.tps = tps(values, n);
    if (with_mms) r.mms = mms_oracle(values, n);
    return r;
}

}  // namespace fairdiv
