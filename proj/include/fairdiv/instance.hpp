#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fairdiv/rational.hpp"

namespace fairdiv {

using AgentId = int;
using GoodId = int;

/// An allocation problem: n agents with additive non-negative valuations over
/// m goods. Goods and agents are identified by 0-based index; optional names
/// are labels only. Immutable after construction.
class Instance {
public:
    Instance(std::vector<std::vector<Rational>> values,
             std::vector<std::string> agent_names = {},
             std::vector<std::string> good_names = {})
        : values_(std::move(values)),
          agent_names_(std::move(agent_names)),
          good_names_(std::move(good_names)) {
        if (values_.empty()) throw ParseError("instance needs at least one agent");
        const std::size_t m = values_[0].size();
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (values_[i].size() != m)
                throw ParseError("agent " + std::to_string(i) + " has wrong value count");
            for (std::size_t x = 0; x < m; ++x)
                if (values_[i][x] < 0)
                    throw ParseError("negative value for agent " + std::to_string(i) +
                                     ", good " + std::to_string(x));
        }
    }

    int agents() const { return static_cast<int>(values_.size()); }
    int goods() const { return static_cast<int>(values_[0].size()); }

    const Rational& value(AgentId i, GoodId x) const { return values_[i][x]; }
    const std::vector<Rational>& valuation(AgentId i) const { return values_[i]; }

    Rational bundle_value(AgentId i, std::span<const GoodId> bundle) const {
        Rational v = 0;
        for (GoodId x : bundle) v += values_[i][x];
        return v;
    }

    Rational total_value(AgentId i) const {
        return std::accumulate(values_[i].begin(), values_[i].end(), Rational(0));
    }

    const std::vector<std::string>& agent_names() const { return agent_names_; }
    const std::vector<std::string>& good_names() const { return good_names_; }

private:
    std::vector<std::vector<Rational>> values_;
    std::vector<std::string> agent_names_;
    std::vector<std::string> good_names_;
};

/// A strict total order over goods, best first, as one agent reports it.
/// When derived from a valuation, ties break by ascending good index.
class StrictOrder {
public:
    explicit StrictOrder(std::vector<GoodId> ranking) : ranked_(std::move(ranking)) {
        const int m = static_cast<int>(ranked_.size());
        rank_.assign(m, -1);
        for (int r = 0; r < m; ++r) {
            GoodId x = ranked_[r];
            if (x < 0 || x >= m || rank_[x] != -1)
                throw ParseError("ranking is not a permutation of goods");
            rank_[x] = r;
        }
    }

    static StrictOrder from_values(std::span<const Rational> values) {
        std::vector<GoodId> ranking(values.size());
        std::iota(ranking.begin(), ranking.end(), 0);
        std::stable_sort(ranking.begin(), ranking.end(), [&](GoodId a, GoodId b) {
            return values[a] > values[b];  // equal values keep index order
        });
        return StrictOrder(std::move(ranking));
    }

    int goods() const { return static_cast<int>(ranked_.size()); }
    GoodId at_rank(int r) const { return ranked_[r]; }
    int rank_of(GoodId x) const { return rank_[x]; }
    const std::vector<GoodId>& ranking() const { return ranked_; }

    bool consistent_with(std::span<const Rational> values) const {
        for (std::size_t r = 0; r + 1 < ranked_.size(); ++r)
            if (values[ranked_[r]] < values[ranked_[r + 1]]) return false;
        return true;
    }

    friend bool operator==(const StrictOrder&, const StrictOrder&) = default;

private:
    std::vector<GoodId> ranked_;
    std::vector<int> rank_;
};

using OrderProfile = std::vector<StrictOrder>;

inline OrderProfile derive_orders(const Instance& inst) {
    OrderProfile orders;
    orders.reserve(inst.agents());
    for (AgentId i = 0; i < inst.agents(); ++i)
        orders.push_back(StrictOrder::from_values(inst.valuation(i)));
    return orders;
}

/// A permutation of the agents: position(i) is where agent i picks (0-based),
/// agent_at(k) is the agent in the k-th position.
class AgentOrdering {
public:
    explicit AgentOrdering(std::vector<AgentId> order) : order_(std::move(order)) {
        const int n = static_cast<int>(order_.size());
        position_.assign(n, -1);
        for (int k = 0; k < n; ++k) {
            AgentId i = order_[k];
            if (i < 0 || i >= n || position_[i] != -1)
                throw ParseError("agent ordering is not a permutation");
            position_[i] = k;
        }
    }

    static AgentOrdering identity(int n) {
        std::vector<AgentId> order(n);
        std::iota(order.begin(), order.end(), 0);
        return AgentOrdering(std::move(order));
    }

    int agents() const { return static_cast<int>(order_.size()); }
    AgentId agent_at(int position) const { return order_[position]; }
    int position(AgentId i) const { return position_[i]; }
    const std::vector<AgentId>& order() const { return order_; }

    /// Cyclic shift by s: the agent at position s becomes first. shift(0) is
    /// the identity transformation.
    AgentOrdering cyclic_shift(int s) const {
        const int n = agents();
        std::vector<AgentId> shifted(n);
        for (int k = 0; k < n; ++k) shifted[k] = order_[(k + s) % n];
        return AgentOrdering(std::move(shifted));
    }

    friend bool operator==(const AgentOrdering&, const AgentOrdering&) = default;

private:
    std::vector<AgentId> order_;
    std::vector<int> position_;
};

// ---------------------------------------------------------------------------
// JSON instance format:
//   {"agents":[{"name"?:string,"values":[rational-string,...]},...],
//    "goods"?:[string,...]}

inline Instance instance_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("agents") || !j["agents"].is_array() ||
        j["agents"].empty())
        throw ParseError("instance JSON needs a non-empty 'agents' array");
    std::vector<std::vector<Rational>> values;
    std::vector<std::string> agent_names;
    bool any_name = false;
    for (std::size_t i = 0; i < j["agents"].size(); ++i) {
        const auto& a = j["agents"][i];
        if (!a.is_object() || !a.contains("values") || !a["values"].is_array())
            throw ParseError("agent " + std::to_string(i) + " needs a 'values' array");
        std::vector<Rational> row;
        row.reserve(a["values"].size());
        for (std::size_t x = 0; x < a["values"].size(); ++x) {
            const auto& v = a["values"][x];
            if (!v.is_string())
                throw ParseError("agent " + std::to_string(i) + ", value " +
                                 std::to_string(x) + ": not a rational string");
            try {
                row.push_back(parse_rational(v.get<std::string>()));
            } catch (const ParseError& e) {
                throw ParseError("agent " + std::to_string(i) + ", value " + std::to_string(x) +
                                 ": " + e.what());
            }
        }
        values.push_back(std::move(row));
        if (a.contains("name")) {
            any_name = true;
            agent_names.resize(j["agents"].size());
            agent_names[i] = a["name"].get<std::string>();
        }
    }
    std::vector<std::string> good_names;
    if (j.contains("goods")) {
        if (!j["goods"].is_array()) throw ParseError("'goods' must be an array of names");
        for (const auto& g : j["goods"]) good_names.push_back(g.get<std::string>());
        if (static_cast<int>(good_names.size()) != static_cast<int>(values[0].size()))
            throw ParseError("'goods' length does not match value rows");
    }
    if (!any_name) agent_names.clear();
    return Instance(std::move(values), std::move(agent_names), std::move(good_names));
}

inline Instance load_instance(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("instance JSON: ") + e.what());
    }
    return instance_from_json(j);
}

inline nlohmann::json instance_to_json(const Instance& inst) {
    nlohmann::json agents = nlohmann::json::array();
    for (AgentId i = 0; i < inst.agents(); ++i) {
        nlohmann::json a;
        if (!inst.agent_names().empty() && !inst.agent_names()[i].empty())
            a["name"] = inst.agent_names()[i];
        nlohmann::json vals = nlohmann::json::array();
        for (GoodId x = 0; x < inst.goods(); ++x) vals.push_back(to_string(inst.value(i, x)));
        a["values"] = vals;
        agents.push_back(a);
    }
    nlohmann::json j;
    j["agents"] = agents;
    if (!inst.good_names().empty()) j["goods"] = inst.good_names();
    return j;
}

inline std::string save_instance(const Instance& inst, bool pretty = false) {
    return pretty ? instance_to_json(inst).dump(2) : instance_to_json(inst).dump();
}

}  // namespace fairdiv
