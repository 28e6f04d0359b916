// Command-line front end: JSON in, JSON out, exact rationals end to end.
// Exit codes: 0 success (and certification passed), 1 certification or audit
// failure (witness on stdout), 2 usage or parse errors.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fairdiv/harness.hpp"

namespace {

using nlohmann::json;
using namespace fairdiv;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void emit(const json& j, bool pretty, const std::string& output_path) {
    const std::string text = pretty ? j.dump(2) : j.dump();
    if (output_path.empty()) {
        std::cout << text << "\n";
        return;
    }
    std::string path = output_path;
    const char* out_dir = std::getenv("FAIRDIV_OUT_DIR");
    if (out_dir && *out_dir && path.front() != '/') path = std::string(out_dir) + "/" + path;
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    out << text << "\n";
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            std::size_t used = 0;
            const int value = std::stoi(part, &used);
            if (used != part.size()) throw ParseError("bad integer '" + part + "'");
            out.push_back(value);
        } catch (const std::logic_error&) {
            throw ParseError("bad integer '" + part + "' in list");
        }
    }
    return out;
}

AgentOrdering parse_pi(const std::string& text, int n) {
    std::vector<AgentId> order = parse_int_list(text);
    if (static_cast<int>(order.size()) != n)
        throw ParseError("--pi must list every agent exactly once");
    return AgentOrdering(std::move(order));
}

json fractional_to_json(const FractionalAllocation& f) {
    json rows = json::array();
    for (int i = 0; i < f.n; ++i) {
        json row = json::array();
        for (int x = 0; x < f.m; ++x) row.push_back(to_string(f.f[i][x]));
        rows.push_back(row);
    }
    return rows;
}

json certification_to_json(const CertifyReport& report, const DistributionalAllocation& dist,
                           const Instance& inst) {
    json cert;
    cert["pass"] = report.pass;
    cert["rho"] = to_string(report.rho);
    cert["basis"] = report.basis == ShareBasis::Tps ? "tps" : "mms";
    json shares = json::array();
    for (const auto& s : report.shares) shares.push_back(to_string(s));
    cert["shares"] = shares;
    json allocations = json::array();
    for (const auto& e : dist.entries()) {
        json entry;
        entry["prob"] = to_string(e.prob);
        json values = json::array();
        for (AgentId i = 0; i < inst.agents(); ++i)
            values.push_back(to_string(inst.bundle_value(i, e.allocation.bundles[i])));
        entry["values"] = values;
        allocations.push_back(entry);
    }
    cert["allocations"] = allocations;
    if (report.min_ratio) cert["min_ratio"] = to_string(*report.min_ratio);
    if (!report.violations.empty()) {
        json witnesses = json::array();
        for (const auto& w : report.violations) {
            json witness;
            witness["allocation"] = w.entry;
            witness["agent"] = w.agent;
            witness["value"] = to_string(w.bundle_value);
            witness["required"] = to_string(w.required);
            witnesses.push_back(witness);
        }
        cert["violations"] = witnesses;
    }
    return cert;
}

struct MechanismFlags {
    std::string name;
    std::string alpha;
    std::string pi;
    std::string threshold_override;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool alpha_set = false;
    bool pi_set = false;
    bool threshold_set = false;
};

void check_flag_consistency(const MechanismFlags& flags) {
    auto reject = [&](const std::string& flag, const std::string& allowed) {
        throw ParseError(flag + " is only meaningful with --mechanism " + allowed);
    };
    if (flags.alpha_set && flags.name != "public-deficiency" && flags.name != "general-weight")
        reject("--alpha", "public-deficiency|general-weight");
    if (flags.seed_set && flags.name != "loglog") reject("--seed", "loglog");
    if (flags.threshold_set && flags.name != "loglog") reject("--threshold-override", "loglog");
    if (flags.pi_set && flags.name != "logn" && flags.name != "general-weight")
        reject("--pi", "logn|general-weight");
}

MechanismResult run_mechanism(const Instance& inst, const MechanismFlags& flags) {
    check_flag_consistency(flags);
    const int n = inst.agents();
    if (flags.name == "logn") {
        std::optional<AgentOrdering> pi;
        if (flags.pi_set) pi = parse_pi(flags.pi, n);
        return mechanism_logn(inst, pi);
    }
    if (flags.name == "public-deficiency") {
        const Rational alpha = flags.alpha_set ? parse_rational(flags.alpha) : Rational(1, 4);
        return mechanism_public_deficiency(inst, alpha);
    }
    if (flags.name == "general-weight") {
        const Rational alpha = flags.alpha_set ? parse_rational(flags.alpha) : Rational(1, 4);
        const AgentOrdering pi =
            flags.pi_set ? parse_pi(flags.pi, n) : AgentOrdering::identity(n);
        return general_weight_mechanism(inst, pi, alpha);
    }
    if (flags.name == "loglog") {
        std::optional<Rational> threshold;
        if (flags.threshold_set) threshold = parse_rational(flags.threshold_override);
        return mechanism_loglog(inst, flags.seed, threshold);
    }
    if (flags.name == "two-agent") return mechanism_two_agents(inst);
    if (flags.name == "uniform") return uniform_mechanism(inst);
    throw ParseError("unknown mechanism '" + flags.name + "'");
}

json result_header(const MechanismResult& result) {
    json j;
    j["mechanism"] = result.mechanism;
    j["rho"] = to_string(result.rho);
    j["basis"] = result.basis == ShareBasis::Tps ? "tps" : "mms";
    if (result.alpha) j["alpha"] = to_string(*result.alpha);
    if (result.seed) j["seed"] = *result.seed;
    if (result.branch) j["branch"] = *result.branch == Branch::Good ? "good" : "fallback";
    if (result.epsilon_bound) j["epsilon_bound"] = to_string(*result.epsilon_bound);
    if (result.pi) j["pi"] = result.pi->order();
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact-arithmetic engine and audit harness for truthful fair allocation"};
    app.require_subcommand(1);

    std::string instance_path, dist_path, output_path;
    bool pretty = false, with_mms = false;
    MechanismFlags flags;
    std::string rho_text = "0", basis_text = "tps", deficiencies_text;
    int agent = -1, stats_n = 0;
    long trials = 10000;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_flag("--pretty", pretty, "indent JSON output");
        cmd->add_option("-o,--output", output_path,
                        "write to file (FAIRDIV_OUT_DIR prefixes relative paths)");
    };
    auto add_mechanism_flags = [&](CLI::App* cmd, bool mechanism_required) {
        auto* opt = cmd->add_option("--mechanism", flags.name,
                                    "logn|public-deficiency|loglog|two-agent|general-weight|uniform");
        if (mechanism_required) opt->required();
        cmd->add_option("--alpha", flags.alpha, "share fraction p/q (deficiency mechanisms)")
            ->each([&](const std::string&) { flags.alpha_set = true; });
        cmd->add_option("--pi", flags.pi, "comma-separated agent ordering")
            ->each([&](const std::string&) { flags.pi_set = true; });
        cmd->add_option("--seed", flags.seed, "random seed (loglog)")
            ->each([&](const std::string&) { flags.seed_set = true; });
        cmd->add_option("--threshold-override", flags.threshold_override,
                        "test-only weight threshold p/q forcing the loglog fallback")
            ->each([&](const std::string&) { flags.threshold_set = true; });
    };

    auto* shares_cmd = app.add_subcommand("shares", "per-agent PROP/TPS (and MMS) report");
    shares_cmd->add_option("instance", instance_path)->required();
    shares_cmd->add_flag("--mms", with_mms, "also run the exact MMS oracle");
    add_common(shares_cmd);

    auto* cuq_cmd = app.add_subcommand("cuq", "cyclic-unit-quota fractional allocation");
    cuq_cmd->add_option("instance", instance_path)->required();
    cuq_cmd->add_option("--pi", flags.pi)->each([&](const std::string&) { flags.pi_set = true; });
    add_common(cuq_cmd);

    auto* round_cmd = app.add_subcommand("round", "mechanism distribution, JSON only");
    round_cmd->add_option("instance", instance_path)->required();
    add_mechanism_flags(round_cmd, true);
    add_common(round_cmd);

    auto* run_cmd = app.add_subcommand("run", "mechanism distribution plus certification");
    run_cmd->add_option("instance", instance_path)->required();
    add_mechanism_flags(run_cmd, true);
    add_common(run_cmd);

    auto* certify_cmd = app.add_subcommand("certify", "check a distribution against rho * share");
    certify_cmd->add_option("distribution", dist_path)->required();
    certify_cmd->add_option("instance", instance_path)->required();
    certify_cmd->add_option("--rho", rho_text)->required();
    certify_cmd->add_option("--basis", basis_text, "tps|mms");
    add_common(certify_cmd);

    auto* audit_cmd = app.add_subcommand("audit", "exhaustive truthfulness audit");
    audit_cmd->add_option("instance", instance_path)->required();
    add_mechanism_flags(audit_cmd, true);
    audit_cmd->add_option("--agent", agent, "audit one agent (default: all)");
    add_common(audit_cmd);

    auto* corpus_cmd = app.add_subcommand("corpus", "adversarial instance corpus");
    add_common(corpus_cmd);

    auto* weights_cmd = app.add_subcommand("weights", "Monte-Carlo ordering-weight statistics");
    weights_cmd->add_option("--n", stats_n)->required();
    weights_cmd->add_option("--deficiencies", deficiencies_text, "comma-separated d_i")->required();
    weights_cmd->add_option("--trials", trials);
    weights_cmd->add_option("--seed", flags.seed);
    add_common(weights_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (shares_cmd->parsed()) {
            const Instance inst = load_instance(read_file(instance_path));
            json out = json::array();
            for (AgentId i = 0; i < inst.agents(); ++i) {
                const ShareReport r = share_report(inst.valuation(i), inst.agents(), with_mms);
                json one;
                one["agent"] = i;
                one["prop"] = to_string(r.prop);
                one["tps"] = to_string(r.tps);
                if (r.mms) one["mms"] = to_string(*r.mms);
                one["n"] = r.n;
                one["m"] = r.m;
                out.push_back(one);
            }
            emit(out, pretty, output_path);
            return kExitOk;
        }
        if (cuq_cmd->parsed()) {
            const Instance inst = load_instance(read_file(instance_path));
            const AgentOrdering pi = flags.pi_set ? parse_pi(flags.pi, inst.agents())
                                                  : AgentOrdering::identity(inst.agents());
            json out;
            out["pi"] = pi.order();
            out["matrix"] = fractional_to_json(cuq_fractional(derive_orders(inst), pi));
            emit(out, pretty, output_path);
            return kExitOk;
        }
        if (round_cmd->parsed()) {
            const Instance inst = load_instance(read_file(instance_path));
            const MechanismResult result = run_mechanism(inst, flags);
            emit(distribution_to_json(result.distribution), pretty, output_path);
            return kExitOk;
        }
        if (run_cmd->parsed()) {
            const Instance inst = load_instance(read_file(instance_path));
            const MechanismResult result = run_mechanism(inst, flags);
            const CertifyReport cert =
                certify_expost(result.distribution, inst, result.rho, result.basis);
            json out = result_header(result);
            out["distribution"] = distribution_to_json(result.distribution);
            out["certification"] = certification_to_json(cert, result.distribution, inst);
            const bool induces = induced_fractional(result.distribution) == result.induced_target;
            out["induces_target"] = induces;
            emit(out, pretty, output_path);
            return cert.pass && induces ? kExitOk : kExitCheckFailed;
        }
        if (certify_cmd->parsed()) {
            const Instance inst = load_instance(read_file(instance_path));
            const DistributionalAllocation dist =
                load_distribution(read_file(dist_path), inst.agents(), inst.goods());
            if (basis_text != "tps" && basis_text != "mms")
                throw ParseError("--basis must be tps or mms");
            const ShareBasis basis = basis_text == "tps" ? ShareBasis::Tps : ShareBasis::Mms;
            const CertifyReport cert =
                certify_expost(dist, inst, parse_rational(rho_text), basis);
            emit(certification_to_json(cert, dist, inst), pretty, output_path);
            return cert.pass ? kExitOk : kExitCheckFailed;
        }
        if (audit_cmd->parsed()) {
            const Instance inst = load_instance(read_file(instance_path));
            check_flag_consistency(flags);
            AuditOptions opts;
            if (flags.pi_set) opts.pi = parse_pi(flags.pi, inst.agents());
            if (flags.alpha_set) opts.alpha = parse_rational(flags.alpha);
            opts.seed = flags.seed;
            if (flags.threshold_set)
                opts.threshold_override = parse_rational(flags.threshold_override);
            json out = json::array();
            bool all_hold = true;
            for (AgentId i = 0; i < inst.agents(); ++i) {
                if (agent >= 0 && i != agent) continue;
                const AuditReport r = audit_tie(flags.name, inst, i, opts);
                json one;
                one["agent"] = i;
                one["mechanism"] = r.mechanism;
                one["space"] = r.deviation_space;
                one["truthful"] = to_string(r.truthful_value);
                one["best_deviation"] = to_string(r.best_deviation_value);
                one["deviations"] = r.deviations_checked;
                switch (r.verdict) {
                    case AuditVerdict::TieHolds: one["verdict"] = "tie-holds"; break;
                    case AuditVerdict::WithinEpsilon: one["verdict"] = "within-epsilon"; break;
                    case AuditVerdict::Violated:
                        one["verdict"] = "violated";
                        all_hold = false;
                        break;
                }
                if (r.witness) one["witness"] = *r.witness;
                if (r.epsilon_bound) one["epsilon_bound"] = to_string(*r.epsilon_bound);
                out.push_back(one);
            }
            emit(out, pretty, output_path);
            return all_hold ? kExitOk : kExitCheckFailed;
        }
        if (corpus_cmd->parsed()) {
            json out = json::array();
            for (const auto& named : adversarial_corpus()) {
                json one;
                one["name"] = named.name;
                one["instance"] = instance_to_json(named.instance);
                out.push_back(one);
            }
            emit(out, pretty, output_path);
            return kExitOk;
        }
        if (weights_cmd->parsed()) {
            const std::vector<int> d = parse_int_list(deficiencies_text);
            if (static_cast<int>(d.size()) != stats_n)
                throw ParseError("--deficiencies must list exactly n values");
            const WeightStats stats = weight_statistics(stats_n, d, trials, flags.seed);
            json out;
            out["n"] = stats.n;
            out["trials"] = stats.trials;
            out["closed_form_mean"] = to_string(stats.closed_form_mean);
            out["empirical_mean"] = to_string(stats.empirical_mean);
            out["empirical_stddev"] = stats.empirical_stddev;  // float summary
            out["max_cyclic_weight"] = to_string(stats.max_cyclic_weight);
            out["harmonic_bound"] = to_string(stats.harmonic_bound);
            out["threshold"] = to_string(stats.threshold);
            out["exceed_fraction"] = stats.exceed_fraction;
            emit(out, pretty, output_path);
            return kExitOk;
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const SizeExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const SpaceTooLarge& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const AlphaTooLarge& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const WrongAgentCount& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
