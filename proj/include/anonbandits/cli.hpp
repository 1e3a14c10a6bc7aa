#pragma once

// CLI entry point (kept in a header so the test binary can drive it directly).
// Subcommands: run, validate-decomp, gen-instance.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "anonbandits/decomp.hpp"
#include "anonbandits/harness.hpp"

namespace anonbandits {

namespace detail {

inline std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline std::string resolve_out_path(const std::string& out) {
    namespace fs = std::filesystem;
    if (out.size() >= 4 && out.substr(out.size() - 4) == ".csv") {
        fs::path p(out);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        return out;
    }
    fs::create_directories(out);
    return (fs::path(out) / "regret.csv").string();
}

}  // namespace detail

inline int cli_main(const std::vector<std::string>& args, std::ostream& os = std::cout,
                    std::ostream& err = std::cerr) {
    CLI::App app{"anonbandits: anonymous multi-armed bandit simulations"};
    app.require_subcommand(1);

    // --- run ---
    auto* run = app.add_subcommand("run", "run an experiment and emit regret CSVs");
    std::string instance = "uniform";
    std::string algos_csv = "etc,alg1-greedy,alg1-random,alg1-lp,ucb";
    std::string out = "out";
    std::string scale = "full";
    int reps = 20;
    std::uint64_t seed = 0;
    int n = 50, k = 5, c = 4, dim = 5, cluster = 0;
    long long t = 100000, stride = 100;
    double gap = 0.2;
    double gamma_const = Alg1Config{}.gamma_const;
    std::string config_path;
    run->add_option("--config", config_path, "flat key=value config file, keys match flag names");
    run->add_option("--instance", instance,
                    "instance kind (uniform|linear|clustered) or fixture file path");
    run->add_option("--algos", algos_csv, "comma-separated algorithm list");
    run->add_option("--reps", reps, "replications");
    run->add_option("--seed", seed, "root seed");
    run->add_option("--out", out, "output csv path or directory");
    run->add_option("--scale", scale, "full, or ci (T=2e4, 5 reps)")
        ->check(CLI::IsMember({"full", "ci"}));
    run->add_option("--n", n, "users");
    run->add_option("--k", k, "arms");
    run->add_option("--c", c, "anonymity level");
    run->add_option("--t", t, "horizon");
    run->add_option("--dim", dim, "latent dimension (linear)");
    run->add_option("--u", cluster, "cluster size (clustered; 0 = n/k)");
    run->add_option("--gap", gap, "cluster gap (clustered)");
    run->add_option("--stride", stride, "trace thinning stride");
    run->add_option("--gamma-const", gamma_const, "elimination constant for alg1 variants");

    // --- validate-decomp ---
    auto* vd = app.add_subcommand("validate-decomp",
                                  "check a decomposition against a batched graph");
    std::string graph_path, decomp_path;
    int vd_c = 0;
    vd->add_option("--graph", graph_path, "batched graph fixture")->required();
    vd->add_option("--decomp", decomp_path, "assignment-list fixture")->required();
    vd->add_option("--c", vd_c, "anonymity level")->required();

    // --- gen-instance ---
    auto* gi = app.add_subcommand("gen-instance", "write an instance fixture");
    std::string gi_kind = "uniform", gi_out;
    int gi_n = 50, gi_k = 5, gi_c = 4, gi_dim = 5, gi_u = 0;
    long long gi_t = 100000;
    double gi_gap = 0.2;
    std::uint64_t gi_seed = 0;
    gi->add_option("--kind", gi_kind, "uniform|linear|clustered")
        ->check(CLI::IsMember({"uniform", "linear", "clustered"}));
    gi->add_option("--n", gi_n);
    gi->add_option("--k", gi_k);
    gi->add_option("--c", gi_c);
    gi->add_option("--t", gi_t);
    gi->add_option("--dim", gi_dim);
    gi->add_option("--u", gi_u);
    gi->add_option("--gap", gi_gap);
    gi->add_option("--seed", gi_seed);
    gi->add_option("--out", gi_out, "output path")->required();

    std::vector<std::string> argv_copy = args;
    try {
        // CLI11's vector overload consumes arguments in reverse order.
        std::reverse(argv_copy.begin(), argv_copy.end());
        app.parse(argv_copy);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    // CLI11 2.4 only honours set_config on the top-level app, so flat
    // run-config files are applied by hand; explicit flags take precedence.
    if (run->parsed() && !config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) {
            err << "cannot open config file: " << config_path << '\n';
            return 2;
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::map<std::string, std::function<void(const std::string&)>> setters = {
            {"instance", [&](const std::string& v) { instance = v; }},
            {"algos", [&](const std::string& v) { algos_csv = v; }},
            {"reps", [&](const std::string& v) { reps = std::stoi(v); }},
            {"seed", [&](const std::string& v) { seed = std::stoull(v); }},
            {"out", [&](const std::string& v) { out = v; }},
            {"scale", [&](const std::string& v) { scale = v; }},
            {"n", [&](const std::string& v) { n = std::stoi(v); }},
            {"k", [&](const std::string& v) { k = std::stoi(v); }},
            {"c", [&](const std::string& v) { c = std::stoi(v); }},
            {"t", [&](const std::string& v) { t = std::stoll(v); }},
            {"dim", [&](const std::string& v) { dim = std::stoi(v); }},
            {"u", [&](const std::string& v) { cluster = std::stoi(v); }},
            {"gap", [&](const std::string& v) { gap = std::stod(v); }},
            {"stride", [&](const std::string& v) { stride = std::stoll(v); }},
            {"gamma-const", [&](const std::string& v) { gamma_const = std::stod(v); }},
        };
        std::string line;
        while (std::getline(f, line)) {
            line = trim(line);
            if (line.empty() || line[0] == '#') continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                err << "bad config line: " << line << '\n';
                return 2;
            }
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            const auto it = setters.find(key);
            if (it == setters.end()) {
                err << "unknown config key: " << key << '\n';
                return 2;
            }
            if (run->count("--" + key) == 0) it->second(value);
        }
        if (scale != "full" && scale != "ci") {
            err << "--scale: " << scale << " not in {full,ci}\n";
            return 2;
        }
    }

    try {
        if (run->parsed()) {
            ExperimentConfig cfg;
            for (const auto& name : detail::split_csv(algos_csv)) {
                try {
                    cfg.algorithms.push_back(algo_from_string(name));
                } catch (const std::invalid_argument& e) {
                    err << e.what() << '\n';
                    return 2;
                }
            }
            if (cfg.algorithms.empty()) {
                err << "no algorithms given; valid:";
                for (const auto& a : algo_names()) err << ' ' << a;
                err << '\n';
                return 2;
            }
            InstanceSpec spec;
            try {
                spec.kind = generator_from_string(instance);
            } catch (const std::invalid_argument&) {
                if (!std::filesystem::exists(instance)) {
                    err << "'" << instance
                        << "' is neither an instance kind (uniform|linear|clustered) nor a "
                           "file\n";
                    return 2;
                }
                spec.kind = GeneratorKind::File;
                spec.path = instance;
            }
            spec.n_users = n;
            spec.n_arms = k;
            spec.anonymity = c;
            spec.horizon = t;
            spec.dim = dim;
            spec.cluster_size = cluster;
            spec.gap = gap;
            cfg.instance = spec;
            cfg.replications = reps;
            cfg.root_seed = seed;
            cfg.stride = stride;
            cfg.alg1.gamma_const = gamma_const;
            if (scale == "ci") {
                cfg.replications = 5;
                cfg.horizon_override = 20000;
                if (spec.kind != GeneratorKind::File) cfg.instance.horizon = 20000;
            }
            cfg.output_path = detail::resolve_out_path(out);

            AggregateResult result = run_experiment(cfg);
            emit_csv(result, cfg.output_path);
            os << "algorithm mean_final_regret ci_half_width completed\n";
            for (std::size_t a = 0; a < result.algorithms.size(); ++a)
                os << to_string(result.algorithms[a]) << ' ' << result.final_mean[a] << ' '
                   << result.final_ci_half[a] << ' ' << result.completed[a] << '\n';
            for (const auto& fail : result.failures)
                err << to_string(fail.algo) << " rep " << fail.replication << ": "
                    << fail.message << '\n';
            return result.failures.empty() ? 0 : 1;
        }

        if (vd->parsed()) {
            std::ifstream gf(graph_path);
            if (!gf) throw IoFailure("cannot read " + graph_path);
            BatchedGraph graph = read_batched_graph(gf);
            std::ifstream df(decomp_path);
            if (!df) throw IoFailure("cannot read " + decomp_path);
            Decomposition decomp;
            decomp.assignments = read_assignments(df);
            ValidityReport report = validate_decomposition(graph, vd_c, decomp);
            os << "valid: " << (report.valid ? "yes" : "no") << '\n';
            for (const auto& s : report.shortfalls)
                os << "shortfall user=" << s.user + 1 << " arm=" << s.arm + 1
                   << " have=" << s.have << " need=" << s.need << '\n';
            for (const auto& [idx, user] : report.zero_demand_violations)
                os << "zero-demand assignment=" << idx + 1 << " user=" << user + 1 << '\n';
            return report.valid ? 0 : 1;
        }

        if (gi->parsed()) {
            InstanceSpec spec;
            spec.kind = generator_from_string(gi_kind);
            spec.n_users = gi_n;
            spec.n_arms = gi_k;
            spec.anonymity = gi_c;
            spec.horizon = gi_t;
            spec.dim = gi_dim;
            spec.cluster_size = gi_u;
            spec.gap = gi_gap;
            Instance inst = spec.realize(gi_seed);
            namespace fs = std::filesystem;
            fs::path p(gi_out);
            if (p.has_parent_path()) fs::create_directories(p.parent_path());
            write_instance(inst, gi_out);
            os << "wrote " << gi_out << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

inline int cli_main(int argc, char** argv) {
    return cli_main(std::vector<std::string>(argv + 1, argv + argc));
}

}  // namespace anonbandits
