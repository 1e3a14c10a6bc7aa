#pragma once

// Experiment orchestration: seeded replications, mean regret curves with 95%
// confidence intervals, CSV emission. One AggregateResult per experiment.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "anonbandits/env.hpp"
#include "anonbandits/errors.hpp"
#include "anonbandits/learners.hpp"
#include "anonbandits/rng.hpp"

namespace anonbandits {

enum class AlgoId { Etc, Alg1Greedy, Alg1Random, Alg1Lp, Ucb };

inline const std::vector<std::string>& algo_names() {
    static const std::vector<std::string> names = {"etc", "alg1-greedy", "alg1-random",
                                                   "alg1-lp", "ucb"};
    return names;
}

inline std::string to_string(AlgoId a) {
    switch (a) {
        case AlgoId::Etc: return "etc";
        case AlgoId::Alg1Greedy: return "alg1-greedy";
        case AlgoId::Alg1Random: return "alg1-random";
        case AlgoId::Alg1Lp: return "alg1-lp";
        case AlgoId::Ucb: return "ucb";
    }
    throw std::invalid_argument("bad AlgoId");
}

inline AlgoId algo_from_string(const std::string& s) {
    if (s == "etc") return AlgoId::Etc;
    if (s == "alg1-greedy") return AlgoId::Alg1Greedy;
    if (s == "alg1-random") return AlgoId::Alg1Random;
    if (s == "alg1-lp") return AlgoId::Alg1Lp;
    if (s == "ucb") return AlgoId::Ucb;
    std::string msg = "unknown algorithm '" + s + "'; valid:";
    for (const auto& n : algo_names()) msg += " " + n;
    throw std::invalid_argument(msg);
}

enum class GeneratorKind { Uniform, Linear, Clustered, File };

inline std::string to_string(GeneratorKind g) {
    switch (g) {
        case GeneratorKind::Uniform: return "uniform";
        case GeneratorKind::Linear: return "linear";
        case GeneratorKind::Clustered: return "clustered";
        case GeneratorKind::File: return "file";
    }
    throw std::invalid_argument("bad GeneratorKind");
}

inline GeneratorKind generator_from_string(const std::string& s) {
    if (s == "uniform") return GeneratorKind::Uniform;
    if (s == "linear") return GeneratorKind::Linear;
    if (s == "clustered") return GeneratorKind::Clustered;
    if (s == "file") return GeneratorKind::File;
    throw std::invalid_argument("unknown instance kind '" + s +
                                "'; valid: uniform linear clustered file");
}

/// Generator kind + parameters. Generator kinds re-sample means per
/// replication; File loads a fixed fixture (seed ignored).
struct InstanceSpec {
    GeneratorKind kind = GeneratorKind::Uniform;
    int n_users = 50;
    int n_arms = 5;
    int anonymity = 4;
    long long horizon = 100000;
    int dim = 5;           // linear only
    int cluster_size = 0;  // clustered only; 0 -> n_users / n_arms
    double gap = 0.2;      // clustered only
    std::string path;      // file only

    Instance realize(std::uint64_t seed) const {
        switch (kind) {
            case GeneratorKind::Uniform:
                return gen_uniform_instance(n_users, n_arms, anonymity, horizon, seed);
            case GeneratorKind::Linear:
                return gen_linear_instance(n_users, n_arms, anonymity, horizon, dim, seed);
            case GeneratorKind::Clustered: {
                int u = cluster_size > 0 ? cluster_size : n_users / n_arms;
                return gen_clustered_instance(n_users, n_arms, anonymity, horizon, u, gap,
                                              seed);
            }
            case GeneratorKind::File: return read_instance(path);
        }
        throw std::invalid_argument("bad GeneratorKind");
    }
};

struct ExperimentConfig {
    InstanceSpec instance;
    std::vector<AlgoId> algorithms;
    int replications = 20;
    std::uint64_t root_seed = 0;
    std::string output_path;       // csv path; empty = no file emission by caller
    long long stride = 100;        // trace thinning for csv rows
    long long horizon_override = 0;  // >0 forces T after realize (CI-scale runs)
    Alg1Config alg1;               // shared hyperparameters for the alg1-* variants

    void validate() const {
        if (replications < 1) throw std::invalid_argument("replications must be >= 1");
        if (algorithms.empty()) throw std::invalid_argument("algorithm list is empty");
        if (stride < 1) throw std::invalid_argument("stride must be >= 1");
    }
};

struct RunFailure {
    AlgoId algo;
    int replication = 0;
    std::string message;
};

/// Curves are indexed in the same order as `algorithms`; each has length
/// `horizon`. Aggregates are over the replications that completed.
struct AggregateResult {
    std::vector<AlgoId> algorithms;
    long long horizon = 0;
    long long stride = 1;
    int replications = 0;
    std::vector<std::vector<double>> mean_curve;     // [algo][round]
    std::vector<std::vector<double>> ci_half_curve;  // [algo][round]
    std::vector<double> final_mean;                  // [algo]
    std::vector<double> final_ci_half;               // [algo]
    std::vector<int> completed;                      // successful reps per algo
    std::vector<RunFailure> failures;
};

namespace detail {

inline RegretTrace dispatch_run(AlgoId algo, const Instance& inst, const RngFactory& rng,
                                const Alg1Config& base_cfg) {
    Alg1Config cfg = base_cfg;
    switch (algo) {
        case AlgoId::Etc: return run_etc(inst, rng);
        case AlgoId::Ucb: return run_ucb(inst, rng);
        case AlgoId::Alg1Greedy: cfg.decomposer = DecomposerKind::Greedy; break;
        case AlgoId::Alg1Random: cfg.decomposer = DecomposerKind::Random; break;
        case AlgoId::Alg1Lp: cfg.decomposer = DecomposerKind::Lp; break;
    }
    return run_alg1(inst, cfg, rng);
}

// 1.96 * s / sqrt(n) with the n-1 sample variance; 0 when n < 2.
inline double ci_half_width(double sum, double sumsq, int n) {
    if (n < 2) return 0.0;
    double mean = sum / n;
    double var = (sumsq - n * mean * mean) / (n - 1);
    if (var < 0.0) var = 0.0;  // rounding
    return 1.96 * std::sqrt(var / n);
}

}  // namespace detail

inline AggregateResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const int n_algos = static_cast<int>(cfg.algorithms.size());
    const int reps = cfg.replications;

    AggregateResult out;
    out.algorithms = cfg.algorithms;
    out.stride = cfg.stride;
    out.replications = reps;
    out.completed.assign(n_algos, 0);

    std::vector<std::vector<double>> sum(n_algos), sumsq(n_algos);

    for (int rep = 0; rep < reps; ++rep) {
        // Instance randomness keyed only by replication so all algorithms of
        // one rep face the same draw (paired comparisons).
        Instance inst =
            cfg.instance.realize(RngFactory::derive(cfg.root_seed, "instance", rep));
        if (cfg.horizon_override > 0) inst.horizon = cfg.horizon_override;
        if (out.horizon == 0) {
            out.horizon = inst.horizon;
            for (int a = 0; a < n_algos; ++a) {
                sum[a].assign(static_cast<std::size_t>(out.horizon), 0.0);
                sumsq[a].assign(static_cast<std::size_t>(out.horizon), 0.0);
            }
        }
        for (int a = 0; a < n_algos; ++a) {
            const AlgoId algo = cfg.algorithms[a];
            RngFactory run_rng(RngFactory::derive(cfg.root_seed, to_string(algo), rep));
            try {
                RegretTrace trace = detail::dispatch_run(algo, inst, run_rng, cfg.alg1);
                const auto& curve = trace.cumulative_pseudo_regret;
                double last = curve.empty() ? 0.0 : curve.back();
                for (long long r = 0; r < out.horizon; ++r) {
                    // pad truncated traces with their final value
                    double v = r < static_cast<long long>(curve.size())
                                   ? curve[static_cast<std::size_t>(r)]
                                   : last;
                    sum[a][static_cast<std::size_t>(r)] += v;
                    sumsq[a][static_cast<std::size_t>(r)] += v * v;
                }
                ++out.completed[a];
            } catch (const std::exception& e) {
                out.failures.push_back({algo, rep, e.what()});
            }
        }
    }

    out.mean_curve.assign(n_algos, {});
    out.ci_half_curve.assign(n_algos, {});
    out.final_mean.assign(n_algos, 0.0);
    out.final_ci_half.assign(n_algos, 0.0);
    for (int a = 0; a < n_algos; ++a) {
        const int n = out.completed[a];
        auto& mean = out.mean_curve[a];
        auto& half = out.ci_half_curve[a];
        mean.assign(static_cast<std::size_t>(out.horizon), 0.0);
        half.assign(static_cast<std::size_t>(out.horizon), 0.0);
        if (n == 0) continue;
        for (long long r = 0; r < out.horizon; ++r) {
            auto i = static_cast<std::size_t>(r);
            mean[i] = sum[a][i] / n;
            half[i] = detail::ci_half_width(sum[a][i], sumsq[a][i], n);
        }
        out.final_mean[a] = mean.back();
        out.final_ci_half[a] = half.back();
    }
    return out;
}

namespace detail {

inline std::string final_csv_path(const std::string& path) {
    auto dot = path.rfind(".csv");
    if (dot != std::string::npos && dot == path.size() - 4)
        return path.substr(0, dot) + "_final.csv";
    return path + "_final.csv";
}

}  // namespace detail

/// Writes `round,algorithm,mean_regret,ci_low,ci_high` (rows thinned to the
/// stride, final round always kept) plus a companion `_final.csv`.
inline void emit_csv(const AggregateResult& result, const std::string& path) {
    std::ofstream f(path, std::ios::binary);  // binary: LF endings everywhere
    if (!f) throw IoFailure("cannot write " + path);
    f << std::setprecision(std::numeric_limits<double>::max_digits10);
    f << "round,algorithm,mean_regret,ci_low,ci_high\n";
    for (std::size_t a = 0; a < result.algorithms.size(); ++a) {
        const std::string name = to_string(result.algorithms[a]);
        for (long long r = result.stride; r <= result.horizon; r += result.stride) {
            auto i = static_cast<std::size_t>(r - 1);
            double m = result.mean_curve[a][i], h = result.ci_half_curve[a][i];
            f << r << ',' << name << ',' << m << ',' << m - h << ',' << m + h << '\n';
        }
        if (result.horizon % result.stride != 0 && result.horizon >= 1) {
            auto i = static_cast<std::size_t>(result.horizon - 1);
            double m = result.mean_curve[a][i], h = result.ci_half_curve[a][i];
            f << result.horizon << ',' << name << ',' << m << ',' << m - h << ',' << m + h
              << '\n';
        }
    }
    if (!f) throw IoFailure("write failed on " + path);

    const std::string fpath = detail::final_csv_path(path);
    std::ofstream g(fpath, std::ios::binary);
    if (!g) throw IoFailure("cannot write " + fpath);
    g << std::setprecision(std::numeric_limits<double>::max_digits10);
    g << "algorithm,mean_final_regret,ci_half_width,replications\n";
    for (std::size_t a = 0; a < result.algorithms.size(); ++a)
        g << to_string(result.algorithms[a]) << ',' << result.final_mean[a] << ','
          << result.final_ci_half[a] << ',' << result.completed[a] << '\n';
    if (!g) throw IoFailure("write failed on " + fpath);
}

}  // namespace anonbandits
