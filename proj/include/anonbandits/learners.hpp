#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "anonbandits/base.hpp"
#include "anonbandits/decomp.hpp"
#include "anonbandits/env.hpp"
#include "anonbandits/feedback.hpp"
#include "anonbandits/rng.hpp"

namespace anonbandits {

enum class DecomposerKind { Greedy, Random, Lp };

struct Alg1Config {
    DecomposerKind decomposer = DecomposerKind::Lp;
    int u_assumed = 0;          // 0 -> C+1 (agnostic-to-U default)
    double gamma_const = 0.13;  // elimination rate; tuned on validation instances
    int batches = 0;            // 0 -> max(1, floor(log2 log2 T'))
    bool robust_mode = true;    // random fallback instead of aborting
};

/// Optional introspection for tests: per-batch estimate routing vs quota.
struct Alg1Debug {
    struct BatchLedger {
        std::vector<long long> quota;                // per user
        std::vector<std::vector<int>> active;        // per user active set
        std::vector<std::vector<long long>> routed;  // [user][arm]
        bool fallback = false;
        bool shortfall = false;
        bool truncated = false;  // horizon ran out before end_batch
    };
    std::vector<BatchLedger> batches;
    bool aborted = false;
    long long unanonymized_reads = 0;  // must stay 0: anonymity compliance
};

namespace detail {

inline GroupPartition ungrouped_partition(const Assignment& assignment) {
    GroupPartition p;
    p.assignment = assignment;
    return p;
}

// Leftover rounds: everyone plays a fixed arm, no feedback requested.
inline void play_out(Environment& env, const Assignment& assignment) {
    const GroupPartition p = ungrouped_partition(assignment);
    while (!env.done()) env.play(p);
}

}  // namespace detail

/// Algorithm 1: N synchronized batched-elimination learners over a shared
/// anonymous decomposition, fed by the eliciting protocol (2C+2 rounds per
/// assignment). Per-user BaSE horizon is T' = floor(T / (alpha(2C+2))).
inline RegretTrace run_alg1(const Instance& inst, const Alg1Config& cfg,
                            const RngFactory& rng, Alg1Debug* debug = nullptr) {
    const int n = inst.n_users;
    const int k = inst.n_arms;
    const int c = inst.anonymity;
    const int u = cfg.u_assumed > 0 ? cfg.u_assumed : c + 1;
    const long long alpha =
        cfg.decomposer == DecomposerKind::Greedy ? k : alpha_factor(k, c, u);
    const long long t_prime = inst.horizon / (alpha * (2 * c + 2));
    const int batches = cfg.batches > 0 ? cfg.batches : default_batches(t_prime);
    if (t_prime < batches)
        throw HorizonTooSmall("batched horizon T'=" + std::to_string(t_prime) +
                              " smaller than B=" + std::to_string(batches));
    const BaseGrid grid = make_grid(t_prime, batches);
    const double gamma =
        BaseState::default_gamma(n, k, inst.horizon, cfg.gamma_const);
    const double noise_proxy = 4.0 * c + 1.0;  // elicited estimates

    Environment env(inst, rng.stream("rewards"));
    RngStream alg_rng = rng.stream("alg1");

    std::vector<BaseState> states;
    states.reserve(n);
    for (int i = 0; i < n; ++i) states.emplace_back(k, grid, gamma, noise_proxy);

    bool aborted = false;
    for (int b = 1; b <= batches && !env.done() && !aborted; ++b) {
        BatchedGraph graph;
        graph.n_arms = k;
        graph.demand = grid.batch_length(b);
        graph.active_sets.reserve(n);
        std::vector<long long> quotas(n);
        for (int i = 0; i < n; ++i) {
            auto plan = states[i].begin_batch();
            quotas[i] = plan.quota;
            graph.active_sets.push_back(std::move(plan.active));
        }

        Decomposition decomp;
        bool fallback = false;
        if (!graph.is_u_batched(u)) {
            if (!cfg.robust_mode) {
                aborted = true;
                if (debug) debug->aborted = true;
                break;
            }
            fallback = true;
            decomp = random_decompose(graph, c, alg_rng);
        } else {
            switch (cfg.decomposer) {
                case DecomposerKind::Greedy: decomp = greedy_decompose(graph, c); break;
                case DecomposerKind::Random: decomp = random_decompose(graph, c, alg_rng); break;
                case DecomposerKind::Lp: {
                    // The batch graph certifies its own cluster bound (min arm
                    // degree); using it instead of the assumed worst case keeps
                    // the block partition coarse when the data allows.
                    int u_eff = u;
                    const auto demanders = graph.demanders();
                    int min_degree = n;
                    for (const auto& b_j : demanders)
                        min_degree = std::min(min_degree, static_cast<int>(b_j.size()));
                    u_eff = std::max(u_eff, min_degree);
                    decomp = lp_decompose(graph, c, u_eff);
                    break;
                }
            }
        }

        std::vector<std::vector<std::vector<double>>> buckets(
            n, std::vector<std::vector<double>>(k));
        for (const auto& m : decomp.assignments) {
            if (env.done()) break;
            for (const EstimateRecord& est : elicit(env, m, c))
                buckets[est.user][est.arm].push_back(est.value);
        }
        if (debug) {
            Alg1Debug::BatchLedger ledger;
            ledger.quota = quotas;
            ledger.active = graph.active_sets;
            ledger.fallback = fallback;
            ledger.shortfall = decomp.shortfall;
            ledger.truncated = env.done();
            ledger.routed.assign(n, std::vector<long long>(k, 0));
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < k; ++j)
                    ledger.routed[i][j] = static_cast<long long>(buckets[i][j].size());
            debug->batches.push_back(std::move(ledger));
        }
        if (env.done()) break;  // batch truncated by the horizon
        const bool enforce = !decomp.shortfall && !fallback;
        for (int i = 0; i < n; ++i) states[i].end_batch(buckets[i], enforce);
    }

    // leftover (or aborted) rounds: empirical best arm per user
    if (!env.done()) {
        Assignment best;
        best.arm_of.resize(n);
        for (int i = 0; i < n; ++i) best.arm_of[i] = states[i].best_arm();
        detail::play_out(env, best);
    }
    if (debug) debug->unanonymized_reads = env.unanonymized_reads();
    return env.trace();
}

/// Optional introspection for the explore-then-commit learner.
struct EtcDebug {
    long long t_exp = 0;
    long long iterations = 0;
    std::vector<std::vector<long long>> counts;  // n_{ij} after exploration
    std::vector<int> committed;
    long long unanonymized_reads = 0;  // must stay 0: anonymity compliance
};

/// Exploration length from Algorithm 2, natural log, capped at T/2.
inline long long etc_exploration_rounds(int n, int k, int c, long long t) {
    const double formula = 10.0 * std::pow(static_cast<double>(c), 2.0 / 3.0) *
                           std::pow(static_cast<double>(k), 1.0 / 3.0) *
                           std::pow(static_cast<double>(t), 2.0 / 3.0) *
                           std::cbrt(std::log(static_cast<double>(n) * k *
                                              static_cast<double>(t)));
    return std::min<long long>(static_cast<long long>(formula), t / 2);
}

/// Algorithm 2: elicit on whole-population single-arm assignments, cycling
/// arms, for ~T_exp rounds; then commit every user to their empirical best.
inline RegretTrace run_etc(const Instance& inst, const RngFactory& rng,
                           EtcDebug* debug = nullptr) {
    const int n = inst.n_users;
    const int k = inst.n_arms;
    const int c = inst.anonymity;
    const long long t_exp = etc_exploration_rounds(n, k, c, inst.horizon);
    const long long iterations = (t_exp + 2 * c + 1) / (2 * c + 2);
    if (iterations < k)
        throw ExplorationTooShort("only " + std::to_string(iterations) +
                                  " elicitations for " + std::to_string(k) + " arms");

    Environment env(inst, rng.stream("rewards"));
    std::vector<std::vector<long long>> counts(n, std::vector<long long>(k, 0));
    std::vector<std::vector<double>> sums(n, std::vector<double>(k, 0.0));

    for (long long r = 1; r <= iterations && !env.done(); ++r) {
        const int arm = static_cast<int>((r - 1) % k);
        Assignment m;
        m.arm_of.assign(n, arm);
        for (const EstimateRecord& est : elicit(env, m, c)) {
            ++counts[est.user][est.arm];
            sums[est.user][est.arm] += est.value;
        }
    }

    Assignment committed;
    committed.arm_of.resize(n);
    for (int i = 0; i < n; ++i) {
        int best = 0;
        double best_mean = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < k; ++j) {
            if (counts[i][j] == 0) continue;
            const double mean = sums[i][j] / static_cast<double>(counts[i][j]);
            if (mean > best_mean) {
                best_mean = mean;
                best = j;
            }
        }
        committed.arm_of[i] = best;
    }
    detail::play_out(env, committed);
    if (debug) {
        debug->t_exp = t_exp;
        debug->iterations = iterations;
        debug->counts = counts;
        debug->committed = committed.arm_of;
        debug->unanonymized_reads = env.unanonymized_reads();
    }
    return env.trace();
}

///// Non-anonymous baseline: each user independently runs UCB1 (play each arm
/// once, then argmax mean + sqrt(2 ln t / n)), reading their own rewards
/// through the environment's counted backdoor.
inline RegretTrace run_ucb(const Instance& inst, const RngFactory& rng) {
    const int n = inst.n_users;
    const int k = inst.n_arms;
    Environment env(inst, rng.stream("rewards"));
    std::vector<std::vector<long long>> counts(n, std::vector<long long>(k, 0));
    std::vector<std::vector<double>> sums(n, std::vector<double>(k, 0.0));

    Assignment m;
    m.arm_of.resize(n);
    for (long long t = 1; !env.done(); ++t) {
        for (int i = 0; i < n; ++i) {
            if (t <= k) {
                m.arm_of[i] = static_cast<int>(t - 1);
                continue;
            }
            int best = 0;
            double best_index = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < k; ++j) {
                const double bonus =
                    std::sqrt(2.0 * std::log(static_cast<double>(t)) /
                              static_cast<double>(counts[i][j]));
                const double index = sums[i][j] / static_cast<double>(counts[i][j]) + bonus;
                if (index > best_index) {
                    best_index = index;
                    best = j;
                }
            }
            m.arm_of[i] = best;
        }
        const std::vector<double> rewards = env.play_unanonymized(m);
        for (int i = 0; i < n; ++i) {
            ++counts[i][m(i)];
            sums[i][m(i)] += rewards[i];
        }
    }
    return env.trace();
}

}  // namespace anonbandits
