#include <doctest.h>

#include <cmath>

#include "anonbandits/learners.hpp"

using namespace anonbandits;

TEST_CASE("run_alg1: single arm gives zero pseudo-regret") {
    Instance inst = gen_uniform_instance(5, 1, 2, 600, 1);
    for (auto kind : {DecomposerKind::Greedy, DecomposerKind::Random, DecomposerKind::Lp}) {
        Alg1Config cfg;
        cfg.decomposer = kind;
        RegretTrace trace = run_alg1(inst, cfg, RngFactory(7));
        CHECK(trace.rounds_used == 600);
        CHECK(trace.cumulative_pseudo_regret.back() == doctest::Approx(0.0));
    }
}

TEST_CASE("run_alg1: estimates routed per user per batch meet the quota") {
    Instance inst = gen_clustered_instance(12, 3, 1, 20000, 4, 0.3, 5);
    for (auto kind : {DecomposerKind::Greedy, DecomposerKind::Lp}) {
        Alg1Config cfg;
        cfg.decomposer = kind;
        Alg1Debug dbg;
        run_alg1(inst, cfg, RngFactory(11), &dbg);
        REQUIRE(!dbg.batches.empty());
        for (const auto& batch : dbg.batches) {
            if (batch.fallback || batch.shortfall || batch.truncated) continue;
            for (int i = 0; i < 12; ++i)
                for (int j : batch.active[i])
                    CHECK(batch.routed[i][j] >= batch.quota[i]);
        }
        CHECK(dbg.unanonymized_reads == 0);  // anonymity compliance
        CHECK_FALSE(dbg.aborted);
    }
}

TEST_CASE("run_alg1: robust mode completes on unclustered instances") {
    RngStream rng(13);
    for (int trial = 0; trial < 5; ++trial) {
        Instance inst = gen_uniform_instance(6, 3, 2, 3000, rng.next_u64());
        Alg1Config cfg;  // default u_assumed = C+1 = 3, robust
        Alg1Debug dbg;
        RegretTrace trace = run_alg1(inst, cfg, RngFactory(rng.next_u64()), &dbg);
        CHECK(trace.rounds_used == 3000);  // exact round budget
        CHECK_FALSE(dbg.aborted);
        CHECK(dbg.unanonymized_reads == 0);
    }
}

TEST_CASE("run_alg1: non-robust mode aborts to the empirical best arm") {
    // Every active set is {0,1,2} for all 6 users in batch 1, so the graph is
    // at most 6-batched; u_assumed = 7 forces the infeasible branch.
    Instance inst = gen_uniform_instance(6, 3, 2, 3000, 3);
    Alg1Config cfg;
    cfg.robust_mode = false;
    cfg.u_assumed = 7;
    Alg1Debug dbg;
    RegretTrace trace = run_alg1(inst, cfg, RngFactory(4), &dbg);
    CHECK(dbg.aborted);
    CHECK(trace.rounds_used == 3000);  // leftover rounds still played
}

TEST_CASE("run_alg1: horizon too small") {
    Instance inst = gen_uniform_instance(5, 3, 2, 10, 1);  // T' = 0
    CHECK_THROWS_AS(run_alg1(inst, Alg1Config{}, RngFactory(1)), HorizonTooSmall);
}

TEST_CASE("run_alg1: deterministic under the seed") {
    Instance inst = gen_clustered_instance(8, 2, 1, 4000, 4, 0.3, 9);
    Alg1Config cfg;
    RegretTrace a = run_alg1(inst, cfg, RngFactory(21));
    RegretTrace b = run_alg1(inst, cfg, RngFactory(21));
    CHECK(a.cumulative_pseudo_regret == b.cumulative_pseudo_regret);
}

TEST_CASE("etc_exploration_rounds: cap engages at the paper's parameters") {
    const long long t = 100000;
    const double raw = 10.0 * std::pow(4.0, 2.0 / 3.0) * std::pow(5.0, 1.0 / 3.0) *
                       std::pow(static_cast<double>(t), 2.0 / 3.0) *
                       std::cbrt(std::log(50.0 * 5.0 * t));
    CHECK(raw > static_cast<double>(t));
    CHECK(etc_exploration_rounds(50, 5, 4, t) == t / 2);
}

TEST_CASE("run_etc: deterministic rewards commit to the true argmax") {
    Instance inst;
    inst.n_users = 6;
    inst.n_arms = 3;
    inst.anonymity = 1;
    inst.horizon = 400;
    inst.family = RewardFamily::Deterministic;
    inst.means = {{0.9, 0.1, 0.2}, {0.1, 0.8, 0.3}, {0.2, 0.3, 0.7},
                  {0.6, 0.5, 0.4}, {0.1, 0.2, 0.9}, {0.5, 0.1, 0.4}};
    EtcDebug dbg;
    RegretTrace trace = run_etc(inst, RngFactory(3), &dbg);
    for (int i = 0; i < 6; ++i) CHECK(dbg.committed[i] == inst.best_arm(i));
    CHECK(trace.rounds_used == 400);
    CHECK(dbg.unanonymized_reads == 0);
}

TEST_CASE("run_etc: exploration counting oracle") {
    Instance inst = gen_uniform_instance(50, 5, 4, 10000, 8);
    EtcDebug dbg;
    run_etc(inst, RngFactory(5), &dbg);
    CHECK(dbg.t_exp == 5000);  // capped at T/2
    CHECK(dbg.iterations == 500);
    const long long per_arm = dbg.iterations / 5;
    for (int i = 0; i < 50; ++i)
        for (int j = 0; j < 5; ++j) CHECK(dbg.counts[i][j] >= per_arm);
}

TEST_CASE("run_etc: commit stability after exploration") {
    Instance inst;
    inst.n_users = 4;
    inst.n_arms = 2;
    inst.anonymity = 1;
    inst.horizon = 600;
    inst.family = RewardFamily::Deterministic;
    inst.means = {{0.9, 0.1}, {0.2, 0.8}, {0.6, 0.4}, {0.3, 0.7}};
    EtcDebug dbg;
    RegretTrace trace = run_etc(inst, RngFactory(2), &dbg);
    const long long commit_start = dbg.iterations * (2 * inst.anonymity + 2);
    const auto& cr = trace.cumulative_pseudo_regret;
    const double step = cr[commit_start + 1] - cr[commit_start];
    for (long long t = commit_start + 1; t < 600; ++t)
        CHECK(cr[t] - cr[t - 1] == doctest::Approx(step).epsilon(1e-12));
}

TEST_CASE("run_etc: exploration too short") {
    // tiny horizon, many arms: fewer elicitations than arms
    Instance inst = gen_uniform_instance(8, 6, 2, 40, 1);
    CHECK_THROWS_AS(run_etc(inst, RngFactory(1)), ExplorationTooShort);
}

TEST_CASE("run_ucb: single arm gives zero regret") {
    Instance inst = gen_uniform_instance(4, 1, 1, 500, 2);
    RegretTrace trace = run_ucb(inst, RngFactory(6));
    CHECK(trace.rounds_used == 500);
    CHECK(trace.cumulative_pseudo_regret.back() == doctest::Approx(0.0));
}

TEST_CASE("run_ucb: logarithmic-regret sanity band") {
    Instance inst;
    inst.n_users = 1;
    inst.n_arms = 2;
    inst.anonymity = 1;
    inst.horizon = 10000;
    inst.family = RewardFamily::Bernoulli;
    inst.means = {{0.9, 0.1}};
    int ok = 0;
    for (int run = 0; run < 100; ++run) {
        RegretTrace trace = run_ucb(inst, RngFactory(1000 + run));
        if (trace.cumulative_pseudo_regret.back() <= 60.0) ++ok;
    }
    CHECK(ok >= 95);
}

TEST_CASE("learners consume exactly T rounds") {
    Instance inst = gen_clustered_instance(10, 2, 1, 5000, 5, 0.3, 4);
    CHECK(run_etc(inst, RngFactory(1)).rounds_used == 5000);
    CHECK(run_ucb(inst, RngFactory(1)).rounds_used == 5000);
    Alg1Config cfg;
    for (auto kind : {DecomposerKind::Greedy, DecomposerKind::Random, DecomposerKind::Lp}) {
        cfg.decomposer = kind;
        CHECK(run_alg1(inst, cfg, RngFactory(1)).rounds_used == 5000);
    }
}
