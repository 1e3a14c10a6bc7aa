#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "anonbandits/errors.hpp"
#include "anonbandits/rng.hpp"

namespace anonbandits {

enum class RewardFamily { Bernoulli, UnitGaussian, Deterministic };

inline std::string to_string(RewardFamily f) {
    switch (f) {
        case RewardFamily::Bernoulli: return "bernoulli";
        case RewardFamily::UnitGaussian: return "gaussian";
        case RewardFamily::Deterministic: return "deterministic";
    }
    return "?";
}

inline RewardFamily reward_family_from_string(const std::string& s) {
    if (s == "bernoulli") return RewardFamily::Bernoulli;
    if (s == "gaussian") return RewardFamily::UnitGaussian;
    if (s == "deterministic") return RewardFamily::Deterministic;
    throw IoFailure("unknown reward family: " + s);
}

/// Ground truth of a problem: N users, K arms, anonymity floor C, horizon T,
/// the mean matrix, and the reward noise family. Immutable once built.
struct Instance {
    int n_users = 0;
    int n_arms = 0;
    int anonymity = 1;
    long long horizon = 0;
    std::vector<std::vector<double>> means;  // [n_users][n_arms], in [0,1]
    RewardFamily family = RewardFamily::Bernoulli;

    double mean(int user, int arm) const { return means[user][arm]; }

    int best_arm(int user) const {
        const auto& row = means[user];
        int best = 0;
        for (int j = 1; j < n_arms; ++j)
            if (row[j] > row[best]) best = j;
        return best;
    }

    double best_mean(int user) const { return means[user][best_arm(user)]; }

    void validate() const {
        if (n_users < 1 || n_arms < 1 || anonymity < 1 || horizon < 1)
            throw std::invalid_argument("instance dimensions must be positive");
        if (static_cast<int>(means.size()) != n_users)
            throw std::invalid_argument("means has wrong number of rows");
        for (const auto& row : means) {
            if (static_cast<int>(row.size()) != n_arms)
                throw std::invalid_argument("means has wrong number of columns");
            for (double m : row)
                if (!(m >= 0.0 && m <= 1.0))
                    throw std::invalid_argument("mean outside [0,1]");
        }
    }
};

/// Total map from users to arms (0-based arm indices).
struct Assignment {
    std::vector<int> arm_of;

    int size() const { return static_cast<int>(arm_of.size()); }
    int operator()(int user) const { return arm_of[user]; }
};

/// A round's grouping: a full assignment plus the groups that get aggregate
/// feedback. Users outside every group still play their assigned arm but
/// yield no feedback.
struct GroupPartition {
    struct Group {
        std::vector<int> users;
        int arm = 0;
    };

    Assignment assignment;
    std::vector<Group> groups;

    std::vector<int> ungrouped() const {
        std::vector<char> in(assignment.arm_of.size(), 0);
        for (const auto& g : groups)
            for (int u : g.users) in[u] = 1;
        std::vector<int> out;
        for (std::size_t i = 0; i < in.size(); ++i)
            if (!in[i]) out.push_back(static_cast<int>(i));
        return out;
    }
};

/// One round of hidden rewards plus the learner-visible aggregates.
struct RoundOutcome {
    std::vector<double> group_sums;      // one per group
    std::vector<double> hidden_rewards;  // per user; for the regret ledger only
};

/// What a learner is allowed to see from a round.
struct Feedback {
    std::vector<double> group_sums;
};

struct RegretTrace {
    std::vector<double> cumulative_pseudo_regret;
    std::vector<double> cumulative_realized_reward;
    long long rounds_used = 0;
};

namespace detail {

inline void check_partition(const Instance& inst, const GroupPartition& p) {
    const int n = inst.n_users;
    const int k = inst.n_arms;
    if (p.assignment.size() != n)
        throw std::invalid_argument("assignment must cover every user");
    for (int u = 0; u < n; ++u)
        if (p.assignment(u) < 0 || p.assignment(u) >= k)
            throw InvalidArm("arm index out of range for user " + std::to_string(u));
    std::vector<char> seen(n, 0);
    for (const auto& g : p.groups) {
        if (static_cast<int>(g.users.size()) < inst.anonymity)
            throw AnonymityViolation("group of size " + std::to_string(g.users.size()) +
                                     " below anonymity floor " + std::to_string(inst.anonymity));
        if (g.arm < 0 || g.arm >= k) throw InvalidArm("group arm index out of range");
        for (int u : g.users) {
            if (u < 0 || u >= n) throw std::invalid_argument("user index out of range");
            if (seen[u]) throw std::invalid_argument("groups must be pairwise disjoint");
            seen[u] = 1;
            if (p.assignment(u) != g.arm)
                throw std::invalid_argument("group member assigned to a different arm");
        }
    }
}

inline double draw_reward(RewardFamily family, double mu, RngStream& rng) {
    switch (family) {
        case RewardFamily::Bernoulli: return rng.bernoulli(mu) ? 1.0 : 0.0;
        case RewardFamily::UnitGaussian: return rng.gaussian(mu, 1.0);
        case RewardFamily::Deterministic: return mu;
    }
    return 0.0;
}

}  // namespace detail

/// Plays one round: draws every user's hidden reward and aggregates per
/// group. Pure function of (instance, partition, rng); regret accounting
/// lives in Environment.
inline RoundOutcome play_round(const Instance& inst, const GroupPartition& partition,
                               RngStream& rng) {
    detail::check_partition(inst, partition);
    RoundOutcome out;
    out.hidden_rewards.resize(inst.n_users);
    for (int u = 0; u < inst.n_users; ++u)
        out.hidden_rewards[u] =
            detail::draw_reward(inst.family, inst.mean(u, partition.assignment(u)), rng);
    out.group_sums.reserve(partition.groups.size());
    for (const auto& g : partition.groups) {
        double s = 0.0;
        for (int u : g.users) s += out.hidden_rewards[u];
        out.group_sums.push_back(s);
    }
    return out;
}

/// Sum over users of (best mean - played mean); always >= 0.
inline double pseudo_regret(const Instance& inst, const Assignment& assignment) {
    double r = 0.0;
    for (int u = 0; u < inst.n_users; ++u)
        r += inst.best_mean(u) - inst.mean(u, assignment(u));
    return r;
}

/// Executes rounds against an instance, enforcing the anonymity firewall:
/// learners get group sums only. Keeps the regret ledger and counts any
/// reads through the non-anonymous backdoor (used by the UCB baseline and
/// by the compliance tests).
class Environment {
  public:
    Environment(Instance inst, RngStream rewards_rng)
        : inst_(std::move(inst)), rng_(rewards_rng) {
        inst_.validate();
        best_sum_ = 0.0;
        for (int u = 0; u < inst_.n_users; ++u) best_sum_ += inst_.best_mean(u);
        trace_.cumulative_pseudo_regret.reserve(static_cast<std::size_t>(inst_.horizon));
        trace_.cumulative_realized_reward.reserve(static_cast<std::size_t>(inst_.horizon));
    }

    const Instance& instance() const { return inst_; }
    long long horizon() const { return inst_.horizon; }
    long long rounds_used() const { return trace_.rounds_used; }
    long long rounds_remaining() const { return inst_.horizon - trace_.rounds_used; }
    bool done() const { return rounds_remaining() <= 0; }

    Feedback play(const GroupPartition& partition) {
        if (done()) throw std::logic_error("environment horizon exhausted");
        RoundOutcome out = play_round(inst_, partition, rng_);
        advance_ledger(partition.assignment, out.hidden_rewards);
        return Feedback{std::move(out.group_sums)};
    }

    /// Non-anonymous backdoor: per-user rewards, no grouping required.
    /// Every call is counted so compliance tests can assert zero reads.
    std::vector<double> play_unanonymized(const Assignment& assignment) {
        if (done()) throw std::logic_error("environment horizon exhausted");
        GroupPartition p;
        p.assignment = assignment;
        detail::check_partition(inst_, p);
        std::vector<double> rewards(inst_.n_users);
        for (int u = 0; u < inst_.n_users; ++u)
            rewards[u] = detail::draw_reward(inst_.family, inst_.mean(u, assignment(u)), rng_);
        advance_ledger(assignment, rewards);
        ++unanonymized_reads_;
        return rewards;
    }

    long long unanonymized_reads() const { return unanonymized_reads_; }

    const RegretTrace& trace() const { return trace_; }

  private:
    void advance_ledger(const Assignment& assignment, const std::vector<double>& rewards) {
        double played_sum = 0.0;
        double realized = 0.0;
        for (int u = 0; u < inst_.n_users; ++u) {
            played_sum += inst_.mean(u, assignment(u));
            realized += rewards[u];
        }
        cum_pseudo_ += best_sum_ - played_sum;
        cum_realized_ += realized;
        trace_.cumulative_pseudo_regret.push_back(cum_pseudo_);
        trace_.cumulative_realized_reward.push_back(cum_realized_);
        ++trace_.rounds_used;
    }

    Instance inst_;
    RngStream rng_;
    RegretTrace trace_;
    double best_sum_ = 0.0;
    double cum_pseudo_ = 0.0;
    double cum_realized_ = 0.0;
    long long unanonymized_reads_ = 0;
};

// ---------------------------------------------------------------------------
// Instance generators
// ---------------------------------------------------------------------------

/// Bernoulli means i.i.d. uniform on [0,1].
inline Instance gen_uniform_instance(int n, int k, int c, long long t, std::uint64_t seed) {
    if (n < 1 || k < 1) throw std::invalid_argument("n and k must be >= 1");
    RngStream rng(RngFactory::derive(seed, "instance-uniform"));
    Instance inst;
    inst.n_users = n;
    inst.n_arms = k;
    inst.anonymity = c;
    inst.horizon = t;
    inst.family = RewardFamily::Bernoulli;
    inst.means.assign(n, std::vector<double>(k));
    for (auto& row : inst.means)
        for (auto& m : row) m = rng.uniform();
    return inst;
}

namespace detail {

inline std::vector<double> random_unit_vector(int dim, RngStream& rng) {
    std::vector<double> v(dim);
    double norm2 = 0.0;
    do {
        norm2 = 0.0;
        for (auto& x : v) {
            x = rng.gaussian();
            norm2 += x * x;
        }
    } while (norm2 == 0.0);
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& x : v) x *= inv;
    return v;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return dot / std::sqrt(na * nb);
}

}  // namespace detail

/// Builds the linear-model means from explicit user/arm vectors:
/// mu = 0.5 * (cos angle + 1). Exposed so tests can force vector choices.
inline Instance make_linear_instance_from_vectors(
    const std::vector<std::vector<double>>& user_vecs,
    const std::vector<std::vector<double>>& arm_vecs, int c, long long t) {
    Instance inst;
    inst.n_users = static_cast<int>(user_vecs.size());
    inst.n_arms = static_cast<int>(arm_vecs.size());
    inst.anonymity = c;
    inst.horizon = t;
    inst.family = RewardFamily::Bernoulli;
    inst.means.assign(inst.n_users, std::vector<double>(inst.n_arms));
    for (int i = 0; i < inst.n_users; ++i)
        for (int j = 0; j < inst.n_arms; ++j) {
            double mu = 0.5 * (detail::cosine(user_vecs[i], arm_vecs[j]) + 1.0);
            inst.means[i][j] = std::clamp(mu, 0.0, 1.0);
        }
    return inst;
}

/// Linear model: random unit vectors per user and arm, Bernoulli rewards.
inline Instance gen_linear_instance(int n, int k, int c, long long t, int dim,
                                    std::uint64_t seed) {
    if (dim < 1) throw std::invalid_argument("dim must be >= 1");
    RngStream rng(RngFactory::derive(seed, "instance-linear"));
    std::vector<std::vector<double>> users(n), arms(k);
    for (auto& v : users) v = detail::random_unit_vector(dim, rng);
    for (auto& v : arms) v = detail::random_unit_vector(dim, rng);
    return make_linear_instance_from_vectors(users, arms, c, t);
}

/// Instance satisfying the user-cluster assumption by construction: each arm
/// is the unique favorite of at least u users, with margin >= gap.
inline Instance gen_clustered_instance(int n, int k, int c, long long t, int u, double gap,
                                       std::uint64_t seed) {
    if (n < static_cast<long long>(k) * u)
        throw InfeasibleCluster("need n >= k*u users to give each arm u fans");
    if (!(gap > 0.0 && gap <= 1.0)) throw std::invalid_argument("gap must be in (0,1]");
    RngStream rng(RngFactory::derive(seed, "instance-clustered"));
    Instance inst;
    inst.n_users = n;
    inst.n_arms = k;
    inst.anonymity = c;
    inst.horizon = t;
    inst.family = RewardFamily::Bernoulli;
    inst.means.assign(n, std::vector<double>(k));
    for (int i = 0; i < n; ++i) {
        // First k*u users are assigned favorites round-robin; the rest randomly.
        int fav = (i < k * u) ? i % k : rng.uniform_int(0, k - 1);
        double base = rng.uniform() * (1.0 - gap);  // non-favorite level
        for (int j = 0; j < k; ++j)
            inst.means[i][j] = (j == fav) ? base + gap : base * rng.uniform();
    }
    return inst;
}

enum class HardInstanceKind { GaussianCluster, T23Pair, LinearPair };

/// Theorem-proof instance tables, directly constructible for tests
/// (`which` picks the table; the coin-flip variant lives in
/// gen_hard_instance).
inline Instance make_t23_instance(int which, long long t) {
    const double eps = std::pow(static_cast<double>(t), -1.0 / 3.0);
    Instance inst;
    inst.n_users = 3;
    inst.n_arms = 3;
    inst.anonymity = 2;
    inst.horizon = t;
    inst.family = RewardFamily::Bernoulli;
    const double lo = 0.5 - eps, hi = 0.5 + eps;
    if (which == 1)
        inst.means = {{1, 0, 0}, {0, lo, hi}, {0, hi, lo}};
    else
        inst.means = {{1, 0, 0}, {0, hi, lo}, {0, lo, hi}};
    return inst;
}

inline Instance make_linear_pair_instance(int which, long long t) {
    Instance inst;
    inst.n_users = 2;
    inst.n_arms = 2;
    inst.anonymity = 2;
    inst.horizon = t;
    inst.family = RewardFamily::Deterministic;
    if (which == 1)
        inst.means = {{1, 0}, {0, 1}};
    else
        inst.means = {{0, 1}, {1, 0}};
    return inst;
}

/// Lower-bound instances from the hardness proofs.
inline Instance gen_hard_instance(HardInstanceKind kind, long long t, std::uint64_t seed) {
    if (t < 1) throw std::invalid_argument("t must be >= 1");
    RngStream rng(RngFactory::derive(seed, "instance-hard"));
    switch (kind) {
        case HardInstanceKind::GaussianCluster: {
            Instance inst;
            inst.n_users = 50;
            inst.n_arms = 5;
            inst.anonymity = 4;
            inst.horizon = t;
            inst.family = RewardFamily::UnitGaussian;
            const double bump = std::sqrt(static_cast<double>(inst.anonymity) /
                                          static_cast<double>(t));
            inst.means.assign(inst.n_users, std::vector<double>(inst.n_arms, 0.0));
            for (int i = 0; i < inst.n_users; ++i)
                inst.means[i][rng.uniform_int(0, inst.n_arms - 1)] = std::min(bump, 1.0);
            return inst;
        }
        case HardInstanceKind::T23Pair:
            return make_t23_instance(rng.bernoulli(0.5) ? 1 : 2, t);
        case HardInstanceKind::LinearPair:
            return make_linear_pair_instance(rng.bernoulli(0.5) ? 1 : 2, t);
    }
    throw std::invalid_argument("unknown hard instance kind");
}

// ---------------------------------------------------------------------------
// Instance fixture format: header "N K C T family", then N rows of K means.
// ---------------------------------------------------------------------------

inline void write_instance(const Instance& inst, std::ostream& os) {
    os << inst.n_users << ' ' << inst.n_arms << ' ' << inst.anonymity << ' ' << inst.horizon
       << ' ' << to_string(inst.family) << '\n';
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& row : inst.means) {
        for (int j = 0; j < inst.n_arms; ++j) os << (j ? " " : "") << row[j];
        os << '\n';
    }
}

inline void write_instance(const Instance& inst, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoFailure("cannot write " + path);
    write_instance(inst, f);
    if (!f) throw IoFailure("write failed: " + path);
}

inline Instance read_instance(std::istream& is) {
    Instance inst;
    std::string family;
    if (!(is >> inst.n_users >> inst.n_arms >> inst.anonymity >> inst.horizon >> family))
        throw IoFailure("malformed instance header");
    inst.family = reward_family_from_string(family);
    inst.means.assign(inst.n_users, std::vector<double>(inst.n_arms));
    for (auto& row : inst.means)
        for (auto& m : row)
            if (!(is >> m)) throw IoFailure("malformed instance means");
    inst.validate();
    return inst;
}

inline Instance read_instance(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoFailure("cannot read " + path);
    return read_instance(f);
}

}  // namespace anonbandits
