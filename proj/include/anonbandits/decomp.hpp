#pragma once

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "anonbandits/env.hpp"
#include "anonbandits/errors.hpp"
#include "anonbandits/rng.hpp"

namespace anonbandits {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Per-batch demand: every user wants D instances of feedback spread evenly
/// over their active arm set A_i.
struct BatchedGraph {
    long long demand = 0;
    std::vector<std::vector<int>> active_sets;  // [user] -> sorted arm ids
    int n_arms = 0;

    int n_users() const { return static_cast<int>(active_sets.size()); }

    bool demands(int user, int arm) const {
        const auto& a = active_sets[user];
        return std::binary_search(a.begin(), a.end(), arm);
    }

    // B_j = users with arm j in their active set
    std::vector<std::vector<int>> demanders() const {
        std::vector<std::vector<int>> b(n_arms);
        for (int i = 0; i < n_users(); ++i)
            for (int j : active_sets[i]) b[j].push_back(i);
        return b;
    }

    bool is_u_batched(int u) const {
        std::vector<int> deg(n_arms, 0);
        for (const auto& a : active_sets)
            for (int j : a) ++deg[j];
        for (int j = 0; j < n_arms; ++j)
            if (deg[j] < u) return false;
        return true;
    }

    // per-pair demand: ceil(D / |A_i|) for demanded pairs, 0 otherwise
    long long need(int user, int arm) const {
        if (!demands(user, arm)) return 0;
        const long long a = static_cast<long long>(active_sets[user].size());
        return (demand + a - 1) / a;
    }

    void validate() const {
        if (demand < 1) throw std::invalid_argument("demand must be positive");
        for (const auto& a : active_sets) {
            if (a.empty()) throw std::invalid_argument("active sets must be nonempty");
            for (int j : a)
                if (j < 0 || j >= n_arms) throw InvalidArm("active set arm out of range");
        }
    }
};

/// Ordered multiset of assignments plus the tally of informative plays.
struct Decomposition {
    std::vector<Assignment> assignments;
    std::vector<std::vector<long long>> informative_counts;  // [user][arm]
    bool shortfall = false;                                  // random back-end hit its cap
};

namespace detail {

inline void tally_informative(const Decomposition& d, int n_users, int n_arms, int c,
                              std::vector<std::vector<long long>>& counts) {
    counts.assign(n_users, std::vector<long long>(n_arms, 0));
    std::vector<int> load(n_arms);
    for (const auto& m : d.assignments) {
        std::fill(load.begin(), load.end(), 0);
        for (int u = 0; u < n_users; ++u) ++load[m(u)];
        for (int u = 0; u < n_users; ++u)
            if (load[m(u)] >= c + 1) ++counts[u][m(u)];
    }
}

}  // namespace detail

/// Approximation factor alpha = max(1, ceil(K(C+1)/U)) of the polytope
/// decomposition; requires the cluster bound U >= C+1.
inline long long alpha_factor(int k, int c, int u) {
    if (u < c + 1)
        throw ClusterTooSmall("alpha factor needs u >= c+1 (got u=" + std::to_string(u) +
                              ", c=" + std::to_string(c) + ")");
    const long long num = static_cast<long long>(k) * (c + 1);
    return std::max<long long>(1, (num + u - 1) / u);
}

/// Validity report: recounts informativeness from scratch and checks the
/// zero-demand rule. The authoritative oracle for every back-end.
struct ValidityReport {
    struct Shortfall {
        int user;
        int arm;
        long long have;
        long long need;
    };

    bool valid = true;
    std::vector<Shortfall> shortfalls;
    std::vector<std::pair<int, int>> zero_demand_violations;  // (assignment idx, user)
};

inline ValidityReport validate_decomposition(const BatchedGraph& graph, int c,
                                             const Decomposition& decomp) {
    const int n = graph.n_users();
    const int k = graph.n_arms;
    ValidityReport report;
    std::vector<std::vector<long long>> counts;
    detail::tally_informative(decomp, n, k, c, counts);
    for (int r = 0; r < static_cast<int>(decomp.assignments.size()); ++r) {
        const auto& m = decomp.assignments[r];
        for (int u = 0; u < n; ++u)
            if (!graph.demands(u, m(u))) {
                report.valid = false;
                report.zero_demand_violations.emplace_back(r, u);
            }
    }
    for (int u = 0; u < n; ++u)
        for (int j : graph.active_sets[u]) {
            const long long need = graph.need(u, j);
            if (counts[u][j] < need) {
                report.valid = false;
                report.shortfalls.push_back({u, j, counts[u][j], need});
            }
        }
    return report;
}

/// Greedy back-end: D copies of M_j per arm j with at least C+1 demanders
/// (all of B_j on j, everyone else on their lowest active arm). Size <= K*D.
inline Decomposition greedy_decompose(const BatchedGraph& graph, int c) {
    graph.validate();
    const int n = graph.n_users();
    Decomposition decomp;
    const auto b = graph.demanders();
    for (int j = 0; j < graph.n_arms; ++j) {
        if (static_cast<int>(b[j].size()) < c + 1) continue;  // cannot be informative
        Assignment m;
        m.arm_of.resize(n);
        for (int u = 0; u < n; ++u) m.arm_of[u] = graph.active_sets[u].front();
        for (int u : b[j]) m.arm_of[u] = j;
        for (long long copy = 0; copy < graph.demand; ++copy) decomp.assignments.push_back(m);
    }
    detail::tally_informative(decomp, n, graph.n_arms, c, decomp.informative_counts);
    return decomp;
}

/// Randomized back-end: draw uniform assignments over the active sets until
/// every demanded pair has its informative quota, up to a hard cap of
/// 50*K*D draws (shortfall flagged, not fatal).
inline Decomposition random_decompose(const BatchedGraph& graph, int c, RngStream& rng) {
    graph.validate();
    const int n = graph.n_users();
    const int k = graph.n_arms;
    Decomposition decomp;
    decomp.informative_counts.assign(n, std::vector<long long>(k, 0));

    long long unmet = 0;
    std::vector<std::vector<long long>> need(n, std::vector<long long>(k, 0));
    for (int u = 0; u < n; ++u)
        for (int j : graph.active_sets[u]) {
            need[u][j] = graph.need(u, j);
            if (need[u][j] > 0) ++unmet;
        }

    const long long cap = 50LL * k * graph.demand;
    std::vector<int> load(k);
    Assignment m;
    m.arm_of.resize(n);
    while (unmet > 0 && static_cast<long long>(decomp.assignments.size()) < cap) {
        for (int u = 0; u < n; ++u) {
            const auto& a = graph.active_sets[u];
            m.arm_of[u] = a[rng.uniform_int(0, static_cast<int>(a.size()) - 1)];
        }
        std::fill(load.begin(), load.end(), 0);
        for (int u = 0; u < n; ++u) ++load[m(u)];
        for (int u = 0; u < n; ++u) {
            const int j = m(u);
            if (load[j] >= c + 1) {
                ++decomp.informative_counts[u][j];
                if (decomp.informative_counts[u][j] == need[u][j]) --unmet;
            }
        }
        decomp.assignments.push_back(m);
    }
    decomp.shortfall = (unmet > 0);
    return decomp;
}

// ---------------------------------------------------------------------------
// Anonymity polytope P_C(S): exact rational arithmetic throughout.
// ---------------------------------------------------------------------------

/// A candidate member of P_C(S): nonnegative rational N x K matrix supported
/// on the scope S, row sums <= 1.
struct PolytopePoint {
    std::vector<std::vector<Rational>> entries;  // [user][arm]
    std::vector<int> scope;                      // sorted arm ids

    int n_users() const { return static_cast<int>(entries.size()); }
    int n_arms() const { return entries.empty() ? 0 : static_cast<int>(entries[0].size()); }

    bool in_scope(int arm) const {
        return std::binary_search(scope.begin(), scope.end(), arm);
    }
};

/// Exact evaluation of the halfspace description: bounds, row sums <= 1,
/// column sums >= C+1 on the scope and = 0 off it.
inline bool check_membership(const PolytopePoint& x, int c) {
    const int n = x.n_users();
    const int k = x.n_arms();
    const Rational one(1);
    for (int i = 0; i < n; ++i) {
        Rational row(0);
        for (int j = 0; j < k; ++j) {
            const Rational& e = x.entries[i][j];
            if (e < 0 || e > one) return false;
            row += e;
        }
        if (row > one) return false;
    }
    for (int j = 0; j < k; ++j) {
        Rational col(0);
        for (int i = 0; i < n; ++i) col += x.entries[i][j];
        if (x.in_scope(j)) {
            if (col < Rational(c + 1)) return false;
        } else {
            if (col != 0) return false;
        }
    }
    return true;
}

/// One weighted vertex of P_C(S): a 0/1 assignment where users may abstain
/// (arm_of = kUnassigned).
struct VertexTerm {
    static constexpr int kUnassigned = -1;
    Rational weight;
    std::vector<int> arm_of;
};

namespace detail {

// Small integer max-flow (BFS augmentation) with edge lower bounds via the
// usual excess-node reduction. Problem sizes here are tiny (N+K+4 nodes).
class FeasibleFlow {
  public:
    explicit FeasibleFlow(int n_nodes) : head_(n_nodes + 2, -1) {
        n_ = n_nodes;  // user-facing nodes; two more appended for super source/sink
    }

    struct EdgeRef {
        int id;
    };

    EdgeRef add_edge(int from, int to, long long lower, long long upper) {
        excess_[to] += lower;
        excess_[from] -= lower;
        return EdgeRef{push(from, to, upper - lower, lower)};
    }

    bool solve() {
        const int ss = n_, tt = n_ + 1;
        long long required = 0;
        for (const auto& [node, ex] : excess_) {
            if (ex > 0) {
                push(ss, node, ex, 0);
                required += ex;
            } else if (ex < 0) {
                push(node, tt, -ex, 0);
            }
        }
        return max_flow(ss, tt) == required;
    }

    long long flow(EdgeRef e) const { return edges_[e.id].base + edges_[e.id].flow; }

  private:
    struct Edge {
        int to;
        int next;
        long long cap;
        long long flow = 0;
        long long base = 0;  // lower bound added back on query
    };

    int push(int from, int to, long long cap, long long base) {
        grow(std::max(from, to));
        edges_.push_back({to, head_[from], cap, 0, base});
        head_[from] = static_cast<int>(edges_.size()) - 1;
        edges_.push_back({from, head_[to], 0, 0, 0});
        head_[to] = static_cast<int>(edges_.size()) - 1;
        return static_cast<int>(edges_.size()) - 2;
    }

    void grow(int node) {
        if (node >= static_cast<int>(head_.size())) head_.resize(node + 1, -1);
    }

    long long max_flow(int s, int t) {
        long long total = 0;
        while (true) {
            std::vector<int> prev_edge(head_.size(), -1);
            std::vector<char> seen(head_.size(), 0);
            std::queue<int> q;
            q.push(s);
            seen[s] = 1;
            while (!q.empty() && !seen[t]) {
                int v = q.front();
                q.pop();
                for (int e = head_[v]; e != -1; e = edges_[e].next) {
                    if (edges_[e].cap - edges_[e].flow <= 0) continue;
                    int w = edges_[e].to;
                    if (seen[w]) continue;
                    seen[w] = 1;
                    prev_edge[w] = e;
                    q.push(w);
                }
            }
            if (!seen[t]) break;
            long long aug = std::numeric_limits<long long>::max();
            for (int v = t; v != s;) {
                int e = prev_edge[v];
                aug = std::min(aug, edges_[e].cap - edges_[e].flow);
                v = edges_[e ^ 1].to;
            }
            for (int v = t; v != s;) {
                int e = prev_edge[v];
                edges_[e].flow += aug;
                edges_[e ^ 1].flow -= aug;
                v = edges_[e ^ 1].to;
            }
            total += aug;
        }
        return total;
    }

    int n_;
    std::vector<int> head_;
    std::vector<Edge> edges_;
    std::map<int, long long> excess_;
};

// Finds a 0/1 point of the minimal face of P_C(S) containing x, as a
// degree-constrained bipartite subgraph: constraints tight at x stay tight.
// Integrality comes from the constraint matrix being totally unimodular.
inline std::vector<int> minimal_face_vertex(const PolytopePoint& x, int c,
                                            const std::vector<Rational>& row_sums,
                                            const std::vector<Rational>& col_sums) {
    const int n = x.n_users();
    const int k = x.n_arms();
    // nodes: 0 = source, 1 = sink, 2..2+n-1 users, 2+n..2+n+k-1 arms
    FeasibleFlow flow(2 + n + k);
    const int kSource = 0, kSink = 1;
    const Rational one(1);

    std::vector<std::vector<std::pair<int, FeasibleFlow::EdgeRef>>> user_edges(n);
    for (int i = 0; i < n; ++i) {
        const long long lo = (row_sums[i] == one) ? 1 : 0;
        flow.add_edge(kSource, 2 + i, lo, 1);
        for (int j = 0; j < k; ++j) {
            const Rational& e = x.entries[i][j];
            if (e == 0) continue;
            const long long edge_lo = (e == one) ? 1 : 0;
            user_edges[i].emplace_back(j, flow.add_edge(2 + i, 2 + n + j, edge_lo, 1));
        }
    }
    for (int j : x.scope) {
        const bool tight = (col_sums[j] == Rational(c + 1));
        flow.add_edge(2 + n + j, kSink, c + 1, tight ? c + 1 : n);
    }
    // circulation closure
    flow.add_edge(kSink, kSource, 0, static_cast<long long>(n));

    if (!flow.solve())
        throw NotInPolytope("no integral point on the minimal face (point outside polytope?)");

    std::vector<int> vertex(n, VertexTerm::kUnassigned);
    for (int i = 0; i < n; ++i)
        for (const auto& [j, ref] : user_edges[i])
            if (flow.flow(ref) > 0) vertex[i] = j;
    return vertex;
}

}  // namespace detail

/// Writes x exactly as a convex combination of at most N*|S|+1 vertices of
/// P_C(S). Both the weights and the reconstruction are exact rationals.
inline std::vector<VertexTerm> caratheodory_decompose(const PolytopePoint& point, int c) {
    if (!check_membership(point, c))
        throw NotInPolytope("point fails the halfspace description of P_C(S)");
    const int n = point.n_users();
    const int k = point.n_arms();
    const Rational one(1);

    std::vector<VertexTerm> terms;
    PolytopePoint x = point;
    Rational remaining(1);
    const int max_iters = n * k + 2;

    for (int iter = 0; iter < max_iters; ++iter) {
        std::vector<Rational> row_sums(n, Rational(0)), col_sums(k, Rational(0));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < k; ++j) {
                row_sums[i] += x.entries[i][j];
                col_sums[j] += x.entries[i][j];
            }
        const std::vector<int> v = detail::minimal_face_vertex(x, c, row_sums, col_sums);

        // direction d = x - v; find the largest step keeping x + t*d feasible
        bool moved = false;
        Rational t_max(-1);
        std::vector<Rational> row_d(n, Rational(0)), col_d(k, Rational(0));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < k; ++j) {
                Rational d = x.entries[i][j] - ((v[i] == j) ? one : Rational(0));
                if (d != 0) moved = true;
                row_d[i] += d;
                col_d[j] += d;
                Rational bound(-1);
                if (d > 0)
                    bound = (one - x.entries[i][j]) / d;
                else if (d < 0)
                    bound = x.entries[i][j] / -d;
                if (bound >= 0 && (t_max < 0 || bound < t_max)) t_max = bound;
            }
        if (!moved) {  // x itself is a vertex
            VertexTerm last;
            last.weight = remaining;
            last.arm_of = v;
            terms.push_back(std::move(last));
            return terms;
        }
        for (int i = 0; i < n; ++i)
            if (row_d[i] > 0) {
                Rational bound = (one - row_sums[i]) / row_d[i];
                if (t_max < 0 || bound < t_max) t_max = bound;
            }
        for (int j : point.scope)
            if (col_d[j] < 0) {
                Rational bound = (col_sums[j] - Rational(c + 1)) / -col_d[j];
                if (t_max < 0 || bound < t_max) t_max = bound;
            }
        if (t_max <= 0)
            throw std::logic_error("caratheodory step stalled");  // face vertex was wrong

        const Rational lambda = t_max / (one + t_max);
        VertexTerm term;
        term.weight = remaining * lambda;
        term.arm_of = v;
        terms.push_back(std::move(term));
        remaining *= (one - lambda);

        for (int i = 0; i < n; ++i)
            for (int j = 0; j < k; ++j) {
                const Rational vij = (v[i] == j) ? one : Rational(0);
                x.entries[i][j] += t_max * (x.entries[i][j] - vij);
            }
    }
    throw std::logic_error("caratheodory did not converge within NK+1 steps");
}

namespace detail {

inline long long ceil_to_ll(const Rational& r) {
    const BigInt num = boost::multiprecision::numerator(r);
    const BigInt den = boost::multiprecision::denominator(r);
    BigInt q = num / den;
    if (q * den != num && num > 0) ++q;
    return q.convert_to<long long>();
}

inline PolytopePoint block_weights(const BatchedGraph& graph, const std::vector<int>& scope) {
    PolytopePoint w;
    w.scope = scope;
    w.entries.assign(graph.n_users(), std::vector<Rational>(graph.n_arms, Rational(0)));
    for (int i = 0; i < graph.n_users(); ++i) {
        std::vector<int> hit;
        for (int j : graph.active_sets[i])
            if (w.in_scope(j)) hit.push_back(j);
        for (int j : hit) w.entries[i][j] = Rational(1, static_cast<long long>(hit.size()));
    }
    return w;
}

}  // namespace detail

/// LP/Caratheodory back-end. With U >= K(C+1) it decomposes w over
/// P_C([K]); otherwise it splits the arms into blocks of floor(U/(C+1)) and
/// decomposes each block's weights over P_C(S_a). Vertices are materialized
/// as total assignments by re-homing abstainers to their lowest active arm.
inline Decomposition lp_decompose(const BatchedGraph& graph, int c, int u) {
    graph.validate();
    if (u < c + 1)
        throw ClusterTooSmall("lp decomposition needs u >= c+1");
    if (!graph.is_u_batched(u))
        throw NotInPolytope("graph is not U-batched for u=" + std::to_string(u));
    const int n = graph.n_users();
    const int k = graph.n_arms;

    std::vector<std::vector<int>> blocks;
    if (static_cast<long long>(u) >= static_cast<long long>(k) * (c + 1)) {
        std::vector<int> all(k);
        std::iota(all.begin(), all.end(), 0);
        blocks.push_back(std::move(all));
    } else {
        const int block_size = u / (c + 1);  // >= 1 given u >= c+1
        for (int start = 0; start < k; start += block_size) {
            std::vector<int> s;
            for (int j = start; j < std::min(k, start + block_size); ++j) s.push_back(j);
            blocks.push_back(std::move(s));
        }
    }

    Decomposition decomp;
    for (const auto& scope : blocks) {
        const PolytopePoint w = detail::block_weights(graph, scope);
        const auto terms = caratheodory_decompose(w, c);
        for (const auto& term : terms) {
            const long long copies =
                detail::ceil_to_ll(Rational(graph.demand) * term.weight);
            if (copies <= 0) continue;
            Assignment m;
            m.arm_of.resize(n);
            for (int i = 0; i < n; ++i)
                m.arm_of[i] = (term.arm_of[i] == VertexTerm::kUnassigned)
                                  ? graph.active_sets[i].front()
                                  : term.arm_of[i];
            for (long long copy = 0; copy < copies; ++copy) decomp.assignments.push_back(m);
        }
    }
    detail::tally_informative(decomp, n, k, c, decomp.informative_counts);
    return decomp;
}

// ---------------------------------------------------------------------------
// Fixture formats: graph header "N K D" + one active-set line per user
// (1-based arms); decompositions as newline-delimited assignment rows.
// ---------------------------------------------------------------------------

inline void write_batched_graph(const BatchedGraph& graph, std::ostream& os) {
    os << graph.n_users() << ' ' << graph.n_arms << ' ' << graph.demand << '\n';
    for (const auto& a : graph.active_sets) {
        for (std::size_t idx = 0; idx < a.size(); ++idx)
            os << (idx ? " " : "") << a[idx] + 1;
        os << '\n';
    }
}

inline BatchedGraph read_batched_graph(std::istream& is) {
    BatchedGraph graph;
    int n = 0;
    std::string line;
    if (!(is >> n >> graph.n_arms >> graph.demand))
        throw IoFailure("malformed graph header");
    std::getline(is, line);
    graph.active_sets.resize(n);
    for (int i = 0; i < n; ++i) {
        if (!std::getline(is, line)) throw IoFailure("missing active-set line");
        std::istringstream ls(line);
        int arm;
        while (ls >> arm) graph.active_sets[i].push_back(arm - 1);
        std::sort(graph.active_sets[i].begin(), graph.active_sets[i].end());
    }
    graph.validate();
    return graph;
}

inline void write_assignments(const std::vector<Assignment>& assignments, std::ostream& os) {
    for (const auto& m : assignments) {
        for (int u = 0; u < m.size(); ++u) os << (u ? " " : "") << m(u) + 1;
        os << '\n';
    }
}

inline std::vector<Assignment> read_assignments(std::istream& is) {
    std::vector<Assignment> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        Assignment m;
        int arm;
        while (ls >> arm) m.arm_of.push_back(arm - 1);
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace anonbandits
