#pragma once

// Shared test-side oracles. Everything here is implemented independently of
// the library code paths it checks (enumeration, exact phase-1 simplex,
// recount-from-scratch), so agreement is meaningful.

#include <algorithm>
#include <vector>

#include "anonbandits/decomp.hpp"
#include "anonbandits/rng.hpp"

namespace testsupport {

using anonbandits::Assignment;
using anonbandits::BatchedGraph;
using anonbandits::Decomposition;
using anonbandits::PolytopePoint;
using anonbandits::Rational;
using anonbandits::RngStream;

// Random graph where every arm has at least `u` demanders: random active
// sets, then under-demanded arms are patched into extra users' sets.
inline BatchedGraph make_u_batched_graph(RngStream& rng, int n, int k, long long d, int u) {
    BatchedGraph g;
    g.n_arms = k;
    g.demand = d;
    g.active_sets.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < k; ++j)
            if (rng.bernoulli(0.5)) g.active_sets[i].push_back(j);
        if (g.active_sets[i].empty()) g.active_sets[i].push_back(rng.uniform_int(0, k - 1));
    }
    for (int j = 0; j < k; ++j) {
        std::vector<int> without;
        int deg = 0;
        for (int i = 0; i < n; ++i) {
            if (std::binary_search(g.active_sets[i].begin(), g.active_sets[i].end(), j))
                ++deg;
            else
                without.push_back(i);
        }
        while (deg < u && !without.empty()) {
            const int pick = rng.uniform_int(0, static_cast<int>(without.size()) - 1);
            const int i = without[pick];
            without.erase(without.begin() + pick);
            g.active_sets[i].insert(
                std::upper_bound(g.active_sets[i].begin(), g.active_sets[i].end(), j), j);
            ++deg;
        }
    }
    return g;
}

// Independent informativeness recount (set-based, unlike the library's
// load-array tally).
inline std::vector<std::vector<long long>> recount_informative(
    const std::vector<Assignment>& assignments, int n, int k, int c) {
    std::vector<std::vector<long long>> counts(n, std::vector<long long>(k, 0));
    for (const auto& m : assignments) {
        std::vector<std::vector<int>> members(k);
        for (int i = 0; i < n; ++i) members[m(i)].push_back(i);
        for (int j = 0; j < k; ++j)
            if (static_cast<int>(members[j].size()) >= c + 1)
                for (int i : members[j]) ++counts[i][j];
    }
    return counts;
}

// 0/1 vertex predicate for P_C(S): row sums <= 1 (abstention allowed),
// support on S, column sums >= C+1 on S.
inline bool is_vertex_point(const std::vector<int>& arm_of, const std::vector<int>& scope,
                            int k, int c) {
    std::vector<long long> col(k, 0);
    for (int a : arm_of) {
        if (a == anonbandits::VertexTerm::kUnassigned) continue;
        if (a < 0 || a >= k) return false;
        if (!std::binary_search(scope.begin(), scope.end(), a)) return false;
        ++col[a];
    }
    for (int j : scope)
        if (col[j] < c + 1) return false;
    return true;
}

// Full enumeration of the 0/1 points of P_C(S) (all are vertices by total
// unimodularity). Feasible only at toy sizes.
inline std::vector<std::vector<int>> enumerate_vertices(int n, int k,
                                                        const std::vector<int>& scope,
                                                        int c) {
    std::vector<std::vector<int>> out;
    const int choices = static_cast<int>(scope.size()) + 1;  // scope arms + abstain
    std::vector<int> arm_of(n, anonbandits::VertexTerm::kUnassigned);
    long long total = 1;
    for (int i = 0; i < n; ++i) total *= choices;
    for (long long code = 0; code < total; ++code) {
        long long x = code;
        for (int i = 0; i < n; ++i) {
            const int pick = static_cast<int>(x % choices);
            x /= choices;
            arm_of[i] = (pick == 0) ? anonbandits::VertexTerm::kUnassigned : scope[pick - 1];
        }
        if (is_vertex_point(arm_of, scope, k, c)) out.push_back(arm_of);
    }
    return out;
}

// Exact phase-1 simplex: does A * lambda = b admit lambda >= 0?
// Bland's rule, rational arithmetic, artificials for every row.
inline bool has_nonneg_solution(std::vector<std::vector<Rational>> a,
                                std::vector<Rational> b) {
    const int m = static_cast<int>(a.size());
    const int n = m == 0 ? 0 : static_cast<int>(a[0].size());
    for (int r = 0; r < m; ++r)
        if (b[r] < 0) {
            b[r] = -b[r];
            for (auto& x : a[r]) x = -x;
        }
    // tableau: columns [original n | artificials m | rhs]
    std::vector<std::vector<Rational>> tab(m, std::vector<Rational>(n + m + 1, Rational(0)));
    std::vector<int> basis(m);
    for (int r = 0; r < m; ++r) {
        for (int ccol = 0; ccol < n; ++ccol) tab[r][ccol] = a[r][ccol];
        tab[r][n + r] = 1;
        tab[r][n + m] = b[r];
        basis[r] = n + r;
    }
    // objective row: minimize sum of artificials => z = sum of rows
    std::vector<Rational> z(n + m + 1, Rational(0));
    for (int r = 0; r < m; ++r)
        for (int ccol = 0; ccol <= n + m; ++ccol) z[ccol] += tab[r][ccol];
    for (int r = 0; r < m; ++r) z[n + r] = 0;  // artificial reduced costs start at 0

    while (true) {
        int pivot_col = -1;
        for (int ccol = 0; ccol < n + m; ++ccol)
            if (z[ccol] > 0) {  // Bland: first improving column
                pivot_col = ccol;
                break;
            }
        if (pivot_col < 0) break;
        int pivot_row = -1;
        Rational best_ratio(0);
        for (int r = 0; r < m; ++r) {
            if (tab[r][pivot_col] <= 0) continue;
            const Rational ratio = tab[r][n + m] / tab[r][pivot_col];
            if (pivot_row < 0 || ratio < best_ratio ||
                (ratio == best_ratio && basis[r] < basis[pivot_row])) {
                pivot_row = r;
                best_ratio = ratio;
            }
        }
        if (pivot_row < 0) return false;  // unbounded phase-1: cannot happen
        const Rational pv = tab[pivot_row][pivot_col];
        for (auto& x : tab[pivot_row]) x /= pv;
        for (int r = 0; r < m; ++r) {
            if (r == pivot_row) continue;
            const Rational factor = tab[r][pivot_col];
            if (factor == 0) continue;
            for (int ccol = 0; ccol <= n + m; ++ccol)
                tab[r][ccol] -= factor * tab[pivot_row][ccol];
        }
        const Rational zf = z[pivot_col];
        for (int ccol = 0; ccol <= n + m; ++ccol) z[ccol] -= zf * tab[pivot_row][ccol];
        basis[pivot_row] = pivot_col;
    }
    return z[n + m] == 0;  // residual artificial value
}

// Is x a convex combination of the given 0/1 vertices? Exact.
inline bool in_convex_hull(const std::vector<std::vector<int>>& vertices,
                           const PolytopePoint& x) {
    const int n = x.n_users();
    const int k = x.n_arms();
    const int nv = static_cast<int>(vertices.size());
    if (nv == 0) return false;
    std::vector<std::vector<Rational>> a(n * k + 1, std::vector<Rational>(nv, Rational(0)));
    std::vector<Rational> b(n * k + 1, Rational(0));
    for (int v = 0; v < nv; ++v) {
        for (int i = 0; i < n; ++i)
            if (vertices[v][i] != anonbandits::VertexTerm::kUnassigned)
                a[i * k + vertices[v][i]][v] = 1;
        a[n * k][v] = 1;  // weights sum to one
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) b[i * k + j] = x.entries[i][j];
    b[n * k] = 1;
    return has_nonneg_solution(std::move(a), std::move(b));
}

}  // namespace testsupport
