#pragma once

#include <algorithm>
#include <vector>

#include "anonbandits/env.hpp"

namespace anonbandits {

/// One unbiased estimate of mu_{i, pi(i)}; may land outside [0,1].
struct EstimateRecord {
    int user = 0;
    int arm = 0;
    double value = 0.0;
};

/// How a fixed assignment is split into feedback groups for elicitation.
struct GroupingPlan {
    struct Group {
        std::vector<int> users;  // ascending user index; position = within-group order
        int arm = 0;
    };

    std::vector<Group> groups;
    std::vector<int> skipped_users;  // users on arms with fewer than C+1 players
};

/// Partitions pi^{-1}(j) into groups of size in [C+1, 2C+1] for every arm
/// with at least C+1 players: chunks of C+1, remainder merged into the last
/// chunk. Users on smaller arms are skipped.
inline GroupingPlan plan_groups(const Assignment& assignment, int c) {
    const int n = assignment.size();
    int max_arm = -1;
    for (int u = 0; u < n; ++u) max_arm = std::max(max_arm, assignment(u));
    std::vector<std::vector<int>> by_arm(max_arm + 1);
    for (int u = 0; u < n; ++u) by_arm[assignment(u)].push_back(u);

    GroupingPlan plan;
    for (int j = 0; j <= max_arm; ++j) {
        const auto& users = by_arm[j];
        const int m = static_cast<int>(users.size());
        if (m == 0) continue;
        if (m < c + 1) {
            plan.skipped_users.insert(plan.skipped_users.end(), users.begin(), users.end());
            continue;
        }
        const int chunk = c + 1;
        const int full = m / chunk;  // >= 1
        for (int g = 0; g < full; ++g) {
            GroupingPlan::Group grp;
            grp.arm = j;
            int end = (g == full - 1) ? m : (g + 1) * chunk;  // remainder joins last chunk
            grp.users.assign(users.begin() + g * chunk, users.begin() + end);
            plan.groups.push_back(std::move(grp));
        }
    }
    std::sort(plan.skipped_users.begin(), plan.skipped_users.end());
    return plan;
}

/// The 2C+2-round feedback-eliciting protocol: round 0 plays the full
/// groups, round k plays each group with its k-th member removed (removed
/// and skipped users stay on pi(i), ungrouped). Emits one estimate
/// r_{s,0} - r_{s,k} per grouped user. If the horizon runs out mid-protocol
/// it plays only the remaining rounds and emits nothing.
inline std::vector<EstimateRecord> elicit(Environment& env, const Assignment& assignment,
                                          int c) {
    const GroupingPlan plan = plan_groups(assignment, c);
    const int rounds = 2 * c + 2;
    const bool complete = env.rounds_remaining() >= rounds;
    const int to_play = static_cast<int>(
        std::min<long long>(rounds, std::max<long long>(0, env.rounds_remaining())));

    const std::size_t s_count = plan.groups.size();
    std::vector<double> r0(s_count, 0.0);
    std::vector<std::vector<double>> rk(s_count);  // [group][k-1]

    for (int k = 0; k < to_play; ++k) {
        GroupPartition part;
        part.assignment = assignment;
        part.groups.reserve(s_count);
        for (const auto& g : plan.groups) {
            GroupPartition::Group pg;
            pg.arm = g.arm;
            if (k == 0 || k > static_cast<int>(g.users.size())) {
                pg.users = g.users;
            } else {
                pg.users.reserve(g.users.size() - 1);
                for (int pos = 0; pos < static_cast<int>(g.users.size()); ++pos)
                    if (pos != k - 1) pg.users.push_back(g.users[pos]);
            }
            part.groups.push_back(std::move(pg));
        }
        Feedback fb = env.play(part);
        for (std::size_t s = 0; s < s_count; ++s) {
            if (k == 0)
                r0[s] = fb.group_sums[s];
            else
                rk[s].push_back(fb.group_sums[s]);
        }
    }

    std::vector<EstimateRecord> estimates;
    if (!complete) return estimates;  // partial protocols would be biased
    for (std::size_t s = 0; s < s_count; ++s) {
        const auto& g = plan.groups[s];
        for (int pos = 0; pos < static_cast<int>(g.users.size()); ++pos)
            estimates.push_back({g.users[pos], g.arm, r0[s] - rk[s][pos]});
    }
    return estimates;
}

}  // namespace anonbandits
