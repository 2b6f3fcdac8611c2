#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "provlab/defs.hpp"
#include "provlab/goal_measure.hpp"
#include "provlab/metric_space.hpp"

namespace provlab {

/**
Finite-horizon reachability MDP. States and per-state action sets are
enumerated; the kernel is stored as sparse stochastic rows. States may
carry goal-measure payloads, in which case the goal predicate must agree
with the payload being solved, and payload masses must respect mass_cap
when one is set.

Success is first-hit: a trajectory succeeds if it visits a goal state at
any time t <= horizon. Goal states need not be absorbing.
*/
struct MdpModel {
    std::vector<std::string> states;
    std::vector<std::vector<std::string>> actions;  // names, per state
    // kernel[x][a]: sparse row of (successor index, probability)
    std::vector<std::vector<std::vector<std::pair<int, double>>>> kernel;
    std::vector<char> goal;
    int horizon = 0;
    std::optional<double> mass_cap;
    std::optional<MetricSpace> space;   // embedding for payloads
    std::vector<GoalMeasure> payloads;  // empty, or one per state

    int num_states() const { return static_cast<int>(states.size()); }
    int num_actions(int x) const { return static_cast<int>(actions[x].size()); }
    bool is_goal(int x) const { return goal[x] != 0; }
    bool has_payloads() const { return !payloads.empty(); }
    int state_index(const std::string& name) const;

    // Shape checks plus: every kernel row sums to 1 within 1e-12 with
    // nonnegative entries; every state has an action; payload consistency.
    void validate() const;

    // Rows are renormalized on load only (tolerance 1e-9 on the raw sums);
    // computation never renormalizes silently.
    static MdpModel from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/**
Exact optimal value tables from backward induction, indexed by remaining
budget: v[b][x] for b = 0..B and q[b][x][a] for b = 1..B (index 0 unused).
amax[b][x] is the optimal action with ties broken toward the lowest index.
*/
struct ValueTables {
    int horizon = 0;
    std::vector<numvec> v;
    std::vector<std::vector<numvec>> q;
    std::vector<intvec> amax;  // [b][x]
};

// Backward induction: v[0] = goal indicator; q[b][x][a] = sum P * v[b-1];
// v[b][x] = goal(x) ? 1 : max_a q[b][x][a]. Throws on invalid kernels.
ValueTables solve_exact(const MdpModel& model);

/**
Markov policy indexed by remaining budget: dist[b][x] is a distribution
over the actions of state x used when b steps remain (b = 1..B; index 0
unused). Deterministic policies are point masses.
*/
struct PolicyTable {
    std::vector<std::vector<numvec>> dist;

    void validate(const MdpModel& model) const;
    static PolicyTable deterministic(const MdpModel& model,
                                     const std::vector<intvec>& choice);  // [b][x]
};

// The optimal deterministic policy read off the argmax table.
PolicyTable optimal_policy(const MdpModel& model, const ValueTables& tables);

// Exact policy value by the same backward recursion with the max replaced
// by the policy mixture; result[b][x] for b = 0..B.
std::vector<numvec> evaluate_policy(const MdpModel& model, const PolicyTable& policy);

struct Trajectory {
    intvec states;   // visited states, ending at first goal hit or horizon
    intvec actions;  // one fewer than states
    bool success = false;
};

// Monte Carlo rollout, deterministic given the seed.
Trajectory simulate(const MdpModel& model, const PolicyTable& policy, int start,
                    std::uint64_t seed);

struct AttainmentReport {
    struct Violation {
        int b;
        int x;
        double diff;
    };
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

// Re-scan of the q tables verifying that the recorded argmax attains the
// row maximum exactly at every (b, x).
AttainmentReport check_attainment(const MdpModel& model, const ValueTables& tables);

// Copy of the model with every goal state made absorbing. First-hit
// reachability values are unchanged by this rewrite.
MdpModel make_goal_absorbing(const MdpModel& model);

// states reachable from x0 in exactly t kernel steps under any action
// sequence, for t = 0..horizon
std::vector<intvec> reachable_sets(const MdpModel& model, int x0);

}  // namespace provlab
