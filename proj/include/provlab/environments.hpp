#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "provlab/defs.hpp"
#include "provlab/mdp.hpp"

namespace provlab {

// Desk-scale guardrails; generation fails rather than warns beyond these.
constexpr int kMaxStates = 10000;
constexpr int kMaxActionsPerState = 16;
constexpr int kMaxHorizon = 20;

enum class EnvFamily { split_close_tree, layered_dag, margin_designed, overflow_chain };

struct MarginProfile {
    enum class Kind { uniform_gaps, constant_gap, mixed };
    Kind kind = Kind::uniform_gaps;
    double gap = 0.3;  // constant_gap only
};

struct GoalGeometry {
    std::vector<int> dims{8, 8};
    double spacing = 0.125;
    MetricSpace::GridMetric metric = MetricSpace::GridMetric::sup;
};

/**
Generator knobs for the synthetic proof-search families.

  split_close_tree  goal tree of the given branching/depth; the selected
                    goal must be split (internal) or closed (leaf); the
                    wrong action is a no-op and `noise` is the chance the
                    right action stalls. branching 1 is a bare close-chain
                    of `depth` goals. Horizon fixed at 20.
  layered_dag       depth layers of `branching` states ending in solved /
                    dead; each action has a designated successor mixed
                    with spread `noise`. Horizon = depth.
  margin_designed   `branching` parallel chains of `depth` decision
                    layers; at each layer a safe advance competes with a
                    risky advance that dies with probability equal to the
                    designed action gap, so the q gaps realize the margin
                    profile exactly. uniform_gaps lays the gaps on the
                    uniform grid over (0,1); mixed lays them on a
                    geometric ladder (no-margin, scale-free). Requires
                    noise 0. Horizon = depth.
  overflow_chain    payload-mass random walk from mass 2: split (+1) with
                    probability `noise`, close (-1) otherwise; mass 0 is
                    solved. Horizon = depth.
*/
struct EnvSpec {
    EnvFamily family = EnvFamily::layered_dag;
    int branching = 2;
    int depth = 3;
    double noise = 0.0;
    GoalGeometry goal_geometry;
    MarginProfile margin_profile;
    std::uint64_t seed = 0;

    static EnvSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct InstanceDistribution {
    numvec weights;  // per state, sums to 1

    void validate() const;
    // highest-weight state, lowest index on ties
    int top() const;
};

struct EnvInstance {
    MdpModel model;
    InstanceDistribution start;
};

// Deterministic given spec.seed. Generated states carry goal-measure
// payloads over the configured grid; goal(x) iff the payload is solved.
EnvInstance generate(const EnvSpec& spec);

// E_{x0 ~ dist}[ v[B](x0) ] -- works for optimal tables or any policy row.
double statistical_provability(const MdpModel& model, const InstanceDistribution& dist,
                               const ValueTables& tables);
double statistical_provability(const InstanceDistribution& dist, const numvec& value_row);

}  // namespace provlab
