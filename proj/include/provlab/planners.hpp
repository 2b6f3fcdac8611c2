#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "provlab/defs.hpp"
#include "provlab/mdp.hpp"

namespace provlab {

/**
Per-depth score functions h_b(x, a) guiding action selection, indexed by
remaining budget b = 1..B. Backed either by a tabular array or by an
arbitrary callable (e.g. a fitted estimator). declared_eps[b], when
present, claims sup_{reachable (x,a)} |h_b - q_b*| <= declared_eps[b];
the claim is checkable against solved tables.
*/
class ScoreFunction {
public:
    static ScoreFunction tabular(std::vector<std::vector<numvec>> values,
                                 std::optional<numvec> declared_eps = std::nullopt);
    static ScoreFunction from_callable(int horizon,
                                       std::function<double(int, int, int)> fn,
                                       std::optional<numvec> declared_eps = std::nullopt);

    double at(int b, int x, int a) const {
        return tabular_ ? values_[b][x][a] : fn_(b, x, a);
    }
    int horizon() const { return horizon_; }
    const std::optional<numvec>& declared_eps() const { return declared_eps_; }

private:
    bool tabular_ = true;
    int horizon_ = 0;
    std::vector<std::vector<numvec>> values_;  // [b][x][a], b = 1..B
    std::function<double(int, int, int)> fn_;
    std::optional<numvec> declared_eps_;  // [b], 1-based; [0] unused
};

// q_star plus independent uniform(-eps, eps) noise per entry, clipped to
// [0, 1]. Clipping preserves the sup-error bound since q_star lies in
// [0, 1], so declared_eps is set to eps at every depth.
ScoreFunction perturb_scores(const MdpModel& model, const ValueTables& tables,
                             double eps, std::uint64_t seed);

// Checks declared_eps over the reachable domain: at remaining budget b the
// relevant states are those reachable from x0 in exactly horizon-b steps.
bool verify_declared_eps(const MdpModel& model, const ValueTables& tables,
                         const ScoreFunction& scores, int x0);

// Deterministic argmax policy; ties toward the lowest action index.
PolicyTable greedy_policy(const MdpModel& model, const ScoreFunction& scores);

enum class TopkTie { uniform, exact_best };

/**
Restricts each (b, x) to the k highest-scoring actions. `uniform`
randomizes over the retained set; `exact_best` puts all mass on the
retained action with the best true q value (requires tables) and is the
object tracked by the fast-rate analysis, which assumes the retained set
is exploited. Throws if k exceeds some state's action count.
*/
PolicyTable topk_policy(const MdpModel& model, const ScoreFunction& scores, int k,
                        TopkTie tie, const ValueTables* tables = nullptr);

struct BeamNode {
    int depth;   // number of steps taken to reach this node
    int state;
    int parent;  // index into the node list; -1 for the root
    int action;  // action taken from the parent; -1 for the root
    double score;
};

struct BeamResult {
    bool success = false;
    std::vector<BeamNode> expanded;
};

/**
Depth-synchronous beam over sampled successors: at each depth all
(node, action) expansions are ranked by score, the `width` best are kept,
and one successor is sampled per survivor. Success means some node hits
the goal within the horizon. Deterministic given the seed.
*/
BeamResult beam_search(const MdpModel& model, const ScoreFunction& scores, int width,
                       int start, std::uint64_t seed);

struct RegretReport {
    double regret = 0.0;        // v*_B(x0) - V^pi_B(x0), exact
    double bound = 0.0;         // 2 * sum_b eps_b
    bool bound_asserted = false;  // false when declared_eps is absent/unverified
    bool holds = false;         // regret <= bound + 1e-9
};

// Regret of the greedy policy induced by `scores`, measured against the
// exact tables. The bound is asserted only when declared_eps verifies.
RegretReport measure_regret(const MdpModel& model, const ValueTables& tables,
                            const ScoreFunction& scores, int x0);

struct OccupancySample {
    int depth = 1;  // law of the state where the depth-th action is chosen
    numvec weights;
    bool conditioned_on_alive = false;
};

/**
Exact forward push of q0 through the kernel under the policy. depth = b
returns the law of X_{b-1}. With alive_only the law is conditioned on no
goal hit before depth b (renormalized); a zero-probability conditioning
event is an error.
*/
OccupancySample occupancy(const MdpModel& model, const PolicyTable& policy,
                          const numvec& q0, int depth, bool alive_only);

struct MarginStats {
    int k = 1;
    struct Sample {
        int depth;
        int state;
        double gap;     // +infinity when the state has <= k actions
        double weight;
    };
    std::vector<Sample> samples;
    double fitted_c = 0.0;
    double fitted_beta = 0.0;
    double t_min = 0.0, t_max = 0.0;
    bool no_small_margin_mass = false;  // empirical CDF vanished on the range
    bool fit_ok = false;
    std::string note;
};

/**
(k+1)-gaps of the q rows weighted by occupancy, with a log-log fit of the
empirical tail CDF over [t_min, t_max]. States with at most k actions
contribute an infinite gap and are excluded from the tail fit. The fit is
refused (fit_ok = false) with fewer than 20 distinct gap values in range.
The gap at occupancy depth b uses the q table at remaining budget
B - b + 1, the table actually consulted by a policy at that decision.
*/
MarginStats margin_stats(const MdpModel& model, const ValueTables& tables,
                         const std::vector<OccupancySample>& occ, int k,
                         std::pair<double, double> fit_range);

struct FastRateRow {
    double epsilon;
    double mean_regret;
    double stddev;
    int trials;
    double bound;
};

/**
For each eps in the grid: perturb q_star, build the exact-best top-k
policy, and average the exact regret (weighted by q0) over `trials`
independent perturbations. The bound column reports
sum_b 2 eps * min(1, C (2 eps)^beta) with the fitted margin constants
when provided, else the worst-case 2 B eps.
*/
std::vector<FastRateRow> fast_rate_experiment(const MdpModel& model, const numvec& q0,
                                              const ValueTables& tables, int k,
                                              const numvec& eps_grid, int trials,
                                              std::uint64_t seed,
                                              const MarginStats* margin = nullptr);

}  // namespace provlab
