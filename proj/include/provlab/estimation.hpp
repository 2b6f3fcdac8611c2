#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "provlab/defs.hpp"
#include "provlab/mdp.hpp"
#include "provlab/metric_space.hpp"
#include "provlab/planners.hpp"

namespace provlab {

/**
The (state, action) domain carrying the estimation metric
d((x,a),(x',a')) = d_state(x,x') + d_action(a,a'). By default d_state is
the bounded-Lipschitz distance between the states' goal-measure payloads
and d_action is the 0/1 metric on action names; explicit matrices may be
supplied instead.
*/
struct PairDomain {
    std::vector<std::pair<int, int>> pairs;  // (state, action)
    MetricSpace space;                       // metric over the pair list

    int size() const { return static_cast<int>(pairs.size()); }
    int index_of(int x, int a) const;
};

// Builds the pair domain over the given states (all non-goal states when
// `include` is empty) using payload BL distances. Requires payloads.
PairDomain pair_domain_from_payloads(const MdpModel& model, const intvec& include = {});

// Same with explicit state distances; d_action defaults to 0/1 on names.
PairDomain pair_domain_from_matrix(const MdpModel& model,
                                   const std::vector<numvec>& d_state,
                                   const intvec& include = {});

struct RolloutRecord {
    int depth;
    int state;
    int action;
    int label;  // 1 if the goal was hit within the budget
    std::uint64_t seed;
};

struct RolloutDataset {
    int depth = 1;
    int m = 0;  // replicates per pair
    std::string continuation;
    std::vector<RolloutRecord> records;

    // CSV: b,state,action,y,seed
    void write_csv(std::ostream& os) const;
};

/**
Monte Carlo labels for the action value at the given depth: apply the
action once, then follow the continuation policy for at most depth-1
further steps; the label is 1 iff a goal state is hit. The labels are
unbiased for the continuation policy's action value, which equals the
optimal q only when the continuation is optimal.
*/
RolloutDataset rollout_labels(const MdpModel& model, const PolicyTable& continuation,
                              int depth, const std::vector<std::pair<int, int>>& pairs,
                              int m, std::uint64_t seed,
                              std::string continuation_id = "policy");

/**
Net regression estimator: mean labels on the centers of an eta-net,
extended to the whole domain by the upper McShane extension

    h(z) = clip( min_i ( q_hat_i + lip * d(z, center_i) ) ).

The lower extension would do equally well; the upper one is fixed for
determinism. The extension is lip-Lipschitz by construction and may pull
a center below its own mean; that interpolation slack is recorded.
*/
struct NetEstimator {
    std::shared_ptr<const PairDomain> domain;
    EpsNet net;
    numvec q_hat;        // per center
    numvec center_slack; // q_hat_i - h(center_i), >= 0
    double lip = 0.0;
    int m = 0;
};

// Labels must cover every net center with the same replicate count.
NetEstimator fit_net_estimator(std::shared_ptr<const PairDomain> domain,
                               const RolloutDataset& labels, double eta, double lip);

double evaluate_estimator(const NetEstimator& est, int pair_index);

// eps_app + (L_H + L_Q) * eta + sqrt(log(2N / delta) / (2m))
double uniform_error_bound(const NetEstimator& est, double eps_app, double lip_target,
                           double delta);

// Largest |v(z) - v(z')| / d(z, z') over distinct pairs of the domain.
double lipschitz_constant(const PairDomain& domain, const numvec& values);

// Max |estimator - truth| over the whole domain, by enumeration.
double sup_error(const NetEstimator& est, const numvec& truth);

// Wraps a single-depth estimator (or one per depth) as a score function.
ScoreFunction estimator_scores(const MdpModel& model,
                               const std::vector<NetEstimator>& per_depth,
                               std::optional<numvec> declared_eps = std::nullopt);

struct CoverageReport {
    int trials = 0;
    int covered = 0;
    double fraction = 0.0;
    double threshold = 0.0;  // 1 - delta - 3 sqrt(delta (1-delta) / trials)
    bool pass = false;
    double mean_statistic = 0.0;  // mean sup-error / deviation over trials
    double mean_bound = 0.0;

    nlohmann::json to_json() const;
};

struct UniformBoundConfig {
    int depth = 1;
    double eta = 0.1;
    double lip = -1.0;  // <= 0: use the measured Lipschitz constant of the target
    int m = 100;
    double delta = 0.05;
    int trials = 500;
};

/**
Coverage experiment for the explicit uniform bound: over `trials`
independently labeled datasets (optimal continuation, so the labels are
unbiased for q*), the fraction of trials whose enumerated sup-error stays
within uniform_error_bound must be at least 1 - delta minus three
binomial standard deviations.
*/
CoverageReport verify_uniform_bound(const MdpModel& model, const ValueTables& tables,
                                    std::shared_ptr<const PairDomain> domain,
                                    const UniformBoundConfig& cfg, std::uint64_t seed);

/**
An adapted process on a finite point set: a Markov chain whose rows are
arbitrary distributions, so conditional expectations given the past are
exact kernel averages.
*/
struct ProcessSpec {
    std::vector<numvec> kernel;  // row-stochastic
    int start = 0;

    static ProcessSpec iid_coin();
    static ProcessSpec random_chain(int size, std::uint64_t seed);
};

struct AdaptiveDeviationConfig {
    int n = 1000;
    double eps = 0.0;  // net radius of the function class; 0 for a finite class
    double delta = 0.05;
    int trials = 500;
};

/**
Simulates the adapted process and measures, per trial,

    sup_f | n^-1 sum_t ( f(Z_t) - E[f(Z_t) | Z_{t-1}] ) |

with the conditional means computed exactly from the kernel, then reports
how often the martingale deviation bound
2 eps + sqrt((2 log N + 2 log(2/delta)) / n) covers it.
*/
CoverageReport adaptive_deviation_experiment(const ProcessSpec& process,
                                             const std::vector<numvec>& functions,
                                             const AdaptiveDeviationConfig& cfg,
                                             std::uint64_t seed);

}  // namespace provlab
