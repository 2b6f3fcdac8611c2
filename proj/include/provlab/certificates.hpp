#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "provlab/defs.hpp"
#include "provlab/mdp.hpp"

namespace provlab {

class ScoreFunction;  // planners.hpp

// One-step optimal reachability backup:
// (Tv)(x) = max(goal(x), max_a sum_y P(y|x,a) v(y)).
// Input values must lie in [0, 1].
numvec bellman_apply(const MdpModel& model, const numvec& v);

enum class CertSide { lower, upper };

/**
A per-depth function sequence funcs[b][x] (b = 0..B) claimed to be a
super-solution (upper) or sub-solution (lower) of the reachability backup.
validate_certificate fills `valid` and the signed violation list.
*/
struct CertificateSequence {
    CertSide side = CertSide::upper;
    std::vector<numvec> funcs;  // [b][x], b = 0..B
    bool valid = false;

    struct Violation {
        int b;
        int state;
        double slack;  // signed; negative slack = inequality broken by |slack|
    };
    std::vector<Violation> violations;
};

// Checks the side's inequalities pointwise with tolerance 1e-12:
// upper: funcs[0] >= goal indicator and funcs[b+1] >= T funcs[b];
// lower: both reversed.
CertificateSequence validate_certificate(const MdpModel& model, CertificateSequence cert);

enum class CertStatus { ok, invalid_lower, invalid_upper, both_invalid };

struct CertificateResult {
    int state = 0;  // initial state the interval refers to
    double lower = 0.0;
    double upper = 1.0;
    double gap = 1.0;
    CertStatus status = CertStatus::ok;
    bool premise_violated = false;  // score error exceeded the declared eps
    std::vector<CertificateSequence::Violation> violations;

    // model_id, x0, lower, upper, gap, valid_lower, valid_upper
    std::string csv_row(const std::string& model_id, const std::string& x0_name) const;
};

/**
Interval for the optimal value at x0 built from score functions with
declared per-depth accuracy eps[b] (1-based):

    U_b(x) = goal(x) ? 1 : clip(max_a h_b(x,a) + eps_b)
    L_b(x) = goal(x) ? 1 : clip(max_a h_b(x,a) - eps_b)

The gap never exceeds 2*eps_B. When `tables` is supplied, the declared
accuracy is checked over the pairs reachable from x0; if the check fails
the interval is still returned but flagged premise_violated, since the
sandwich guarantee is conditional on the accuracy premise.
*/
CertificateResult score_certificate(const MdpModel& model, const ScoreFunction& scores,
                                    const numvec& eps, int x0,
                                    const ValueTables* tables = nullptr);

// Combines validated sequences into an interval at x0. If either side is
// invalid the result carries an error status and the violation list
// instead of a bound claim.
CertificateResult certify_sandwich(const MdpModel& model,
                                   const CertificateSequence& lower,
                                   const CertificateSequence& upper, int x0);

// Convenience constructors for the extreme certificates.
CertificateSequence trivial_upper(const MdpModel& model);
CertificateSequence trivial_lower(const MdpModel& model);

// Randomized valid pair built by relaxing the exact backup with
// nonnegative slacks: U_{b+1} = min(1, T U_b + s), L_{b+1} = max(0, T L_b - s).
// Both sequences validate by construction.
std::pair<CertificateSequence, CertificateSequence> relaxed_certificate_pair(
    const MdpModel& model, double max_slack, std::uint64_t seed);

}  // namespace provlab
