#pragma once

#include "provlab/defs.hpp"
#include "provlab/mdp.hpp"

namespace provlab {

/**
Mass-cap truncation: states whose payload mass exceeds the cap are removed
and all probability into them is rerouted to an absorbing non-goal sink,
so the truncated model is an ordinary model solvable by the same oracle.
`to_trunc` maps base state indices to truncated ones (-1 for removed).
*/
struct TruncatedModel {
    MdpModel model;
    double cap = 0.0;
    int sink = -1;
    intvec to_trunc;
    intvec removed;
};

// Requires payloads. Any states listed in `starts` must be under the cap.
TruncatedModel truncate(const MdpModel& model, double w, const intvec& starts = {});

// Carries a base-model policy over to the truncated model; the sink gets
// its single action.
PolicyTable transplant_policy(const TruncatedModel& tm, const PolicyTable& policy);

/**
Exact probability that the payload-mass process exceeds w at some time
t <= horizon, starting from x0 under the policy. Computed by a forward
push over (state, sticky overflow flag); max-exceedance is a first-hit
event, so the flag never needs the running maximum itself.
*/
double overflow_probability(const MdpModel& model, const PolicyTable& policy, int x0,
                            double w);

struct TruncationCheck {
    double v_true = 0.0;
    double v_trunc = 0.0;
    double delta_w = 0.0;    // overflow probability
    bool holds = false;      // v_true >= v_trunc - delta_w (tolerance 1e-12)
    bool coupled_holds = false;  // the stronger coupled fact v_true >= v_trunc
};

TruncationCheck verify_truncation_bound(const MdpModel& model, const PolicyTable& policy,
                                        int x0, double w);

}  // namespace provlab
