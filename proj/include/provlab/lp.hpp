#pragma once

#include "provlab/defs.hpp"

namespace provlab {

struct LpResult {
    double objective = 0.0;
    numvec x;
    int iterations = 0;
};

/**
Dense tableau simplex for small linear programs in the standard form

    maximize c^T x   subject to   A x <= rhs,   x >= 0,   rhs >= 0.

The all-slack basis is feasible because rhs >= 0, so no phase-1 is needed.
Dantzig pricing with a Bland fallback after a run of degenerate pivots
guards against cycling. Intended for desk-scale problems (a few hundred
rows); no attempt is made at sparse or revised variants.
*/
LpResult simplex_max(const std::vector<numvec>& a, const numvec& rhs, const numvec& c);

}  // namespace provlab
