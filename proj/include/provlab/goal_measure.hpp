#pragma once

#include <json.hpp>

#include <utility>
#include <vector>

#include "provlab/defs.hpp"
#include "provlab/metric_space.hpp"

namespace provlab {

/**
A finite positive atomic measure over points of a metric space: the open
goals of a proof state. The empty measure is the solved state. Atoms are
keyed by point index; duplicates merge by summing weights, and merging
happens only on exact index identity, never by distance.
*/
class GoalMeasure {
public:
    GoalMeasure() = default;  // the zero measure

    // Atoms with nonpositive weight are rejected.
    explicit GoalMeasure(std::vector<std::pair<int, double>> atoms);

    const std::vector<std::pair<int, double>>& support() const { return support_; }
    double mass() const { return total_mass_; }
    bool solved() const { return support_.empty(); }

    bool operator==(const GoalMeasure&) const = default;

    // JSON list of {"point": name-or-index, "weight": w}
    static GoalMeasure from_json(const nlohmann::json& j, const MetricSpace& space);
    nlohmann::json to_json(const MetricSpace& space) const;

private:
    std::vector<std::pair<int, double>> support_;  // sorted by point index
    double total_mass_ = 0.0;
};

/**
Optimal test function for the bounded-Lipschitz distance: values f(p) on
the union support with |f| <= 1 and |f(p) - f(q)| <= d(p, q), together
with the attained objective sum((mu - mu')(p) * f(p)).
*/
struct BLWitness {
    std::vector<std::pair<int, double>> values;  // (point index, f value)
    double objective = 0.0;
};

/**
Exact bounded-Lipschitz distance between two finitely supported measures,
solved as a linear program over the union support:

    maximize  sum_i c_i f_i   over  |f_i| <= 1,  |f_i - f_j| <= d(p_i, p_j),

where c is the signed weight vector of a - b. Returns the optimum and an
optimal witness; the witness is feasible and re-checkable independently.
The union support is put in canonical (sorted) order and the sign of c is
canonicalized first, so the result is invariant under reordering of the
inputs and exactly symmetric in (a, b).
*/
std::pair<double, BLWitness> bl_distance(const GoalMeasure& a, const GoalMeasure& b,
                                         const MetricSpace& space);

}  // namespace provlab
