#include "provlab/goal_measure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "provlab/lp.hpp"

namespace provlab {

GoalMeasure::GoalMeasure(std::vector<std::pair<int, double>> atoms) {
    std::map<int, double> merged;
    for (const auto& [p, w] : atoms) {
        if (p < 0) throw std::invalid_argument("GoalMeasure: negative point index");
        if (!(w > 0.0)) throw std::invalid_argument("GoalMeasure: weights must be positive");
        merged[p] += w;
    }
    support_.assign(merged.begin(), merged.end());
    total_mass_ = 0.0;
    for (const auto& [p, w] : support_) total_mass_ += w;
}

GoalMeasure GoalMeasure::from_json(const nlohmann::json& j, const MetricSpace& space) {
    std::vector<std::pair<int, double>> atoms;
    for (const auto& e : j) {
        int idx;
        const auto& p = e.at("point");
        if (p.is_number_integer()) {
            idx = p.get<int>();
        } else {
            idx = space.index_of(p.get<std::string>());
            if (idx < 0)
                throw std::invalid_argument("GoalMeasure: unknown point '" +
                                            p.get<std::string>() + "'");
        }
        atoms.emplace_back(idx, e.at("weight").get<double>());
    }
    return GoalMeasure(std::move(atoms));
}

nlohmann::json GoalMeasure::to_json(const MetricSpace& space) const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& [p, w] : support_) {
        j.push_back({{"point", space.name(p)}, {"weight", w}});
    }
    return j;
}

std::pair<double, BLWitness> bl_distance(const GoalMeasure& a, const GoalMeasure& b,
                                         const MetricSpace& space) {
    // union support, canonical order, signed weights c = a - b
    std::map<int, double> signed_w;
    for (const auto& [p, w] : a.support()) signed_w[p] += w;
    for (const auto& [p, w] : b.support()) signed_w[p] -= w;
    for (const auto& [p, w] : signed_w) {
        (void)w;
        if (p >= space.size())
            throw std::invalid_argument("bl_distance: support point outside the space");
    }

    const int n = static_cast<int>(signed_w.size());
    BLWitness wit;
    if (n == 0) return {0.0, wit};

    intvec points;
    numvec c;
    points.reserve(n);
    c.reserve(n);
    for (const auto& [p, w] : signed_w) {
        points.push_back(p);
        c.push_back(w);
    }

    // canonical sign: flip c so its first nonzero entry is positive; the
    // feasible set is symmetric under f -> -f, so the optimum is unchanged
    // and both argument orders run the identical pivot sequence
    bool flipped = false;
    for (double w : c) {
        if (w != 0.0) {
            flipped = (w < 0.0);
            break;
        }
    }
    if (flipped)
        for (double& w : c) w = -w;

    // substitute u = f + 1 in [0, 2]: maximize c.u s.t. u_i - u_j <= d_ij,
    // u_i <= 2, u >= 0; all right-hand sides are nonnegative
    std::vector<numvec> rows;
    numvec rhs;
    for (int i = 0; i < n; ++i) {
        numvec row(n, 0.0);
        row[i] = 1.0;
        rows.push_back(std::move(row));
        rhs.push_back(2.0);
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d = space.dist(points[i], points[j]);
            if (d >= 2.0) continue;  // implied by the box constraints
            numvec row(n, 0.0);
            row[i] = 1.0;
            row[j] = -1.0;
            rows.push_back(row);
            rhs.push_back(d);
            row[i] = -1.0;
            row[j] = 1.0;
            rows.push_back(std::move(row));
            rhs.push_back(d);
        }
    }

    const LpResult lp = simplex_max(rows, rhs, c);

    double objective = 0.0;
    wit.values.reserve(n);
    for (int i = 0; i < n; ++i) {
        double f = lp.x[i] - 1.0;
        objective += c[i] * f;
        if (flipped) f = -f;
        wit.values.emplace_back(points[i], f);
    }
    wit.objective = objective;
    return {objective, wit};
}

}  // namespace provlab
