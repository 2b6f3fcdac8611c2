#include "provlab/truncation.hpp"

#include <cmath>
#include <stdexcept>

namespace provlab {

TruncatedModel truncate(const MdpModel& m, double w, const intvec& starts) {
    if (!m.has_payloads())
        throw std::invalid_argument("truncate: model states carry no goal-measure payloads");
    for (int x : starts)
        if (m.payloads[x].mass() > w)
            throw std::invalid_argument("truncate: start state '" + m.states[x] +
                                        "' exceeds the cap");

    TruncatedModel tm;
    tm.cap = w;
    tm.to_trunc.assign(m.num_states(), -1);
    int next = 0;
    for (int x = 0; x < m.num_states(); ++x) {
        if (m.payloads[x].mass() <= w)
            tm.to_trunc[x] = next++;
        else
            tm.removed.push_back(x);
    }
    tm.sink = next;

    MdpModel& out = tm.model;
    out.horizon = m.horizon;
    out.mass_cap = w;
    out.space = m.space;
    for (int x = 0; x < m.num_states(); ++x) {
        if (tm.to_trunc[x] < 0) continue;
        out.states.push_back(m.states[x]);
        out.actions.push_back(m.actions[x]);
        out.goal.push_back(m.goal[x]);
        out.payloads.push_back(m.payloads[x]);
        std::vector<std::vector<std::pair<int, double>>> rows;
        for (const auto& row : m.kernel[x]) {
            std::vector<std::pair<int, double>> nr;
            double overflow = 0.0;
            for (const auto& [y, p] : row) {
                if (tm.to_trunc[y] >= 0)
                    nr.emplace_back(tm.to_trunc[y], p);
                else
                    overflow += p;
            }
            if (overflow > 0.0) nr.emplace_back(tm.sink, overflow);
            rows.push_back(std::move(nr));
        }
        out.kernel.push_back(std::move(rows));
    }
    // the absorbing failure sink
    out.states.push_back("__sink__");
    out.actions.push_back({"stay"});
    out.goal.push_back(0);
    out.payloads.push_back(GoalMeasure({{0, 1.0}}));
    out.kernel.push_back({{{tm.sink, 1.0}}});
    out.validate();
    return tm;
}

PolicyTable transplant_policy(const TruncatedModel& tm, const PolicyTable& policy) {
    const MdpModel& out = tm.model;
    PolicyTable pt;
    pt.dist.assign(out.horizon + 1, {});
    for (int b = 1; b <= out.horizon; ++b) {
        pt.dist[b].assign(out.num_states(), {});
        for (std::size_t x = 0; x < tm.to_trunc.size(); ++x)
            if (tm.to_trunc[x] >= 0) pt.dist[b][tm.to_trunc[x]] = policy.dist[b][x];
        pt.dist[b][tm.sink] = {1.0};
    }
    return pt;
}

double overflow_probability(const MdpModel& m, const PolicyTable& policy, int x0, double w) {
    if (!m.has_payloads())
        throw std::invalid_argument("overflow_probability: model has no payloads");
    policy.validate(m);
    const int S = m.num_states();

    numvec masses(S, 0.0);
    for (int x = 0; x < S; ++x) masses[x] = m.payloads[x].mass();

    // forward push over (state, sticky flag); flagged mass can be pooled
    // because the flag is absorbing
    numvec alive(S, 0.0);  // unflagged
    double flagged = 0.0;
    if (masses[x0] > w)
        flagged = 1.0;
    else
        alive[x0] = 1.0;

    for (int t = 1; t <= m.horizon; ++t) {
        const int rem = m.horizon - (t - 1);
        numvec next(S, 0.0);
        for (int x = 0; x < S; ++x) {
            if (alive[x] == 0.0) continue;
            for (int a = 0; a < m.num_actions(x); ++a) {
                const double pa = policy.dist[rem][x][a];
                if (pa == 0.0) continue;
                for (const auto& [y, p] : m.kernel[x][a]) next[y] += alive[x] * pa * p;
            }
        }
        for (int y = 0; y < S; ++y) {
            if (masses[y] > w) {
                flagged += next[y];
                next[y] = 0.0;
            }
        }
        alive = std::move(next);
    }
    return flagged;
}

TruncationCheck verify_truncation_bound(const MdpModel& m, const PolicyTable& policy,
                                        int x0, double w) {
    TruncationCheck chk;
    chk.v_true = evaluate_policy(m, policy)[m.horizon][x0];
    const TruncatedModel tm = truncate(m, w, {x0});
    const PolicyTable tp = transplant_policy(tm, policy);
    chk.v_trunc = evaluate_policy(tm.model, tp)[m.horizon][tm.to_trunc[x0]];
    chk.delta_w = overflow_probability(m, policy, x0, w);
    chk.holds = chk.v_true >= chk.v_trunc - chk.delta_w - 1e-12;
    chk.coupled_holds = chk.v_true >= chk.v_trunc;
    return chk;
}

}  // namespace provlab
