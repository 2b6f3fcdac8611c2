#include "provlab/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "provlab/rng.hpp"

namespace provlab {

int MdpModel::state_index(const std::string& name) const {
    for (int i = 0; i < num_states(); ++i)
        if (states[i] == name) return i;
    return -1;
}

void MdpModel::validate() const {
    const int n = num_states();
    if (static_cast<int>(actions.size()) != n || static_cast<int>(kernel.size()) != n ||
        static_cast<int>(goal.size()) != n)
        throw std::invalid_argument("MdpModel: field sizes disagree");
    if (horizon < 0) throw std::invalid_argument("MdpModel: negative horizon");
    for (int x = 0; x < n; ++x) {
        if (actions[x].empty())
            throw std::invalid_argument("MdpModel: state '" + states[x] + "' has no actions");
        if (kernel[x].size() != actions[x].size())
            throw std::invalid_argument("MdpModel: kernel/action mismatch at state " +
                                        std::to_string(x));
        for (std::size_t a = 0; a < kernel[x].size(); ++a) {
            double sum = 0.0;
            for (const auto& [y, p] : kernel[x][a]) {
                if (y < 0 || y >= n)
                    throw std::invalid_argument("MdpModel: successor index out of range");
                if (p < 0.0)
                    throw std::invalid_argument("MdpModel: negative transition probability");
                sum += p;
            }
            if (std::abs(sum - 1.0) > kKernelTol)
                throw std::invalid_argument("MdpModel: non-stochastic kernel row at (" +
                                            states[x] + ", " + actions[x][a] + ")");
        }
    }
    if (has_payloads()) {
        if (static_cast<int>(payloads.size()) != n)
            throw std::invalid_argument("MdpModel: payload count mismatch");
        for (int x = 0; x < n; ++x) {
            if (payloads[x].solved() != is_goal(x))
                throw std::invalid_argument("MdpModel: goal flag disagrees with payload at " +
                                            states[x]);
            if (mass_cap && payloads[x].mass() > *mass_cap + 1e-12)
                throw std::invalid_argument("MdpModel: payload mass exceeds cap at " + states[x]);
        }
    }
}

MdpModel MdpModel::from_json(const nlohmann::json& j) {
    MdpModel m;
    m.states = j.at("states").get<std::vector<std::string>>();
    m.actions = j.at("actions").get<std::vector<std::vector<std::string>>>();
    m.horizon = j.at("horizon").get<int>();
    const int n = m.num_states();

    m.kernel.assign(n, {});
    for (int x = 0; x < n; ++x) m.kernel[x].assign(m.actions[x].size(), {});
    for (const auto& t : j.at("kernel")) {
        const int x = t.at(0).get<int>();
        const int a = t.at(1).get<int>();
        const int y = t.at(2).get<int>();
        const double p = t.at(3).get<double>();
        if (x < 0 || x >= n || a < 0 || a >= static_cast<int>(m.actions[x].size()))
            throw std::invalid_argument("MdpModel: kernel triplet out of range");
        m.kernel[x][a].emplace_back(y, p);
    }
    // renormalize rows on load; anything further off than 1e-9 is an error
    for (int x = 0; x < n; ++x) {
        for (auto& row : m.kernel[x]) {
            double sum = 0.0;
            for (const auto& [y, p] : row) sum += p;
            if (std::abs(sum - 1.0) > 1e-9)
                throw std::invalid_argument("MdpModel: kernel row sums to " + std::to_string(sum));
            for (auto& [y, p] : row) p /= sum;
        }
    }

    m.goal.assign(n, 0);
    for (const auto& g : j.at("goal")) {
        int idx;
        if (g.is_number_integer())
            idx = g.get<int>();
        else
            idx = m.state_index(g.get<std::string>());
        if (idx < 0 || idx >= n) throw std::invalid_argument("MdpModel: bad goal state");
        m.goal[idx] = 1;
    }

    if (j.contains("mass_cap") && !j.at("mass_cap").is_null())
        m.mass_cap = j.at("mass_cap").get<double>();
    if (j.contains("space")) m.space = MetricSpace::from_json(j.at("space"));
    if (j.contains("payloads")) {
        if (!m.space) throw std::invalid_argument("MdpModel: payloads require a space");
        for (const auto& pj : j.at("payloads"))
            m.payloads.push_back(GoalMeasure::from_json(pj, *m.space));
    }
    m.validate();
    return m;
}

nlohmann::json MdpModel::to_json() const {
    nlohmann::json j;
    j["states"] = states;
    j["actions"] = actions;
    j["horizon"] = horizon;
    nlohmann::json rows = nlohmann::json::array();
    for (int x = 0; x < num_states(); ++x)
        for (std::size_t a = 0; a < kernel[x].size(); ++a)
            for (const auto& [y, p] : kernel[x][a])
                rows.push_back({x, static_cast<int>(a), y, p});
    j["kernel"] = rows;
    nlohmann::json goals = nlohmann::json::array();
    for (int x = 0; x < num_states(); ++x)
        if (is_goal(x)) goals.push_back(x);
    j["goal"] = goals;
    if (mass_cap) j["mass_cap"] = *mass_cap;
    if (space) j["space"] = space->to_json();
    if (has_payloads()) {
        nlohmann::json ps = nlohmann::json::array();
        for (const auto& p : payloads) ps.push_back(p.to_json(*space));
        j["payloads"] = ps;
    }
    return j;
}

ValueTables solve_exact(const MdpModel& m) {
    m.validate();
    const int B = m.horizon;
    const int S = m.num_states();
    ValueTables t;
    t.horizon = B;
    t.v.assign(B + 1, numvec(S, 0.0));
    t.q.assign(B + 1, {});
    t.amax.assign(B + 1, {});
    for (int x = 0; x < S; ++x) t.v[0][x] = m.is_goal(x) ? 1.0 : 0.0;

    for (int b = 1; b <= B; ++b) {
        t.q[b].assign(S, {});
        t.amax[b].assign(S, 0);
        for (int x = 0; x < S; ++x) {
            const int na = m.num_actions(x);
            numvec& qrow = t.q[b][x];
            qrow.assign(na, 0.0);
            int best = 0;
            for (int a = 0; a < na; ++a) {
                double s = 0.0;
                for (const auto& [y, p] : m.kernel[x][a]) s += p * t.v[b - 1][y];
                qrow[a] = clip01(s);
                if (qrow[a] > qrow[best]) best = a;  // strict >: lowest index wins ties
            }
            t.amax[b][x] = best;
            t.v[b][x] = m.is_goal(x) ? 1.0 : qrow[best];
        }
    }
    return t;
}

void PolicyTable::validate(const MdpModel& m) const {
    if (static_cast<int>(dist.size()) != m.horizon + 1)
        throw std::invalid_argument("PolicyTable: horizon mismatch");
    for (int b = 1; b <= m.horizon; ++b) {
        if (static_cast<int>(dist[b].size()) != m.num_states())
            throw std::invalid_argument("PolicyTable: missing states at depth " +
                                        std::to_string(b));
        for (int x = 0; x < m.num_states(); ++x) {
            const numvec& d = dist[b][x];
            if (static_cast<int>(d.size()) != m.num_actions(x))
                throw std::invalid_argument("PolicyTable: missing entry at (" +
                                            std::to_string(b) + ", " + m.states[x] + ")");
            double sum = 0.0;
            for (double p : d) {
                if (p < 0.0) throw std::invalid_argument("PolicyTable: negative probability");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw std::invalid_argument("PolicyTable: distribution does not sum to 1");
        }
    }
}

PolicyTable PolicyTable::deterministic(const MdpModel& m, const std::vector<intvec>& choice) {
    PolicyTable pt;
    pt.dist.assign(m.horizon + 1, {});
    for (int b = 1; b <= m.horizon; ++b) {
        pt.dist[b].assign(m.num_states(), {});
        for (int x = 0; x < m.num_states(); ++x) {
            numvec d(m.num_actions(x), 0.0);
            d[choice[b][x]] = 1.0;
            pt.dist[b][x] = std::move(d);
        }
    }
    return pt;
}

PolicyTable optimal_policy(const MdpModel& m, const ValueTables& t) {
    std::vector<intvec> choice(m.horizon + 1);
    for (int b = 1; b <= m.horizon; ++b) choice[b] = t.amax[b];
    return PolicyTable::deterministic(m, choice);
}

std::vector<numvec> evaluate_policy(const MdpModel& m, const PolicyTable& policy) {
    policy.validate(m);
    const int B = m.horizon;
    const int S = m.num_states();
    std::vector<numvec> v(B + 1, numvec(S, 0.0));
    for (int x = 0; x < S; ++x) v[0][x] = m.is_goal(x) ? 1.0 : 0.0;
    for (int b = 1; b <= B; ++b) {
        for (int x = 0; x < S; ++x) {
            if (m.is_goal(x)) {
                v[b][x] = 1.0;
                continue;
            }
            double s = 0.0;
            for (int a = 0; a < m.num_actions(x); ++a) {
                const double pa = policy.dist[b][x][a];
                if (pa == 0.0) continue;
                double qa = 0.0;
                for (const auto& [y, p] : m.kernel[x][a]) qa += p * v[b - 1][y];
                s += pa * qa;
            }
            v[b][x] = clip01(s);
        }
    }
    return v;
}

namespace {

int sample_row(const std::vector<std::pair<int, double>>& row, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (const auto& [y, p] : row) {
        acc += p;
        if (u < acc) return y;
    }
    return row.back().first;
}

}  // namespace

Trajectory simulate(const MdpModel& m, const PolicyTable& policy, int start,
                    std::uint64_t seed) {
    if (start < 0 || start >= m.num_states())
        throw std::invalid_argument("simulate: bad start state");
    Rng rng(Rng::derive(seed, 0x5e55a9u));
    Trajectory tr;
    int x = start;
    tr.states.push_back(x);
    for (int b = m.horizon; b >= 1; --b) {
        if (m.is_goal(x)) break;
        const int a = rng.sample(policy.dist[b][x]);
        x = sample_row(m.kernel[x][a], rng);
        tr.actions.push_back(a);
        tr.states.push_back(x);
    }
    tr.success = m.is_goal(tr.states.back());
    return tr;
}

AttainmentReport check_attainment(const MdpModel& m, const ValueTables& t) {
    AttainmentReport rep;
    for (int b = 1; b <= t.horizon; ++b) {
        for (int x = 0; x < m.num_states(); ++x) {
            double mx = t.q[b][x][0];
            for (double qa : t.q[b][x]) mx = std::max(mx, qa);
            const double got = t.q[b][x][t.amax[b][x]];
            if (got != mx) rep.violations.push_back({b, x, mx - got});
        }
    }
    return rep;
}

MdpModel make_goal_absorbing(const MdpModel& m) {
    MdpModel out = m;
    for (int x = 0; x < m.num_states(); ++x) {
        if (!m.is_goal(x)) continue;
        for (auto& row : out.kernel[x]) row = {{x, 1.0}};
    }
    return out;
}

std::vector<intvec> reachable_sets(const MdpModel& m, int x0) {
    std::vector<intvec> out(m.horizon + 1);
    std::set<int> frontier{x0};
    out[0] = {x0};
    for (int t = 1; t <= m.horizon; ++t) {
        std::set<int> next;
        for (int x : frontier)
            for (const auto& row : m.kernel[x])
                for (const auto& [y, p] : row)
                    if (p > 0.0) next.insert(y);
        out[t].assign(next.begin(), next.end());
        frontier = std::move(next);
    }
    return out;
}

}  // namespace provlab
