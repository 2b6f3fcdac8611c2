#include "provlab/planners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "provlab/rng.hpp"

namespace provlab {

ScoreFunction ScoreFunction::tabular(std::vector<std::vector<numvec>> values,
                                     std::optional<numvec> declared_eps) {
    ScoreFunction s;
    s.tabular_ = true;
    s.horizon_ = static_cast<int>(values.size()) - 1;
    s.values_ = std::move(values);
    s.declared_eps_ = std::move(declared_eps);
    return s;
}

ScoreFunction ScoreFunction::from_callable(int horizon,
                                           std::function<double(int, int, int)> fn,
                                           std::optional<numvec> declared_eps) {
    ScoreFunction s;
    s.tabular_ = false;
    s.horizon_ = horizon;
    s.fn_ = std::move(fn);
    s.declared_eps_ = std::move(declared_eps);
    return s;
}

ScoreFunction perturb_scores(const MdpModel& m, const ValueTables& t, double eps,
                             std::uint64_t seed) {
    Rng rng(Rng::derive(seed, 0x5c02e5u));
    std::vector<std::vector<numvec>> h(t.horizon + 1);
    for (int b = 1; b <= t.horizon; ++b) {
        h[b].assign(m.num_states(), {});
        for (int x = 0; x < m.num_states(); ++x) {
            h[b][x].assign(m.num_actions(x), 0.0);
            for (int a = 0; a < m.num_actions(x); ++a)
                h[b][x][a] = clip01(t.q[b][x][a] + rng.uniform(-eps, eps));
        }
    }
    numvec declared(t.horizon + 1, eps);
    declared[0] = 0.0;
    return ScoreFunction::tabular(std::move(h), std::move(declared));
}

bool verify_declared_eps(const MdpModel& m, const ValueTables& t,
                         const ScoreFunction& scores, int x0) {
    if (!scores.declared_eps()) return false;
    const numvec& eps = *scores.declared_eps();
    if (static_cast<int>(eps.size()) != m.horizon + 1) return false;
    const auto reach = reachable_sets(m, x0);
    for (int b = 1; b <= m.horizon; ++b)
        for (int x : reach[m.horizon - b])
            for (int a = 0; a < m.num_actions(x); ++a)
                if (std::abs(scores.at(b, x, a) - t.q[b][x][a]) > eps[b] + 1e-12)
                    return false;
    return true;
}

namespace {

int score_argmax(const MdpModel& m, const ScoreFunction& scores, int b, int x) {
    int best = 0;
    double bv = scores.at(b, x, 0);
    for (int a = 1; a < m.num_actions(x); ++a) {
        const double v = scores.at(b, x, a);
        if (v > bv) {
            bv = v;
            best = a;
        }
    }
    return best;
}

// indices of the k best-scoring actions, score descending, index ascending on ties
intvec top_k_actions(const MdpModel& m, const ScoreFunction& scores, int b, int x, int k) {
    intvec idx(m.num_actions(x));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a1, int a2) {
        return scores.at(b, x, a1) > scores.at(b, x, a2);
    });
    idx.resize(k);
    return idx;
}

}  // namespace

PolicyTable greedy_policy(const MdpModel& m, const ScoreFunction& scores) {
    std::vector<intvec> choice(m.horizon + 1, intvec(m.num_states(), 0));
    for (int b = 1; b <= m.horizon; ++b)
        for (int x = 0; x < m.num_states(); ++x)
            choice[b][x] = score_argmax(m, scores, b, x);
    return PolicyTable::deterministic(m, choice);
}

PolicyTable topk_policy(const MdpModel& m, const ScoreFunction& scores, int k,
                        TopkTie tie, const ValueTables* tables) {
    if (k < 1) throw std::invalid_argument("topk_policy: k must be >= 1");
    for (int x = 0; x < m.num_states(); ++x)
        if (k > m.num_actions(x))
            throw std::invalid_argument("topk_policy: k exceeds the action count at state " +
                                        m.states[x]);
    if (tie == TopkTie::exact_best && !tables)
        throw std::invalid_argument("topk_policy: exact_best mode needs value tables");

    PolicyTable pt;
    pt.dist.assign(m.horizon + 1, {});
    for (int b = 1; b <= m.horizon; ++b) {
        pt.dist[b].assign(m.num_states(), {});
        for (int x = 0; x < m.num_states(); ++x) {
            const intvec keep = top_k_actions(m, scores, b, x, k);
            numvec d(m.num_actions(x), 0.0);
            if (tie == TopkTie::uniform) {
                for (int a : keep) d[a] = 1.0 / static_cast<double>(k);
            } else {
                int best = keep[0];
                for (int a : keep)
                    if (tables->q[b][x][a] > tables->q[b][x][best] ||
                        (tables->q[b][x][a] == tables->q[b][x][best] && a < best))
                        best = a;
                d[best] = 1.0;
            }
            pt.dist[b][x] = std::move(d);
        }
    }
    return pt;
}

BeamResult beam_search(const MdpModel& m, const ScoreFunction& scores, int width,
                       int start, std::uint64_t seed) {
    if (width < 1) throw std::invalid_argument("beam_search: width must be >= 1");
    BeamResult res;
    res.expanded.push_back({0, start, -1, -1, 0.0});
    if (m.is_goal(start)) {
        res.success = true;
        return res;
    }

    struct Cand {
        int node;  // index into res.expanded
        int action;
        double score;
    };
    intvec beam{0};
    for (int depth = 0; depth < m.horizon && !beam.empty(); ++depth) {
        const int rem = m.horizon - depth;
        std::vector<Cand> cands;
        for (int ni : beam) {
            const int x = res.expanded[ni].state;
            if (m.is_goal(x)) continue;
            for (int a = 0; a < m.num_actions(x); ++a)
                cands.push_back({ni, a, scores.at(rem, x, a)});
        }
        // rank by score; ties resolved by insertion order (node, then action)
        std::stable_sort(cands.begin(), cands.end(),
                         [](const Cand& l, const Cand& r) { return l.score > r.score; });
        if (static_cast<int>(cands.size()) > width) cands.resize(width);

        intvec next;
        for (std::size_t rank = 0; rank < cands.size(); ++rank) {
            const Cand& c = cands[rank];
            const int x = res.expanded[c.node].state;
            Rng rng(Rng::derive(seed, depth, rank));
            const auto& row = m.kernel[x][c.action];
            double u = rng.uniform(), acc = 0.0;
            int y = row.back().first;
            for (const auto& [yy, p] : row) {
                acc += p;
                if (u < acc) {
                    y = yy;
                    break;
                }
            }
            res.expanded.push_back({depth + 1, y, c.node, c.action, c.score});
            if (m.is_goal(y)) res.success = true;
            next.push_back(static_cast<int>(res.expanded.size()) - 1);
        }
        if (res.success) break;
        beam = std::move(next);
    }
    return res;
}

RegretReport measure_regret(const MdpModel& m, const ValueTables& t,
                            const ScoreFunction& scores, int x0) {
    RegretReport rep;
    const PolicyTable pi = greedy_policy(m, scores);
    const auto vpi = evaluate_policy(m, pi);
    rep.regret = t.v[m.horizon][x0] - vpi[m.horizon][x0];

    rep.bound_asserted = verify_declared_eps(m, t, scores, x0);
    if (rep.bound_asserted) {
        const numvec& eps = *scores.declared_eps();
        double s = 0.0;
        for (int b = 1; b <= m.horizon; ++b) s += eps[b];
        rep.bound = 2.0 * s;
        rep.holds = rep.regret <= rep.bound + kBoundTol;
    }
    return rep;
}

OccupancySample occupancy(const MdpModel& m, const PolicyTable& policy, const numvec& q0,
                          int depth, bool alive_only) {
    if (depth < 1 || depth > m.horizon)
        throw std::invalid_argument("occupancy: depth out of range");
    if (static_cast<int>(q0.size()) != m.num_states())
        throw std::invalid_argument("occupancy: q0 size mismatch");

    numvec w = q0;
    if (alive_only)
        for (int x = 0; x < m.num_states(); ++x)
            if (m.is_goal(x)) w[x] = 0.0;

    for (int t = 1; t < depth; ++t) {
        const int rem = m.horizon - (t - 1);
        numvec next(m.num_states(), 0.0);
        for (int x = 0; x < m.num_states(); ++x) {
            if (w[x] == 0.0) continue;
            for (int a = 0; a < m.num_actions(x); ++a) {
                const double pa = policy.dist[rem][x][a];
                if (pa == 0.0) continue;
                for (const auto& [y, p] : m.kernel[x][a]) next[y] += w[x] * pa * p;
            }
        }
        if (alive_only)
            for (int x = 0; x < m.num_states(); ++x)
                if (m.is_goal(x)) next[x] = 0.0;
        w = std::move(next);
    }

    double total = 0.0;
    for (double v : w) total += v;
    if (alive_only) {
        if (total <= 0.0)
            throw std::runtime_error("occupancy: conditioning event has probability 0");
        for (double& v : w) v /= total;
    }
    OccupancySample s;
    s.depth = depth;
    s.weights = std::move(w);
    s.conditioned_on_alive = alive_only;
    return s;
}

MarginStats margin_stats(const MdpModel& m, const ValueTables& t,
                         const std::vector<OccupancySample>& occ, int k,
                         std::pair<double, double> fit_range) {
    MarginStats ms;
    ms.k = k;
    ms.t_min = fit_range.first;
    ms.t_max = fit_range.second;
    if (k < 1) throw std::invalid_argument("margin_stats: k must be >= 1");

    double total_weight = 0.0;
    for (const auto& sample : occ) {
        const int rem = m.horizon - (sample.depth - 1);
        if (rem < 1 || rem > m.horizon)
            throw std::invalid_argument("margin_stats: occupancy depth out of range");
        for (int x = 0; x < m.num_states(); ++x) {
            const double w = sample.weights[x];
            if (w == 0.0) continue;
            total_weight += w;
            if (m.num_actions(x) <= k) {
                // no (k+1)-th action: infinite gap, excluded from the tail
                ms.samples.push_back({sample.depth, x,
                                      std::numeric_limits<double>::infinity(), w});
                continue;
            }
            numvec row = t.q[rem][x];
            std::sort(row.begin(), row.end(), std::greater<double>());
            ms.samples.push_back({sample.depth, x, row[0] - row[k], w});
        }
    }
    if (total_weight <= 0.0) {
        ms.note = "no occupancy mass";
        return ms;
    }

    // weighted empirical CDF evaluated at the distinct gap values in range
    std::vector<double> gaps;
    for (const auto& s : ms.samples)
        if (std::isfinite(s.gap) && s.gap >= ms.t_min && s.gap <= ms.t_max)
            gaps.push_back(s.gap);
    std::sort(gaps.begin(), gaps.end());
    gaps.erase(std::unique(gaps.begin(), gaps.end()), gaps.end());

    if (gaps.empty()) {
        ms.no_small_margin_mass = true;
        ms.note = "no small-margin mass in the fit range";
        return ms;
    }
    if (gaps.size() < 20) {
        ms.note = "fit refused: fewer than 20 distinct gap values in range";
        return ms;
    }

    numvec xs, ys;
    for (double g : gaps) {
        double cdf = 0.0;
        for (const auto& s : ms.samples)
            if (s.gap <= g) cdf += s.weight;
        cdf /= total_weight;
        if (cdf > 0.0) {
            xs.push_back(g);
            ys.push_back(cdf);
        }
    }
    const LineFit fit = loglog_fit(xs, ys);
    ms.fitted_beta = fit.slope;
    ms.fitted_c = std::exp(fit.intercept);
    ms.fit_ok = true;
    return ms;
}

std::vector<FastRateRow> fast_rate_experiment(const MdpModel& m, const numvec& q0,
                                              const ValueTables& t, int k,
                                              const numvec& eps_grid, int trials,
                                              std::uint64_t seed,
                                              const MarginStats* margin) {
    std::vector<FastRateRow> rows;
    for (std::size_t gi = 0; gi < eps_grid.size(); ++gi) {
        const double eps = eps_grid[gi];
        numvec regrets(trials, 0.0);
        for (int trial = 0; trial < trials; ++trial) {
            double regret = 0.0;
            if (eps > 0.0) {
                const ScoreFunction h =
                    perturb_scores(m, t, eps, Rng::derive(seed, gi, trial));
                const PolicyTable pi = topk_policy(m, h, k, TopkTie::exact_best, &t);
                const auto vpi = evaluate_policy(m, pi);
                for (int x = 0; x < m.num_states(); ++x)
                    regret += q0[x] * (t.v[m.horizon][x] - vpi[m.horizon][x]);
            }
            regrets[trial] = regret;
        }
        FastRateRow row;
        row.epsilon = eps;
        row.mean_regret = mean(regrets);
        row.stddev = stddev(regrets);
        row.trials = trials;
        if (margin && margin->fit_ok) {
            row.bound = 0.0;
            for (int b = 1; b <= m.horizon; ++b)
                row.bound += 2.0 * eps *
                             std::min(1.0, margin->fitted_c *
                                               std::pow(2.0 * eps, margin->fitted_beta));
        } else {
            row.bound = 2.0 * m.horizon * eps;
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace provlab
