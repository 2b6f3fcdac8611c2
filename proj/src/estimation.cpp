#include "provlab/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "provlab/goal_measure.hpp"
#include "provlab/rng.hpp"

namespace provlab {

int PairDomain::index_of(int x, int a) const {
    for (int i = 0; i < size(); ++i)
        if (pairs[i].first == x && pairs[i].second == a) return i;
    return -1;
}

namespace {

intvec default_include(const MdpModel& m, const intvec& include) {
    if (!include.empty()) return include;
    intvec out;
    for (int x = 0; x < m.num_states(); ++x)
        if (!m.is_goal(x)) out.push_back(x);
    return out;
}

PairDomain assemble_domain(const MdpModel& m, const intvec& states,
                           const std::vector<numvec>& d_state) {
    PairDomain dom;
    for (int x : states)
        for (int a = 0; a < m.num_actions(x); ++a) dom.pairs.emplace_back(x, a);

    const int n = dom.size();
    std::vector<std::string> names(n);
    std::vector<numvec> d(n, numvec(n, 0.0));
    for (int i = 0; i < n; ++i) {
        const auto& [xi, ai] = dom.pairs[i];
        names[i] = m.states[xi] + ":" + m.actions[xi][ai];
        for (int j = 0; j < i; ++j) {
            const auto& [xj, aj] = dom.pairs[j];
            const double da = (m.actions[xi][ai] == m.actions[xj][aj]) ? 0.0 : 1.0;
            const double val = d_state[xi][xj] + da;
            d[i][j] = d[j][i] = val;
        }
    }
    dom.space = MetricSpace::from_matrix(std::move(names), std::move(d));
    return dom;
}

}  // namespace

PairDomain pair_domain_from_payloads(const MdpModel& m, const intvec& include) {
    if (!m.has_payloads() || !m.space)
        throw std::invalid_argument("pair_domain_from_payloads: model has no payloads");
    const intvec states = default_include(m, include);
    std::vector<numvec> d_state(m.num_states(), numvec(m.num_states(), 0.0));
    for (std::size_t i = 0; i < states.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const int x = states[i];
            const int y = states[j];
            const double d = bl_distance(m.payloads[x], m.payloads[y], *m.space).first;
            d_state[x][y] = d_state[y][x] = std::max(0.0, d);
        }
    }
    return assemble_domain(m, states, d_state);
}

PairDomain pair_domain_from_matrix(const MdpModel& m, const std::vector<numvec>& d_state,
                                   const intvec& include) {
    return assemble_domain(m, default_include(m, include), d_state);
}

void RolloutDataset::write_csv(std::ostream& os) const {
    os << "b,state,action,y,seed\r\n";
    for (const auto& r : records)
        os << r.depth << ',' << r.state << ',' << r.action << ',' << r.label << ','
           << r.seed << "\r\n";
}

RolloutDataset rollout_labels(const MdpModel& m, const PolicyTable& continuation,
                              int depth, const std::vector<std::pair<int, int>>& pairs,
                              int mm, std::uint64_t seed, std::string continuation_id) {
    if (depth < 1) throw std::invalid_argument("rollout_labels: depth must be >= 1");
    if (mm < 1) throw std::invalid_argument("rollout_labels: m must be >= 1");
    RolloutDataset ds;
    ds.depth = depth;
    ds.m = mm;
    ds.continuation = std::move(continuation_id);
    ds.records.reserve(pairs.size() * static_cast<std::size_t>(mm));

    for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
        const auto& [x0, a0] = pairs[pi];
        for (int rep = 0; rep < mm; ++rep) {
            const std::uint64_t rec_seed = Rng::derive(seed, pi, rep);
            Rng rng(rec_seed);
            // apply the chosen action once
            int x = x0;
            {
                const auto& row = m.kernel[x][a0];
                const double u = rng.uniform();
                double acc = 0.0;
                x = row.back().first;
                for (const auto& [y, p] : row) {
                    acc += p;
                    if (u < acc) {
                        x = y;
                        break;
                    }
                }
            }
            // then follow the continuation for at most depth-1 further steps
            int label = m.is_goal(x) ? 1 : 0;
            for (int b = depth - 1; b >= 1 && !label; --b) {
                const int a = rng.sample(continuation.dist[b][x]);
                const auto& row = m.kernel[x][a];
                const double u = rng.uniform();
                double acc = 0.0;
                int y = row.back().first;
                for (const auto& [yy, p] : row) {
                    acc += p;
                    if (u < acc) {
                        y = yy;
                        break;
                    }
                }
                x = y;
                label = m.is_goal(x) ? 1 : 0;
            }
            ds.records.push_back({depth, x0, a0, label, rec_seed});
        }
    }
    return ds;
}

NetEstimator fit_net_estimator(std::shared_ptr<const PairDomain> domain,
                               const RolloutDataset& labels, double eta, double lip) {
    if (!domain) throw std::invalid_argument("fit_net_estimator: null domain");
    if (lip < 0.0) throw std::invalid_argument("fit_net_estimator: negative Lipschitz constant");

    NetEstimator est;
    est.domain = domain;
    est.net = build_greedy_net(domain->space, eta);
    est.lip = lip;

    // mean label per center; every center must carry the same replicate count
    std::map<std::pair<int, int>, std::pair<double, int>> sums;
    for (const auto& r : labels.records) {
        auto& [s, c] = sums[{r.state, r.action}];
        s += r.label;
        c += 1;
    }
    est.q_hat.assign(est.net.centers.size(), 0.0);
    int m_common = -1;
    for (std::size_t i = 0; i < est.net.centers.size(); ++i) {
        const auto& pr = domain->pairs[est.net.centers[i]];
        const auto it = sums.find(pr);
        if (it == sums.end() || it->second.second == 0)
            throw std::invalid_argument("fit_net_estimator: uncovered net center " +
                                        domain->space.name(est.net.centers[i]));
        if (m_common < 0)
            m_common = it->second.second;
        else if (m_common != it->second.second)
            throw std::invalid_argument("fit_net_estimator: unequal replicate counts");
        est.q_hat[i] = it->second.first / it->second.second;
    }
    est.m = m_common;

    est.center_slack.assign(est.net.centers.size(), 0.0);
    for (std::size_t i = 0; i < est.net.centers.size(); ++i)
        est.center_slack[i] = est.q_hat[i] - evaluate_estimator(est, est.net.centers[i]);
    return est;
}

double evaluate_estimator(const NetEstimator& est, int pair_index) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < est.net.centers.size(); ++i) {
        const double v =
            est.q_hat[i] + est.lip * est.domain->space.dist(pair_index, est.net.centers[i]);
        best = std::min(best, v);
    }
    return clip01(best);
}

double uniform_error_bound(const NetEstimator& est, double eps_app, double lip_target,
                           double delta) {
    if (eps_app < 0.0 || lip_target < 0.0 || delta <= 0.0 || delta >= 1.0)
        throw std::invalid_argument("uniform_error_bound: bad inputs");
    const double n_centers = static_cast<double>(est.net.centers.size());
    return eps_app + (est.lip + lip_target) * est.net.radius +
           std::sqrt(std::log(2.0 * n_centers / delta) / (2.0 * est.m));
}

double lipschitz_constant(const PairDomain& domain, const numvec& values) {
    double lq = 0.0;
    for (int i = 0; i < domain.size(); ++i) {
        for (int j = 0; j < i; ++j) {
            const double d = domain.space.dist(i, j);
            if (d <= 0.0) continue;
            lq = std::max(lq, std::abs(values[i] - values[j]) / d);
        }
    }
    return lq;
}

double sup_error(const NetEstimator& est, const numvec& truth) {
    double worst = 0.0;
    for (int i = 0; i < est.domain->size(); ++i)
        worst = std::max(worst, std::abs(evaluate_estimator(est, i) - truth[i]));
    return worst;
}

ScoreFunction estimator_scores(const MdpModel& m,
                               const std::vector<NetEstimator>& per_depth,
                               std::optional<numvec> declared_eps) {
    if (static_cast<int>(per_depth.size()) != m.horizon + 1)
        throw std::invalid_argument("estimator_scores: need one estimator per depth");
    auto ests = std::make_shared<std::vector<NetEstimator>>(per_depth);
    return ScoreFunction::from_callable(
        m.horizon,
        [ests](int b, int x, int a) {
            const NetEstimator& e = (*ests)[b];
            const int idx = e.domain->index_of(x, a);
            if (idx < 0) return 0.0;  // outside the estimation domain
            return evaluate_estimator(e, idx);
        },
        std::move(declared_eps));
}

nlohmann::json CoverageReport::to_json() const {
    return {{"trials", trials},         {"covered", covered},
            {"fraction", fraction},     {"threshold", threshold},
            {"pass", pass},             {"mean_statistic", mean_statistic},
            {"mean_bound", mean_bound}};
}

CoverageReport verify_uniform_bound(const MdpModel& m, const ValueTables& t,
                                    std::shared_ptr<const PairDomain> domain,
                                    const UniformBoundConfig& cfg, std::uint64_t seed) {
    if (cfg.depth < 1 || cfg.depth > m.horizon)
        throw std::invalid_argument("verify_uniform_bound: depth out of range");

    numvec truth(domain->size(), 0.0);
    for (int i = 0; i < domain->size(); ++i) {
        const auto& [x, a] = domain->pairs[i];
        truth[i] = t.q[cfg.depth][x][a];
    }
    const double lq = lipschitz_constant(*domain, truth);
    const double lh = cfg.lip > 0.0 ? cfg.lip : lq;

    const PolicyTable opt = optimal_policy(m, t);
    const EpsNet net = build_greedy_net(domain->space, cfg.eta);
    std::vector<std::pair<int, int>> center_pairs;
    for (int c : net.centers) center_pairs.push_back(domain->pairs[c]);

    CoverageReport rep;
    rep.trials = cfg.trials;
    numvec sups, bounds;
    for (int trial = 0; trial < cfg.trials; ++trial) {
        const RolloutDataset ds =
            rollout_labels(m, opt, cfg.depth, center_pairs, cfg.m,
                           Rng::derive(seed, 0xe571u, trial), "optimal");
        const NetEstimator est = fit_net_estimator(domain, ds, cfg.eta, lh);
        const double sup = sup_error(est, truth);
        const double bound = uniform_error_bound(est, 0.0, lq, cfg.delta);
        sups.push_back(sup);
        bounds.push_back(bound);
        if (sup <= bound) ++rep.covered;
    }
    rep.fraction = static_cast<double>(rep.covered) / cfg.trials;
    rep.threshold = 1.0 - cfg.delta -
                    3.0 * std::sqrt(cfg.delta * (1.0 - cfg.delta) / cfg.trials);
    rep.pass = rep.fraction >= rep.threshold;
    rep.mean_statistic = mean(sups);
    rep.mean_bound = mean(bounds);
    return rep;
}

ProcessSpec ProcessSpec::iid_coin() {
    ProcessSpec p;
    p.kernel = {{0.5, 0.5}, {0.5, 0.5}};
    p.start = 0;
    return p;
}

ProcessSpec ProcessSpec::random_chain(int size, std::uint64_t seed) {
    if (size < 1) throw std::invalid_argument("ProcessSpec: size must be >= 1");
    Rng rng(Rng::derive(seed, 0xc4a17u));
    ProcessSpec p;
    p.kernel.assign(size, numvec(size, 0.0));
    for (int i = 0; i < size; ++i) {
        double sum = 0.0;
        for (int j = 0; j < size; ++j) {
            p.kernel[i][j] = -std::log(1.0 - rng.uniform());  // Exp(1) draws
            sum += p.kernel[i][j];
        }
        for (int j = 0; j < size; ++j) p.kernel[i][j] /= sum;
    }
    p.start = 0;
    return p;
}

CoverageReport adaptive_deviation_experiment(const ProcessSpec& process,
                                             const std::vector<numvec>& functions,
                                             const AdaptiveDeviationConfig& cfg,
                                             std::uint64_t seed) {
    const int size = static_cast<int>(process.kernel.size());
    const int nf = static_cast<int>(functions.size());
    if (nf == 0) throw std::invalid_argument("adaptive_deviation_experiment: empty class");
    for (const auto& f : functions)
        if (static_cast<int>(f.size()) != size)
            throw std::invalid_argument("adaptive_deviation_experiment: function size mismatch");

    // exact conditional means: cond[z][f] = sum_z' K(z'|z) f(z')
    std::vector<numvec> cond(size, numvec(nf, 0.0));
    for (int z = 0; z < size; ++z)
        for (int fi = 0; fi < nf; ++fi)
            for (int y = 0; y < size; ++y) cond[z][fi] += process.kernel[z][y] * functions[fi][y];

    const double bound =
        2.0 * cfg.eps +
        std::sqrt((2.0 * std::log(static_cast<double>(nf)) + 2.0 * std::log(2.0 / cfg.delta)) /
                  cfg.n);

    CoverageReport rep;
    rep.trials = cfg.trials;
    numvec stats;
    for (int trial = 0; trial < cfg.trials; ++trial) {
        Rng rng(Rng::derive(seed, 0xadab7u, trial));
        numvec acc(nf, 0.0);
        int z = process.start;
        for (int t = 0; t < cfg.n; ++t) {
            const int znext = rng.sample(process.kernel[z]);
            for (int fi = 0; fi < nf; ++fi) acc[fi] += functions[fi][znext] - cond[z][fi];
            z = znext;
        }
        double stat = 0.0;
        for (int fi = 0; fi < nf; ++fi) stat = std::max(stat, std::abs(acc[fi] / cfg.n));
        stats.push_back(stat);
        if (stat <= bound) ++rep.covered;
    }
    rep.fraction = static_cast<double>(rep.covered) / cfg.trials;
    rep.threshold = 1.0 - cfg.delta -
                    3.0 * std::sqrt(cfg.delta * (1.0 - cfg.delta) / cfg.trials);
    rep.pass = rep.fraction >= rep.threshold;
    rep.mean_statistic = mean(stats);
    rep.mean_bound = bound;
    return rep;
}

}  // namespace provlab
