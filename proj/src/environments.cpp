#include "provlab/environments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "provlab/rng.hpp"

namespace provlab {

namespace {

EnvFamily family_from_string(const std::string& s) {
    if (s == "split_close_tree") return EnvFamily::split_close_tree;
    if (s == "layered_dag") return EnvFamily::layered_dag;
    if (s == "margin_designed") return EnvFamily::margin_designed;
    if (s == "overflow_chain") return EnvFamily::overflow_chain;
    throw std::invalid_argument("EnvSpec: unknown family '" + s + "'");
}

std::string family_to_string(EnvFamily f) {
    switch (f) {
        case EnvFamily::split_close_tree: return "split_close_tree";
        case EnvFamily::layered_dag: return "layered_dag";
        case EnvFamily::margin_designed: return "margin_designed";
        case EnvFamily::overflow_chain: return "overflow_chain";
    }
    return "?";
}

void check_guardrails(const MdpModel& m) {
    if (m.num_states() > kMaxStates)
        throw std::invalid_argument("generate: state guardrail exceeded (" +
                                    std::to_string(m.num_states()) + ")");
    for (int x = 0; x < m.num_states(); ++x)
        if (m.num_actions(x) > kMaxActionsPerState)
            throw std::invalid_argument("generate: action guardrail exceeded");
    if (m.horizon > kMaxHorizon)
        throw std::invalid_argument("generate: horizon guardrail exceeded");
}

MetricSpace make_space(const GoalGeometry& g) {
    return MetricSpace::grid(g.dims, g.spacing, g.metric);
}

GoalMeasure atom_at(int point) { return GoalMeasure({{point, 1.0}}); }

// ---------------------------------------------------------------- split/close

EnvInstance gen_split_close(const EnvSpec& spec) {
    const int k = spec.branching;
    const int d = spec.depth;
    if (k < 1 || d < 1) throw std::invalid_argument("split_close_tree: bad knobs");
    const double p = spec.noise;

    MetricSpace space = make_space(spec.goal_geometry);
    const int npts = space.size();

    // tree nodes in BFS order; level L nodes are leaves. branching 1 is a
    // bare bag of `depth` leaves.
    struct Node {
        int level;
        intvec children;
    };
    std::vector<Node> nodes;
    if (k == 1) {
        for (int i = 0; i < d; ++i) nodes.push_back({d, {}});
    } else {
        long count = 1;
        intvec level_start{0};
        nodes.push_back({0, {}});
        for (int lev = 1; lev <= d; ++lev) {
            level_start.push_back(static_cast<int>(nodes.size()));
            count *= k;
            if (count > kMaxStates)
                throw std::invalid_argument("split_close_tree: tree guardrail exceeded");
            for (long i = 0; i < count; ++i) nodes.push_back({lev, {}});
        }
        for (std::size_t n = 0; n < nodes.size(); ++n) {
            if (nodes[n].level == d) continue;
            const int base = level_start[nodes[n].level + 1];
            const int offset = static_cast<int>(n) - level_start[nodes[n].level];
            for (int c = 0; c < k; ++c) nodes[n].children.push_back(base + offset * k + c);
        }
    }

    // the canonical progression: always act on the open goal of least id
    std::vector<std::set<int>> chain;
    std::set<int> open;
    if (k == 1)
        for (int i = 0; i < d; ++i) open.insert(i);
    else
        open.insert(0);
    chain.push_back(open);
    std::vector<int> right_action;  // 0 = close, 1 = split, per chain state
    while (!open.empty()) {
        const int sel = *open.begin();
        std::set<int> next = open;
        next.erase(sel);
        if (nodes[sel].level == d) {
            right_action.push_back(0);
        } else {
            right_action.push_back(1);
            for (int c : nodes[sel].children) next.insert(c);
        }
        chain.push_back(next);
        open = std::move(next);
        if (static_cast<int>(chain.size()) > kMaxStates)
            throw std::invalid_argument("split_close_tree: state guardrail exceeded");
    }

    MdpModel m;
    m.horizon = kMaxHorizon;
    m.space = space;
    const int S = static_cast<int>(chain.size());
    double max_mass = 0.0;
    for (int i = 0; i < S; ++i) {
        m.states.push_back("t" + std::to_string(i));
        m.actions.push_back({"close", "split"});
        m.goal.push_back(chain[i].empty() ? 1 : 0);
        std::vector<std::pair<int, double>> atoms;
        for (int n : chain[i]) atoms.emplace_back(n % npts, 1.0);
        m.payloads.push_back(GoalMeasure(std::move(atoms)));
        max_mass = std::max(max_mass, m.payloads.back().mass());
    }
    m.mass_cap = max_mass + 1.0;
    for (int i = 0; i < S; ++i) {
        std::vector<std::vector<std::pair<int, double>>> rows(2);
        if (chain[i].empty()) {  // solved, absorbing
            rows[0] = {{i, 1.0}};
            rows[1] = {{i, 1.0}};
        } else {
            const int good = right_action[i];
            for (int a = 0; a < 2; ++a) {
                if (a == good) {
                    if (p > 0.0)
                        rows[a] = {{i + 1, 1.0 - p}, {i, p}};
                    else
                        rows[a] = {{i + 1, 1.0}};
                } else {
                    rows[a] = {{i, 1.0}};  // wrong action is a no-op
                }
            }
        }
        m.kernel.push_back(std::move(rows));
    }

    EnvInstance inst;
    inst.model = std::move(m);
    inst.start.weights.assign(S, 0.0);
    inst.start.weights[0] = 1.0;
    return inst;
}

// ---------------------------------------------------------------- layered dag

EnvInstance gen_layered_dag(const EnvSpec& spec) {
    const int width = spec.branching;
    const int layers = spec.depth;
    if (width < 1 || layers < 1) throw std::invalid_argument("layered_dag: bad knobs");
    if (static_cast<long>(width) * layers + 2 > kMaxStates)
        throw std::invalid_argument("layered_dag: state guardrail exceeded");
    const double sigma = spec.noise;
    Rng rng(Rng::derive(spec.seed, 0xda6u));

    MetricSpace space = make_space(spec.goal_geometry);
    const int npts = space.size();

    MdpModel m;
    m.horizon = layers;
    m.space = space;
    const int S = width * layers + 2;
    const int solved = S - 2;
    const int dead = S - 1;
    const auto id = [&](int layer, int i) { return layer * width + i; };

    for (int l = 0; l < layers; ++l) {
        for (int i = 0; i < width; ++i) {
            m.states.push_back("l" + std::to_string(l) + "_" + std::to_string(i));
            const int na = 2 + rng.uniform_int(2);  // 2 or 3 actions
            std::vector<std::string> as;
            for (int a = 0; a < na; ++a) as.push_back("a" + std::to_string(a));
            m.actions.push_back(std::move(as));
            m.goal.push_back(0);
            std::vector<std::pair<int, double>> atoms;
            const int natoms = 1 + rng.uniform_int(5);
            for (int t = 0; t < natoms; ++t) atoms.emplace_back(rng.uniform_int(npts), 1.0);
            m.payloads.push_back(GoalMeasure(std::move(atoms)));
        }
    }
    m.states.push_back("solved");
    m.actions.push_back({"stay"});
    m.goal.push_back(1);
    m.payloads.push_back(GoalMeasure());
    m.states.push_back("dead");
    m.actions.push_back({"stay"});
    m.goal.push_back(0);
    m.payloads.push_back(atom_at(0));

    m.kernel.assign(S, {});
    for (int l = 0; l < layers; ++l) {
        for (int i = 0; i < width; ++i) {
            const int x = id(l, i);
            std::vector<std::vector<std::pair<int, double>>> rows;
            for (int a = 0; a < m.num_actions(x); ++a) {
                intvec succ;
                if (l + 1 < layers) {
                    const int target = id(l + 1, rng.uniform_int(width));
                    succ.push_back(target);
                    while (static_cast<int>(succ.size()) < 3)
                        succ.push_back(id(l + 1, rng.uniform_int(width)));
                } else {
                    succ = rng.bernoulli(0.6) ? intvec{solved, dead, dead}
                                              : intvec{dead, solved, solved};
                }
                // designated successor mixed with a uniform spread
                std::map<int, double> row;
                row[succ[0]] += 1.0 - sigma;
                for (int y : succ) row[y] += sigma / static_cast<double>(succ.size());
                std::vector<std::pair<int, double>> r(row.begin(), row.end());
                rows.push_back(std::move(r));
            }
            m.kernel[x] = std::move(rows);
        }
    }
    m.kernel[solved] = {{{solved, 1.0}}};
    m.kernel[dead] = {{{dead, 1.0}}};

    EnvInstance inst;
    inst.model = std::move(m);
    inst.start.weights.assign(S, 0.0);
    for (int i = 0; i < width; ++i) inst.start.weights[i] = 1.0 / width;
    return inst;
}

// ------------------------------------------------------------ margin designed

numvec designed_gaps(const MarginProfile& profile, int count) {
    numvec gaps(count, 0.0);
    switch (profile.kind) {
        case MarginProfile::Kind::uniform_gaps:
            // uniform grid over (0, 1): empirical CDF(t) ~ t, i.e. beta = 1
            for (int i = 0; i < count; ++i)
                gaps[i] = (i + 0.5) / static_cast<double>(count);
            break;
        case MarginProfile::Kind::constant_gap:
            if (profile.gap <= 0.0 || profile.gap >= 1.0)
                throw std::invalid_argument("margin_designed: constant gap must be in (0,1)");
            for (int i = 0; i < count; ++i) gaps[i] = profile.gap;
            break;
        case MarginProfile::Kind::mixed: {
            // geometric ladder: scale-free gaps, no usable margin exponent
            const double lo = 0.002, hi = 0.64;
            for (int i = 0; i < count; ++i)
                gaps[i] = count == 1
                              ? lo
                              : lo * std::pow(hi / lo, i / static_cast<double>(count - 1));
            break;
        }
    }
    return gaps;
}

EnvInstance gen_margin_designed(const EnvSpec& spec) {
    const int chains = spec.branching;
    const int layers = spec.depth;
    if (chains < 1 || layers < 1) throw std::invalid_argument("margin_designed: bad knobs");
    if (spec.noise != 0.0)
        throw std::invalid_argument("margin_designed: noise must be 0 (gaps are exact)");
    if (static_cast<long>(chains) * layers + 2 > kMaxStates)
        throw std::invalid_argument("margin_designed: state guardrail exceeded");

    MetricSpace space = make_space(spec.goal_geometry);
    const int npts = space.size();
    const numvec gaps = designed_gaps(spec.margin_profile, chains * layers);

    MdpModel m;
    m.horizon = layers;
    m.space = space;
    const int S = chains * layers + 2;
    const int solved = S - 2;
    const int dead = S - 1;
    const auto id = [&](int c, int l) { return c * layers + l; };

    m.kernel.assign(S, {});
    for (int c = 0; c < chains; ++c) {
        for (int l = 0; l < layers; ++l) {
            const int x = id(c, l);
            m.states.push_back("c" + std::to_string(c) + "_" + std::to_string(l));
            m.goal.push_back(0);
            m.payloads.push_back(atom_at(x % npts));
            const int next = (l + 1 < layers) ? id(c, l + 1) : solved;
            const double gap = gaps[l * chains + c];
            std::vector<std::pair<int, double>> safe{{next, 1.0}};
            std::vector<std::pair<int, double>> risky{{next, 1.0 - gap}, {dead, gap}};
            // alternate the optimal action's index so ties at index 0 carry
            // no systematic advantage
            if (l % 2 == 0) {
                m.actions.push_back({"safe", "risky"});
                m.kernel[x] = {safe, risky};
            } else {
                m.actions.push_back({"risky", "safe"});
                m.kernel[x] = {risky, safe};
            }
        }
    }
    m.states.push_back("solved");
    m.actions.push_back({"stay"});
    m.goal.push_back(1);
    m.payloads.push_back(GoalMeasure());
    m.kernel[solved] = {{{solved, 1.0}}};
    m.states.push_back("dead");
    m.actions.push_back({"stay"});
    m.goal.push_back(0);
    m.payloads.push_back(atom_at(0));
    m.kernel[dead] = {{{dead, 1.0}}};

    EnvInstance inst;
    inst.model = std::move(m);
    inst.start.weights.assign(S, 0.0);
    for (int c = 0; c < chains; ++c) inst.start.weights[id(c, 0)] = 1.0 / chains;
    return inst;
}

// ------------------------------------------------------------- overflow chain

EnvInstance gen_overflow_chain(const EnvSpec& spec) {
    const int b = spec.depth;
    if (b < 1) throw std::invalid_argument("overflow_chain: bad depth");
    const double p_split = spec.noise;
    const int start_mass = 2;
    const int top = start_mass + b;  // unreachable beyond this within the horizon

    MetricSpace space = make_space(spec.goal_geometry);
    const int npts = space.size();

    MdpModel m;
    m.horizon = b;
    m.space = space;
    for (int mass = 0; mass <= top; ++mass) {
        m.states.push_back("m" + std::to_string(mass));
        m.actions.push_back({"step"});
        m.goal.push_back(mass == 0 ? 1 : 0);
        if (mass == 0)
            m.payloads.push_back(GoalMeasure());
        else
            m.payloads.push_back(GoalMeasure({{mass % npts, static_cast<double>(mass)}}));
    }
    m.kernel.assign(top + 1, {});
    m.kernel[0] = {{{0, 1.0}}};
    for (int mass = 1; mass <= top; ++mass) {
        if (mass == top || p_split == 0.0)
            m.kernel[mass] = {{{mass - 1, 1.0}}};
        else if (p_split == 1.0)
            m.kernel[mass] = {{{mass + 1, 1.0}}};
        else
            m.kernel[mass] = {{{mass + 1, p_split}, {mass - 1, 1.0 - p_split}}};
    }

    EnvInstance inst;
    inst.model = std::move(m);
    inst.start.weights.assign(top + 1, 0.0);
    inst.start.weights[start_mass] = 1.0;
    return inst;
}

}  // namespace

EnvSpec EnvSpec::from_json(const nlohmann::json& j) {
    EnvSpec s;
    s.family = family_from_string(j.at("family").get<std::string>());
    s.branching = j.value("branching", s.branching);
    s.depth = j.value("depth", s.depth);
    s.noise = j.value("noise", s.noise);
    s.seed = j.value("seed", static_cast<std::uint64_t>(0));
    if (j.contains("goal_geometry")) {
        const auto& g = j.at("goal_geometry");
        s.goal_geometry.dims = g.value("dims", s.goal_geometry.dims);
        s.goal_geometry.spacing = g.value("spacing", s.goal_geometry.spacing);
        const std::string metric = g.value("metric", std::string("sup"));
        s.goal_geometry.metric = metric == "euclidean" ? MetricSpace::GridMetric::euclidean
                                                       : MetricSpace::GridMetric::sup;
    }
    if (j.contains("margin_profile")) {
        const auto& p = j.at("margin_profile");
        const std::string kind = p.at("kind").get<std::string>();
        if (kind == "uniform_gaps")
            s.margin_profile.kind = MarginProfile::Kind::uniform_gaps;
        else if (kind == "constant_gap")
            s.margin_profile.kind = MarginProfile::Kind::constant_gap;
        else if (kind == "mixed")
            s.margin_profile.kind = MarginProfile::Kind::mixed;
        else
            throw std::invalid_argument("EnvSpec: unknown margin profile '" + kind + "'");
        s.margin_profile.gap = p.value("gap", s.margin_profile.gap);
    }
    return s;
}

nlohmann::json EnvSpec::to_json() const {
    nlohmann::json j;
    j["family"] = family_to_string(family);
    j["branching"] = branching;
    j["depth"] = depth;
    j["noise"] = noise;
    j["seed"] = seed;
    j["goal_geometry"] = {
        {"dims", goal_geometry.dims},
        {"spacing", goal_geometry.spacing},
        {"metric", goal_geometry.metric == MetricSpace::GridMetric::sup ? "sup" : "euclidean"}};
    const char* kind = margin_profile.kind == MarginProfile::Kind::uniform_gaps
                           ? "uniform_gaps"
                           : margin_profile.kind == MarginProfile::Kind::constant_gap
                                 ? "constant_gap"
                                 : "mixed";
    j["margin_profile"] = {{"kind", kind}, {"gap", margin_profile.gap}};
    return j;
}

void InstanceDistribution::validate() const {
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("InstanceDistribution: negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("InstanceDistribution: weights sum to " +
                                    std::to_string(sum));
}

int InstanceDistribution::top() const {
    int best = 0;
    for (std::size_t i = 1; i < weights.size(); ++i)
        if (weights[i] > weights[best]) best = static_cast<int>(i);
    return best;
}

EnvInstance generate(const EnvSpec& spec) {
    EnvInstance inst;
    switch (spec.family) {
        case EnvFamily::split_close_tree: inst = gen_split_close(spec); break;
        case EnvFamily::layered_dag: inst = gen_layered_dag(spec); break;
        case EnvFamily::margin_designed: inst = gen_margin_designed(spec); break;
        case EnvFamily::overflow_chain: inst = gen_overflow_chain(spec); break;
    }
    check_guardrails(inst.model);
    inst.model.validate();
    inst.start.validate();
    return inst;
}

double statistical_provability(const MdpModel& model, const InstanceDistribution& dist,
                               const ValueTables& tables) {
    (void)model;
    return statistical_provability(dist, tables.v[tables.horizon]);
}

double statistical_provability(const InstanceDistribution& dist, const numvec& value_row) {
    if (dist.weights.size() != value_row.size())
        throw std::invalid_argument("statistical_provability: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < value_row.size(); ++i) s += dist.weights[i] * value_row[i];
    return s;
}

}  // namespace provlab
