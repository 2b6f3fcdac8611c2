#include "provlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "provlab/certificates.hpp"
#include "provlab/planners.hpp"
#include "provlab/rng.hpp"
#include "provlab/truncation.hpp"

namespace provlab {

// ---------------------------------------------------------------- utilities

int worker_count() {
    if (const char* env = std::getenv("PROVLAB_WORKERS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return static_cast<int>(std::min(8u, hc == 0 ? 1u : hc));
}

void parallel_for(int n, const std::function<void(int)>& fn) {
    const int workers = std::min(worker_count(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!err) err = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::string>& rows) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_csv: cannot open " + path);
    os << header << "\r\n";
    for (const auto& r : rows) os << r << "\r\n";
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string result_csv_row(const ResultRow& r) {
    std::ostringstream os;
    os << csv_escape(r.experiment) << ',' << csv_escape(r.instance) << ',' << fmt(r.claimed)
       << ',' << fmt(r.measured) << ',' << (r.holds ? 1 : 0) << ',' << csv_escape(r.detail);
    return os.str();
}

}  // namespace

// ----------------------------------------------------------------- fixtures

namespace {
double line_success_prob(double z) { return 0.2 + 0.55 * std::abs(z - 0.45); }
}

MdpModel make_line_model(int n_states) {
    if (n_states < 2) throw std::invalid_argument("make_line_model: need >= 2 states");
    const double spacing = 1.0 / (n_states - 1);
    MdpModel m;
    m.horizon = 1;
    m.space = MetricSpace::grid({n_states}, spacing, MetricSpace::GridMetric::euclidean);
    const int solved = n_states;
    const int dead = n_states + 1;
    for (int i = 0; i < n_states; ++i) {
        m.states.push_back("z" + std::to_string(i));
        m.actions.push_back({"go"});
        m.goal.push_back(0);
        m.payloads.push_back(GoalMeasure({{i, 1.0}}));
        const double q = line_success_prob(i * spacing);
        m.kernel.push_back({{{solved, q}, {dead, 1.0 - q}}});
    }
    m.states.push_back("solved");
    m.actions.push_back({"stay"});
    m.goal.push_back(1);
    m.payloads.push_back(GoalMeasure());
    m.kernel.push_back({{{solved, 1.0}}});
    m.states.push_back("dead");
    m.actions.push_back({"stay"});
    m.goal.push_back(0);
    m.payloads.push_back(GoalMeasure({{0, 1.0}}));
    m.kernel.push_back({{{dead, 1.0}}});
    m.validate();
    return m;
}

MdpModel make_grid_model(int dim, int side) {
    if (dim < 1 || side < 2) throw std::invalid_argument("make_grid_model: bad shape");
    std::vector<int> dims(dim, side);
    const double spacing = 1.0 / (side - 1);
    MetricSpace space = MetricSpace::grid(dims, spacing, MetricSpace::GridMetric::sup);
    const int n = space.size();

    MdpModel m;
    m.horizon = 1;
    m.space = space;
    const int solved = n;
    const int dead = n + 1;
    for (int i = 0; i < n; ++i) {
        m.states.push_back(space.name(i));
        m.actions.push_back({"go"});
        m.goal.push_back(0);
        m.payloads.push_back(GoalMeasure({{i, 1.0}}));
        double s = 0.0;
        for (double c : space.coords(i)) s += c;
        const double q = 0.2 + 0.5 * std::abs(s / dim - 0.45);
        m.kernel.push_back({{{solved, q}, {dead, 1.0 - q}}});
    }
    m.states.push_back("solved");
    m.actions.push_back({"stay"});
    m.goal.push_back(1);
    m.payloads.push_back(GoalMeasure());
    m.kernel.push_back({{{solved, 1.0}}});
    m.states.push_back("dead");
    m.actions.push_back({"stay"});
    m.goal.push_back(0);
    m.payloads.push_back(GoalMeasure({{0, 1.0}}));
    m.kernel.push_back({{{dead, 1.0}}});
    m.validate();
    return m;
}

// --------------------------------------------------------------- run config

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.experiment = j.at("experiment").get<std::string>();
    if (j.contains("env")) c.env = EnvSpec::from_json(j.at("env"));
    if (j.contains("model")) c.model_path = j.at("model").get<std::string>();
    if (j.contains("parameters")) c.parameters = j.at("parameters");
    if (!j.contains("seeds")) throw std::invalid_argument("config: missing seed list");
    c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (c.seeds.empty()) throw std::invalid_argument("config: seed list must be nonempty");
    c.output = j.value("output", std::string());
    return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("config: cannot open " + path);
    nlohmann::json j;
    is >> j;
    return from_json(j);
}

nlohmann::json RunSummary::to_json() const {
    int held = 0;
    for (const auto& r : rows) held += r.holds ? 1 : 0;
    nlohmann::json j;
    j["experiment"] = experiment;
    j["rows"] = rows.size();
    j["rows_holding"] = held;
    j["all_hold"] = all_hold;
    j["runtime_seconds"] = runtime_seconds;
    j["details"] = details;
    return j;
}

namespace {

struct NamedInstance {
    std::string id;
    EnvInstance inst;
};

EnvSpec default_env(const std::string& experiment) {
    EnvSpec spec;
    if (experiment == "fast_rate") {
        spec.family = EnvFamily::margin_designed;
        spec.branching = 8;
        spec.depth = 20;
        spec.margin_profile.kind = MarginProfile::Kind::uniform_gaps;
    } else {
        spec.family = EnvFamily::layered_dag;
        spec.branching = 4;
        spec.depth = 4;
        spec.noise = 0.3;
    }
    return spec;
}

EnvInstance load_instance(const ExperimentConfig& cfg, std::uint64_t seed) {
    if (cfg.model_path) {
        std::ifstream is(*cfg.model_path);
        if (!is) throw std::invalid_argument("config: cannot open model " + *cfg.model_path);
        nlohmann::json j;
        is >> j;
        EnvInstance inst;
        inst.model = MdpModel::from_json(j);
        inst.start.weights.assign(inst.model.num_states(), 0.0);
        if (cfg.parameters.contains("x0")) {
            const int x0 = inst.model.state_index(cfg.parameters.at("x0").get<std::string>());
            if (x0 < 0) throw std::invalid_argument("config: unknown x0 state");
            inst.start.weights[x0] = 1.0;
        } else {
            int n = 0;
            for (int x = 0; x < inst.model.num_states(); ++x)
                if (!inst.model.is_goal(x)) ++n;
            for (int x = 0; x < inst.model.num_states(); ++x)
                if (!inst.model.is_goal(x)) inst.start.weights[x] = 1.0 / n;
        }
        return inst;
    }
    EnvSpec spec = cfg.env ? *cfg.env : default_env(cfg.experiment);
    spec.seed = seed;
    return generate(spec);
}

// ------------------------------------------------------------- certificates

void exp_certificates(const ExperimentConfig& cfg, RunSummary& out) {
    const int instances = cfg.parameters.value("instances", 20);
    const double eps = cfg.parameters.value("score_eps", 0.1);
    const double slack = cfg.parameters.value("slack", 0.1);

    std::vector<std::string> cert_rows((std::size_t)cfg.seeds.size() * instances);
    std::vector<std::vector<ResultRow>> rows(cert_rows.size());

    std::vector<std::pair<std::uint64_t, int>> tasks;
    for (std::uint64_t s : cfg.seeds)
        for (int i = 0; i < instances; ++i) tasks.emplace_back(s, i);

    parallel_for(static_cast<int>(tasks.size()), [&](int ti) {
        const auto [seed, idx] = tasks[ti];
        const std::uint64_t iseed = Rng::derive(seed, 0xce87u, idx);
        ExperimentConfig icfg = cfg;
        const EnvInstance inst = load_instance(icfg, iseed);
        const MdpModel& m = inst.model;
        const ValueTables t = solve_exact(m);
        const int x0 = inst.start.top();
        const double vstar = t.v[m.horizon][x0];
        const std::string id =
            "s" + std::to_string(seed) + "_i" + std::to_string(idx);

        std::vector<ResultRow>& rr = rows[ti];
        const auto pair = relaxed_certificate_pair(m, slack, iseed);
        const CertificateResult cr = certify_sandwich(m, pair.first, pair.second, x0);
        rr.push_back({"certificates", id + "_pair_upper", cr.upper, vstar,
                      cr.status == CertStatus::ok && vstar <= cr.upper + kCertTol,
                      "v* <= U"});
        rr.push_back({"certificates", id + "_pair_lower", cr.lower, vstar,
                      cr.status == CertStatus::ok && vstar >= cr.lower - kCertTol,
                      "v* >= L"});

        const ScoreFunction h = perturb_scores(m, t, eps, Rng::derive(iseed, 1));
        numvec eps_vec(m.horizon + 1, eps);
        const CertificateResult sc = score_certificate(m, h, eps_vec, x0, &t);
        rr.push_back({"certificates", id + "_score_upper", sc.upper, vstar,
                      !sc.premise_violated && vstar <= sc.upper + kCertTol, "v* <= U"});
        rr.push_back({"certificates", id + "_score_lower", sc.lower, vstar,
                      !sc.premise_violated && vstar >= sc.lower - kCertTol, "v* >= L"});
        rr.push_back({"certificates", id + "_score_gap", 2.0 * eps, sc.gap,
                      sc.gap <= 2.0 * eps + kCertTol, "gap <= 2 eps_B"});

        const CertificateResult triv =
            certify_sandwich(m, trivial_lower(m), trivial_upper(m), x0);
        rr.push_back({"certificates", id + "_trivial_gap", 1.0, triv.gap,
                      std::abs(triv.gap - 1.0) <= kCertTol, "gap == 1"});

        cert_rows[ti] = cr.csv_row(id, m.states[x0]);
    });

    for (auto& rr : rows)
        for (auto& r : rr) out.rows.push_back(std::move(r));
    if (!cfg.output.empty())
        write_csv(cfg.output + "_certificates.csv",
                  "model_id,x0,lower,upper,gap,valid_lower,valid_upper", cert_rows);
}

// ------------------------------------------------------------------- regret

void exp_regret_worstcase(const ExperimentConfig& cfg, RunSummary& out) {
    const int instances = cfg.parameters.value("instances", 5);
    const int trials = cfg.parameters.value("trials", 40);
    numvec grid = cfg.parameters.value("eps_grid", numvec{0.01, 0.05, 0.1});

    struct Task {
        std::uint64_t seed;
        int idx;
    };
    std::vector<Task> tasks;
    for (std::uint64_t s : cfg.seeds)
        for (int i = 0; i < instances; ++i) tasks.push_back({s, i});

    std::vector<std::vector<ResultRow>> rows(tasks.size());
    std::vector<std::vector<std::string>> tables(tasks.size());

    parallel_for(static_cast<int>(tasks.size()), [&](int ti) {
        const auto [seed, idx] = tasks[ti];
        const std::uint64_t iseed = Rng::derive(seed, 0x4e64e7u, idx);
        ExperimentConfig icfg = cfg;
        const EnvInstance inst = load_instance(icfg, iseed);
        const MdpModel& m = inst.model;
        const ValueTables t = solve_exact(m);
        const int x0 = inst.start.top();
        const std::string id = "s" + std::to_string(seed) + "_i" + std::to_string(idx);

        for (double eps : grid) {
            double worst = 0.0, step_worst = 0.0, sum = 0.0, sumsq = 0.0;
            for (int trial = 0; trial < trials; ++trial) {
                const ScoreFunction h =
                    perturb_scores(m, t, eps, Rng::derive(iseed, trial, (int)(eps * 1e6)));
                const RegretReport rep = measure_regret(m, t, h, x0);
                worst = std::max(worst, rep.regret);
                sum += rep.regret;
                sumsq += rep.regret * rep.regret;
                // per-step optimality loss at states the greedy policy visits
                const PolicyTable pi = greedy_policy(m, h);
                for (int b = 1; b <= m.horizon; ++b) {
                    const OccupancySample occ =
                        occupancy(m, pi, inst.start.weights, m.horizon - b + 1, false);
                    for (int x = 0; x < m.num_states(); ++x) {
                        if (occ.weights[x] == 0.0 || m.is_goal(x)) continue;
                        double best = 0.0;
                        for (double qv : t.q[b][x]) best = std::max(best, qv);
                        int choice = 0;
                        for (int a = 0; a < m.num_actions(x); ++a)
                            if (pi.dist[b][x][a] > 0.0) choice = a;
                        step_worst = std::max(step_worst, best - t.q[b][x][choice]);
                    }
                }
            }
            const double bound = 2.0 * m.horizon * eps;
            rows[ti].push_back({"regret_worstcase", id + "_eps" + fmt(eps), bound, worst,
                                worst <= bound + kBoundTol, "max regret <= 2 B eps"});
            rows[ti].push_back({"regret_worstcase", id + "_eps" + fmt(eps) + "_step",
                                2.0 * eps, step_worst, step_worst <= 2.0 * eps + kBoundTol,
                                "per-step loss <= 2 eps at visited states"});
            const double mean_r = sum / trials;
            const double var = std::max(0.0, sumsq / trials - mean_r * mean_r);
            std::ostringstream tr;
            tr.precision(17);
            tr << eps << ',' << mean_r << ',' << std::sqrt(var) << ',' << trials << ','
               << bound;
            tables[ti].push_back(tr.str());
        }
    });

    std::vector<std::string> table_rows;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        for (auto& r : rows[i]) out.rows.push_back(std::move(r));
        for (auto& s : tables[i]) table_rows.push_back(std::move(s));
    }
    if (!cfg.output.empty())
        write_csv(cfg.output + "_table.csv", "epsilon,mean_regret,std,trials,bound",
                  table_rows);
}

// ---------------------------------------------------------------- fast rate

void exp_fast_rate(const ExperimentConfig& cfg, RunSummary& out) {
    const int trials = cfg.parameters.value("trials", 500);
    const int k = cfg.parameters.value("k", 1);
    numvec grid = cfg.parameters.value("eps_grid", numvec{0.02, 0.04, 0.08, 0.16});
    const double band = cfg.parameters.value("slope_band", 0.4);

    ExperimentConfig icfg = cfg;
    const EnvInstance inst = load_instance(icfg, cfg.seeds[0]);
    const MdpModel& m = inst.model;
    const ValueTables t = solve_exact(m);
    const PolicyTable opt = optimal_policy(m, t);

    std::vector<OccupancySample> occ;
    for (int b = 1; b <= m.horizon; ++b)
        occ.push_back(occupancy(m, opt, inst.start.weights, b, false));
    const MarginStats ms = margin_stats(m, t, occ, k,
                                        {cfg.parameters.value("fit_min", 0.02),
                                         cfg.parameters.value("fit_max", 0.95)});

    const auto rows = fast_rate_experiment(m, inst.start.weights, t, k, grid, trials,
                                           cfg.seeds[0], &ms);
    std::vector<std::string> table_rows;
    numvec xs, ys;
    for (const auto& r : rows) {
        const double wc_bound = 2.0 * m.horizon * r.epsilon;
        out.rows.push_back({"fast_rate", "eps" + fmt(r.epsilon), wc_bound, r.mean_regret,
                            r.mean_regret <= wc_bound + kBoundTol,
                            "mean regret <= 2 B eps"});
        std::ostringstream tr;
        tr.precision(17);
        tr << r.epsilon << ',' << r.mean_regret << ',' << r.stddev << ',' << r.trials << ','
           << r.bound;
        table_rows.push_back(tr.str());
        if (r.epsilon > 0.0 && r.mean_regret > 0.0) {
            xs.push_back(r.epsilon);
            ys.push_back(r.mean_regret);
        }
    }
    out.details["margin_beta"] = ms.fitted_beta;
    out.details["margin_c"] = ms.fitted_c;
    out.details["margin_fit_ok"] = ms.fit_ok;
    out.details["occupancy"] = "plain (law of X_{b-1} under the optimal policy)";
    if (xs.size() >= 3) {
        const LineFit fit = loglog_fit(xs, ys);
        const double predicted = ms.fit_ok ? ms.fitted_beta + 1.0 : 2.0;
        out.rows.push_back({"fast_rate", "slope", predicted, fit.slope,
                            std::abs(fit.slope - predicted) <= band,
                            "regret slope vs beta+1 (band " + fmt(band) + ")"});
        out.details["slope"] = fit.slope;
    }
    if (!cfg.output.empty())
        write_csv(cfg.output + "_table.csv", "epsilon,mean_regret,std,trials,bound",
                  table_rows);
}

// --------------------------------------------------------------- estimation

void exp_estimation_coverage(const ExperimentConfig& cfg, RunSummary& out) {
    const int n_states = cfg.parameters.value("n_states", 60);
    UniformBoundConfig ucfg;
    ucfg.depth = cfg.parameters.value("depth", 1);
    ucfg.eta = cfg.parameters.value("eta", 0.08);
    ucfg.m = cfg.parameters.value("m", 150);
    ucfg.trials = cfg.parameters.value("trials", 200);
    numvec deltas = cfg.parameters.value("deltas", numvec{0.05});

    MdpModel m;
    std::shared_ptr<const PairDomain> domain;
    if (cfg.model_path || cfg.env) {
        ExperimentConfig icfg = cfg;
        m = load_instance(icfg, cfg.seeds[0]).model;
    } else {
        m = make_line_model(n_states);
    }
    domain = std::make_shared<const PairDomain>(pair_domain_from_payloads(m));
    const ValueTables t = solve_exact(m);

    for (double delta : deltas) {
        ucfg.delta = delta;
        const CoverageReport rep = verify_uniform_bound(m, t, domain, ucfg, cfg.seeds[0]);
        out.rows.push_back({"estimation_coverage", "delta" + fmt(delta), rep.threshold,
                            rep.fraction, rep.pass, "coverage >= 1 - delta - 3 sigma"});
        out.details["delta" + fmt(delta)] = rep.to_json();
    }
}

void exp_adaptive_deviation(const ExperimentConfig& cfg, RunSummary& out) {
    AdaptiveDeviationConfig acfg;
    acfg.n = cfg.parameters.value("n", 1000);
    acfg.delta = cfg.parameters.value("delta", 0.05);
    acfg.trials = cfg.parameters.value("trials", 300);
    const int nf = cfg.parameters.value("num_functions", 32);
    const int size = cfg.parameters.value("process_size", 16);
    const std::string kind = cfg.parameters.value("process", std::string("chain"));

    const ProcessSpec proc = kind == "iid_coin" ? ProcessSpec::iid_coin()
                                                : ProcessSpec::random_chain(size, cfg.seeds[0]);
    Rng rng(Rng::derive(cfg.seeds[0], 0xf1u));
    std::vector<numvec> funcs(nf, numvec(proc.kernel.size(), 0.0));
    for (auto& f : funcs)
        for (double& v : f) v = rng.uniform();

    const CoverageReport rep = adaptive_deviation_experiment(proc, funcs, acfg, cfg.seeds[0]);
    out.rows.push_back({"adaptive_deviation",
                        "n" + std::to_string(acfg.n) + "_N" + std::to_string(nf),
                        rep.threshold, rep.fraction, rep.pass,
                        "coverage >= 1 - delta - 3 sigma"});
    out.details["coverage"] = rep.to_json();
}

// --------------------------------------------------------------- truncation

void exp_truncation(const ExperimentConfig& cfg, RunSummary& out) {
    const int instances = cfg.parameters.value("instances", 50);

    std::vector<std::pair<std::uint64_t, int>> tasks;
    for (std::uint64_t s : cfg.seeds)
        for (int i = 0; i < instances; ++i) tasks.emplace_back(s, i);
    std::vector<std::vector<ResultRow>> rows(tasks.size());

    parallel_for(static_cast<int>(tasks.size()), [&](int ti) {
        const auto [seed, idx] = tasks[ti];
        const std::uint64_t iseed = Rng::derive(seed, 0x7467u, idx);
        ExperimentConfig icfg = cfg;
        const EnvInstance inst = load_instance(icfg, iseed);
        const MdpModel& m = inst.model;
        const ValueTables t = solve_exact(m);
        const PolicyTable pi = optimal_policy(m, t);
        const int x0 = inst.start.top();
        const std::string id = "s" + std::to_string(seed) + "_i" + std::to_string(idx);

        double max_mass = 0.0;
        for (const auto& p : m.payloads) max_mass = std::max(max_mass, p.mass());
        Rng rng(Rng::derive(iseed, 0xca9u));
        const double w =
            m.payloads[x0].mass() + rng.uniform() * (max_mass - m.payloads[x0].mass());

        const TruncationCheck chk = verify_truncation_bound(m, pi, x0, w);
        rows[ti].push_back({"truncation", id + "_coupled", chk.v_trunc, chk.v_true,
                            chk.coupled_holds, "v_true >= v_trunc (W=" + fmt(w) + ")"});
        rows[ti].push_back({"truncation", id + "_corrected", chk.v_trunc - chk.delta_w,
                            chk.v_true, chk.holds, "v_true >= v_trunc - delta_W"});
    });
    for (auto& rr : rows)
        for (auto& r : rr) out.rows.push_back(std::move(r));
}

// ------------------------------------------------------------------- sweeps

void sweep_epsilon(const ExperimentConfig& cfg, RunSummary& out, bool margin_axis) {
    const int trials = cfg.parameters.value("trials", 800);
    const int k = cfg.parameters.value("k", 1);
    numvec grid = cfg.parameters.value("grid", numvec{0.02, 0.04, 0.08, 0.16});
    if (grid.size() < 4) throw std::invalid_argument("scaling_sweep: need >= 4 axis points");

    EnvSpec spec;
    if (cfg.env) {
        spec = *cfg.env;
    } else {
        spec.family = EnvFamily::margin_designed;
        spec.branching = 8;
        spec.depth = 20;
        spec.margin_profile.kind = margin_axis ? MarginProfile::Kind::uniform_gaps
                                               : MarginProfile::Kind::mixed;
    }
    spec.seed = cfg.seeds[0];
    const EnvInstance inst = generate(spec);
    const MdpModel& m = inst.model;
    const ValueTables t = solve_exact(m);

    double predicted = 1.0;
    if (margin_axis) {
        const PolicyTable opt = optimal_policy(m, t);
        std::vector<OccupancySample> occ;
        for (int b = 1; b <= m.horizon; ++b)
            occ.push_back(occupancy(m, opt, inst.start.weights, b, false));
        const MarginStats ms = margin_stats(m, t, occ, k, {0.02, 0.95});
        predicted = ms.fit_ok ? ms.fitted_beta + 1.0 : 2.0;
        out.details["margin_beta"] = ms.fitted_beta;
    }

    const auto rows =
        fast_rate_experiment(m, inst.start.weights, t, k, grid, trials, cfg.seeds[0]);
    numvec xs, ys;
    std::vector<std::string> table_rows;
    for (const auto& r : rows) {
        const double bound = 2.0 * m.horizon * r.epsilon;
        out.rows.push_back({out.experiment, "eps" + fmt(r.epsilon), bound, r.mean_regret,
                            r.mean_regret <= bound + kBoundTol, "mean regret <= 2 B eps"});
        if (r.mean_regret > 0.0) {
            xs.push_back(r.epsilon);
            ys.push_back(r.mean_regret);
        }
        std::ostringstream tr;
        tr.precision(17);
        tr << r.epsilon << ',' << r.mean_regret << ',' << r.stddev << ',' << r.trials << ','
           << bound;
        table_rows.push_back(tr.str());
    }
    if (static_cast<int>(xs.size()) < 4)
        throw std::runtime_error("scaling_sweep: fewer than 4 usable axis points");
    const LineFit fit = loglog_fit(xs, ys);
    const double band = cfg.parameters.value("slope_band", margin_axis ? 0.4 : 0.2);
    out.rows.push_back({out.experiment, "slope", predicted, fit.slope,
                        std::abs(fit.slope - predicted) <= band,
                        "fitted exponent vs predicted (band " + fmt(band) + ")"});
    out.details["slope"] = fit.slope;
    out.details["predicted"] = predicted;
    if (!cfg.output.empty())
        write_csv(cfg.output + "_table.csv", "epsilon,mean_regret,std,trials,bound",
                  table_rows);
}

void sweep_n(const ExperimentConfig& cfg, RunSummary& out) {
    numvec grid = cfg.parameters.value("grid", numvec{1000, 3000, 9000, 27000});
    if (grid.size() < 4) throw std::invalid_argument("scaling_sweep: need >= 4 axis points");
    const int reps = cfg.parameters.value("reps", 5);
    const int n_states = cfg.parameters.value("n_states", 200);
    const double c_eta = cfg.parameters.value("c_eta", 0.5);
    const double delta = cfg.parameters.value("delta", 0.05);

    const MdpModel m = make_line_model(n_states);
    const ValueTables t = solve_exact(m);
    const auto domain = std::make_shared<const PairDomain>(pair_domain_from_payloads(m));
    const PolicyTable opt = optimal_policy(m, t);

    numvec truth(domain->size(), 0.0);
    for (int i = 0; i < domain->size(); ++i)
        truth[i] = t.q[1][domain->pairs[i].first][domain->pairs[i].second];
    const double lq = lipschitz_constant(*domain, truth);

    numvec xs, ys;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        const double n_target = grid[gi];
        const double eta = c_eta * std::pow(n_target, -1.0 / 3.0);
        const EpsNet net = build_greedy_net(domain->space, eta);
        const int ncenters = static_cast<int>(net.centers.size());
        const int mm = std::max(1, static_cast<int>(n_target / ncenters));
        const double n_actual = static_cast<double>(mm) * ncenters;

        std::vector<std::pair<int, int>> center_pairs;
        for (int c : net.centers) center_pairs.push_back(domain->pairs[c]);

        numvec sups;
        for (int rep = 0; rep < reps; ++rep) {
            const RolloutDataset ds =
                rollout_labels(m, opt, 1, center_pairs, mm,
                               Rng::derive(cfg.seeds[0], gi, rep), "optimal");
            const NetEstimator est = fit_net_estimator(domain, ds, eta, lq);
            sups.push_back(sup_error(est, truth));
        }
        const double mean_sup = mean(sups);
        const NetEstimator probe{domain, net, numvec(ncenters, 0.0),
                                 numvec(ncenters, 0.0), lq, mm};
        const double bound = uniform_error_bound(probe, 0.0, lq, delta);
        out.rows.push_back({out.experiment, "n" + std::to_string((long)n_actual), bound,
                            mean_sup, mean_sup <= bound,
                            "mean sup-error <= explicit bound (eta=" + fmt(eta) + ")"});
        xs.push_back(n_actual);
        ys.push_back(mean_sup);
    }
    const LineFit fit = loglog_fit(xs, ys);
    const double d_dim = 1.0;
    const double predicted = -1.0 / (d_dim + 2.0);
    out.rows.push_back({out.experiment, "slope", predicted, fit.slope,
                        fit.slope >= -0.5 && fit.slope <= -0.2,
                        "estimation-error exponent in [-0.5, -0.2]"});
    out.details["slope"] = fit.slope;
    out.details["predicted"] = predicted;
}

void sweep_horizon(const ExperimentConfig& cfg, RunSummary& out) {
    numvec grid = cfg.parameters.value("grid", numvec{5, 10, 15, 20});
    if (grid.size() < 4) throw std::invalid_argument("scaling_sweep: need >= 4 axis points");
    const double eps = cfg.parameters.value("eps", 0.05);
    const int trials = cfg.parameters.value("trials", 400);

    numvec xs, ys;
    for (double bd : grid) {
        EnvSpec spec;
        spec.family = EnvFamily::margin_designed;
        spec.branching = 8;
        spec.depth = static_cast<int>(bd);
        spec.margin_profile.kind = MarginProfile::Kind::mixed;
        spec.seed = cfg.seeds[0];
        const EnvInstance inst = generate(spec);
        const ValueTables t = solve_exact(inst.model);
        const auto rows = fast_rate_experiment(inst.model, inst.start.weights, t, 1, {eps},
                                               trials, cfg.seeds[0]);
        out.rows.push_back({out.experiment, "B" + std::to_string((int)bd),
                            2.0 * bd * eps, rows[0].mean_regret,
                            rows[0].mean_regret <= 2.0 * bd * eps + kBoundTol,
                            "mean regret <= 2 B eps"});
        if (rows[0].mean_regret > 0.0) {
            xs.push_back(bd);
            ys.push_back(rows[0].mean_regret);
        }
    }
    if (static_cast<int>(xs.size()) < 4)
        throw std::runtime_error("scaling_sweep: fewer than 4 usable axis points");
    const LineFit fit = loglog_fit(xs, ys);
    out.rows.push_back({out.experiment, "slope", 1.0, fit.slope,
                        std::abs(fit.slope - 1.0) <= 0.5,
                        "regret grows ~linearly with the horizon"});
    out.details["slope"] = fit.slope;
}

void sweep_dimension(const ExperimentConfig& cfg, RunSummary& out) {
    numvec grid = cfg.parameters.value("grid", numvec{1, 2, 3});
    const double n_target = cfg.parameters.value("n", 8000);
    const int reps = cfg.parameters.value("reps", 3);

    numvec errs;
    for (double dd : grid) {
        const int d = static_cast<int>(dd);
        const int side = d == 1 ? 128 : d == 2 ? 16 : d == 3 ? 7 : 4;
        const MdpModel m = make_grid_model(d, side);
        const ValueTables t = solve_exact(m);
        const auto domain = std::make_shared<const PairDomain>(pair_domain_from_payloads(m));
        const PolicyTable opt = optimal_policy(m, t);
        numvec truth(domain->size(), 0.0);
        for (int i = 0; i < domain->size(); ++i)
            truth[i] = t.q[1][domain->pairs[i].first][domain->pairs[i].second];
        const double lq = lipschitz_constant(*domain, truth);
        const double eta = 0.5 * std::pow(n_target, -1.0 / (d + 2.0));
        const EpsNet net = build_greedy_net(domain->space, eta);
        const int mm =
            std::max(1, static_cast<int>(n_target / static_cast<double>(net.centers.size())));
        std::vector<std::pair<int, int>> center_pairs;
        for (int c : net.centers) center_pairs.push_back(domain->pairs[c]);
        numvec sups;
        for (int rep = 0; rep < reps; ++rep) {
            const RolloutDataset ds = rollout_labels(m, opt, 1, center_pairs, mm,
                                                     Rng::derive(cfg.seeds[0], d, rep));
            const NetEstimator est = fit_net_estimator(domain, ds, eta, lq);
            sups.push_back(sup_error(est, truth));
        }
        errs.push_back(mean(sups));
        out.rows.push_back({out.experiment, "d" + std::to_string(d),
                            std::pow(n_target, -1.0 / (d + 2.0)), errs.back(), true,
                            "measured sup-error at fixed n (reference n^{-1/(d+2)})"});
    }
    if (grid.size() < 4) {
        out.details["fit"] = "refused: fewer than 4 axis points";
        return;
    }
    const LineFit fit = loglog_fit(grid, errs);
    out.details["slope"] = fit.slope;
}

}  // namespace

RunSummary scaling_sweep(const ExperimentConfig& cfg) {
    const std::string axis = cfg.parameters.value("axis", std::string());
    RunSummary out;
    out.experiment = "scaling_sweep_" + axis;
    const auto start = std::chrono::steady_clock::now();
    if (axis == "epsilon")
        sweep_epsilon(cfg, out, false);
    else if (axis == "epsilon_margin")
        sweep_epsilon(cfg, out, true);
    else if (axis == "n")
        sweep_n(cfg, out);
    else if (axis == "horizon")
        sweep_horizon(cfg, out);
    else if (axis == "d")
        sweep_dimension(cfg, out);
    else
        throw std::invalid_argument(
            "scaling_sweep: axis must be epsilon | epsilon_margin | n | horizon | d");
    out.all_hold = true;
    for (const auto& r : out.rows) out.all_hold = out.all_hold && r.holds;
    out.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (!cfg.output.empty()) {
        std::vector<std::string> lines;
        for (const auto& r : out.rows) lines.push_back(result_csv_row(r));
        write_csv(cfg.output + ".csv", "experiment,instance,claimed,measured,holds,detail",
                  lines);
        std::ofstream js(cfg.output + ".json");
        js << out.to_json().dump(2) << "\n";
    }
    return out;
}

RunSummary run(const ExperimentConfig& cfg) {
    if (cfg.seeds.empty()) throw std::invalid_argument("config: seed list must be nonempty");
    if (cfg.experiment == "scaling_sweep") return scaling_sweep(cfg);

    RunSummary out;
    out.experiment = cfg.experiment;
    const auto start = std::chrono::steady_clock::now();
    if (cfg.experiment == "certificates")
        exp_certificates(cfg, out);
    else if (cfg.experiment == "regret_worstcase")
        exp_regret_worstcase(cfg, out);
    else if (cfg.experiment == "fast_rate")
        exp_fast_rate(cfg, out);
    else if (cfg.experiment == "estimation_coverage")
        exp_estimation_coverage(cfg, out);
    else if (cfg.experiment == "adaptive_deviation")
        exp_adaptive_deviation(cfg, out);
    else if (cfg.experiment == "truncation")
        exp_truncation(cfg, out);
    else
        throw std::invalid_argument("run: unknown experiment '" + cfg.experiment + "'");

    out.all_hold = true;
    for (const auto& r : out.rows) out.all_hold = out.all_hold && r.holds;
    out.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (!cfg.output.empty()) {
        std::vector<std::string> lines;
        for (const auto& r : out.rows) lines.push_back(result_csv_row(r));
        write_csv(cfg.output + ".csv", "experiment,instance,claimed,measured,holds,detail",
                  lines);
        std::ofstream js(cfg.output + ".json");
        js << out.to_json().dump(2) << "\n";
    }
    return out;
}

int exit_code(const RunSummary& summary) { return summary.all_hold ? 0 : 1; }

}  // namespace provlab
