#include <doctest.h>

#include <cmath>

#include "provlab/planners.hpp"
#include "provlab/rng.hpp"
#include "testutil.hpp"

using namespace provlab;
using namespace provlab::test;

namespace {

// one-step model with three actions hitting the goal with the given probs
MdpModel bandit(const numvec& probs, int horizon = 1) {
    MdpModel m;
    m.states = {"s", "g", "d"};
    std::vector<std::string> names;
    std::vector<std::vector<std::pair<int, double>>> rows;
    for (std::size_t a = 0; a < probs.size(); ++a) {
        names.push_back("a" + std::to_string(a));
        rows.push_back({{1, probs[a]}, {2, 1.0 - probs[a]}});
    }
    m.actions = {names, {"stay"}, {"stay"}};
    m.kernel = {rows, {{{1, 1.0}}}, {{{2, 1.0}}}};
    m.goal = {0, 1, 0};
    m.horizon = horizon;
    return m;
}

ScoreFunction shift_scores(const MdpModel& m, const ValueTables& t, double delta) {
    std::vector<std::vector<numvec>> h(t.horizon + 1);
    for (int b = 1; b <= t.horizon; ++b) {
        h[b].assign(m.num_states(), {});
        for (int x = 0; x < m.num_states(); ++x) {
            h[b][x] = t.q[b][x];
            for (double& v : h[b][x]) v += delta;
        }
    }
    return ScoreFunction::tabular(std::move(h));
}

}  // namespace

TEST_SUITE("planners") {

TEST_CASE("greedy recovers the optimum from exact scores") {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        const MdpModel m = random_model({}, seed);
        const ValueTables t = solve_exact(m);
        const PolicyTable pi = greedy_policy(m, ScoreFunction::tabular(t.q));
        const auto v = evaluate_policy(m, pi);
        for (int x = 0; x < m.num_states(); ++x)
            CHECK(v[m.horizon][x] == doctest::Approx(t.v[m.horizon][x]).epsilon(1e-12));
    }
}

TEST_CASE("constant scores fall back to the first action") {
    const MdpModel m = three_state_chain(2, true);
    std::vector<std::vector<numvec>> h(3);
    for (int b = 1; b <= 2; ++b) h[b] = {{0.4, 0.4}, {0.4}, {0.4}};
    const PolicyTable pi = greedy_policy(m, ScoreFunction::tabular(h));
    for (int b = 1; b <= 2; ++b) CHECK(pi.dist[b][0][0] == 1.0);
}

TEST_CASE("argmax is invariant under monotone transforms") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const MdpModel m = random_model({}, seed);
        const ValueTables t = solve_exact(m);
        const ScoreFunction raw = ScoreFunction::tabular(t.q);
        // unclipped constant shift and a strictly increasing square
        const ScoreFunction shifted = shift_scores(m, t, 0.3);
        const PolicyTable p1 = greedy_policy(m, raw);
        const PolicyTable p2 = greedy_policy(m, shifted);
        std::vector<std::vector<numvec>> sq(m.horizon + 1);
        for (int b = 1; b <= m.horizon; ++b) {
            sq[b].assign(m.num_states(), {});
            for (int x = 0; x < m.num_states(); ++x) {
                sq[b][x] = t.q[b][x];
                for (double& v : sq[b][x]) v = v * v;
            }
        }
        const PolicyTable p3 = greedy_policy(m, ScoreFunction::tabular(sq));
        for (int b = 1; b <= m.horizon; ++b)
            for (int x = 0; x < m.num_states(); ++x) {
                CHECK(p1.dist[b][x] == p2.dist[b][x]);
                CHECK(p1.dist[b][x] == p3.dist[b][x]);
            }
    }
}

TEST_CASE("top-k policies") {
    const MdpModel m = bandit({0.9, 0.5, 0.1});
    const ValueTables t = solve_exact(m);
    const ScoreFunction h = ScoreFunction::tabular(t.q);

    // k = action count with exact_best recovers the optimum
    const PolicyTable full = topk_policy(m, h, 3, TopkTie::exact_best, &t);
    CHECK(evaluate_policy(m, full)[1][0] == doctest::Approx(0.9));

    // k = 1 coincides with greedy
    const PolicyTable one = topk_policy(m, h, 1, TopkTie::uniform);
    const PolicyTable greedy = greedy_policy(m, h);
    CHECK(one.dist[1][0] == greedy.dist[1][0]);

    // uniform tie mode spreads over the retained set
    const PolicyTable two = topk_policy(m, h, 2, TopkTie::uniform);
    CHECK(two.dist[1][0][0] == doctest::Approx(0.5));
    CHECK(two.dist[1][0][1] == doctest::Approx(0.5));
    CHECK(two.dist[1][0][2] == 0.0);

    CHECK_THROWS_AS(topk_policy(m, h, 4, TopkTie::uniform), std::invalid_argument);
}

TEST_CASE("separated scores keep the optimal action in the top-k") {
    // gaps 0.4 > 2 eps with eps = 0.1: the retained set always contains the
    // best action, so exact_best equals the optimum
    const MdpModel m = bandit({0.9, 0.5, 0.1});
    const ValueTables t = solve_exact(m);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const ScoreFunction h = perturb_scores(m, t, 0.1, seed);
        const PolicyTable pi = topk_policy(m, h, 1, TopkTie::exact_best, &t);
        CHECK(evaluate_policy(m, pi)[1][0] == doctest::Approx(t.v[1][0]).epsilon(1e-12));
    }
}

TEST_CASE("top-k exact_best value is nondecreasing in k") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const MdpModel m = random_model({.max_actions = 5}, seed);
        const ValueTables t = solve_exact(m);
        const ScoreFunction h = perturb_scores(m, t, 0.15, seed + 100);
        int kmax = m.num_actions(0);
        for (int x = 1; x < m.num_states(); ++x) kmax = std::min(kmax, m.num_actions(x));
        double prev = -1.0;
        for (int k = 1; k <= kmax; ++k) {
            const PolicyTable pi = topk_policy(m, h, k, TopkTie::exact_best, &t);
            const double v = evaluate_policy(m, pi)[m.horizon][0];
            CHECK(v >= prev - 1e-12);
            prev = v;
        }
    }
}

TEST_CASE("beam search") {
    // two-branch tree where greedy ranks the dead branch first
    MdpModel m;
    m.states = {"r", "x1", "x2", "g", "d"};
    m.actions = {{"a1", "a2"}, {"go"}, {"go"}, {"stay"}, {"stay"}};
    m.kernel = {{{{1, 1.0}}, {{2, 1.0}}},
                {{{4, 1.0}}},
                {{{3, 1.0}}},
                {{{3, 1.0}}},
                {{{4, 1.0}}}};
    m.goal = {0, 0, 0, 1, 0};
    m.horizon = 2;
    std::vector<std::vector<numvec>> h(3);
    for (int b = 1; b <= 2; ++b) h[b] = {{0.9, 0.8}, {0.5}, {0.5}, {1.0}, {0.0}};
    const ScoreFunction scores = ScoreFunction::tabular(h);

    CHECK(!beam_search(m, scores, 1, 0, 7).success);  // greedy goes to the dead branch
    CHECK(beam_search(m, scores, 2, 0, 7).success);   // width 2 keeps the good branch

    // width >= total branching on a deterministic kernel is exhaustive
    const ValueTables t = solve_exact(m);
    const bool reachable = t.v[2][0] > 0.0;
    CHECK(beam_search(m, scores, 8, 0, 3).success == reachable);

    // width 1 on a deterministic kernel follows the greedy rollout
    const PolicyTable greedy = greedy_policy(m, scores);
    const Trajectory tr = simulate(m, greedy, 0, 5);
    CHECK(beam_search(m, scores, 1, 0, 5).success == tr.success);

    // beam from a goal state succeeds immediately
    CHECK(beam_search(m, scores, 1, 3, 0).success);
}

TEST_CASE("regret measurement") {
    const MdpModel m = three_state_chain(3, true);
    const ValueTables t = solve_exact(m);

    // exact scores: zero regret, zero bound
    numvec zero_eps(4, 0.0);
    const ScoreFunction exact = ScoreFunction::tabular(t.q, zero_eps);
    const RegretReport r0 = measure_regret(m, t, exact, 0);
    CHECK(r0.regret == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r0.bound_asserted);
    CHECK(r0.holds);

    // no declared accuracy: regret only, no bound claim
    const ScoreFunction bare = ScoreFunction::tabular(t.q);
    const RegretReport r1 = measure_regret(m, t, bare, 0);
    CHECK(!r1.bound_asserted);

    // a gap of 0.3 with eps = 0.05 can never flip the argmax
    const MdpModel b = bandit({0.8, 0.5});
    const ValueTables bt = solve_exact(b);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const ScoreFunction h = perturb_scores(b, bt, 0.05, seed);
        const RegretReport rep = measure_regret(b, bt, h, 0);
        CHECK(rep.regret == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(rep.holds);
    }
}

TEST_CASE("regret bound holds across random instances") {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const MdpModel m = random_model({}, seed);
        const ValueTables t = solve_exact(m);
        const double eps = (seed % 3 == 0) ? 0.01 : (seed % 3 == 1) ? 0.05 : 0.1;
        const ScoreFunction h = perturb_scores(m, t, eps, seed * 13 + 1);
        const RegretReport rep = measure_regret(m, t, h, 0);
        CHECK(rep.bound_asserted);
        CHECK(rep.holds);

        // pointwise one-step lemmas at every state
        const PolicyTable pi = greedy_policy(m, h);
        for (int b = 1; b <= m.horizon; ++b) {
            for (int x = 0; x < m.num_states(); ++x) {
                double best = 0.0;
                int astar = 0;
                for (int a = 0; a < m.num_actions(x); ++a)
                    if (t.q[b][x][a] > t.q[b][x][astar]) astar = a;
                best = t.q[b][x][astar];
                int chosen = 0;
                for (int a = 0; a < m.num_actions(x); ++a)
                    if (pi.dist[b][x][a] > 0.0) chosen = a;
                const double loss = best - t.q[b][x][chosen];
                CHECK(loss <= 2.0 * eps + kBoundTol);
                // second-best gap when the greedy choice is suboptimal
                if (chosen != astar && m.num_actions(x) >= 2) {
                    double second = -1.0;
                    for (int a = 0; a < m.num_actions(x); ++a)
                        if (a != astar) second = std::max(second, t.q[b][x][a]);
                    CHECK(best - second <= 2.0 * eps + kBoundTol);
                    CHECK(loss <= 2.0 * eps + kBoundTol);  // pointwise regret bound
                }
            }
        }
    }
}

TEST_CASE("occupancy pushes") {
    const MdpModel m = three_state_chain(2);
    const ValueTables t = solve_exact(m);
    const PolicyTable pi = optimal_policy(m, t);
    const numvec q0 = {1.0, 0.0, 0.0};

    const OccupancySample o1 = occupancy(m, pi, q0, 1, false);
    CHECK(o1.weights == q0);

    const OccupancySample o2 = occupancy(m, pi, q0, 2, false);
    CHECK(o2.weights[1] == doctest::Approx(0.5));
    CHECK(o2.weights[2] == doctest::Approx(0.5));

    const OccupancySample alive = occupancy(m, pi, q0, 2, true);
    CHECK(alive.weights[1] == doctest::Approx(1.0));  // conditioned on not solved

    // deterministic chain: a point mass walks down the layers
    MdpModel det = three_state_chain(2);
    det.kernel[0][0] = {{1, 1.0}};
    const ValueTables dt = solve_exact(det);
    const PolicyTable dpi = optimal_policy(det, dt);
    const OccupancySample od = occupancy(det, dpi, q0, 2, false);
    CHECK(od.weights[1] == doctest::Approx(1.0));

    // conditioning on an impossible event fails loudly
    const numvec from_goal = {0.0, 0.0, 1.0};
    CHECK_THROWS_AS(occupancy(m, pi, from_goal, 1, true), std::runtime_error);
}

TEST_CASE("margin statistics") {
    const MdpModel m = bandit({0.9, 0.7, 0.4});
    const ValueTables t = solve_exact(m);
    const PolicyTable pi = optimal_policy(m, t);
    const numvec q0 = {1.0, 0.0, 0.0};
    const std::vector<OccupancySample> occ = {occupancy(m, pi, q0, 1, false)};

    const MarginStats one = margin_stats(m, t, occ, 1, {0.01, 1.0});
    REQUIRE(!one.samples.empty());
    CHECK(one.samples[0].gap == doctest::Approx(0.2).epsilon(1e-12));  // 0.9 - 0.7
    CHECK(!one.fit_ok);  // a single distinct value refuses the fit

    const MarginStats two = margin_stats(m, t, occ, 2, {0.01, 1.0});
    CHECK(two.samples[0].gap == doctest::Approx(0.5).epsilon(1e-12));  // 0.9 - 0.4

    // k beyond the action count: infinite gap, excluded from the tail
    const MarginStats deep = margin_stats(m, t, occ, 3, {0.01, 1.0});
    CHECK(std::isinf(deep.samples[0].gap));
    CHECK(deep.no_small_margin_mass);
}

TEST_CASE("fast-rate rows") {
    const MdpModel m = bandit({0.9, 0.5});
    const ValueTables t = solve_exact(m);
    const numvec q0 = {1.0, 0.0, 0.0};
    const auto rows = fast_rate_experiment(m, q0, t, 1, {0.0, 0.05}, 50, 3);
    CHECK(rows[0].mean_regret == 0.0);  // eps = 0 row
    CHECK(rows[1].mean_regret == doctest::Approx(0.0).epsilon(1e-12));  // gap 0.4 > 2 eps
}

}  // TEST_SUITE
