#include <doctest.h>

#include <cmath>

#include "provlab/mdp.hpp"
#include "testutil.hpp"

using namespace provlab;
using namespace provlab::test;

TEST_SUITE("mdp_core") {

TEST_CASE("chain values from backward induction") {
    const MdpModel m = three_state_chain(2);
    const ValueTables t = solve_exact(m);
    CHECK(t.v[1][0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(t.v[2][0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t.v[0][0] == 0.0);  // horizon exhausted, not a goal
    CHECK(t.v[0][2] == 1.0);
    CHECK(t.v[1][2] == 1.0);  // goal stays 1 at every depth
    CHECK(t.v[2][2] == 1.0);

    // against the recursive enumeration oracle
    for (int b = 0; b <= 2; ++b)
        for (int x = 0; x < 3; ++x)
            CHECK(t.v[b][x] == doctest::Approx(oracle_value(m, x, b)).epsilon(1e-12));
}

TEST_CASE("non-stochastic rows are rejected") {
    MdpModel m = three_state_chain(2);
    m.kernel[0][0] = {{2, 0.5}, {1, 0.4}};
    CHECK_THROWS_AS(solve_exact(m), std::invalid_argument);
}

TEST_CASE("optimal policy evaluation recovers the optimum") {
    const MdpModel m = three_state_chain(3, true);
    const ValueTables t = solve_exact(m);
    const PolicyTable pi = optimal_policy(m, t);
    const auto v = evaluate_policy(m, pi);
    for (int b = 0; b <= 3; ++b)
        for (int x = 0; x < 3; ++x) CHECK(v[b][x] == t.v[b][x]);
}

TEST_CASE("mixed policy value by path enumeration") {
    // uniform between the kernel action and a self-loop at the top step,
    // then the chain action afterwards
    const MdpModel m = three_state_chain(2, true);
    PolicyTable pi;
    pi.dist.assign(3, {});
    pi.dist[1] = {{1.0, 0.0}, {1.0}, {1.0}};
    pi.dist[2] = {{0.5, 0.5}, {1.0}, {1.0}};
    const auto v = evaluate_policy(m, pi);
    CHECK(v[2][0] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(v[2][0] == doctest::Approx(oracle_policy_value(m, pi, 0, 2)).epsilon(1e-12));
    CHECK(v[2][2] == 1.0);  // goal state is 1 under any policy
}

TEST_CASE("simulate basics") {
    const MdpModel m = three_state_chain(2);
    const ValueTables t = solve_exact(m);
    const PolicyTable pi = optimal_policy(m, t);

    const Trajectory from_goal = simulate(m, pi, 2, 1);
    CHECK(from_goal.states.size() == 1);
    CHECK(from_goal.success);

    // deterministic kernel: the trajectory ignores the seed
    MdpModel det = three_state_chain(2);
    det.kernel[0][0] = {{1, 1.0}};
    const ValueTables dt = solve_exact(det);
    const PolicyTable dpi = optimal_policy(det, dt);
    const Trajectory t1 = simulate(det, dpi, 0, 1);
    const Trajectory t2 = simulate(det, dpi, 0, 999);
    CHECK(t1.states == t2.states);

    // Monte Carlo frequency within a 3-sigma binomial band of the value
    const int n = 100000;
    int wins = 0;
    for (int i = 0; i < n; ++i) wins += simulate(m, pi, 0, i).success ? 1 : 0;
    const double v = t.v[2][0];
    const double freq = static_cast<double>(wins) / n;
    CHECK(std::abs(freq - v) <= 3.0 * std::sqrt(v * (1 - v) / n) + 1e-9);
}

TEST_CASE("attainment rescan") {
    const MdpModel m = three_state_chain(2, true);
    const ValueTables t = solve_exact(m);
    CHECK(check_attainment(m, t).ok());

    // identical rows tie; the argmax must sit on the lower index
    MdpModel twin = three_state_chain(2, true);
    twin.kernel[0][1] = twin.kernel[0][0];
    const ValueTables tt = solve_exact(twin);
    CHECK(check_attainment(twin, tt).ok());
    for (int b = 1; b <= 2; ++b) CHECK(tt.amax[b][0] == 0);

    const MdpModel big = random_model({.min_states = 50, .max_states = 50}, 17);
    const ValueTables bt = solve_exact(big);
    CHECK(check_attainment(big, bt).ok());
}

TEST_CASE("range, monotonicity and absorbing equivalence on random models") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const MdpModel m = random_model({}, seed);
        const ValueTables t = solve_exact(m);
        for (int b = 0; b <= m.horizon; ++b) {
            for (int x = 0; x < m.num_states(); ++x) {
                CHECK(t.v[b][x] >= 0.0);
                CHECK(t.v[b][x] <= 1.0);
                if (b > 0) CHECK(t.v[b][x] >= t.v[b - 1][x]);  // exact, no tolerance
            }
        }
        // first-hit semantics match the absorbing rewrite exactly
        const ValueTables ta = solve_exact(make_goal_absorbing(m));
        for (int b = 0; b <= m.horizon; ++b)
            for (int x = 0; x < m.num_states(); ++x) CHECK(t.v[b][x] == ta.v[b][x]);
    }
}

TEST_CASE("solve matches the enumeration oracle on random sparse models") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const MdpModel m =
            random_model({.min_states = 4, .max_states = 12, .max_actions = 3,
                          .max_successors = 3, .horizon = 4},
                         seed);
        const ValueTables t = solve_exact(m);
        for (int x = 0; x < m.num_states(); ++x)
            CHECK(t.v[4][x] == doctest::Approx(oracle_value(m, x, 4)).epsilon(1e-10));
    }
}

TEST_CASE("start in goal dominates every horizon") {
    MdpModel m = three_state_chain(4);
    const ValueTables t = solve_exact(m);
    for (int b = 0; b <= 4; ++b) CHECK(t.v[b][2] == 1.0);

    MdpModel zero = three_state_chain(0);
    const ValueTables tz = solve_exact(zero);
    CHECK(tz.v[0][0] == 0.0);  // B = 0 and not already solved
}

TEST_CASE("json round trip preserves the solution") {
    MdpModel m = random_model({}, 3);
    m.space = MetricSpace::grid({4}, 0.5, MetricSpace::GridMetric::euclidean);
    const ValueTables t = solve_exact(m);
    const MdpModel back = MdpModel::from_json(m.to_json());
    const ValueTables tb = solve_exact(back);
    for (int x = 0; x < m.num_states(); ++x)
        CHECK(t.v[m.horizon][x] == doctest::Approx(tb.v[m.horizon][x]).epsilon(1e-12));
}

TEST_CASE("missing policy entries are rejected") {
    const MdpModel m = three_state_chain(2);
    PolicyTable pi;
    pi.dist.assign(3, {});
    pi.dist[1] = {{1.0}, {1.0}, {1.0}};
    // depth 2 missing entirely
    CHECK_THROWS_AS(evaluate_policy(m, pi), std::invalid_argument);
}

}  // TEST_SUITE
