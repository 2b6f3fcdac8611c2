#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "provlab/goal_measure.hpp"
#include "provlab/rng.hpp"
#include "testutil.hpp"

using namespace provlab;

namespace {

MetricSpace two_points(double d) {
    return MetricSpace::from_matrix({"p", "q"}, {{0.0, d}, {d, 0.0}});
}

// feasibility of the returned witness, checked from scratch
void check_witness(const BLWitness& w, const MetricSpace& s, const GoalMeasure& a,
                   const GoalMeasure& b, double value) {
    double obj = 0.0;
    for (const auto& [p, f] : w.values) {
        CHECK(std::abs(f) <= 1.0 + 1e-9);
        double ca = 0.0;
        for (const auto& [pp, ww] : a.support())
            if (pp == p) ca += ww;
        for (const auto& [pp, ww] : b.support())
            if (pp == p) ca -= ww;
        obj += ca * f;
    }
    for (const auto& [p, f] : w.values)
        for (const auto& [q, g] : w.values)
            CHECK(std::abs(f - g) <= s.dist(p, q) + 1e-9);
    CHECK(obj == doctest::Approx(value).epsilon(1e-9));
    CHECK(w.objective == doctest::Approx(value).epsilon(1e-12));
}

}  // namespace

TEST_SUITE("goal_measure") {

TEST_CASE("construction merges and validates") {
    const GoalMeasure m({{3, 1.0}, {1, 0.5}, {3, 2.0}});
    CHECK(m.support().size() == 2);
    CHECK(m.mass() == doctest::Approx(3.5));
    CHECK(m.support()[1].second == doctest::Approx(3.0));  // merged by exact identity
    CHECK_THROWS_AS(GoalMeasure({{0, 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(GoalMeasure({{0, -1.0}}), std::invalid_argument);
}

TEST_CASE("solved predicate") {
    CHECK(GoalMeasure().solved());
    CHECK(GoalMeasure().mass() == 0.0);
    CHECK(!GoalMeasure({{0, 1.0}}).solved());
    // tiny weights stay unsolved; weights are exact, never snapped
    CHECK(!GoalMeasure({{0, 1e-15}}).solved());
    CHECK(GoalMeasure({{0, 1.0}, {1, 1.0}}).mass() == doctest::Approx(2.0));
    CHECK(GoalMeasure({{0, 3.0}}).mass() == doctest::Approx(3.0));
}

TEST_CASE("closed-form distances") {
    const MetricSpace s = two_points(0.5);
    const GoalMeasure dp({{0, 1.0}});
    const GoalMeasure dq({{1, 1.0}});

    auto [self, wself] = bl_distance(dp, dp, s);
    CHECK(self == doctest::Approx(0.0).epsilon(1e-12));

    auto [tozero, wz] = bl_distance(dp, GoalMeasure(), s);
    CHECK(tozero == doctest::Approx(1.0).epsilon(1e-9));
    check_witness(wz, s, dp, GoalMeasure(), tozero);

    auto [near, wn] = bl_distance(dp, dq, s);
    CHECK(near == doctest::Approx(0.5).epsilon(1e-9));
    check_witness(wn, s, dp, dq, near);

    const MetricSpace far = two_points(3.0);
    auto [capped, wc] = bl_distance(dp, dq, far);
    CHECK(capped == doctest::Approx(2.0).epsilon(1e-9));  // min(d, 2)
    check_witness(wc, far, dp, dq, capped);
}

TEST_CASE("support outside the space is rejected") {
    const MetricSpace s = two_points(1.0);
    CHECK_THROWS_AS(bl_distance(GoalMeasure({{5, 1.0}}), GoalMeasure(), s),
                    std::invalid_argument);
}

TEST_CASE("metric axioms on random triples") {
    const MetricSpace s = test::random_euclidean_space(12, 7);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const GoalMeasure a = test::random_measure(s, 5, seed * 3);
        const GoalMeasure b = test::random_measure(s, 5, seed * 3 + 1);
        const GoalMeasure c = test::random_measure(s, 5, seed * 3 + 2);
        const double ab = bl_distance(a, b, s).first;
        const double ba = bl_distance(b, a, s).first;
        const double ac = bl_distance(a, c, s).first;
        const double cb = bl_distance(c, b, s).first;
        CHECK(ab == ba);  // symmetric bit-for-bit via sign canonicalization
        CHECK(ab >= -1e-12);
        CHECK(ab <= ac + cb + 1e-9);
        CHECK(ab <= 2.0 * std::max(a.mass(), b.mass()) + 1e-9);
        CHECK(ab <= a.mass() + b.mass() + 1e-9);
        const auto w = bl_distance(a, b, s).second;
        check_witness(w, s, a, b, ab);
    }
}

TEST_CASE("permutation invariance of the support list") {
    const MetricSpace s = test::random_euclidean_space(8, 11);
    const std::vector<std::pair<int, double>> atoms = {
        {4, 0.7}, {1, 1.2}, {6, 0.4}, {2, 0.9}};
    std::vector<std::pair<int, double>> shuffled = {{2, 0.9}, {6, 0.4}, {4, 0.7}, {1, 1.2}};
    const GoalMeasure m1{std::vector<std::pair<int, double>>(atoms)};
    const GoalMeasure m2{std::move(shuffled)};
    CHECK(m1 == m2);
    const GoalMeasure other = test::random_measure(s, 4, 99);
    CHECK(bl_distance(m1, other, s).first == bl_distance(m2, other, s).first);
}

TEST_CASE("json round trip") {
    const MetricSpace s = two_points(1.0);
    const GoalMeasure m({{0, 1.5}, {1, 0.25}});
    const GoalMeasure back = GoalMeasure::from_json(m.to_json(s), s);
    CHECK(back == m);
}

}  // TEST_SUITE
