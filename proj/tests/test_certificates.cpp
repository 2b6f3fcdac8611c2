#include <doctest.h>

#include <cmath>

#include "provlab/certificates.hpp"
#include "provlab/planners.hpp"
#include "provlab/rng.hpp"
#include "testutil.hpp"

using namespace provlab;
using namespace provlab::test;

TEST_SUITE("certificates") {

TEST_CASE("backup operator basics") {
    const MdpModel m = three_state_chain(2);
    const numvec zeros(3, 0.0), ones(3, 1.0);

    const numvec tz = bellman_apply(m, zeros);
    CHECK(tz == numvec{0.0, 0.0, 1.0});  // goal indicator
    const numvec to = bellman_apply(m, ones);
    CHECK(to == numvec{1.0, 1.0, 1.0});

    const ValueTables t = solve_exact(m);
    for (int b = 0; b < 2; ++b) {
        const numvec tv = bellman_apply(m, t.v[b]);
        for (int x = 0; x < 3; ++x) CHECK(tv[x] == doctest::Approx(t.v[b + 1][x]).epsilon(1e-12));
    }
    CHECK_THROWS_AS(bellman_apply(m, numvec{0.0, 1.5, 0.0}), std::invalid_argument);
}

TEST_CASE("monotonicity of the backup") {
    Rng rng(41);
    for (int rep = 0; rep < 20; ++rep) {
        const MdpModel m = random_model({}, rep);
        numvec v(m.num_states()), w(m.num_states());
        for (int x = 0; x < m.num_states(); ++x) {
            v[x] = rng.uniform();
            w[x] = std::min(1.0, v[x] + rng.uniform(0.0, 0.3));
        }
        const numvec tv = bellman_apply(m, v);
        const numvec tw = bellman_apply(m, w);
        for (int x = 0; x < m.num_states(); ++x) CHECK(tv[x] <= tw[x]);
    }
}

TEST_CASE("trivial certificates validate") {
    const MdpModel m = three_state_chain(3);
    CHECK(trivial_upper(m).valid);
    CHECK(trivial_lower(m).valid);
    const CertificateResult r = certify_sandwich(m, trivial_lower(m), trivial_upper(m), 0);
    CHECK(r.status == CertStatus::ok);
    CHECK(r.gap == doctest::Approx(1.0));
}

TEST_CASE("exact tables validate on both sides with zero gap") {
    const MdpModel m = three_state_chain(2, true);
    const ValueTables t = solve_exact(m);

    CertificateSequence up;
    up.side = CertSide::upper;
    up.funcs = t.v;
    up = validate_certificate(m, std::move(up));
    CHECK(up.valid);

    CertificateSequence lo;
    lo.side = CertSide::lower;
    lo.funcs = t.v;
    lo = validate_certificate(m, std::move(lo));
    CHECK(lo.valid);

    const CertificateResult r = certify_sandwich(m, lo, up, 0);
    CHECK(r.status == CertStatus::ok);
    CHECK(r.gap == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.lower == doctest::Approx(t.v[2][0]).epsilon(1e-12));
}

TEST_CASE("violations carry signed slack") {
    const MdpModel m = three_state_chain(2);
    const ValueTables t = solve_exact(m);
    CertificateSequence lo;
    lo.side = CertSide::lower;
    lo.funcs = t.v;
    lo.funcs[2][0] += 0.05;  // now exceeds T(funcs[1]) at s0
    lo = validate_certificate(m, std::move(lo));
    CHECK(!lo.valid);
    REQUIRE(lo.violations.size() == 1);
    CHECK(lo.violations[0].b == 2);
    CHECK(lo.violations[0].state == 0);
    CHECK(lo.violations[0].slack == doctest::Approx(-0.05).epsilon(1e-9));

    const CertificateResult r = certify_sandwich(m, lo, trivial_upper(m), 0);
    CHECK(r.status == CertStatus::invalid_lower);  // explicit error status, no bound claim
    CHECK(!r.violations.empty());
}

TEST_CASE("random valid certificates always sandwich the optimum") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const MdpModel m = random_model({}, seed);
        const ValueTables t = solve_exact(m);
        const auto [lo, up] = relaxed_certificate_pair(m, 0.15, seed);
        CHECK(lo.valid);
        CHECK(up.valid);
        for (int x = 0; x < m.num_states(); ++x) {
            const CertificateResult r = certify_sandwich(m, lo, up, x);
            CHECK(r.lower <= t.v[m.horizon][x] + kCertTol);
            CHECK(r.upper >= t.v[m.horizon][x] - kCertTol);
        }
    }
}

TEST_CASE("score certificate formula cases") {
    // one non-goal state with two actions whose top score is 0.6
    MdpModel m = three_state_chain(1, true);
    std::vector<std::vector<numvec>> h(2);
    h[1] = {{0.6, 0.2}, {0.3}, {1.0}};
    const ScoreFunction scores = ScoreFunction::tabular(h);
    const numvec eps = {0.0, 0.1};
    const CertificateResult r = score_certificate(m, scores, eps, 0);
    CHECK(r.lower == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.upper == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(r.gap == doctest::Approx(0.2).epsilon(1e-12));

    const CertificateResult at_goal = score_certificate(m, scores, eps, 2);
    CHECK(at_goal.lower == 1.0);
    CHECK(at_goal.upper == 1.0);
    CHECK(at_goal.gap == 0.0);
}

TEST_CASE("score certificate with the exact q tables is tight") {
    const MdpModel m = three_state_chain(3, true);
    const ValueTables t = solve_exact(m);
    const ScoreFunction h = ScoreFunction::tabular(t.q);
    const numvec eps(4, 0.0);
    const CertificateResult r = score_certificate(m, h, eps, 0, &t);
    CHECK(!r.premise_violated);
    CHECK(r.lower == doctest::Approx(t.v[3][0]).epsilon(1e-12));
    CHECK(r.upper == doctest::Approx(t.v[3][0]).epsilon(1e-12));
}

TEST_CASE("score certificate sandwich under perturbation, and the premise flag") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const MdpModel m = random_model({}, seed);
        const ValueTables t = solve_exact(m);
        const double eps = 0.08;
        const ScoreFunction h = perturb_scores(m, t, eps, seed);
        const numvec eps_vec(m.horizon + 1, eps);
        const CertificateResult r = score_certificate(m, h, eps_vec, 0, &t);
        CHECK(!r.premise_violated);
        CHECK(r.gap <= 2.0 * eps + kCertTol);
        CHECK(r.lower <= t.v[m.horizon][0] + kCertTol);
        CHECK(r.upper >= t.v[m.horizon][0] - kCertTol);

        // understate the accuracy and the premise flag must fire exactly
        // when some reachable pair carries more noise than declared
        const numvec lying(m.horizon + 1, 1e-6);
        const CertificateResult bad = score_certificate(m, h, lying, 0, &t);
        bool exceeded = false;
        const auto reach = reachable_sets(m, 0);
        for (int b = 1; b <= m.horizon && !exceeded; ++b)
            for (int x : reach[m.horizon - b]) {
                for (int a = 0; a < m.num_actions(x); ++a)
                    if (std::abs(h.at(b, x, a) - t.q[b][x][a]) > 1e-6 + 1e-12) {
                        exceeded = true;
                        break;
                    }
                if (exceeded) break;
            }
        CHECK(bad.premise_violated == exceeded);
    }
}

}  // TEST_SUITE
