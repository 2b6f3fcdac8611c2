#include <doctest.h>

#include <cmath>

#include "provlab/metric_space.hpp"
#include "provlab/rng.hpp"
#include "testutil.hpp"

using namespace provlab;

namespace {

MetricSpace collinear(const numvec& coords) {
    std::vector<std::string> names;
    std::vector<numvec> d(coords.size(), numvec(coords.size(), 0.0));
    for (std::size_t i = 0; i < coords.size(); ++i) {
        names.push_back("p" + std::to_string(i));
        for (std::size_t j = 0; j < coords.size(); ++j)
            d[i][j] = std::abs(coords[i] - coords[j]);
    }
    return MetricSpace::from_matrix(std::move(names), std::move(d));
}

}  // namespace

TEST_SUITE("metric_space") {

TEST_CASE("matrix validation rejects non-metrics") {
    std::vector<numvec> bad = {{0.0, 5.0, 1.0}, {5.0, 0.0, 1.0}, {1.0, 1.0, 0.0}};
    CHECK_THROWS_AS(MetricSpace::from_matrix({"a", "b", "c"}, bad), std::invalid_argument);

    std::vector<numvec> asym = {{0.0, 1.0}, {2.0, 0.0}};
    CHECK_THROWS_AS(MetricSpace::from_matrix({"a", "b"}, asym), std::invalid_argument);
}

TEST_CASE("greedy net on collinear points") {
    const MetricSpace s = collinear({0.0, 1.0, 2.0});
    CHECK(build_greedy_net(s, 0.5).centers.size() == 3);  // nobody covers anybody
    CHECK(build_greedy_net(s, 10.0).centers.size() == 1);  // radius beats the diameter
}

TEST_CASE("net validity on the unit-interval grid") {
    const MetricSpace s = MetricSpace::grid({100}, 1.0 / 99.0, MetricSpace::GridMetric::euclidean);
    const EpsNet net = build_greedy_net(s, 0.1);
    const int n = static_cast<int>(net.centers.size());
    CHECK(n >= 5);
    CHECK(n <= 11);
    // every point covered; centers pairwise farther than the radius
    for (int i = 0; i < s.size(); ++i) CHECK(s.dist(i, net.assignment[i]) <= 0.1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j)
            CHECK(s.dist(net.centers[i], net.centers[j]) > 0.1);
}

TEST_CASE("covering number basics") {
    const MetricSpace one = collinear({0.0});
    CHECK(covering_number(one, 0.3) == 1);

    const MetricSpace two = collinear({0.0, 1.0});
    CHECK(covering_number(two, 0.4) == 2);
    CHECK(covering_number(two, 1.0) == 1);  // radius >= diameter

    const MetricSpace grid = MetricSpace::grid({50}, 0.02, MetricSpace::GridMetric::euclidean);
    int prev = -1;
    for (double r : {0.02, 0.05, 0.1, 0.2, 0.5, 2.0}) {
        const int c = covering_number(grid, r);
        if (prev >= 0) CHECK(c <= prev);  // non-increasing in the radius
        prev = c;
    }
}

TEST_CASE("doubling dimension fits") {
    const numvec radii = {0.2, 0.1, 0.05, 0.025};

    const MetricSpace line =
        MetricSpace::grid({100}, 1.0 / 99.0, MetricSpace::GridMetric::euclidean);
    const DoublingFit f1 = fit_doubling_dimension(line, radii);
    CHECK(f1.dimension >= 0.8);
    CHECK(f1.dimension <= 1.2);

    const MetricSpace square =
        MetricSpace::grid({64, 64}, 1.0 / 63.0, MetricSpace::GridMetric::sup);
    const DoublingFit f2 = fit_doubling_dimension(square, radii);
    CHECK(f2.dimension >= 1.6);
    CHECK(f2.dimension <= 2.4);

    const MetricSpace point = collinear({0.0});
    const DoublingFit f0 = fit_doubling_dimension(point, radii);
    CHECK(f0.dimension == doctest::Approx(0.0));

    CHECK_THROWS_AS(fit_doubling_dimension(line, {0.1, 0.1, 0.1}), std::invalid_argument);
    CHECK_THROWS_AS(fit_doubling_dimension(line, {0.1, 0.2}), std::invalid_argument);
}

TEST_CASE("entropy bound formula") {
    CHECK(lipschitz_entropy_bound(0.5, 1.0, 1.0, 1.0) ==
          doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
    CHECK(lipschitz_entropy_bound(0.1, 2.0, 2.0, 1.0) ==
          doctest::Approx(400.0 * std::log(10.0)).epsilon(1e-12));
    CHECK(lipschitz_entropy_bound(0.999, 1.0, 1.0, 1.0) < 2e-3);  // -> 0 as radius -> 1
    CHECK_THROWS_AS(lipschitz_entropy_bound(1.0, 1.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_greedy_net(collinear({0.0, 1.0}), 0.0), std::invalid_argument);
}

TEST_CASE("random spaces keep net invariants") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const MetricSpace s = test::random_euclidean_space(40, seed);
        Rng rng(seed);
        const double r = rng.uniform(0.05, 1.0);
        const EpsNet net = build_greedy_net(s, r);
        for (int i = 0; i < s.size(); ++i) CHECK(s.dist(i, net.assignment[i]) <= r + 1e-12);
        for (std::size_t i = 0; i < net.centers.size(); ++i)
            for (std::size_t j = 0; j < i; ++j)
                CHECK(s.dist(net.centers[i], net.centers[j]) > r);
    }
}

TEST_CASE("grid json round trip") {
    const auto j = nlohmann::json::parse(
        R"({"grid": {"dims": [5, 5], "spacing": 0.25, "metric": "sup"}})");
    const MetricSpace s = MetricSpace::from_json(j);
    CHECK(s.size() == 25);
    CHECK(s.diameter() == doctest::Approx(1.0));
    const MetricSpace back = MetricSpace::from_json(s.to_json());
    CHECK(back.size() == 25);
    CHECK(back.dist(0, 24) == doctest::Approx(s.dist(0, 24)));
}

}  // TEST_SUITE
