#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>

#include "ensopt/ga.hpp"
#include "ensopt/grid.hpp"
#include "ensopt/synthetic.hpp"

#include "support/test_util.hpp"

using namespace ensopt;
using testutil::matrix_from_rows;

namespace {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) result = result * (n - k + i) / i;
    return result;
}

} // namespace

TEST_CASE("grid spec rejects non-reciprocal steps") {
    CHECK_THROWS_AS(GridSpec::from_step(0.3, 2), config_error);
    CHECK_THROWS_AS(GridSpec::from_step(0.0, 2), config_error);
    CHECK(GridSpec::from_step(0.05, 3).g == 20);
    CHECK(GridSpec::from_step(1.0, 3).g == 1);
}

TEST_CASE("simplex enumeration matches the worked examples") {
    SECTION("M=2, step 0.5") {
        const auto points = enumerate_simplex(GridSpec{2, 2});
        REQUIRE(points.size() == 3);
        CHECK(points[0].values() == std::vector<double>{0.0, 1.0});
        CHECK(points[1].values() == std::vector<double>{0.5, 0.5});
        CHECK(points[2].values() == std::vector<double>{1.0, 0.0});
    }
    SECTION("M=3, step 0.5 gives the 6 compositions of 2") {
        const auto points = enumerate_simplex(GridSpec{2, 3});
        CHECK(points.size() == 6);
    }
    SECTION("M=1 is the single point (1.0)") {
        const auto points = enumerate_simplex(GridSpec{4, 1});
        REQUIRE(points.size() == 1);
        CHECK(points[0].values() == std::vector<double>{1.0});
    }
}

TEST_CASE("enumeration count matches the closed form for g<=20, M<=5") {
    for (std::uint64_t g = 1; g <= 20; ++g) {
        for (std::size_t m = 1; m <= 5; ++m) {
            const GridSpec spec{g, m};
            std::uint64_t seen = 0;
            enumerate_simplex(spec, [&](const std::vector<double>&) { ++seen; });
            const std::uint64_t expected = binomial(g + m - 1, m - 1);
            CHECK(seen == expected);
            CHECK(spec.point_count() == expected);
        }
    }
}

TEST_CASE("enumeration refuses to exceed the cap, naming the count") {
    GridSpec spec{100, 5};
    spec.cap = 1000;
    CHECK_THROWS_WITH(enumerate_simplex(spec, [](const std::vector<double>&) {}),
                      Catch::Matchers::ContainsSubstring(std::to_string(spec.point_count())));
}

TEST_CASE("grid search fundamentals") {
    SECTION("a pool with a perfect model reaches fitness 1") {
        auto [pool, gold] = synth_generate(81, 60, 3, 2, {1.0, 0.3});
        const auto result =
            grid_search(pool, gold, FitnessMetric::weighted_f1, GridSpec{10, 2});
        CHECK(result.dev_fitness == 1.0);
        CHECK(result.method == "grid");
    }
    SECTION("M=1 reduces to the single model") {
        auto [pool, gold] = synth_generate(82, 60, 3, 1, {0.7});
        const auto result =
            grid_search(pool, gold, FitnessMetric::weighted_f1, GridSpec{10, 1});
        CHECK(result.weights == std::vector<double>{1.0});
        CHECK(result.dev_fitness == result.single_fitness[0]);
    }
    SECTION("ties break toward the lexicographically smallest weights") {
        // Two identical models: every grid point scores the same, so the
        // first enumerated point (0,1) must win.
        const auto rows = std::vector<std::vector<double>>{{0.9, 0.1}, {0.2, 0.8}};
        const ModelPool pool({matrix_from_rows("a", "dev", {"x", "y"}, rows),
                              matrix_from_rows("b", "dev", {"x", "y"}, rows)});
        const GoldLabels gold({"x", "y"}, {0, 1}, 2);
        const auto result =
            grid_search(pool, gold, FitnessMetric::weighted_f1, GridSpec{4, 2});
        CHECK(result.weights == std::vector<double>{0.0, 1.0});
    }
}

TEST_CASE("grid fitness dominates singles always and uniform when M | g") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto [pool, gold] = synth_generate(200 + seed, 120, 4, 3, {0.75, 0.6, 0.45});
        // g=12 is divisible by M=3, so the uniform point lies on the grid.
        const auto result = grid_search(pool, gold, FitnessMetric::weighted_f1, GridSpec{12, 3});
        for (double single : result.single_fitness) CHECK(result.dev_fitness >= single);
        CHECK(result.dev_fitness >= result.uniform_fitness);
    }
}

TEST_CASE("grid search optimum is permutation invariant") {
    auto [pool, gold] = synth_generate(91, 100, 4, 3, {0.8, 0.6, 0.5});
    const auto base = grid_search(pool, gold, FitnessMetric::weighted_f1, GridSpec{10, 3});
    const ModelPool permuted({pool.model(2), pool.model(0), pool.model(1)});
    const auto again = grid_search(permuted, gold, FitnessMetric::weighted_f1, GridSpec{10, 3});
    CHECK(base.dev_fitness == again.dev_fitness);
}

TEST_CASE("GA lands within 0.01 of the grid oracle on the M=3 instance") {
    auto [pool, gold] = synth_generate(97, 200, 4, 3, {0.8, 0.65, 0.5});
    const auto grid =
        grid_search(pool, gold, FitnessMetric::weighted_f1, GridSpec::from_step(0.05, 3));
    GAConfig config;
    config.seed = 19;
    const auto ga = evolve(pool, gold, config);
    CHECK(std::abs(grid.dev_fitness - ga.dev_fitness) <= 0.01);
}
