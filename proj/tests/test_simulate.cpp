#include <cmath>
#include <vector>

#include "bammit/errors.hpp"
#include "bammit/simulate.hpp"
#include "doctest.h"

using namespace bammit;

TEST_CASE("scenario presets match the published designs") {
    const auto i = scenario_preset("i");
    CHECK(i.layout.dims == std::vector<std::size_t>{12, 10});
    CHECK(i.layout.grid_size() == 120);
    const auto ii = scenario_preset("ii");
    CHECK(ii.layout.dims == std::vector<std::size_t>{12, 10, 4});
    CHECK(ii.layout.grid_size() == 480);
    const auto iii = scenario_preset("iii");
    CHECK(iii.layout.dims == std::vector<std::size_t>{12, 10, 4, 2});
    CHECK(iii.layout.grid_size() == 960);
    const auto iv = scenario_preset("iv");
    CHECK(iv.layout.dims == std::vector<std::size_t>{100, 10, 5});
    CHECK(iv.layout.grid_size() == 5000);
    for (const auto* c : {&i, &ii, &iii, &iv}) {
        CHECK(c->mu_true == 100.0);
        CHECK(c->sigma_true == 1.0);
    }
    CHECK_THROWS_AS(scenario_preset("v"), ArgumentError);
}

TEST_CASE("lambda grids for one to three components") {
    CHECK(lambda_grid(1) == std::vector<double>{10});
    CHECK(lambda_grid(2) == std::vector<double>{10, 8});
    CHECK(lambda_grid(3) == std::vector<double>{12, 10, 8});
    CHECK_THROWS_AS(lambda_grid(4), ArgumentError);
}

TEST_CASE("simulated parameters satisfy every constraint") {
    SimulationConfig config = scenario_preset("ii");
    config.q_sim = 2;
    config.lambda_true = lambda_grid(2);
    Rng rng(21);
    const ParameterState state = simulate_parameters(config, rng);
    CHECK(validate_constraints(state).pass(1e-10));
    REQUIRE(state.beta.size() == 3);
    REQUIRE(state.beta[0].size() == 2);
    CHECK(state.beta[0][0].size() == 12);
    CHECK(state.lambda == std::vector<double>{10, 8});
    // Main effects centered to exact zero sum.
    for (const auto& b : state.main_effects) {
        double sum = 0.0;
        for (double x : b) sum += x;
        CHECK(std::abs(sum) <= 1e-12);
    }
}

TEST_CASE("fixed seed reproduces a bit-identical state") {
    SimulationConfig config = scenario_preset("i");
    Rng r1(42), r2(42);
    const ParameterState a = simulate_parameters(config, r1);
    const ParameterState b = simulate_parameters(config, r2);
    CHECK(a.mu == b.mu);
    CHECK(a.main_effects == b.main_effects);
    CHECK(a.theta == b.theta);
    CHECK(a.beta == b.beta);
    CHECK(a.lambda == b.lambda);
}

TEST_CASE("noiseless datasets reproduce the predictor exactly") {
    SimulationConfig config = scenario_preset("i");
    Rng rng(3);
    const ParameterState state = simulate_parameters(config, rng);
    FactorLayout layout = config.layout;
    const Dataset data = simulate_dataset(state, layout, 0.0, rng);
    REQUIRE(data.records.size() == 120);
    for (const auto& rec : data.records)
        CHECK(rec.y == linear_predictor(state, layout, rec.cell));
}

TEST_CASE("residual noise has the configured spread at scale") {
    SimulationConfig config = scenario_preset("iv");
    Rng rng(8);
    const ParameterState state = simulate_parameters(config, rng);
    const Dataset data = simulate_dataset(state, config.layout, 1.0, rng);
    REQUIRE(data.records.size() == 5000);
    double ss = 0.0, sum = 0.0;
    for (const auto& rec : data.records) {
        const double r = rec.y - linear_predictor(state, config.layout, rec.cell);
        sum += r;
        ss += r * r;
    }
    const double mean = sum / 5000.0;
    const double sd = std::sqrt(ss / 5000.0 - mean * mean);
    CHECK(sd >= 0.95);
    CHECK(sd <= 1.05);
}

TEST_CASE("paired train/test sets differ only in noise") {
    SimulationConfig config = scenario_preset("ii");
    Rng rng(30);
    const ParameterState state = simulate_parameters(config, rng);
    Rng r_train = rng.substream(1), r_test = rng.substream(2);
    const Dataset train = simulate_dataset(state, config.layout, 1.0, r_train);
    const Dataset test = simulate_dataset(state, config.layout, 1.0, r_test);
    REQUIRE(train.records.size() == test.records.size());
    double sum = 0.0, ss = 0.0;
    const std::size_t n = train.records.size();
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(train.records[i].cell == test.records[i].cell);
        const double d = train.records[i].y - test.records[i].y;
        sum += d;
        ss += d * d;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(ss / n - mean * mean);
    CHECK(std::abs(mean) < 0.15);
    CHECK(sd == doctest::Approx(std::sqrt(2.0)).epsilon(0.10));
}

TEST_CASE("simulation config validation") {
    SimulationConfig config = scenario_preset("i");
    config.lambda_true = {10, 8};  // wrong length for q_sim = 1
    CHECK_THROWS_AS(config.validate(), ArgumentError);
    config = scenario_preset("i");
    config.sigma_true = -1.0;
    CHECK_THROWS_AS(config.validate(), ArgumentError);
}
