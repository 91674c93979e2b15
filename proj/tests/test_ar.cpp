#include <cmath>
#include <vector>

#include "bammit/ar.hpp"
#include "bammit/errors.hpp"
#include "doctest.h"

using namespace bammit;

TEST_CASE("deterministic AR recursion with zero innovation") {
    Rng rng(1);
    const auto x = ar_trajectory(0.0, 0.5, 0.0, 5, 1.0, rng);
    REQUIRE(x.size() == 5);
    CHECK(x[0] == doctest::Approx(0.5));
    CHECK(x[1] == doctest::Approx(0.25));
    CHECK(x[2] == doctest::Approx(0.125));
    CHECK(x[3] == doctest::Approx(0.0625));
    CHECK(x[4] == doctest::Approx(0.03125));
    // Nonzero drift.
    Rng rng2(1);
    const auto y = ar_trajectory(1.0, 0.0, 0.0, 3, 0.0, rng2);
    CHECK(y == std::vector<double>{1.0, 1.0, 1.0});
}

TEST_CASE("white-noise limit still yields normalized score columns") {
    ArParams params;
    params.phi_b = 0.0;
    params.phi_theta = 0.0;
    params.alpha_b = 0.0;
    params.alpha_theta = 0.0;
    params.sigma_eta = 1.0;
    params.sigma_omega = 1.0;
    Rng rng(7);
    const ArTimeEffects eff = ar_simulate_time_effects(params, 8, 2, rng);
    REQUIRE(eff.b_time.size() == 8);
    double bsum = 0.0;
    for (double b : eff.b_time) bsum += b;
    CHECK(std::abs(bsum) <= 1e-12);
    REQUIRE(eff.beta_time.size() == 2);
    for (const auto& col : eff.beta_time) {
        double sum = 0.0, sum2 = 0.0;
        for (double b : col) {
            sum += b;
            sum2 += b * b;
        }
        CHECK(std::abs(sum) <= 1e-10);
        CHECK(std::abs(sum2 - 1.0) <= 1e-12);
    }
}

TEST_CASE("score columns are the normalization of the raw trajectories") {
    ArParams params;
    params.phi_theta = 0.6;
    params.alpha_theta = 0.3;
    params.sigma_omega = 0.8;
    Rng rng(42);
    const ArTimeEffects eff = ar_simulate_time_effects(params, 10, 1, rng);
    REQUIRE(eff.theta_time.size() == 1);
    const auto expect = normalize_column(eff.theta_time[0]);
    for (std::size_t t = 0; t < 10; ++t)
        CHECK(eff.beta_time[0][t] == doctest::Approx(expect[t]).epsilon(1e-14));
}

TEST_CASE("AR log density equals the sum of Gaussian transition terms") {
    const std::vector<double> x = {0.4, -0.2, 0.9};
    const double alpha = 0.1, phi = 0.5, sigma = 0.7;
    double expect = 0.0;
    double prev = 0.0;  // trajectory starts from a zero state
    for (double xt : x) {
        const double mean = alpha + phi * prev;
        const double z = (xt - mean) / sigma;
        expect += -0.5 * std::log(2.0 * M_PI) - std::log(sigma) - 0.5 * z * z;
        prev = xt;
    }
    CHECK(ar_log_density(x, alpha, phi, sigma) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("reflection keeps proposals inside the unit interval") {
    CHECK(reflect_into_unit_interval(0.3) == doctest::Approx(0.3));
    CHECK(reflect_into_unit_interval(1.2) == doctest::Approx(0.8));
    CHECK(reflect_into_unit_interval(-1.5) == doctest::Approx(-0.5));
    CHECK(reflect_into_unit_interval(2.7) == doctest::Approx(-0.7));
    CHECK(reflect_into_unit_interval(5.0) == doctest::Approx(1.0));
    for (double x = -7.0; x <= 7.0; x += 0.137) {
        const double r = reflect_into_unit_interval(x);
        CHECK(r >= -1.0);
        CHECK(r <= 1.0);
    }
}
