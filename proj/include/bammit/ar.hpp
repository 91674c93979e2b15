#pragma once

#include <utility>
#include <vector>

#include "bammit/model.hpp"
#include "bammit/rng.hpp"

namespace bammit {

/// Raw AR(1) recursion x_t = alpha + phi * x_{t-1} + sigma * z_t for
/// t = 1..T, starting from x_0. Returns (x_1, ..., x_T).
std::vector<double> ar_trajectory(double alpha, double phi, double sigma, std::size_t t_len,
                                  double x0, Rng& rng);

struct ArTimeEffects {
    std::vector<double> b_time;                   // length T, centered to zero sum
    std::vector<std::vector<double>> beta_time;   // [q], each length T, zero-sum unit-norm
    std::vector<std::vector<double>> theta_time;  // [q], raw score trajectories
};

/// Simulate the time factor's additive effect and interaction scores under the
/// AR(1) structure: b recursion centered to zero sum; theta recursions mapped
/// to beta columns by the zero-sum/unit-norm normalization.
ArTimeEffects ar_simulate_time_effects(const ArParams& params, std::size_t t_len,
                                       std::size_t q, Rng& rng);

/// Log density of an AR(1) trajectory (x_1..x_T) given x_0 = 0:
/// sum_t log N(x_t; alpha + phi * x_{t-1}, sigma^2).
double ar_log_density(const std::vector<double>& x, double alpha, double phi, double sigma);

/// Reflect a proposal into [-1, 1] (used for phi random walks).
double reflect_into_unit_interval(double x);

}  // namespace bammit
