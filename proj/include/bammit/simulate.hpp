#pragma once

#include <string>

#include "bammit/model.hpp"
#include "bammit/rng.hpp"

namespace bammit {

/// Ground-truth configuration for synthetic data generation.
struct SimulationConfig {
    FactorLayout layout;
    std::size_t q_sim = 1;              // true number of multiplicative components
    std::vector<double> lambda_true;    // length q_sim, sorted nonincreasing before use
    double mu_true = 100.0;
    double sigma_true = 1.0;            // residual SD
    double sigma_b_true = 1.0;          // SD of main-effect draws before centering
    std::uint64_t seed = 1;

    void validate() const;
};

/// The four stock scenarios:
///   i   V=2, dims (12,10),      N=120
///   ii  V=3, dims (12,10,4),    N=480
///   iii V=4, dims (12,10,4,2),  N=960
///   iv  V=3, dims (100,10,5),   N=5000
/// with mu=100, sigma=1, q_sim=1 and lambda=(10) unless overridden.
SimulationConfig scenario_preset(const std::string& id);

/// lambda values used with q_sim = 1, 2, 3: (10), (10,8), (12,10,8).
std::vector<double> lambda_grid(std::size_t q_sim);

/// Draw a ground-truth parameter state: main effects Normal(0, sigma_b^2)
/// centered to exact zero sum, theta standard Normal with beta derived by
/// normalize_column, lambda from the config sorted descending.
ParameterState simulate_parameters(const SimulationConfig& config, Rng& rng);

/// One record per grid cell: y = linear_predictor + Normal(0, sigma^2).
Dataset simulate_dataset(const ParameterState& state, const FactorLayout& layout,
                         double sigma, Rng& rng);

}  // namespace bammit
