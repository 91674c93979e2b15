#include "bammit/simulate.hpp"

#include <algorithm>
#include <functional>

#include "bammit/errors.hpp"

namespace bammit {

void SimulationConfig::validate() const {
    layout.validate();
    if (q_sim < 1) throw ArgumentError("q_sim must be >= 1");
    if (lambda_true.size() != q_sim)
        throw ArgumentError("lambda_true must have length q_sim");
    for (double l : lambda_true)
        if (l <= 0.0) throw ArgumentError("lambda_true entries must be positive");
    if (sigma_true < 0.0) throw ArgumentError("sigma_true must be nonnegative");
    if (sigma_b_true <= 0.0) throw ArgumentError("sigma_b_true must be positive");
}

std::vector<double> lambda_grid(std::size_t q_sim) {
    switch (q_sim) {
        case 1: return {10.0};
        case 2: return {10.0, 8.0};
        case 3: return {12.0, 10.0, 8.0};
        default: throw ArgumentError("q_sim must be 1, 2 or 3 for the stock lambda grid");
    }
}

SimulationConfig scenario_preset(const std::string& id) {
    SimulationConfig config;
    if (id == "i") {
        config.layout = FactorLayout::make({12, 10}, 1);
    } else if (id == "ii") {
        config.layout = FactorLayout::make({12, 10, 4}, 1);
    } else if (id == "iii") {
        config.layout = FactorLayout::make({12, 10, 4, 2}, 1);
    } else if (id == "iv") {
        config.layout = FactorLayout::make({100, 10, 5}, 1);
    } else {
        throw ArgumentError("unknown scenario '" + id + "' (expected i, ii, iii or iv)");
    }
    config.q_sim = 1;
    config.lambda_true = lambda_grid(1);
    config.mu_true = 100.0;
    config.sigma_true = 1.0;
    return config;
}

ParameterState simulate_parameters(const SimulationConfig& config, Rng& rng) {
    config.validate();
    FactorLayout layout = config.layout;
    layout.q = config.q_sim;

    ParameterState state = ParameterState::zeros(layout);
    state.mu = config.mu_true;
    state.sigma2_y = config.sigma_true * config.sigma_true;
    state.lambda = config.lambda_true;
    std::sort(state.lambda.begin(), state.lambda.end(), std::greater<double>());

    for (std::size_t v = 0; v < layout.n_factors(); ++v) {
        auto& b = state.main_effects[v];
        double mean = 0.0;
        for (double& x : b) {
            x = rng.normal(0.0, config.sigma_b_true);
            mean += x;
        }
        mean /= static_cast<double>(b.size());
        for (double& x : b) x -= mean;  // constraint (1), exact

        for (std::size_t q = 0; q < layout.q; ++q) {
            std::vector<double> col(layout.dims[v]);
            // A constant draw has probability zero; retry once regardless.
            for (int attempt = 0; attempt < 2; ++attempt) {
                for (double& t : col) t = rng.normal();
                try {
                    state.set_theta_column(v, q, col);
                    break;
                } catch (const DegenerateInput&) {
                    if (attempt == 1) throw;
                }
            }
        }
    }
    return state;
}

Dataset simulate_dataset(const ParameterState& state, const FactorLayout& layout,
                         double sigma, Rng& rng) {
    if (!state.matches(layout)) throw LayoutMismatch("state dimensions do not match layout");
    Dataset data;
    data.layout = layout;
    const std::size_t n = layout.grid_size();
    data.records.reserve(n);
    for (std::size_t idx = 0; idx < n; ++idx) {
        Cell cell = unflatten_index(layout, idx);
        const double mean = linear_predictor(state, layout, cell);
        data.records.push_back({std::move(cell), sigma > 0.0 ? rng.normal(mean, sigma) : mean});
    }
    return data;
}

}  // namespace bammit
