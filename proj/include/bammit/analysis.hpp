#pragma once

#include <string>
#include <vector>

#include "bammit/rng.hpp"
#include "bammit/sampler.hpp"

namespace bammit {

struct SummaryStats {
    double mean = 0.0;
    double sd = 0.0;
    double q05 = 0.0;
    double q50 = 0.0;
    double q95 = 0.0;
};

/// Summary of the posterior over one scalar sample. Percentiles use linear
/// interpolation between order statistics; 90% interval = (5th, 95th).
SummaryStats summarize_scalar(std::vector<double> values);

/// Percentile by linear interpolation, p in [0, 1]. `sorted` must be sorted.
double quantile_sorted(const std::vector<double>& sorted, double p);

struct NamedSummary {
    std::string name;
    SummaryStats stats;
};

/// Pooled-across-chains summaries for a named parameter group:
/// "mu", "sigma", "lambda", "b" (all factors), "b[v]", "beta[v]".
std::vector<NamedSummary> summarize(const PosteriorDraws& draws, const std::string& selector);

struct PredictionSummary {
    Cell cell;
    double mean = 0.0;
    double median = 0.0;
    double sd = 0.0;
    double q05 = 0.0;
    double q95 = 0.0;
};

/// Posterior (predictive) summaries of the linear predictor at each cell.
/// include_noise adds Normal(0, sigma2) noise per draw; rng is only touched
/// in that case.
std::vector<PredictionSummary> predict_cells(const PosteriorDraws& draws,
                                             const std::vector<Cell>& cells,
                                             bool include_noise, Rng& rng);

double rmse(const std::vector<double>& y, const std::vector<double>& yhat);
double r_squared(const std::vector<double>& y, const std::vector<double>& yhat);

struct InteractionCellSummary {
    std::size_t i = 0;  // level of the first factor of the pair
    std::size_t j = 0;  // level of the second factor of the pair
    SummaryStats with_main;    // b^{(v1)}_i + multiplicative term at the cell
    SummaryStats interaction;  // multiplicative term only
};

/// Per-(i, j) posterior summaries of the genotype-plus-interaction effect for
/// one factor pair, with all remaining factors fixed. `fixed` holds level
/// indices for every factor; entries at v1 and v2 are ignored.
std::vector<InteractionCellSummary> interaction_effect(const PosteriorDraws& draws,
                                                       std::size_t v1, std::size_t v2,
                                                       const Cell& fixed);

/// Posterior mean of the multiplicative term over the full grid, in
/// flatten_index order (used for truth-vs-estimate recovery checks).
std::vector<double> posterior_mean_interaction(const PosteriorDraws& draws);

}  // namespace bammit
