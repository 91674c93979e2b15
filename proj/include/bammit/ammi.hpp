#pragma once

#include <cstddef>
#include <vector>

namespace bammit {

/// Frequentist two-factor AMMI fit: OLS main effects plus a truncated SVD of
/// the double-centered residual table.
struct AmmiFit {
    double grand_mean = 0.0;
    std::vector<double> row_effects;                 // length B1, zero-sum
    std::vector<double> col_effects;                 // length B2, zero-sum
    std::vector<double> lambda;                      // Q singular values, nonincreasing
    std::vector<std::vector<double>> row_scores;     // [q], each length B1
    std::vector<std::vector<double>> col_scores;     // [q], each length B2
    std::vector<std::vector<double>> residual_table; // B1 x B2, double-centered
};

/// Fit from a complete B1 x B2 table of cell means. Q <= min(B1-1, B2-1).
/// Each component's row-score column is sign-flipped so its largest-magnitude
/// entry is positive.
AmmiFit fit_ammi_classical(const std::vector<std::vector<double>>& table, std::size_t q);

/// grand_mean + row_effects[i] + col_effects[j] + sum_q lambda_q r_iq c_jq.
double predict_ammi(const AmmiFit& fit, std::size_t i, std::size_t j);

}  // namespace bammit
