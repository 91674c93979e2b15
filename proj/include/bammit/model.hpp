#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bammit/layout.hpp"

namespace bammit {

/// Hyperparameters of the hierarchical prior.
struct PriorConfig {
    double mu_mean = 100.0;     // mean of the Normal prior on the grand mean
    double mu_var = 10.0;       // variance of that prior
    double a0 = 0.1;            // Gamma shape for the residual precision
    double a1 = 0.1;            // Gamma rate for the residual precision
    double a2 = 1.0;            // half-t scale for the main-effect SDs
    double a3 = 1.0;            // half-t scale for the lambda SD
    double half_t_df = 3.0;     // degrees of freedom of the half-t priors

    void validate() const;
};

/// AR(1) structure on one designated time factor (additive effect and
/// interaction scores). Recursions start from a zero state at t=0.
struct ArParams {
    std::size_t time_factor = 0;
    double phi_b = 0.0;         // AR coefficient of the additive effect, in [-1,1]
    double phi_theta = 0.0;     // AR coefficient of the theta scores, in [-1,1]
    double alpha_b = 0.0;
    double alpha_theta = 0.0;
    double sigma_eta = 1.0;     // SD of additive innovations
    double sigma_omega = 1.0;   // SD of score innovations
};

/// One complete draw of all model parameters. `beta` is derived: it always
/// equals the column normalization of `theta` and must only be changed via
/// set_theta_column / recompute_beta.
struct ParameterState {
    double mu = 0.0;
    std::vector<std::vector<double>> main_effects;  // [v][i], length B_v
    std::vector<double> sigma_b;                    // [v]
    std::vector<double> lambda;                     // [q], nonincreasing, >= 0
    double sigma_lambda = 1.0;
    // theta[v][q] and beta[v][q] are columns of length B_v.
    std::vector<std::vector<std::vector<double>>> theta;
    std::vector<std::vector<std::vector<double>>> beta;
    double sigma2_y = 1.0;
    std::optional<ArParams> ar;

    /// Zero-initialized state with the shapes dictated by the layout.
    static ParameterState zeros(const FactorLayout& layout);

    /// Replace one theta column and refresh the cached beta column.
    void set_theta_column(std::size_t v, std::size_t q, std::vector<double> column);

    /// Re-derive every beta column from theta.
    void recompute_beta();

    bool matches(const FactorLayout& layout) const;
};

/// Observed cells: factor-level tuple -> response. Duplicate cells are
/// replicates; the records may cover only part of the grid.
struct Dataset {
    FactorLayout layout;
    struct Record {
        Cell cell;
        double y;
    };
    std::vector<Record> records;
    std::string response_name = "y";

    void validate() const;
};

/// Zero-sum unit-norm transform of an auxiliary column:
/// (theta - mean(theta)) / ||theta - mean(theta)||.
/// Throws DegenerateInput for a constant column.
std::vector<double> normalize_column(const std::vector<double>& theta_col);

/// Per-constraint maximum absolute violations for one parameter state.
struct ConstraintReport {
    double main_zero_sum = 0.0;     // (1) sum_i b_i = 0, per factor
    double beta_zero_sum = 0.0;     // (2) sum_i beta_iq = 0, per factor/column
    double beta_unit_norm = 0.0;    // (3) sum_i beta_iq^2 = 1, per factor/column
    double lambda_order = 0.0;      // (4) lambda nonincreasing and >= 0
    // Informational only: max |sum_i beta_iq beta_iq'| over q != q'.
    double beta_cross_column = 0.0;

    double max_violation() const;
    bool pass(double tol = 1e-8) const { return max_violation() <= tol; }
};

ConstraintReport validate_constraints(const ParameterState& state);

/// mu + sum_v b_v[cell_v] + sum_q lambda_q prod_v beta_vq[cell_v].
double linear_predictor(const ParameterState& state, const FactorLayout& layout,
                        const Cell& cell);

}  // namespace bammit
