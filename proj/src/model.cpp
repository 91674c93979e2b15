#include "bammit/model.hpp"

#include <algorithm>
#include <cmath>

#include "bammit/errors.hpp"

namespace bammit {

void PriorConfig::validate() const {
    if (mu_var <= 0.0) throw ArgumentError("mu_var must be positive");
    if (a0 <= 0.0 || a1 <= 0.0 || a2 <= 0.0 || a3 <= 0.0)
        throw ArgumentError("a0..a3 must be positive");
    if (half_t_df <= 0.0) throw ArgumentError("half_t_df must be positive");
}

ParameterState ParameterState::zeros(const FactorLayout& layout) {
    ParameterState s;
    const std::size_t V = layout.n_factors();
    s.main_effects.resize(V);
    s.sigma_b.assign(V, 1.0);
    s.lambda.assign(layout.q, 0.0);
    s.theta.resize(V);
    s.beta.resize(V);
    for (std::size_t v = 0; v < V; ++v) {
        s.main_effects[v].assign(layout.dims[v], 0.0);
        s.theta[v].assign(layout.q, std::vector<double>(layout.dims[v], 0.0));
        s.beta[v].assign(layout.q, std::vector<double>(layout.dims[v], 0.0));
    }
    return s;
}

void ParameterState::set_theta_column(std::size_t v, std::size_t q,
                                      std::vector<double> column) {
    theta[v][q] = std::move(column);
    beta[v][q] = normalize_column(theta[v][q]);
}

void ParameterState::recompute_beta() {
    for (std::size_t v = 0; v < theta.size(); ++v)
        for (std::size_t q = 0; q < theta[v].size(); ++q)
            beta[v][q] = normalize_column(theta[v][q]);
}

bool ParameterState::matches(const FactorLayout& layout) const {
    const std::size_t V = layout.n_factors();
    if (main_effects.size() != V || theta.size() != V || beta.size() != V ||
        sigma_b.size() != V || lambda.size() != layout.q)
        return false;
    for (std::size_t v = 0; v < V; ++v) {
        if (main_effects[v].size() != layout.dims[v]) return false;
        if (theta[v].size() != layout.q || beta[v].size() != layout.q) return false;
        for (std::size_t q = 0; q < layout.q; ++q)
            if (theta[v][q].size() != layout.dims[v] || beta[v][q].size() != layout.dims[v])
                return false;
    }
    return true;
}

void Dataset::validate() const {
    layout.validate();
    for (const auto& rec : records) flatten_index(layout, rec.cell);  // throws on bad cell
}

std::vector<double> normalize_column(const std::vector<double>& theta_col) {
    if (theta_col.size() < 2) throw ArgumentError("column must have length >= 2");
    double mean = 0.0;
    for (double t : theta_col) mean += t;
    mean /= static_cast<double>(theta_col.size());
    std::vector<double> out(theta_col.size());
    double ss = 0.0;
    for (std::size_t i = 0; i < theta_col.size(); ++i) {
        out[i] = theta_col[i] - mean;
        ss += out[i] * out[i];
    }
    if (ss == 0.0) throw DegenerateInput("constant column has zero deviation");
    const double inv_norm = 1.0 / std::sqrt(ss);
    for (double& x : out) x *= inv_norm;
    return out;
}

double ConstraintReport::max_violation() const {
    return std::max({main_zero_sum, beta_zero_sum, beta_unit_norm, lambda_order});
}

ConstraintReport validate_constraints(const ParameterState& state) {
    ConstraintReport report;
    for (const auto& b : state.main_effects) {
        double sum = 0.0;
        for (double x : b) sum += x;
        report.main_zero_sum = std::max(report.main_zero_sum, std::fabs(sum));
    }
    for (const auto& cols : state.beta) {
        for (const auto& col : cols) {
            double sum = 0.0, ss = 0.0;
            for (double x : col) {
                sum += x;
                ss += x * x;
            }
            report.beta_zero_sum = std::max(report.beta_zero_sum, std::fabs(sum));
            report.beta_unit_norm = std::max(report.beta_unit_norm, std::fabs(ss - 1.0));
        }
        for (std::size_t q = 0; q < cols.size(); ++q) {
            for (std::size_t p = q + 1; p < cols.size(); ++p) {
                double dot = 0.0;
                for (std::size_t i = 0; i < cols[q].size(); ++i) dot += cols[q][i] * cols[p][i];
                report.beta_cross_column = std::max(report.beta_cross_column, std::fabs(dot));
            }
        }
    }
    for (std::size_t q = 0; q < state.lambda.size(); ++q) {
        if (state.lambda[q] < 0.0)
            report.lambda_order = std::max(report.lambda_order, -state.lambda[q]);
        if (q + 1 < state.lambda.size() && state.lambda[q + 1] > state.lambda[q])
            report.lambda_order =
                std::max(report.lambda_order, state.lambda[q + 1] - state.lambda[q]);
    }
    return report;
}

double linear_predictor(const ParameterState& state, const FactorLayout& layout,
                        const Cell& cell) {
    if (!state.matches(layout)) throw LayoutMismatch("state dimensions do not match layout");
    flatten_index(layout, cell);  // validates the cell
    double value = state.mu;
    for (std::size_t v = 0; v < cell.size(); ++v) value += state.main_effects[v][cell[v]];
    for (std::size_t q = 0; q < state.lambda.size(); ++q) {
        double prod = state.lambda[q];
        for (std::size_t v = 0; v < cell.size(); ++v) prod *= state.beta[v][q][cell[v]];
        value += prod;
    }
    return value;
}

}  // namespace bammit
