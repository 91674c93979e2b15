#include "bammit/ammi.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "bammit/errors.hpp"

namespace bammit {

AmmiFit fit_ammi_classical(const std::vector<std::vector<double>>& table, std::size_t q) {
    const std::size_t b1 = table.size();
    if (b1 < 2) throw ArgumentError("table needs at least 2 rows");
    const std::size_t b2 = table[0].size();
    if (b2 < 2) throw ArgumentError("table needs at least 2 columns");
    for (const auto& row : table) {
        if (row.size() != b2) throw ArgumentError("table rows have unequal lengths");
        for (double x : row)
            if (!std::isfinite(x)) throw IncompleteTable("table contains non-finite cells");
    }
    if (q > std::min(b1, b2) - 1)
        throw ArgumentError("Q = " + std::to_string(q) + " exceeds min(B1-1, B2-1) = " +
                            std::to_string(std::min(b1, b2) - 1));

    Eigen::MatrixXd t(b1, b2);
    for (std::size_t i = 0; i < b1; ++i)
        for (std::size_t j = 0; j < b2; ++j) t(i, j) = table[i][j];

    AmmiFit fit;
    fit.grand_mean = t.mean();
    Eigen::VectorXd row_means = t.rowwise().mean();
    Eigen::VectorXd col_means = t.colwise().mean();
    fit.row_effects.resize(b1);
    fit.col_effects.resize(b2);
    for (std::size_t i = 0; i < b1; ++i) fit.row_effects[i] = row_means(i) - fit.grand_mean;
    for (std::size_t j = 0; j < b2; ++j) fit.col_effects[j] = col_means(j) - fit.grand_mean;

    Eigen::MatrixXd resid = t;
    resid.colwise() -= row_means;
    resid.rowwise() -= col_means.transpose();
    resid.array() += fit.grand_mean;

    fit.residual_table.assign(b1, std::vector<double>(b2));
    for (std::size_t i = 0; i < b1; ++i)
        for (std::size_t j = 0; j < b2; ++j) fit.residual_table[i][j] = resid(i, j);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(resid, Eigen::ComputeThinU | Eigen::ComputeThinV);
    for (std::size_t k = 0; k < q; ++k) {
        fit.lambda.push_back(svd.singularValues()(k));
        std::vector<double> u(b1), v(b2);
        for (std::size_t i = 0; i < b1; ++i) u[i] = svd.matrixU()(i, k);
        for (std::size_t j = 0; j < b2; ++j) v[j] = svd.matrixV()(j, k);
        // Deterministic sign: largest-magnitude row score positive.
        std::size_t imax = 0;
        for (std::size_t i = 1; i < b1; ++i)
            if (std::fabs(u[i]) > std::fabs(u[imax])) imax = i;
        if (u[imax] < 0.0) {
            for (double& x : u) x = -x;
            for (double& x : v) x = -x;
        }
        fit.row_scores.push_back(std::move(u));
        fit.col_scores.push_back(std::move(v));
    }
    return fit;
}

double predict_ammi(const AmmiFit& fit, std::size_t i, std::size_t j) {
    if (i >= fit.row_effects.size() || j >= fit.col_effects.size())
        throw IndexError("cell index out of range");
    double y = fit.grand_mean + fit.row_effects[i] + fit.col_effects[j];
    for (std::size_t k = 0; k < fit.lambda.size(); ++k)
        y += fit.lambda[k] * fit.row_scores[k][i] * fit.col_scores[k][j];
    return y;
}

}  // namespace bammit
